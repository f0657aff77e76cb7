import json

import numpy as np
import pytest

from lorentz_principal import io as IO
from lorentz_principal import quadrics as Q
from lorentz_principal.bde import GridSpec
from lorentz_principal.cli import run_cli
from lorentz_principal.errors import IoError, SceneError
from lorentz_principal.focal import focal_numeric

ELLIPSOID = {"surface": {"kind": "ellipsoid", "a": 2.0, "b": 1.5, "c": 2.2}}


def _write_scene(tmp_path, data, name="scene.json"):
    p = tmp_path / name
    p.write_text(json.dumps(data))
    return p


def _run(tmp_path, command, data, out="out"):
    scene = _write_scene(tmp_path, data)
    code = run_cli([command, "--scene", str(scene), "--out", str(tmp_path / out)])
    return code, tmp_path / out


class TestSceneValidation:
    def test_minimal_scene(self):
        sc = IO.validate_scene(ELLIPSOID)
        assert sc.surface["kind"] == "ellipsoid"

    @pytest.mark.parametrize("bad", [
        {**ELLIPSOID, "unknown": 1},
        {"surface": {"kind": "ellipsoid", "a": 2.0, "b": 1.5}},
        {"surface": {"kind": "ellipsoid", "a": -2.0, "b": 1.5, "c": 2.2}},
        {**ELLIPSOID, "tolerances": {"umbilic": 0}},
        {**ELLIPSOID, "analyses": ["not-an-analysis"]},
        {"surface": {"kind": "torus"}},
        [1, 2, 3],
    ])
    def test_rejected(self, bad):
        with pytest.raises(SceneError):
            IO.validate_scene(bad)

    def test_load_errors(self, tmp_path):
        with pytest.raises(SceneError):
            IO.load_scene(tmp_path / "missing.json")
        p = tmp_path / "broken.json"
        p.write_text("{not json")
        with pytest.raises(SceneError):
            IO.load_scene(p)

    def test_shipped_scenes_validate(self):
        names = IO.list_default_scenes()
        assert "ellipsoid.json" in names and "focal.json" in names
        for name in names:
            IO.load_scene(IO.resolve_scene_path(name))


class TestCurveExport:
    def test_round_trip_is_bit_exact(self, tmp_path):
        rng = np.random.default_rng(0)
        curves = [IO.CurveExport("U1", "F1", "Closed", True, rng.normal(size=(17, 5))),
                  IO.CurveExport.from_polyline(rng.normal(size=(3, 2)), rng.normal(size=(3, 3)) * 1e-300,
                                               "cap+z", "F2", "DomainExit", False)]
        path = IO.export_curves(tmp_path / "c.csv", curves)
        back = IO.read_curves(path)
        assert len(back) == 2
        for a, b in zip(curves, back):
            assert (a.chart, a.foliation, a.termination, a.closed) == (b.chart, b.foliation,
                                                                       b.termination, b.closed)
            assert np.array_equal(a.rows, b.rows)

    def test_rejects_short_or_non_finite(self):
        with pytest.raises(IoError):
            IO.CurveExport("U1", "F1", "Closed", False, np.zeros((1, 5)))
        rows = np.zeros((3, 5))
        rows[1, 2] = np.nan
        with pytest.raises(IoError):
            IO.CurveExport("U1", "F1", "Closed", False, rows)

    def test_unwritable_path(self, tmp_path):
        blocker = tmp_path / "file"
        blocker.write_text("")
        with pytest.raises(IoError):
            IO.export_curves(blocker / "sub" / "c.csv", [])


def test_mesh_export_has_validity_column(tmp_path):
    sheet = focal_numeric(Q.global_principal_chart(2.0, 1.5, 2.2), "F1", GridSpec(8, 10))
    cols, rows = IO.read_mesh(IO.export_mesh(tmp_path / "m.csv", sheet))
    assert cols == ["i", "j", "u", "v", "x", "y", "z", "valid"]
    assert rows.shape == (80, 8)
    assert np.array_equal(rows[:, 7].astype(bool), sheet.valid.ravel())
    assert np.all(np.isnan(rows[rows[:, 7] == 0, 4:7]))


def test_json_null_for_non_finite(tmp_path):
    p = IO.write_json(tmp_path / "x.json", {"b": np.float64(np.inf), "a": np.arange(2)})
    assert json.loads(p.read_text()) == {"a": [0, 1], "b": None}


def test_umbilics_command(tmp_path):
    code, out = _run(tmp_path, "umbilics", ELLIPSOID)
    assert code == 0
    data = json.loads(next(out.glob("*umbilics.json")).read_text())
    assert data["count"] == 4
    assert [u["darboux"] for u in data["umbilics"]] == ["D1"] * 4


def test_principal_lines_summary(tmp_path):
    scene = {**ELLIPSOID, "grid": {"nu": 80, "nv": 80}, "seeds": {"random": 2}, "rng_seed": 3}
    code, out = _run(tmp_path, "principal-lines", scene)
    assert code == 0
    summary = json.loads(next(out.glob("*summary.json")).read_text())
    assert summary["umbilics"] == 4
    assert summary["ld_curves"] == 2
    assert summary["lpl_curves"] == 0
    lines = IO.read_curves(next(out.glob("*lines.csv")))
    assert len(lines) == 4
    seps = IO.read_curves(next(out.glob("*separatrices.csv")))
    assert len(seps) == 8


def test_sto_check_command(tmp_path):
    scene = {"surface": {"kind": "sto-ellipsoid", "a": 2.0, "b": 1.5, "c": 2.2}, "sto": {"samples": 50}}
    code, out = _run(tmp_path, "sto-check", scene)
    assert code == 0
    rep = json.loads(next(out.glob("*sto_check.json")).read_text())
    assert rep["passed"]
    assert max(rep["quadric_residual"]["corrected"].values()) <= 1e-9
    assert min(rep["quadric_residual"]["printed"].values()) > 1e-6


def test_exit_codes(tmp_path):
    assert run_cli(["umbilics", "--scene", str(tmp_path / "nope.json")]) == 2
    assert run_cli([]) == 2
    assert run_cli(["frobnicate"]) == 2
    bad = _write_scene(tmp_path, {"surface": {"kind": "ellipsoid", "a": 1.0, "b": 1.0}}, "bad.json")
    assert run_cli(["umbilics", "--scene", str(bad)]) == 2
    # a triple-system check on an ellipsoid is a scene mistake
    assert _run(tmp_path, "sto-check", ELLIPSOID)[0] == 2


def test_output_is_deterministic(tmp_path):
    scene = {**ELLIPSOID, "grid": {"nu": 40, "nv": 40}, "seeds": {"random": 2}, "rng_seed": 5,
             "separatrices": False}
    assert _run(tmp_path, "principal-lines", scene, "a")[0] == 0
    assert _run(tmp_path, "principal-lines", scene, "b")[0] == 0
    for f in (tmp_path / "a").iterdir():
        if f.suffix == ".csv":
            assert f.read_bytes() == (tmp_path / "b" / f.name).read_bytes()


def test_scenes_command_lists_shipped_scenes(capsys):
    assert run_cli(["scenes"]) == 0
    listed = capsys.readouterr().out.split()
    assert listed == IO.list_default_scenes()
