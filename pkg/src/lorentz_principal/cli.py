"""Command line interface.

Every subcommand reads a scene descriptor (``--scene``), runs one analysis
and writes CSV/JSON next to the scene or into ``--out``. Exit status is 0 on
success, 2 for scene problems and 3 when the analysis fails or a
verification report does not pass.
"""
from __future__ import annotations

import argparse
import math
import sys
import time
from pathlib import Path
from typing import Optional

import numpy as np

from . import bde as B
from . import focal as Fo
from . import io as IO
from . import quadrics as Q
from . import transforms as T
from . import umbilic as Um
from .atlas import Atlas
from .errors import IoError, LorentzPrincipalError, SceneError
from .minkowski import Isometry21, minkowski_dot, rotations

EXIT_OK, EXIT_SCENE, EXIT_ANALYSIS = 0, 2, 3


class AnalysisFailed(Exception):
    """A verification ran to completion but did not pass."""


def _log(msg: str):
    print(msg, file=sys.stderr)


# ---------------------------------------------------------------------------
# seeds

def _ellipsoid_seeds(abc, count, rng, umbilics=(), min_y=0.05, min_umb=0.1):
    a, b, c = abc
    out = []
    while len(out) < count:
        d = rng.normal(size=3)
        p = d / math.sqrt((d[0] / a) ** 2 + (d[1] / b) ** 2 + (d[2] / c) ** 2)
        if abs(p[1]) < min_y * b:
            continue
        if any(np.linalg.norm(p - z) < min_umb * max(abc) for z in umbilics):
            continue
        out.append(p)
    return out


def _chart_uv_seeds(chart, count, rng, margin=0.05):
    d = chart.domain
    out = []
    for _ in range(100 * max(count, 1)):
        if len(out) >= count:
            break
        u = d.u_range[0] + (d.u_range[1] - d.u_range[0]) * (margin + (1 - 2 * margin) * rng.random())
        v = d.v_range[0] + (d.v_range[1] - d.v_range[0]) * (margin + (1 - 2 * margin) * rng.random())
        if d.contains(u, v):
            out.append((u, v))
    return out


def _seeds(scene, surf, rng, umbilics_xyz=()):
    sd = scene.section("seeds")
    if "xyz" in sd:
        return "xyz", [np.asarray(p, dtype=float) for p in sd["xyz"]]
    if "uv" in sd:
        return "uv", [tuple(p) for p in sd["uv"]]
    n = int(sd.get("random", 8))
    if surf.kind == "ellipsoid":
        return "xyz", _ellipsoid_seeds(surf.abc, n, rng, umbilics_xyz)
    if surf.chart is None:
        raise SceneError("this surface needs explicit seeds")
    return "uv", _chart_uv_seeds(surf.chart, n, rng)


def _need_chart(surf, what):
    if surf.chart is None:
        raise SceneError(f"{what} needs a surface chart (give 'fixed' and 'value' for triple systems)")
    return surf.chart


def _umbilics(scene, surf, classify=True):
    tol = scene.tol("umbilic", 1e-9)
    thr = scene.tol("umbilic_threshold", 0.05)
    grid = scene.grid()
    if surf.atlas is not None and surf.kind == "ellipsoid":
        return Um.find_umbilics_atlas(surf.atlas, grid, tol=tol, classify=classify)
    chart = _need_chart(surf, "umbilic search")
    return Um.find_umbilics(chart, grid, tol=tol, threshold=thr, classify=classify)


def _curve_exports(curves, chart_name, foliation=None):
    out = []
    for cv in curves:
        if len(cv.points_xyz) < 2:
            continue
        term = cv.termination.value if hasattr(cv.termination, "value") else str(cv.termination)
        out.append(IO.CurveExport.from_polyline(cv.points_uv, cv.points_xyz, cv.chart_name or chart_name,
                                                foliation or cv.foliation, term, cv.closed))
    return out


def _locus_exports(curves, chart_name):
    return [IO.CurveExport.from_polyline(c.polyline_uv, c.polyline_xyz, chart_name, c.kind,
                                         "Closed" if c.closed else "Open", c.closed)
            for c in curves if len(c.polyline_xyz) >= 2]


def _paths(scene, out, *names):
    d = scene.output_dir(out)
    return [d / f"{scene.prefix}_{n}" for n in names]


# ---------------------------------------------------------------------------
# analyses

def _tropic_curves(surf, grid):
    chart = _need_chart(surf, "the tropic")
    return chart, B.trace_locus(chart, "LD", grid)


def _lpl_curves(surf, grid):
    charts = list(surf.atlas.charts) if (surf.kind == "ellipsoid" and surf.atlas) else [_need_chart(surf, "LPL")]
    out = []
    for ch in charts:
        for cv in B.trace_locus(ch, "LPL", grid):
            out.append((ch, cv))
    return out


def run_principal_lines(scene, surf, out):
    rng = np.random.default_rng(scene.rng_seed)
    opts = scene.integration()
    folis = scene.data.get("foliations", ["F1", "F2"])
    recs = _umbilics(scene, surf) if surf.kind != "plane" else []
    umb_xyz = [r.xyz for r in recs]
    mode, seeds = _seeds(scene, surf, rng, umb_xyz)
    curves, leaves = [], []
    for k, s in enumerate(seeds):
        for fol in folis:
            try:
                if mode == "xyz":
                    atlas = surf.atlas or (Atlas((surf.chart,)) if surf.chart and surf.chart.inverse else None)
                    if atlas is None:
                        raise SceneError("xyz seeds need a surface with an atlas")
                    cv = B.integrate_on_atlas(atlas, s, fol, opts, umbilics=umb_xyz)
                else:
                    cv = B.integrate_principal_line(surf.chart, s, fol, opts,
                                                    umbilics=[r.uv for r in recs])
            except LorentzPrincipalError as exc:
                leaves.append({"seed": list(map(float, s)), "foliation": fol,
                               "error": f"{type(exc).__name__}: {exc}"})
                continue
            curves.append(cv)
            leaves.append({"seed": list(map(float, s)), "foliation": cv.foliation,
                           "termination": cv.termination.value, "closed": cv.closed,
                           "steps": cv.steps, "length": cv.length, "points": len(cv)})
    seps = []
    if scene.data.get("separatrices", True) and recs:
        for r in recs:
            ch = (surf.atlas.charts[r.chart_index] if (surf.atlas is not None and r.chart_index is not None)
                  else surf.chart)
            try:
                ss = Um.trace_separatrices(ch, r, atlas=surf.atlas if surf.kind == "ellipsoid" else None,
                                           umbilics=umb_xyz if surf.kind == "ellipsoid" else [q.uv for q in recs],
                                           opts=opts)
            except LorentzPrincipalError as exc:
                _log(f"separatrices at {r.xyz.tolist()}: {exc}")
                continue
            for cv in ss:
                seps.append(cv)
    ld = lpl = None
    if surf.kind == "ellipsoid" and surf.chart is not None:
        ld = len(_tropic_curves(surf, scene.grid())[1])
        lpl = len(_lpl_curves(surf, scene.grid()))
    elif surf.chart is not None:
        ld = len(B.trace_locus(surf.chart, "LD", scene.grid()))
        lpl = len(B.trace_locus(surf.chart, "LPL", scene.grid()))
    csv_path, sep_path, json_path = _paths(scene, out, "lines.csv", "separatrices.csv", "summary.json")
    name = surf.atlas.name if surf.atlas is not None else surf.chart.name
    IO.export_curves(csv_path, _curve_exports(curves, name))
    IO.export_curves(sep_path, _curve_exports(seps, name, "separatrix"))
    IO.write_json(json_path, {
        "surface": scene.surface,
        "umbilics": len(recs),
        "umbilic_records": [r.as_dict() for r in recs],
        "ld_curves": ld, "lpl_curves": lpl,
        "leaves": leaves,
        "separatrices": [{"termination": c.termination.value, "points": len(c)} for c in seps],
        "outputs": [str(csv_path), str(sep_path)],
    })
    return [csv_path, sep_path, json_path]


def run_umbilics(scene, surf, out):
    t0 = time.perf_counter()
    recs = _umbilics(scene, surf)
    dt = time.perf_counter() - t0
    (path,) = _paths(scene, out, "umbilics.json")
    IO.write_json(path, {"count": len(recs), "umbilics": [r.as_dict() for r in recs],
                         "seconds": round(dt, 3)})
    return [path]


def run_tropic(scene, surf, out):
    chart, curves = _tropic_curves(surf, scene.grid())
    res = 0.0
    for cv in curves:
        for uv in cv.polyline_uv:
            try:
                r = B.ld_residual(chart, uv)
            except LorentzPrincipalError:
                continue
            if np.isfinite(r):
                res = max(res, r)
    csv_path, json_path = _paths(scene, out, "tropic.csv", "tropic.json")
    IO.export_curves(csv_path, _locus_exports(curves, chart.name))
    IO.write_json(json_path, {"count": len(curves), "closed": [c.closed for c in curves],
                              "max_residual": res, "points": [len(c.polyline_xyz) for c in curves]})
    return [csv_path, json_path]


def run_lpl(scene, surf, out):
    found = _lpl_curves(surf, scene.grid())
    csv_path, json_path = _paths(scene, out, "lpl.csv", "lpl.json")
    IO.export_curves(csv_path, [e for ch, cv in found for e in _locus_exports([cv], ch.name)])
    IO.write_json(json_path, {"count": len(found), "charts": sorted({ch.name for ch, _ in found})})
    return [csv_path, json_path]


def run_focal(scene, surf, out):
    sec = scene.section("focal")
    sheets = sec.get("sheets", ["F1", "F2"])
    variant = sec.get("variant", "corrected")
    want_locus = sec.get("singular_locus", True)
    grid = scene.grid((120, 120))
    paths, summary = [], {"sheets": {}}
    for which in sheets:
        if surf.kind == "ellipsoid":
            a, b, c = surf.abc
            # the F1 sheet is singular along u = 0, a fold edge of U1, so it is
            # traced on U2 where that line is interior (and F2 on U1)
            variant_uv = "U2" if which == "F1" else "U1"
            chart = Q.global_principal_chart(a, b, c, variant_uv)
        else:
            chart = _need_chart(surf, "focal sheets")
        sheet = Fo.focal_numeric(chart, which, grid)
        info = {"valid_fraction": sheet.valid_fraction(), "chart": chart.name}
        if surf.kind == "ellipsoid":
            ref = Fo.focal_closed_form(a, b, c, which, grid, variant, chart_variant=variant_uv)
            info["closed_form_variant"] = variant
            info["max_relative_gap"] = Fo.compare_sheets(sheet, ref)
        (mesh,) = _paths(scene, out, f"focal_{which}.csv")
        IO.export_mesh(mesh, sheet)
        paths.append(mesh)
        if want_locus:
            loc = Fo.focal_singular_locus(sheet)
            (lp,) = _paths(scene, out, f"focal_{which}_singular.csv")
            IO.export_curves(lp, _locus_exports(loc, chart.name))
            paths.append(lp)
            info["singular_curves"] = len(loc)
        summary["sheets"][which] = info
    (jp,) = _paths(scene, out, "focal.json")
    IO.write_json(jp, summary)
    paths.append(jp)
    tol = scene.tol("focal", 1e-6)
    gaps = [v.get("max_relative_gap") for v in summary["sheets"].values() if "max_relative_gap" in v]
    if any(not (g <= tol) for g in gaps):
        raise AnalysisFailed(f"focal sheets differ from the closed form by more than {tol:g}")
    return paths


def _orthogonality(frame_fn, samples):
    worst = 0.0
    for t in samples:
        _, D = frame_fn(*t)
        for i, j in ((0, 1), (0, 2), (1, 2)):
            worst = max(worst, abs(float(minkowski_dot(D[:, i], D[:, j]))))
    return worst


def run_sto_check(scene, surf, out):
    rng = np.random.default_rng(scene.rng_seed)
    n = int(scene.section("sto").get("samples", 1000))
    tol_o = scene.tol("orthogonality", 1e-9)
    tol_q = scene.tol("quadric", 1e-9)
    rep = {}
    if surf.kind in ("sto-z", "sto-ellipsoid"):
        p = surf.system
        samples = p.sample(rng, n)
        rep["max_orthogonality"] = _orthogonality(lambda u, v, w: Q.sto_frame(p, u, v, w), samples)
        q_res = {"corrected": {}, "printed": {}}
        for fixed, k in (("u", 0), ("v", 1), ("w", 2)):
            for label, printed in (("corrected", False), ("printed", True)):
                worst = 0.0
                for t in samples:
                    coeff = Q.sto_quadric(p, fixed, float(t[k]), as_printed=printed)
                    X = Q.sto_point(p, *t)
                    worst = max(worst, abs(float(Q.quadric_residual(coeff, X))))
                q_res[label][fixed] = worst
        rep["quadric_residual"] = q_res
        rep["surface_types"] = {f: Q.quadric_surface_type(Q.sto_quadric(p, f, float(samples[0][k])))
                                for f, k in (("u", 0), ("v", 1), ("w", 2))}
        ok = rep["max_orthogonality"] <= tol_o and max(q_res["corrected"].values()) <= tol_q
        if surf.kind == "sto-ellipsoid":
            a, b, c = surf.abc
            w = surf.extra["w"]
            uu = rng.uniform(0, 2 * math.pi, n)
            vv = rng.uniform(0, 2 * math.pi, n)
            X = Q.sto_point(p, uu, vv, w)
            res = float(np.nanmax(np.abs(Q.ellipsoid_residual(a, b, c, X))))
            rep["ellipsoid_residual"] = res
            rep["params"] = {"m": p.m, "n": p.n, "eps": p.eps, "w": w}
            ok = ok and res <= tol_q
    elif surf.kind == "confocal-octant":
        p = surf.system
        samples = p.sample(rng, n)
        rep["max_orthogonality"] = _orthogonality(lambda u, v, w: Q.octant_frame(p, u, v, w), samples)
        worst = 0.0
        for t in samples:
            _, D = Q.octant_frame(p, *t)
            d0 = float(np.linalg.det(D))
            d1 = float(Q.octant_det_closed_form(p, *t))
            worst = max(worst, abs(d0 - d1) / abs(d1))
        rep["det_relative_error"] = worst
        ok = rep["max_orthogonality"] <= tol_o and worst <= tol_o
    else:
        raise SceneError("sto-check needs a 'sto-z', 'sto-ellipsoid' or 'confocal-octant' surface")
    rep["passed"] = bool(ok)
    (path,) = _paths(scene, out, "sto_check.json")
    IO.write_json(path, rep)
    if not ok:
        raise AnalysisFailed("triple orthogonality check failed")
    return [path]


def run_dupin(scene, surf, out):
    if surf.kind not in ("confocal-octant", "sto-z", "sto-ellipsoid"):
        raise SceneError("dupin-check needs a triple system surface")
    sec = scene.section("dupin")
    thr = scene.tol("dupin", 1e-8)
    reports = {}
    ok = True
    for axis in sec.get("fixed_axes", ["u", "v", "w"]):
        r = B.verify_dupin(surf.system, axis, n_curves=int(sec.get("curves", 100)),
                           points_per_curve=int(sec.get("points_per_curve", 25)),
                           threshold=thr, rng_seed=scene.rng_seed)
        reports[axis] = {"max_residual": r.max_residual, "curves": r.curves, "passed": r.passed}
        ok = ok and r.passed
    (path,) = _paths(scene, out, "dupin.json")
    IO.write_json(path, {"threshold": thr, "fixed": reports, "passed": ok})
    if not ok:
        raise AnalysisFailed("coordinate curves are not curvature lines within tolerance")
    return [path]


def run_invert(scene, surf, out):
    if surf.atlas is None:
        raise SceneError("invert needs a surface with an atlas or an invertible chart")
    rng = np.random.default_rng(scene.rng_seed)
    sd = scene.section("seeds")
    if "xyz" in sd:
        seeds = [np.asarray(p, dtype=float) for p in sd["xyz"]]
    elif surf.kind == "ellipsoid":
        seeds = _ellipsoid_seeds(surf.abc, int(sd.get("random", 3)), rng,
                                 Q.ellipsoid_umbilics(*surf.abc) if surf.abc[0] > surf.abc[1] else ())
    else:
        uvs = [tuple(p) for p in sd["uv"]] if "uv" in sd else _chart_uv_seeds(surf.chart, int(sd.get("random", 3)), rng)
        seeds = [surf.chart.point(*uv) for uv in uvs]
    centers = scene.section("inversion").get("centers", [[0.0, 0.0, 5.0]])
    rel = scene.tol("inversion", 1e-4)
    opts = scene.integration(max_step_frac=0.002)
    reports = []
    for qc in centers:
        r = T.verify_inversion_invariance(surf.atlas, qc, seeds, opts=opts, rel_threshold=rel)
        if surf.kind == "graph" and surf.chart is not None:
            us = np.linspace(*surf.chart.domain.u_range, 9)[1:-1]
            vs = np.linspace(*surf.chart.domain.v_range, 9)[1:-1]
            U, V = np.meshgrid(us, vs, indexing="ij")
            try:
                r.coefficient_residual = T.coefficient_proportionality_residual(qc, surf.chart, U, V)
            except LorentzPrincipalError:
                r.coefficient_residual = None
        reports.append(r)
    (path,) = _paths(scene, out, "inversion.json")
    ok = all(r.passed for r in reports)
    IO.write_json(path, {"passed": ok, "reports": [r.as_dict() for r in reports]})
    if not ok:
        raise AnalysisFailed("inverted leaves do not match within tolerance")
    return [path]


def run_canonicalize(scene, surf, out):
    if surf.kind == "general-quadric":
        q = surf.quadric
    elif surf.kind == "ellipsoid":
        a, b, c = surf.abc
        q = Q.GeneralQuadric(1 / a**2, 1 / b**2, 1 / c**2)
    else:
        raise SceneError("canonicalize needs a 'general-quadric' or 'ellipsoid' surface")
    rot = scene.section("canonicalize").get("rotate")
    pre = None
    if rot:
        lin = rotations(rot.get("theta", 0.0), rot.get("alpha", 0.0), rot.get("beta", 0.0)).linear
        pre = Isometry21(lin, np.asarray(rot.get("translation", [0.0, 0.0, 0.0]), dtype=float))
        q = q.transformed(pre)
    cf = Q.canonicalize(q)
    rng = np.random.default_rng(scene.rng_seed)
    P = rng.normal(size=(200, 3))
    lhs = q(cf.isometry(P))
    rhs = -cf.kappa * (cf.diagonal_value(P) - 1.0)
    res = float(np.max(np.abs(lhs - rhs)))
    rep = {"lambdas": cf.lambdas, "mu": cf.mu, "kappa": cf.kappa,
           "linear": cf.isometry.linear, "translation": cf.isometry.translation,
           "isometry_defect": cf.isometry.defect(), "max_residual": res,
           "input": {k: getattr(q, k) for k in "abcdefghkl"}}
    (path,) = _paths(scene, out, "canonical.json")
    IO.write_json(path, rep)
    if not (res <= 1e-8 * max(1.0, abs(cf.kappa)) and cf.isometry.defect() <= 1e-10):
        raise AnalysisFailed("canonical form does not reproduce the quadric")
    return [path]


COMMANDS = {
    "principal-lines": (run_principal_lines, "principal foliations, umbilics and loci"),
    "umbilics": (run_umbilics, "umbilic points with Darbouxian type"),
    "tropic": (run_tropic, "the tropic LD where the metric degenerates"),
    "lpl": (run_lpl, "the lightlike principal locus"),
    "focal": (run_focal, "focal sheets as grid meshes and their singular curves"),
    "sto-check": (run_sto_check, "orthogonality and coordinate quadrics of a triple system"),
    "invert": (run_invert, "check that inversion maps curvature lines to curvature lines"),
    "canonicalize": (run_canonicalize, "diagonal form of an ellipsoid under an isometry"),
    "dupin-check": (run_dupin, "coordinate curves of a triple system are curvature lines"),
}


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="lorentz-principal",
                                 description="Principal configurations of surfaces in R^{2,1}. "
                                             "Angles are in radians.")
    sub = ap.add_subparsers(dest="command", metavar="command")
    for name, (_, help_) in COMMANDS.items():
        sp = sub.add_parser(name, help=help_)
        sp.add_argument("--scene", required=True,
                        help="scene descriptor (JSON path or the name of a shipped scene)")
        sp.add_argument("--out", default=None, help="output directory (overrides the scene)")
    sub.add_parser("scenes", help="list the shipped example scenes")
    return ap


def run_cli(argv=None) -> int:
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_SCENE
    if args.command is None:
        ap.print_help(sys.stderr)
        return EXIT_SCENE
    if args.command == "scenes":
        for name in IO.list_default_scenes():
            print(name)
        return EXIT_OK
    func = COMMANDS[args.command][0]
    try:
        scene = IO.load_scene(IO.resolve_scene_path(args.scene))
        analyses = scene.data.get("analyses")
        if analyses is not None and args.command not in analyses:
            _log(f"note: '{args.command}' is not listed in the scene's analyses")
        surf = IO.build_surface(scene)
    except SceneError as exc:
        _log(f"scene error: {exc}")
        return EXIT_SCENE
    except LorentzPrincipalError as exc:
        _log(f"scene error: {type(exc).__name__}: {exc}")
        return EXIT_SCENE
    try:
        paths = func(scene, surf, args.out)
    except SceneError as exc:
        _log(f"scene error: {exc}")
        return EXIT_SCENE
    except AnalysisFailed as exc:
        _log(f"analysis failed: {exc}")
        return EXIT_ANALYSIS
    except IoError as exc:
        _log(f"output error: {exc}")
        return EXIT_ANALYSIS
    except LorentzPrincipalError as exc:
        _log(f"analysis failed: {type(exc).__name__}: {exc}")
        return EXIT_ANALYSIS
    for p in paths:
        print(str(p))
    return EXIT_OK


def main(argv: Optional[list] = None) -> None:
    sys.exit(run_cli(argv))


if __name__ == "__main__":  # pragma: no cover
    main()
