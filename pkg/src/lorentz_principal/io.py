"""Scene descriptors and deterministic CSV/JSON export.

A scene is a JSON document validated against :data:`SCENE_SCHEMA` before any
computation starts. Unknown keys are rejected and every tolerance must be
positive. Angles are radians throughout.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Optional

import jsonschema
import numpy as np

from . import quadrics as Q
from .atlas import Atlas
from .bde import GridSpec, IntegrationOptions
from .errors import IoError, SceneError
from .jets import ChartSpec

_POS = {"type": "number", "exclusiveMinimum": 0}
_NUM = {"type": "number"}
_VEC3 = {"type": "array", "items": _NUM, "minItems": 3, "maxItems": 3}
_VEC2 = {"type": "array", "items": _NUM, "minItems": 2, "maxItems": 2}
_AXIS = {"enum": ["u", "v", "w"]}
ANALYSES = ["principal-lines", "umbilics", "tropic", "lpl", "focal", "sto-check",
            "invert", "canonicalize", "dupin-check"]


def _obj(props, required=()):
    return {"type": "object", "properties": props, "required": list(required),
            "additionalProperties": False}


_SURFACES = [
    _obj({"kind": {"const": "ellipsoid"}, "a": _POS, "b": _POS, "c": _POS,
          "cap_radius": {"type": "number", "exclusiveMinimum": 0, "maximum": 1}},
         ["kind", "a", "b", "c"]),
    _obj({"kind": {"const": "graph"},
          "coeffs": {"type": "array", "minItems": 1,
                     "items": {"type": "array", "minItems": 3, "maxItems": 3,
                               "prefixItems": [{"type": "integer", "minimum": 0},
                                               {"type": "integer", "minimum": 0}, _NUM],
                               "items": _NUM}},
          "half_width": _POS},
         ["kind", "coeffs"]),
    _obj({"kind": {"const": "plane"}, "half_width": _POS, "height": _NUM}, ["kind"]),
    _obj({"kind": {"const": "confocal-octant"}, "a": _POS, "b": _POS, "c": _POS,
          "fixed": _AXIS, "value": _NUM},
         ["kind", "a", "b", "c"]),
    _obj({"kind": {"const": "sto-z"}, "m": _POS, "n": _POS, "eps": {"enum": [1, -1]},
          "fixed": _AXIS, "value": _NUM},
         ["kind", "m", "n", "eps"]),
    _obj({"kind": {"const": "sto-ellipsoid"}, "a": _POS, "b": _POS, "c": _POS},
         ["kind", "a", "b", "c"]),
    _obj({"kind": {"const": "general-quadric"},
          "coefficients": _obj({k: _NUM for k in "abcdefghkl"}, ["a", "b", "c"])},
         ["kind", "coefficients"]),
]

SCENE_SCHEMA = _obj({
    "description": {"type": "string"},
    "surface": {"oneOf": _SURFACES},
    "analyses": {"type": "array", "items": {"enum": ANALYSES}, "uniqueItems": True},
    "grid": _obj({"nu": {"type": "integer", "minimum": 4}, "nv": {"type": "integer", "minimum": 4}}),
    "seeds": _obj({"xyz": {"type": "array", "items": _VEC3},
                   "uv": {"type": "array", "items": _VEC2},
                   "random": {"type": "integer", "minimum": 0}}),
    "rng_seed": {"type": "integer", "minimum": 0},
    "foliations": {"type": "array", "items": {"enum": ["F1", "F2"]}, "minItems": 1,
                   "uniqueItems": True},
    "separatrices": {"type": "boolean"},
    "integration": _obj({"atol": _POS, "max_step_frac": _POS,
                         "max_steps": {"type": "integer", "minimum": 1},
                         "max_length": _POS, "closure_min_steps": {"type": "integer", "minimum": 1},
                         "closure_cos": {"type": "number", "exclusiveMinimum": 0, "maximum": 1},
                         "closure_radius": _POS, "umbilic_radius_frac": _POS, "coef_tol": _POS}),
    "tolerances": _obj({"umbilic": _POS, "umbilic_threshold": _POS, "orthogonality": _POS,
                        "quadric": _POS, "dupin": _POS, "inversion": _POS, "focal": _POS}),
    "inversion": _obj({"centers": {"type": "array", "items": _VEC3, "minItems": 1}}, ["centers"]),
    "focal": _obj({"sheets": {"type": "array", "items": {"enum": ["F1", "F2"]}, "minItems": 1},
                   "variant": {"enum": ["corrected", "printed"]},
                   "singular_locus": {"type": "boolean"}}),
    "sto": _obj({"samples": {"type": "integer", "minimum": 1}}),
    "dupin": _obj({"fixed_axes": {"type": "array", "items": _AXIS, "minItems": 1},
                   "curves": {"type": "integer", "minimum": 1},
                   "points_per_curve": {"type": "integer", "minimum": 1}}),
    "canonicalize": _obj({"rotate": _obj({"theta": _NUM, "alpha": _NUM, "beta": _NUM,
                                          "translation": _VEC3})}),
    "output": _obj({"dir": {"type": "string"}, "prefix": {"type": "string"}}),
}, ["surface"])


@dataclass
class SceneDescriptor:
    """Validated scene plus the path it was read from (outputs resolve against it)."""

    data: dict
    path: Optional[Path] = None

    @property
    def surface(self) -> dict:
        return self.data["surface"]

    @property
    def kind(self) -> str:
        return self.surface["kind"]

    @property
    def rng_seed(self) -> int:
        return int(self.data.get("rng_seed", 0))

    def grid(self, default=(200, 200)) -> GridSpec:
        g = self.data.get("grid", {})
        return GridSpec(int(g.get("nu", default[0])), int(g.get("nv", default[1])))

    def integration(self, **defaults) -> IntegrationOptions:
        opts = dict(defaults)
        opts.update(self.data.get("integration", {}))
        return IntegrationOptions(**opts)

    def tol(self, key: str, default: float) -> float:
        return float(self.data.get("tolerances", {}).get(key, default))

    def section(self, key: str) -> dict:
        return dict(self.data.get(key, {}))

    def output_dir(self, override: Optional[str] = None) -> Path:
        if override:
            return Path(override)
        out = self.data.get("output", {}).get("dir")
        if out is None:
            return Path.cwd()
        p = Path(out)
        if not p.is_absolute() and self.path is not None:
            p = self.path.parent / p
        return p

    @property
    def prefix(self) -> str:
        if "prefix" in self.data.get("output", {}):
            return self.data["output"]["prefix"]
        return self.path.stem if self.path is not None else "scene"


def validate_scene(data) -> SceneDescriptor:
    """Strict schema check; raises :class:`SceneError` with the offending path."""
    try:
        jsonschema.validate(data, SCENE_SCHEMA, cls=jsonschema.Draft202012Validator)
    except jsonschema.ValidationError as exc:
        where = "/".join(str(p) for p in exc.absolute_path) or "<root>"
        raise SceneError(f"invalid scene at {where}: {exc.message}") from None
    s = data["surface"]
    if s["kind"] in ("confocal-octant", "sto-z") and (("fixed" in s) != ("value" in s)):
        raise SceneError("'fixed' and 'value' must be given together")
    return SceneDescriptor(data)


def load_scene(path) -> SceneDescriptor:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise SceneError(f"cannot read scene {path}: {exc.strerror or exc}") from None
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise SceneError(f"scene {path} is not valid JSON: {exc}") from None
    scene = validate_scene(data)
    scene.path = path
    return scene


# ---------------------------------------------------------------------------
# surfaces

@dataclass
class SceneSurface:
    """Geometry built from a scene: a working chart, optionally an atlas."""

    kind: str
    chart: Optional[ChartSpec] = None
    atlas: Optional[Atlas] = None
    abc: Optional[tuple] = None
    system: object = None
    quadric: Optional[Q.GeneralQuadric] = None
    extra: dict = field(default_factory=dict)


def build_surface(scene: SceneDescriptor) -> SceneSurface:
    s = scene.surface
    kind = s["kind"]
    if kind == "ellipsoid":
        a, b, c = s["a"], s["b"], s["c"]
        atlas = Q.ellipsoid_atlas(a, b, c, s.get("cap_radius", 0.95))
        chart = Q.global_principal_chart(a, b, c) if a > b else None
        return SceneSurface(kind, chart, atlas, (a, b, c))
    if kind == "graph":
        coeffs = {(int(i), int(j)): float(cij) for i, j, cij in s["coeffs"]}
        ch = Q.polynomial_graph_chart(coeffs, s.get("half_width", 1.0))
        return SceneSurface(kind, ch, Atlas((ch,), name=ch.name))
    if kind == "plane":
        ch = Q.plane_chart(s.get("half_width", 1.0), s.get("height", 0.0))
        return SceneSurface(kind, ch, Atlas((ch,), name=ch.name))
    if kind == "confocal-octant":
        p = Q.ConfocalParams(s["a"], s["b"], s["c"])
        ch = p.surface_chart(s["fixed"], s["value"]) if "fixed" in s else None
        return SceneSurface(kind, ch, None, (s["a"], s["b"], s["c"]), system=p)
    if kind == "sto-z":
        p = Q.StoParams(s["m"], s["n"], s["eps"])
        ch = p.surface_chart(s["fixed"], s["value"]) if "fixed" in s else None
        return SceneSurface(kind, ch, None, system=p)
    if kind == "sto-ellipsoid":
        p, w = Q.sto_params_for_ellipsoid(s["a"], s["b"], s["c"])
        return SceneSurface(kind, p.surface_chart("w", w), None, (s["a"], s["b"], s["c"]),
                            system=p, extra={"w": w})
    if kind == "general-quadric":
        q = Q.GeneralQuadric(**{k: float(v) for k, v in s["coefficients"].items()})
        return SceneSurface(kind, None, None, quadric=q)
    raise SceneError(f"unknown surface kind {kind}")


# ---------------------------------------------------------------------------
# export

@dataclass
class CurveExport:
    """One curve block: header fields plus rows (u, v, x, y, z)."""

    chart: str
    foliation: str
    termination: str
    closed: bool
    rows: np.ndarray

    def __post_init__(self):
        self.rows = np.asarray(self.rows, dtype=float).reshape(-1, 5)
        if len(self.rows) < 2:
            raise IoError("a curve needs at least two rows")
        if not np.all(np.isfinite(self.rows)):
            raise IoError("curve rows must be finite")

    @classmethod
    def from_polyline(cls, uv, xyz, chart="", foliation="", termination="", closed=False):
        uv = np.asarray(uv, dtype=float).reshape(-1, 2)
        xyz = np.asarray(xyz, dtype=float).reshape(-1, 3)
        return cls(str(chart), str(foliation), str(termination), bool(closed), np.hstack([uv, xyz]))


def _fmt(x: float) -> str:
    return repr(float(x))


def _open_for_write(path):
    path = Path(path)
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        return open(path, "w", encoding="utf-8", newline="\n")
    except OSError as exc:
        raise IoError(f"cannot write {path}: {exc.strerror or exc}") from None


def export_curves(path, curves: Iterable[CurveExport]) -> Path:
    """Write curves as CSV blocks separated by one blank line.

    Each block is a ``#`` header line with chart, foliation, termination and
    closed flag, the column line ``u,v,x,y,z`` and the rows. Floats use
    ``repr`` so that re-reading gives the same bits.
    """
    path = Path(path)
    with _open_for_write(path) as fh:
        first = True
        for cv in curves:
            if not first:
                fh.write("\n")
            first = False
            fh.write(f"# chart={cv.chart};foliation={cv.foliation};"
                     f"termination={cv.termination};closed={str(cv.closed).lower()}\n")
            fh.write("u,v,x,y,z\n")
            for r in cv.rows:
                fh.write(",".join(_fmt(x) for x in r) + "\n")
    return path


def read_curves(path) -> list:
    """Inverse of :func:`export_curves`."""
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise IoError(f"cannot read {path}: {exc.strerror or exc}") from None
    out = []
    for block in text.split("\n\n"):
        lines = [ln for ln in block.splitlines() if ln]
        if not lines:
            continue
        if not lines[0].startswith("# ") or lines[1] != "u,v,x,y,z":
            raise IoError("malformed curve block")
        head = dict(kv.split("=", 1) for kv in lines[0][2:].split(";"))
        rows = np.array([[float(x) for x in ln.split(",")] for ln in lines[2:]])
        out.append(CurveExport(head["chart"], head["foliation"], head["termination"],
                               head["closed"] == "true", rows))
    return out


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _jsonable(obj.tolist())
    if isinstance(obj, (np.bool_,)):
        return bool(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        return x if math.isfinite(x) else None
    return obj


def write_json(path, obj) -> Path:
    """JSON with sorted keys; non-finite floats become null."""
    path = Path(path)
    with _open_for_write(path) as fh:
        json.dump(_jsonable(obj), fh, sort_keys=True, indent=2)
        fh.write("\n")
    return path


def export_umbilics(path, records) -> Path:
    return write_json(path, {"count": len(records), "umbilics": [r.as_dict() for r in records]})


def export_mesh(path, sheet) -> Path:
    """Focal sheet mesh: one row per grid node with a validity column."""
    U, V = sheet.grid_uv
    P = sheet.points_xyz
    with _open_for_write(path) as fh:
        fh.write(f"# sheet={sheet.which};source={sheet.source};shape={U.shape[0]}x{U.shape[1]}\n")
        fh.write("i,j,u,v,x,y,z,valid\n")
        for i in range(U.shape[0]):
            for j in range(U.shape[1]):
                ok = bool(sheet.valid[i, j])
                xyz = P[i, j] if ok else (math.nan, math.nan, math.nan)
                fh.write(f"{i},{j},{_fmt(U[i, j])},{_fmt(V[i, j])},"
                         + ",".join(_fmt(x) for x in xyz) + f",{int(ok)}\n")
    return Path(path)


def read_mesh(path):
    """Return (columns, rows) of a mesh written by :func:`export_mesh`."""
    try:
        lines = Path(path).read_text(encoding="utf-8").splitlines()
    except OSError as exc:
        raise IoError(f"cannot read {path}: {exc.strerror or exc}") from None
    cols = lines[1].split(",")
    rows = np.array([[float(x) for x in ln.split(",")] for ln in lines[2:] if ln])
    return cols, rows


def default_scene_dir() -> Path:
    return Path(__file__).resolve().parent / "scenes"


def list_default_scenes() -> list:
    return sorted(p.name for p in default_scene_dir().glob("*.json"))


def resolve_scene_path(name) -> Path:
    """A scene path, or the name of a shipped scene (with or without .json)."""
    p = Path(name)
    if p.exists():
        return p
    cand = default_scene_dir() / (p.name if p.suffix == ".json" else p.name + ".json")
    return cand if cand.exists() else p


__all__ = ["SCENE_SCHEMA", "SceneDescriptor", "SceneSurface", "CurveExport", "validate_scene",
           "load_scene", "build_surface", "export_curves", "read_curves", "export_umbilics",
           "export_mesh", "read_mesh", "write_json", "default_scene_dir", "list_default_scenes",
           "resolve_scene_path", "ANALYSES"]
