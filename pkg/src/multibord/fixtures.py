"""Fixture documents: manifolds, algebraic immersions and geometry cases as JSON.

Rationals are written as strings ``"p/q"`` so they survive a JSON round trip.
The built-in library is generated by :func:`builtin_fixture_document` and
shipped as ``data/fixtures.json``; ``python -m multibord.fixtures`` rewrites it.
"""

from __future__ import annotations

import json
from importlib import resources
from pathlib import Path
from typing import Any, Optional

from .errors import InputError
from .exact_linalg import GF2, ZZ, CoeffSystem, ExactMatrix, format_scalar
from .graded_algebra import GradedRing, validate_ring
from .immersion_algebra import ImmersionAlgebraic
from .manifold_model import ManifoldModel, builtin_manifold

FIXTURE_VERSION = "multibord.fixture/1"

# Normal Euler number of the Whitney sphere w(x, y, z) = (xz, yz, x, y) with the
# outward orientation of S^2; frozen from the pushoff computation in ``geometry``.
WHITNEY_EULER_NUMBER = 2


class FixtureDocument:
    def __init__(self, version: str, manifolds: dict, immersions: dict, geometry: dict, raw: dict):
        self.version = version
        self.manifolds: dict[str, ManifoldModel] = manifolds
        self.immersions: dict[str, ImmersionAlgebraic] = immersions
        self.geometry: dict[str, dict] = geometry
        self.raw = raw

    def immersion(self, name: str) -> ImmersionAlgebraic:
        try:
            return self.immersions[name]
        except KeyError:
            raise InputError(f"unknown immersion {name!r}; known: {', '.join(sorted(self.immersions))}") from None


def _matrix(rows, coeffs: CoeffSystem, shape: Optional[tuple] = None) -> ExactMatrix:
    if shape is not None and shape[0] == 0:
        return ExactMatrix.zeros(0, shape[1], coeffs)
    M = ExactMatrix(rows, coeffs)
    if shape is not None and M.shape != shape:
        raise InputError(f"matrix has shape {M.shape}, expected {shape}")
    return M


def _parse_manifold(name: str, spec: dict) -> ManifoldModel:
    coeffs = CoeffSystem.parse(spec.get("coeffs", "Z"))
    if "builtin" in spec:
        M = builtin_manifold(spec["builtin"], spec.get("params"), coeffs)
        M.name = spec.get("label", M.name)
        return M
    try:
        dim = int(spec["dim"])
        ranks = [int(r) for r in spec["ranks"]]
    except KeyError as exc:
        raise InputError(f"manifold {name!r} lacks field {exc}") from None
    tables = {}
    for key, tab in (spec.get("cup") or {}).items():
        p, q = (int(t) for t in key.split(","))
        tables[(p, q)] = tab
    euclidean = bool(spec.get("euclidean", False))
    names = {int(k): v for k, v in (spec.get("basis_names") or {}).items()}
    R = GradedRing(dim, ranks, tables, coeffs, name, has_unit=not euclidean, basis_names=names)
    bad = validate_ring(R)
    if bad:
        raise InputError(f"manifold {name!r}: ring fails validation: {[v.to_json() for v in bad[:5]]}")
    return ManifoldModel(dim, R, bool(spec.get("oriented", True)), name, euclidean)


def _parse_immersion(name: str, spec: dict, manifolds: dict) -> ImmersionAlgebraic:
    try:
        V = manifolds[spec["source"]]
        M = manifolds[spec["target"]]
    except KeyError as exc:
        raise InputError(f"immersion {name!r} references unknown manifold {exc}") from None
    k = V.coeffs
    pull = {}
    for d, rows in (spec.get("pullback") or {}).items():
        d = int(d)
        pull[d] = _matrix(rows, k, (V.ring.rank(d), M.ring.rank(d)))
    push = {}
    for d, rows in (spec.get("pushforward") or {}).items():
        d = int(d)
        push[d] = _matrix(rows, k, (M.homology_rank(d), V.homology_rank(d)))
    shriek = None
    if spec.get("shriek") is not None:
        shriek = {}
        codim = M.dim - V.dim
        for d, rows in spec["shriek"].items():
            d = int(d)
            shriek[d] = _matrix(rows, k, (M.ring.rank(d + codim), V.ring.rank(d)))
    e = spec.get("euler")
    if e is None:
        raise InputError(f"immersion {name!r} lacks an Euler class")
    euler = V.ring.element(int(e["degree"]), e["coords"])
    return ImmersionAlgebraic(V, M, pull, push, euler, shriek, name, bool(spec.get("unoriented_extension", False)))


def parse_fixture(doc: dict) -> FixtureDocument:
    if not isinstance(doc, dict):
        raise InputError("fixture must be a JSON object")
    version = doc.get("version")
    if version != FIXTURE_VERSION:
        raise InputError(f"unsupported fixture version {version!r}")
    manifolds = {n: _parse_manifold(n, s) for n, s in (doc.get("manifolds") or {}).items()}
    immersions = {n: _parse_immersion(n, s, manifolds) for n, s in (doc.get("immersions") or {}).items()}
    geometry = dict(doc.get("geometry") or {})
    return FixtureDocument(version, manifolds, immersions, geometry, doc)


def load_fixture(path) -> FixtureDocument:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise InputError(f"cannot read fixture {path}: {exc}") from None
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise InputError(f"fixture {path} is not valid JSON: {exc}") from None
    return parse_fixture(doc)


def builtin_fixture() -> FixtureDocument:
    text = resources.files("multibord").joinpath("data/fixtures.json").read_text(encoding="utf-8")
    return parse_fixture(json.loads(text))


def _m(rows):
    return [[format_scalar(x) for x in r] for r in rows]


def builtin_fixture_document() -> dict:
    """The shipped fixture library as a plain JSON-ready dict."""
    manifolds = {
        "S2": {"builtin": "sphere", "params": {"n": 2}, "coeffs": "Z"},
        "CP2": {"builtin": "complex_projective", "params": {"n": 2}, "coeffs": "Z"},
        "CP3": {"builtin": "complex_projective", "params": {"n": 3}, "coeffs": "Z"},
        "CP4": {"builtin": "complex_projective", "params": {"n": 4}, "coeffs": "Z"},
        "S2xS2": {
            "builtin": "product",
            "params": {"a": {"name": "sphere", "params": {"n": 2}}, "b": {"name": "sphere", "params": {"n": 2}}},
            "coeffs": "Z",
        },
        "R4": {"builtin": "euclidean", "params": {"m": 4}, "coeffs": "Z"},
        "RP2_F2": {"builtin": "projective_plane", "coeffs": "F2"},
        "T2_F2": {"builtin": "torus", "params": {"n": 2}, "coeffs": "F2"},
        "R3_F2": {"builtin": "euclidean", "params": {"m": 3}, "coeffs": "F2"},
    }
    immersions = {
        "cp1_in_cp2": {
            "source": "S2", "target": "CP2",
            "pullback": {"2": _m([[1]])},
            "pushforward": {"0": _m([[1]]), "2": _m([[1]])},
            "euler": {"degree": 2, "coords": ["1"]},
            "notes": "line in the projective plane; normal bundle O(1)",
        },
        "nodal_cubic_s2_cp2": {
            "source": "S2", "target": "CP2",
            "pullback": {"2": _m([[3]])},
            "pushforward": {"0": _m([[1]]), "2": _m([[3]])},
            "euler": {"degree": 2, "coords": ["7"]},
            "notes": "rational cubic with one positive node: 9 = e + 2",
        },
        "diagonal_s2_s2xs2": {
            "source": "S2", "target": "S2xS2",
            "pullback": {"2": _m([[1, 1]])},
            "pushforward": {"0": _m([[1]]), "2": _m([[1], [1]])},
            "euler": {"degree": 2, "coords": ["2"]},
            "notes": "diagonal embedding; normal bundle is the tangent bundle",
        },
        "quadric_s2xs2_cp3": {
            "source": "S2xS2", "target": "CP3",
            "pullback": {"2": _m([[1], [1]]), "4": _m([[2]])},
            "pushforward": {"0": _m([[1]]), "2": _m([[1, 1]]), "4": _m([[2]])},
            "euler": {"degree": 2, "coords": ["2", "2"]},
            "notes": "smooth quadric surface; normal bundle O(2)",
        },
        "synthetic_cp3_cp4": {
            "source": "CP3", "target": "CP4",
            "pullback": {"2": _m([[2]]), "4": _m([[4]]), "6": _m([[8]])},
            "pushforward": {"0": _m([[1]]), "2": _m([[2]]), "4": _m([[4]]), "6": _m([[8]])},
            "euler": {"degree": 2, "coords": ["3"]},
            "notes": "synthetic algebraic data (h -> 2h, e = 3h) exercising the recursion up to k = 4",
        },
        "whitney_s2_r4": {
            "source": "S2", "target": "R4",
            "pushforward": {"0": _m([[1]])},
            "euler": {"degree": 2, "coords": [str(WHITNEY_EULER_NUMBER)]},
            "notes": "Whitney sphere (xz, yz, x, y); Euler number from the pushoff computation",
        },
        "sphere_in_r4": {
            "source": "S2", "target": "R4",
            "pushforward": {"0": _m([[1]])},
            "euler": {"degree": 2, "coords": ["0"]},
            "notes": "round sphere in a 3-plane of R^4",
        },
        "rp2_r3_boy": {
            "source": "RP2_F2", "target": "R3_F2",
            "pushforward": {"0": _m([[1]])},
            "euler": {"degree": 1, "coords": ["1"]},
            "unoriented_extension": True,
            "notes": "Boy's surface; w_1 of the normal line bundle equals w_1(RP^2) = a",
        },
        "torus_r3": {
            "source": "T2_F2", "target": "R3_F2",
            "pushforward": {"0": _m([[1]])},
            "euler": {"degree": 1, "coords": ["0", "0"]},
            "unoriented_extension": True,
            "notes": "standard embedded torus",
        },
    }
    geometry = {
        "whitney": {"builtin": "whitney", "params": {"resolution": 13}, "seed": 1},
        "boy": {"builtin": "boy", "params": {"resolution": 26}, "seed": 1},
        "torus": {"builtin": "torus", "params": {"R": "2", "r": "1", "resolution": 24}, "seed": 1},
        "figure8": {"builtin": "figure8", "params": {"vertices": 256}, "seed": 1},
        "limacon": {"builtin": "limacon", "params": {"vertices": 256}, "seed": 1},
        "circle": {"builtin": "circle", "params": {"vertices": 64}, "seed": 1},
    }
    return {"version": FIXTURE_VERSION, "manifolds": manifolds, "immersions": immersions, "geometry": geometry}


def write_builtin_fixture(path=None) -> Path:
    path = Path(path) if path else Path(__file__).parent / "data" / "fixtures.json"
    path.write_text(json.dumps(builtin_fixture_document(), indent=2, sort_keys=True) + "\n", encoding="utf-8")
    return path


if __name__ == "__main__":
    print(write_builtin_fixture())
