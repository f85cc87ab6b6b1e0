"""``multibord algebra|geometry|verify``.

Every command prints one JSON report.  The report is a deterministic function
of the inputs and seeds; run-environment data (start time, timings, thread count) is confined to
the top-level ``"timestamp"`` field.

Exit codes: 0 success or PASS, 1 FAIL verdict, 2 input error, 3 degree or
mode error, 4 genericity error.
"""

from __future__ import annotations

import json
import sys
import time
from datetime import datetime, timezone
from pathlib import Path
from typing import Optional

import click
import numpy as np

from . import __version__
from .errors import DegreeError, InputError, MultibordError
from .exact_linalg import CoeffSystem
from .fixtures import builtin_fixture, load_fixture
from .immersion_algebra import (
    herbert_chain,
    multipoint_classes,
    projection_formula_check,
    rational_consistency,
)
from .multipoint import (
    CALIBRATED_SIGN,
    assemble_curves,
    double_preimage_chain,
    get_case,
    homology_class,
    sign_parity_exceptions,
    signed_count,
    verify_euler_corollary,
    verify_lemma_double,
)
from .pl_geometry import (
    MESH_BUILTINS,
    PARAMETRIC_BUILTINS,
    ImmersedPolyCurve,
    builtin_mesh,
    builtin_parametric,
    fold_locus,
    mesh_double_locus_r3,
    mesh_double_points_r4,
    mesh_triple_points_r3,
    perturb_generic,
    pushoff_euler_number,
    read_shape,
    segment_crossings,
    tangent_direction_points,
)
from .pl_geometry.parallel import thread_count

EXIT_OK, EXIT_FAIL = 0, 1


class Report:
    def __init__(self, command: str, argv: dict):
        self.started = datetime.now(timezone.utc)
        self.t0 = time.perf_counter()
        self.timings: dict[str, float] = {}
        self.doc: dict = {"command": command, "arguments": argv, "version": __version__}

    def timed(self, label: str, fn, *args, **kwargs):
        t = time.perf_counter()
        try:
            return fn(*args, **kwargs)
        finally:
            self.timings[label] = round(time.perf_counter() - t, 4)

    def emit(self, out: Optional[str]) -> None:
        self.timings["total"] = round(time.perf_counter() - self.t0, 4)
        doc = dict(self.doc)
        doc["timestamp"] = {
            "started": self.started.isoformat(timespec="seconds"),
            "timings": self.timings,
            "threads": thread_count(),
        }
        text = json.dumps(doc, indent=2, sort_keys=True) + "\n"
        if out:
            Path(out).write_text(text, encoding="utf-8")
        else:
            click.echo(text, nl=False)


def _run(report: Report, out: Optional[str], body) -> None:
    """Run ``body(report)``, emit the report, exit with the contract code."""
    try:
        code = body(report)
    except MultibordError as exc:
        report.doc["verdict"] = "ERROR"
        report.doc["error"] = {"type": type(exc).__name__, "message": str(exc), "detail": _jsonable(getattr(exc, "detail", None))}
        report.emit(out)
        click.echo(f"error: {exc}", err=True)
        sys.exit(exc.exit_code)
    report.emit(out)
    sys.exit(code)


def _jsonable(x):
    if isinstance(x, dict):
        return {str(k): _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    if isinstance(x, np.integer):
        return int(x)
    if isinstance(x, np.floating):
        return float(x)
    if isinstance(x, np.ndarray):
        return _jsonable(x.tolist())
    return x


def _parse_vector(text: str) -> tuple:
    try:
        vals = tuple(float(t) for t in text.replace(" ", "").split(","))
    except ValueError:
        raise InputError(f"cannot parse direction {text!r}; expected comma-separated numbers") from None
    if not any(vals):
        raise InputError("direction must be nonzero")
    return vals


def _parse_krange(text: str) -> range:
    try:
        if ".." in text:
            a, b = text.split("..")
            return range(int(a), int(b) + 1)
        return range(1, int(text) + 1)
    except ValueError:
        raise InputError(f"cannot parse k range {text!r}; use N or A..B") from None


@click.group()
@click.version_option(__version__, prog_name="multibord")
def main():
    """Multiple-point classes of immersions: algebra, geometry, verdicts."""


# ---------------------------------------------------------------- algebra


@main.command()
@click.option("--fixture", "fixture_path", type=click.Path(dir_okay=False), help="Fixture JSON (default: built-in library).")
@click.option("--immersion", "name", required=True, help="Immersion name in the fixture.")
@click.option("--k", "krange", default="1..4", show_default=True, help="Multiplicities: N (1..N) or A..B.")
@click.option("--coeffs", default=None, help="Coefficient mode Z, Q or F<p> (default: the fixture's).")
@click.option("--out", type=click.Path(dir_okay=False), help="Write the report here instead of stdout.")
def algebra(fixture_path, name, krange, coeffs, out):
    """Herbert-Ronga classes and consistency checks for one immersion."""
    argv = {"fixture": fixture_path or "builtin", "immersion": name, "k": krange, "coeffs": coeffs}

    def body(rep: Report) -> int:
        doc = load_fixture(fixture_path) if fixture_path else builtin_fixture()
        F = doc.immersion(name)
        if coeffs:
            F = F.with_coeffs(CoeffSystem.parse(coeffs))
        ks = _parse_krange(krange)
        if ks.start < 1:
            raise DegreeError("multiplicity must be positive")
        kmax = max(ks)
        prov = "immersion_algebra"
        classes = [rep.timed(f"k={k}", multipoint_classes, F, k).to_json() for k in ks]
        chain = [
            {"k": i + 1, "v": v.to_json(), "m": None if m is None else m.to_json()}
            for i, (v, m) in enumerate(herbert_chain(F, kmax))
        ]
        rc = rep.timed("rational_consistency", rational_consistency, F, kmax)
        pf = rep.timed("projection_formula", projection_formula_check, F)
        ok = rc["passed"] and pf["passed"]
        rep.doc.update({
            "fixture_version": doc.version,
            "immersion": {
                "name": F.name, "source": F.source.name, "target": F.target.name,
                "n": F.n, "m": F.m, "codim": F.codim, "unoriented_extension": F.unoriented_extension,
            },
            "mode": F.mode,
            "provenance": prov,
            "tolerance": "exact",
            "classes": classes,
            "herbert_chain": chain,
            "euler": F.euler.to_json(),
            "rational_consistency": _jsonable(rc),
            "projection_formula": _jsonable(pf),
            "verdict": "PASS" if ok else "FAIL",
        })
        return EXIT_OK if ok else EXIT_FAIL

    _run(Report("algebra", argv), out, body)


# ---------------------------------------------------------------- geometry


def _load_shape(builtin: Optional[str], input_path: Optional[str], resolution: Optional[int]):
    """Returns (shape, parametric or None)."""
    if bool(builtin) == bool(input_path):
        raise InputError("give exactly one of --builtin or --input")
    if input_path:
        return read_shape(input_path), None
    if builtin in MESH_BUILTINS:
        return builtin_mesh(builtin, resolution or 16), None
    if builtin not in PARAMETRIC_BUILTINS:
        raise InputError(f"unknown built-in {builtin!r}; choose from {', '.join(PARAMETRIC_BUILTINS + MESH_BUILTINS)}")
    geo = builtin_fixture().geometry.get(builtin, {})
    params = {k: v for k, v in geo.get("params", {}).items() if k not in ("resolution", "vertices")}
    p = builtin_parametric(builtin, params)
    if p.kind == "circle":
        n = resolution or geo.get("params", {}).get("vertices", 256)
        return p.polygon(int(n)), p
    n = resolution or geo.get("params", {}).get("resolution", 16)
    return p.mesh(int(n)), p


def _certificate(shape, double: bool, triple: bool):
    """General-position certificate matching the requested computations."""
    if isinstance(shape, ImmersedPolyCurve):
        return segment_crossings
    if shape.ambient == 4:
        return mesh_double_points_r4
    if double or triple:
        return mesh_double_locus_r3
    return None


def _svg(path: str, polylines: list) -> None:
    pts = [q for line in polylines for q in line]
    if not pts:
        Path(path).write_text('<svg xmlns="http://www.w3.org/2000/svg"/>\n', encoding="utf-8")
        return
    P = np.asarray(pts, dtype=float)[:, :2]
    lo, hi = P.min(0), P.max(0)
    scale = 480.0 / max(float((hi - lo).max()), 1e-12)
    body = []
    for line in polylines:
        Q = (np.asarray(line, dtype=float)[:, :2] - lo) * scale + 10
        d = " ".join(f"{x:.2f},{500 - y:.2f}" for x, y in Q)
        body.append(f'<polyline fill="none" stroke="black" stroke-width="1" points="{d}"/>')
    Path(path).write_text(
        '<svg xmlns="http://www.w3.org/2000/svg" width="500" height="500">\n' + "\n".join(body) + "\n</svg>\n",
        encoding="utf-8",
    )


@main.command()
@click.option("--builtin", help="Built-in shape: " + ", ".join(PARAMETRIC_BUILTINS + MESH_BUILTINS) + ".")
@click.option("--input", "input_path", type=click.Path(exists=True, dir_okay=False), help="OFF/4OFF or JSON shape file.")
@click.option("--resolution", type=int, help="Mesh resolution (surfaces) or vertex count (curves).")
@click.option("--ambient", type=int, help="Expected ambient dimension (checked).")
@click.option("--seed", type=int, default=1, show_default=True)
@click.option("--perturb", "magnitude", default="1/10000000", show_default=True, help="Perturbation size relative to the bbox diagonal; 0 disables.")
@click.option("--double", is_flag=True, help="Double points (R^2, R^4) or the double curve (R^3).")
@click.option("--triple", is_flag=True, help="Triple points of a surface in R^3.")
@click.option("--pushoff", is_flag=True, help="Normal Euler number of a surface in R^4.")
@click.option("--fold", "fold_dirs", multiple=True, help="Fold locus for direction u (surfaces in R^3), e.g. 0,0,1.")
@click.option("--tangent", "tangent_dirs", multiple=True, help="Tangent-direction points for u (curves in R^2, surfaces in R^4).")
@click.option("--records/--no-records", default=True, show_default=True, help="Include individual intersection records.")
@click.option("--svg", type=click.Path(dir_okay=False), help="Best-effort SVG of double/fold curves (first two coordinates).")
@click.option("--out", type=click.Path(dir_okay=False))
def geometry(builtin, input_path, resolution, ambient, seed, magnitude, double, triple, pushoff, fold_dirs, tangent_dirs, records, svg, out):
    """Self-intersection data of a PL curve or surface."""
    argv = {
        "builtin": builtin, "input": input_path, "resolution": resolution, "seed": seed, "perturb": magnitude,
        "double": double, "triple": triple, "pushoff": pushoff, "fold": list(fold_dirs), "tangent": list(tangent_dirs),
    }

    def body(rep: Report) -> int:
        shape, param = _load_shape(builtin, input_path, resolution)
        if ambient is not None and shape.ambient != ambient:
            raise InputError(f"shape lives in R^{shape.ambient}, not R^{ambient}")
        m = shape.ambient
        is_curve = isinstance(shape, ImmersedPolyCurve)
        n = 1 if is_curve else 2
        codim = m - n
        rep.doc.update({
            "shape": {"name": shape.name, "ambient": m, "source_dim": n, "vertices": int(len(shape.grid))},
            "seeds": [seed],
            "tolerance": "exact predicates",
        })
        if not is_curve:
            rep.doc["shape"]["triangles"] = shape.domain.n_triangles
            rep.doc["shape"]["orientable"] = shape.domain.orientable
        cert = _certificate(shape, double, triple)
        if magnitude not in ("0", "0.0"):
            shape, _, attempt = rep.timed("perturb", perturb_generic, shape, seed, magnitude, cert)
            rep.doc["perturbation"] = {"magnitude": magnitude, "seed": seed, "attempt": attempt}
        else:
            rep.doc["perturbation"] = None
        results: dict = {}
        svg_lines: list = []
        prov = "pl_geometry"

        if double:
            if is_curve or m == 4:
                recs = rep.timed("double", segment_crossings if is_curve else mesh_double_points_r4, shape)
                cnt = signed_count(recs, 2, codim)
                results["double"] = {
                    "provenance": prov,
                    "count": {**cnt.to_json()},
                    "calibrated_sign": CALIBRATED_SIGN,
                    "sign_parity_exceptions": sign_parity_exceptions(recs, codim),
                }
                if records:
                    results["double"]["records"] = [r.to_json() for r in recs]
            elif m == 3:
                segs = rep.timed("double", mesh_double_locus_r3, shape)
                curves = rep.timed("assemble", assemble_curves, segs)
                cls = homology_class(double_preimage_chain(shape.domain, segs), shape.domain)
                results["double"] = {
                    "provenance": "multipoint",
                    "mode": "F2",
                    "segments": len(segs),
                    "curves": [{"length": len(c), "multiplicity": c.multiplicity} for c in curves],
                    "preimage_class": cls.to_json(),
                }
                if records:
                    results["double"]["segment_records"] = [s.to_json() for s in segs]
                svg_lines += [[q for q in s.points] for s in segs]
            else:
                raise InputError(f"no double-point computation for a surface in R^{m}")

        if triple:
            if is_curve or m != 3:
                raise InputError("--triple needs a surface in R^3")
            recs = rep.timed("triple", mesh_triple_points_r3, shape)
            cnt = signed_count(recs, 3, codim)
            results["triple"] = {
                "provenance": prov,
                "count": cnt.to_json(),
                "sign_parity_exceptions": sign_parity_exceptions(recs, codim),
            }
            if records:
                results["triple"]["records"] = [r.to_json() for r in recs]

        if pushoff:
            if is_curve or m != 4:
                raise InputError("--pushoff needs a surface in R^4")
            po = rep.timed("pushoff", pushoff_euler_number, shape, seed)
            results["pushoff"] = {"provenance": prov, "mode": "Z", **po.to_json()}

        if fold_dirs:
            if param is None or param.ambient != 3 or is_curve:
                raise InputError("--fold needs a parametric built-in surface in R^3")
            out_f = []
            for text in fold_dirs:
                u = _parse_vector(text)
                fl = rep.timed(f"fold {text}", fold_locus, param, u, shape.domain)
                cls = homology_class(fl.chain, shape.domain)
                out_f.append({"provenance": "pl_geometry", "mode": "F2", **fl.to_json(), "class": cls.to_json()})
                for c in fl.curves:
                    svg_lines.append([param(np.atleast_2d(fl.crossings[e]))[0] for e in c])
            results["fold"] = out_f

        if tangent_dirs:
            if param is None:
                raise InputError("--tangent needs a parametric built-in")
            out_t = []
            for text in tangent_dirs:
                u = _parse_vector(text)
                pts = rep.timed(f"tangent {text}", tangent_direction_points, param, u, None if is_curve else shape.domain)
                out_t.append({
                    "provenance": "pl_geometry",
                    "mode": "Z",
                    "direction": list(u),
                    "count": len(pts),
                    "signed_total": sum(q.sign for q in pts),
                    "points": [q.to_json() for q in pts],
                })
            results["tangent"] = out_t

        if not results:
            raise InputError("nothing requested; pass --double, --triple, --pushoff, --fold or --tangent")
        if svg:
            try:
                _svg(svg, svg_lines)
            except OSError as exc:
                click.echo(f"warning: cannot write SVG: {exc}", err=True)
        rep.doc["results"] = _jsonable(results)
        rep.doc["verdict"] = "OK"
        return EXIT_OK

    _run(Report("geometry", argv), out, body)


# ---------------------------------------------------------------- verify


@main.group()
def verify():
    """Run a double-point or Euler-number verdict on a registered case."""


def _verify(kind: str, case_name: str, seeds, resolutions, out):
    argv = {"check": kind, "case": case_name, "seeds": list(seeds), "resolutions": list(resolutions)}

    def body(rep: Report) -> int:
        from dataclasses import replace

        case = get_case(case_name)
        if seeds:
            case = replace(case, seeds=tuple(seeds))
        if resolutions:
            case = replace(case, resolutions=tuple(resolutions))
        fn = verify_lemma_double if kind == "lemma2" else verify_euler_corollary
        res = rep.timed(kind, fn, case)
        rep.doc.update(_jsonable(res))
        rep.doc["provenance"] = "multipoint"
        rep.doc["tolerance"] = "exact"
        return EXIT_OK if res["verdict"] == "PASS" else EXIT_FAIL

    _run(Report(f"verify {kind}", argv), out, body)


_seed_opt = click.option("--seed", "seeds", type=int, multiple=True, help="Override the case seeds (repeatable).")
_res_opt = click.option("--resolution", "resolutions", type=int, multiple=True, help="Override the case resolutions (repeatable).")
_out_opt = click.option("--out", type=click.Path(dir_okay=False))


@verify.command("lemma2")
@click.option("--case", "case_name", required=True)
@_seed_opt
@_res_opt
@_out_opt
def verify_lemma2(case_name, seeds, resolutions, out):
    """Double-point class against the tangent-direction class."""
    _verify("lemma2", case_name, seeds, resolutions, out)


@verify.command("euler")
@click.option("--case", "case_name", required=True)
@_seed_opt
@_res_opt
@_out_opt
def verify_euler(case_name, seeds, resolutions, out):
    """Normal Euler number: pushoff, tangent directions, double points."""
    _verify("euler", case_name, seeds, resolutions, out)


if __name__ == "__main__":
    main()
