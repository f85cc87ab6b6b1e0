"""Acceptance criteria, one test each.

Every test prints a single ``criterion N: PASS|FAIL ...`` line with the
measured values, then asserts.  Run directly (``python3 tests/test_acceptance.py``)
to get just the eight lines.
"""

from __future__ import annotations

import json
import os
import subprocess
import sys
import time

import pytest

from multibord.fixtures import builtin_fixture
from multibord.immersion_algebra import gysin_shriek, projection_formula_check, pullback, rational_consistency, vk_scaled
from multibord.multipoint import (
    CASES,
    get_case,
    sign_parity_exceptions,
    signed_count,
    verify_lemma_double,
)
from multibord.pl_geometry import (
    builtin_mesh,
    builtin_parametric,
    mesh_double_locus_r3,
    mesh_double_points_r4,
    mesh_triple_points_r3,
    perturb_generic,
    pushoff_euler_number,
    segment_crossings,
    tangent_direction_points,
)
from multibord.pl_geometry import parallel


def _line(n: int, ok: bool, detail: str) -> str:
    return f"criterion {n}: {'PASS' if ok else 'FAIL'}  {detail}"


def _emit(capsys, text: str) -> None:
    if capsys is None:
        print(text)
    else:
        with capsys.disabled():
            print("\n" + text)


# ---------------------------------------------------------------- criteria


def criterion_1():
    fix = builtin_fixture()
    bad = []
    for name, F in sorted(fix.immersions.items()):
        rc = rational_consistency(F, 4)
        pf = projection_formula_check(F)
        if not (rc["passed"] and pf["passed"]):
            bad.append(name)
    ok = not bad
    return ok, f"{len(fix.immersions)} fixtures, rational consistency k<=4 and projection formula exact; failing: {bad or 'none'}"


def criterion_2():
    F = builtin_fixture().immersion("cp1_in_cp2")
    e_ok = F.euler == pullback(F, gysin_shriek(F, F.source.ring.unit()))
    vs = {k: vk_scaled(F, k) for k in (2, 3, 4)}
    v_ok = all(v.is_zero() for v in vs.values())
    return e_ok and v_ok, f"e = f*f_!(1): {e_ok}; vk_scaled zero for k=2,3,4: {v_ok}"


def criterion_3():
    """Whitney sphere: pushoff, ordered signed doubles and -tangent total agree, |.| = 2."""
    t0 = time.perf_counter()
    case = get_case("whitney")
    p = case.parametric()
    resolutions = (13, 26)
    rows = []
    tangent = {}
    for res in resolutions:
        dom = p.domain(res)
        for u in case.directions:
            tangent[(res, u)] = sum(q.sign for q in tangent_direction_points(p, u, dom))
        for seed in case.seeds:
            mesh, recs, _ = perturb_generic(p.mesh(res), seed, certify=mesh_double_points_r4)
            ordered = signed_count(recs, 2, 2).ordered_total
            po = pushoff_euler_number(mesh, seed).euler
            for u in case.directions:
                rows.append((res, mesh.domain.n_triangles, seed, u, po, ordered, -tangent[(res, u)]))
    elapsed = time.perf_counter() - t0
    values = {(r[4], r[5], r[6]) for r in rows}
    agree = all(a == b == c and abs(a) == 2 for a, b, c in values)
    ok = agree and elapsed <= 60
    tri = sorted({r[1] for r in rows})
    detail = (
        f"(pushoff, ordered, -tangent) over {len(rows)} runs (triangles {tri}, seeds {list(case.seeds)}, "
        f"3 directions) = {sorted(values)}; {elapsed:.1f}s of 60s"
    )
    return ok, detail


def criterion_4():
    t0 = time.perf_counter()
    rep = verify_lemma_double(get_case("boy"))
    elapsed = time.perf_counter() - t0
    runs = rep["runs"]
    nonzero = all(r["lhs"]["coords"] == [1] and r["rhs"]["coords"] == [1] for r in runs)
    ok = rep["verdict"] == "PASS" and nonzero and elapsed <= 90
    tri = sorted({r["triangles"] for r in runs})
    return ok, (
        f"Boy double-preimage class = fold class = w1-dual for {len(runs)} runs "
        f"(triangles {tri}, {len(rep['directions'])} directions): {rep['verdict']}; {elapsed:.1f}s of 90s"
    )


def criterion_5():
    torus = verify_lemma_double(get_case("torus-r3"))
    circle = verify_lemma_double(get_case("circle-r2"))
    t_zero = all(r["lhs"]["zero"] and r["rhs"]["zero"] for r in torus["runs"])
    c_ok = all(r["ordered_total"] == 0 and r["tangent_points"] % 2 == 0 for r in circle["runs"])
    ok = torus["verdict"] == "PASS" and circle["verdict"] == "PASS" and t_zero and c_ok
    return ok, f"torus classes both 0: {t_zero} ({torus['verdict']}); circle doubles 0 and tangent count even: {c_ok} ({circle['verdict']})"


def criterion_6():
    from click.testing import CliRunner

    from multibord.cli import main

    res = CliRunner().invoke(main, ["algebra", "--immersion", "rp2_r3_boy", "--k", "3"])
    doc = json.loads(res.stdout)
    v3 = doc["herbert_chain"][2]["v"]
    alg_nonzero = any(c != "0" for c in v3["coords"])
    mesh, segs, _ = perturb_generic(builtin_parametric("boy").mesh(26), 1, certify=mesh_double_locus_r3)
    cnt = signed_count(mesh_triple_points_r3(mesh, segs), 3, 1)
    ok = res.exit_code == 0 and alg_nonzero and cnt.geometric_points == 1 and cnt.unordered_total == 1
    return ok, f"Boy mesh triple points = {cnt.geometric_points}; algebra v3 = {v3['coords']} in degree {v3['degree']} (F2)"


def _cli_report(args, threads: int) -> dict:
    env = dict(os.environ, MULTIBORD_THREADS=str(threads))
    out = subprocess.run(
        [sys.executable, "-m", "multibord.cli", *args], env=env, capture_output=True, text=True, check=False
    )
    doc = json.loads(out.stdout)
    doc.pop("timestamp")
    return doc


def criterion_7():
    args = ["geometry", "--builtin", "whitney", "--resolution", "13", "--double", "--pushoff", "--seed", "5"]
    a, b = _cli_report(args, 1), _cli_report(args, 1)
    same_seed = json.dumps(a, sort_keys=True) == json.dumps(b, sort_keys=True)
    c = _cli_report(args, 2)
    cli_threads = json.dumps(a, sort_keys=True) == json.dumps(c, sort_keys=True)
    # small chunks force the process pool to actually split the work
    old_chunk, old_env = parallel.CHUNK, os.environ.get("MULTIBORD_THREADS")
    try:
        parallel.CHUNK = 500
        mesh, _, _ = perturb_generic(builtin_parametric("boy").mesh(20), 2, certify=mesh_double_locus_r3)
        os.environ["MULTIBORD_THREADS"] = "1"
        serial = [s.to_json() for s in mesh_double_locus_r3(mesh)]
        os.environ["MULTIBORD_THREADS"] = "2"
        pooled = [s.to_json() for s in mesh_double_locus_r3(mesh)]
    finally:
        parallel.CHUNK = old_chunk
        if old_env is None:
            os.environ.pop("MULTIBORD_THREADS", None)
        else:
            os.environ["MULTIBORD_THREADS"] = old_env
    chunks_equal = serial == pooled
    ok = same_seed and cli_threads and chunks_equal
    return ok, (
        f"same seed byte-identical: {same_seed}; report 1 vs 2 threads identical: {cli_threads}; "
        f"chunked pool vs serial double locus identical: {chunks_equal} ({len(serial)} segments)"
    )


def criterion_8():
    checked, exceptions = [], 0
    for name in ("whitney", "whitney-mirrored", "whitney-reversed", "sphere-r4"):
        case = CASES[name]
        for res in case.resolutions:
            for seed in case.seeds:
                mesh = case.parametric().mesh(res)
                if case.mirrored:
                    mesh = mesh.mirrored()
                if case.reversed:
                    mesh = mesh.reversed()
                _, recs, _ = perturb_generic(mesh, seed, certify=mesh_double_points_r4)
                exceptions += len(sign_parity_exceptions(recs, 2))
                checked.append(len(recs))
    for name in ("circle-r2", "figure8", "limacon"):
        case = CASES[name]
        for res in case.resolutions:
            for seed in case.seeds:
                _, recs, _ = perturb_generic(case.parametric().polygon(res), seed, certify=segment_crossings)
                exceptions += len(sign_parity_exceptions(recs, 1))
                checked.append(len(recs))
    for seed in (1, 2):
        m, segs, _ = perturb_generic(builtin_mesh("three_pancakes", 8), seed, certify=mesh_double_locus_r3)
        recs = mesh_triple_points_r3(m, segs)
        exceptions += len(sign_parity_exceptions(recs, 1))
        checked.append(len(recs))
    ok = exceptions == 0
    return ok, f"{sum(checked)} ordered records over {len(checked)} runs, {exceptions} parity exceptions"


# ---------------------------------------------------------------- pytest wrappers


def _run(n, fn, capsys):
    ok, detail = fn()
    _emit(capsys, _line(n, ok, detail))
    assert ok, detail


def test_criterion_1_algebra_coherence(capsys):
    _run(1, criterion_1, capsys)


def test_criterion_2_embedding_vanishing(capsys):
    _run(2, criterion_2, capsys)


def test_criterion_3_whitney_triangle(capsys):
    _run(3, criterion_3, capsys)


def test_criterion_4_boy_double_class(capsys):
    _run(4, criterion_4, capsys)


def test_criterion_5_trivial_cases(capsys):
    _run(5, criterion_5, capsys)


def test_criterion_6_triple_point(capsys):
    _run(6, criterion_6, capsys)


def test_criterion_7_determinism(capsys):
    _run(7, criterion_7, capsys)


def test_criterion_8_sign_parity(capsys):
    _run(8, criterion_8, capsys)


if __name__ == "__main__":
    results = []
    for i, fn in enumerate((criterion_1, criterion_2, criterion_3, criterion_4, criterion_5, criterion_6, criterion_7, criterion_8), 1):
        ok, detail = fn()
        print(_line(i, ok, detail), flush=True)
        results.append(ok)
    sys.exit(0 if all(results) else 1)
