import json

import pytest
from click.testing import CliRunner

from multibord.cli import main
from multibord.fixtures import builtin_fixture_document


def run(*args):
    res = CliRunner().invoke(main, list(args))
    doc = json.loads(res.stdout) if res.stdout.strip() else None
    return res.exit_code, doc


def strip_time(doc):
    doc = dict(doc)
    doc.pop("timestamp")
    return json.dumps(doc, sort_keys=True)


def test_algebra_embedding():
    code, doc = run("algebra", "--immersion", "cp1_in_cp2", "--k", "1..4")
    assert code == 0 and doc["verdict"] == "PASS"
    assert all(all(c == "0" for c in row["v_scaled"]["coords"]) for row in doc["classes"][1:])
    assert doc["mode"] == "Z" and doc["provenance"] == "immersion_algebra"


def test_algebra_boy_mod2():
    code, doc = run("algebra", "--immersion", "rp2_r3_boy", "--k", "3")
    assert code == 0
    v = [row["v"] for row in doc["herbert_chain"]]
    assert v[1] == {"degree": 1, "coords": ["1"]} and v[2] == {"degree": 2, "coords": ["1"]}
    assert doc["immersion"]["unoriented_extension"] is True


def test_algebra_whitney_rational():
    code, doc = run("algebra", "--immersion", "whitney_s2_r4", "--k", "2", "--coeffs", "Q")
    assert code == 0
    assert doc["classes"][-1]["v"]["coords"] == ["-2"]


def test_algebra_errors(tmp_path):
    assert run("algebra", "--immersion", "nope")[0] == 2
    assert run("algebra", "--immersion", "cp1_in_cp2", "--k", "0..2")[0] == 3
    bad = builtin_fixture_document()
    bad["immersions"]["cp1_in_cp2"]["pullback"] = {"2": [["1", "2"]]}
    path = tmp_path / "bad.json"
    path.write_text(json.dumps(bad))
    code, doc = run("algebra", "--fixture", str(path), "--immersion", "cp1_in_cp2")
    assert code == 2 and doc["verdict"] == "ERROR"
    assert run("algebra", "--immersion", "torus_r3", "--coeffs", "Q")[0] == 3


def test_geometry_examples(tmp_path):
    code, doc = run("geometry", "--builtin", "figure8", "--double")
    assert code == 0 and doc["results"]["double"]["count"]["geometric_points"] == 1
    code, doc = run("geometry", "--builtin", "boy", "--triple", "--no-records")
    assert code == 0 and doc["results"]["triple"]["count"]["geometric_points"] == 1
    svg = tmp_path / "fold.svg"
    code, doc = run("geometry", "--builtin", "torus", "--fold", "0,0,1", "--svg", str(svg))
    fold = doc["results"]["fold"][0]
    assert code == 0 and fold["curve_count"] == 2 and fold["class"]["zero"]
    assert svg.read_text().startswith("<svg")


def test_geometry_genericity_exit():
    code, doc = run("geometry", "--builtin", "figure8", "--double", "--perturb", "0")
    assert code == 4
    assert doc["error"]["type"] == "GenericityError"
    assert len(doc["error"]["detail"]["simplices"]) == 2


def test_geometry_input_errors(tmp_path):
    assert run("geometry", "--builtin", "torus")[0] == 2
    assert run("geometry", "--builtin", "klein", "--double")[0] == 2
    assert run("geometry", "--builtin", "circle", "--pushoff")[0] == 2
    assert run("geometry", "--builtin", "whitney", "--resolution", "4", "--double", "--ambient", "3")[0] == 2
    off = tmp_path / "m.off"
    off.write_text("OFF\n3 1 0\n0 0 0\n1 0 0\n0 1 0\n3 0 1 2\n")
    assert run("geometry", "--input", str(off), "--double")[0] == 2


def test_geometry_off_input(tmp_path):
    from multibord.pl_geometry import builtin_parametric, write_off

    path = tmp_path / "w.off"
    write_off(builtin_parametric("whitney").mesh(6), path)
    code, doc = run("geometry", "--input", str(path), "--double", "--pushoff")
    assert code == 0
    assert doc["results"]["double"]["count"]["ordered_total"] == -2
    assert doc["results"]["pushoff"]["euler_number"] == 2


def test_verify_examples():
    code, doc = run("verify", "lemma2", "--case", "torus-r3", "--resolution", "16", "--seed", "1")
    assert code == 0 and doc["verdict"] == "PASS"
    for key in ("case", "lhs", "rhs", "mode", "verdict", "seeds", "resolutions"):
        assert key in doc
    code, doc = run("verify", "euler", "--case", "sphere-r4", "--resolution", "6", "--seed", "1")
    assert code == 0 and doc["value"] == 0
    assert run("verify", "lemma2", "--case", "klein")[0] == 2
    assert run("verify", "euler", "--case", "boy")[0] == 2


def test_reports_deterministic():
    args = ("geometry", "--builtin", "whitney", "--resolution", "8", "--double", "--pushoff", "--seed", "3")
    _, a = run(*args)
    _, b = run(*args)
    assert strip_time(a) == strip_time(b)
    assert "timestamp" in a
