import csv
import json

import pytest

from revbif.cli import main
from revbif.demos import demo_text

ZERO_RESULTANT_62 = """dimension: 6
order: 4
involution: R1hat
symplectic: canonical
coordinates: canonical
H = (x2*y3 - x3*y2) + (x1 + y1)*(x3^2 + y3^2)
"""


def load(p):
    return json.loads(p.read_text())


@pytest.fixture
def demo42(tmp_path):
    p = tmp_path / "d42.sys"
    p.write_text(demo_text("4:2"))
    return p


def test_unknown_subcommand():
    with pytest.raises(SystemExit) as exc:
        main(["frobnicate"])
    assert exc.value.code != 0


def test_symbolic_artifacts(tmp_path, demo42):
    out = tmp_path / "o"
    for cmd in ("normalize", "nf", "reduce", "branches"):
        assert main([cmd, "--input", str(demo42), "--out", str(out), "--seed", "5"]) == 0
    for name in ("canonical_model.json", "normal_form.json", "reduced_map.json", "branches.json"):
        doc = load(out / name)
        assert doc["schema_version"] == "1.0"
        prov = doc["provenance"]
        assert prov["case"] == "4:2" and prov["seed"] == 5 and len(prov["config_hash"]) == 16
        assert prov["input_sha256"]
    br = load(out / "branches.json")["payload"]
    assert br["verdict"] == "families" and len(br["families"]) == 2
    assert (out / "branch_table.csv").exists()


def test_branches_outside_is_not_failure(tmp_path, capsys):
    p = tmp_path / "z.sys"
    p.write_text(ZERO_RESULTANT_62)
    assert main(["branches", "--input", str(p), "--out", str(tmp_path)]) == 0
    assert load(tmp_path / "branches.json")["payload"]["verdict"] == "outside"
    assert "outside" in capsys.readouterr().out


def test_reproducible_bytes(tmp_path, demo42):
    a, b = tmp_path / "a", tmp_path / "b"
    for out in (a, b):
        assert main(["branches", "--input", str(demo42), "--out", str(out)]) == 0
    assert (a / "branches.json").read_bytes() == (b / "branches.json").read_bytes()
    assert (a / "branch_table.csv").read_bytes() == (b / "branch_table.csv").read_bytes()


def test_env_default_out(tmp_path, demo42, monkeypatch):
    monkeypatch.setenv("REVBIF_OUT", str(tmp_path / "env"))
    assert main(["normalize", "--input", str(demo42)]) == 0
    assert (tmp_path / "env" / "canonical_model.json").exists()


def test_stage_error_marker(tmp_path, capsys):
    p = tmp_path / "bad.sys"
    p.write_text("dimension: 4\ninvolution: R0hat\nsymplectic: canonical\nH = x1*y2 - x2*y1 + x1^2\n")
    assert main(["nf", "--input", str(p), "--out", str(tmp_path)]) == 2
    err = capsys.readouterr().err
    assert "symplectic-lin" in err and "normalize" in err
    marker = load(tmp_path / "nf.failed.json")["payload"]
    assert marker["failed"] and marker["module"] == "symplectic-lin"


def test_missing_input(tmp_path):
    assert main(["scan", "--out", str(tmp_path)]) == 2
    assert main(["nf", "--input", str(tmp_path / "nope.sys"), "--out", str(tmp_path)]) == 2


def test_bad_grid():
    with pytest.raises(SystemExit):
        main(["branches", "--sigma-grid", "-1:2:3"])


def test_verify_consumes_branches(tmp_path, demo42):
    out = tmp_path / "o"
    grid = "1e-5:1e-2:4"
    assert main(["branches", "--input", str(demo42), "--out", str(out), "--sigma-grid", grid]) == 0
    assert main(["verify", "--input", str(out / "branches.json"), "--out", str(out)]) == 0
    rows = list(csv.DictReader((out / "continuation.csv").open()))
    assert len(rows) == 8
    assert {"sigma", "amplitude", "period", "closure_residual", "fix_residual"} <= set(rows[0])
    orbits = load(out / "orbits.json")["payload"]
    assert orbits["passed"]


def test_scan_small(tmp_path):
    p = tmp_path / "d62.sys"
    p.write_text(demo_text("6:2"))
    assert main(["scan", "--input", str(p), "--out", str(tmp_path), "--scan-seeds", "50"]) == 0
    rep = load(tmp_path / "scan.json")["payload"]
    assert rep["count"] == 50 and not rep["found"]
    assert sum(rep["outcomes"].values()) == 50


@pytest.mark.slow
def test_demo_42(tmp_path, capsys):
    assert main(["demo", "--case", "4:2", "--out", str(tmp_path)]) == 0
    out = capsys.readouterr().out
    assert "FAIL" not in out and "families" in out
    assert load(tmp_path / "demo_summary.json")["payload"]["passed"]
