import json
from fractions import Fraction

import numpy as np
import pytest

from revbif.io import (SystemFile, SystemFileError, dump_results, dump_system, load_results,
                       load_system, parse_system, write_csv)
from revbif.templates import standard_structure

COULOMB = """dimension: 4
variables: x, u, y, v
order: 4
involution: R0hat
constants: q = 1, a = 1, b = 0
H = -q/sqrt((x-a)^2+(y-b)^2) + q/sqrt((x+a)^2+(y+b)^2)
"""


def test_round_trip(tmp_path, rng):
    for _ in range(5):
        c = [Fraction(int(v), 7) for v in rng.integers(-3, 4, size=3)]
        H = f"x1*y2 - x2*y1 + ({c[0]})*x1^3*y1 + ({c[1]})*y1*x2^2*y2 + ({c[2]})*x1*y1^3"
        S = parse_system(f"dimension: 4\norder: 5\ninvolution: R0hat\nH = {H}\n")
        p = tmp_path / "s.sys"
        p.write_text(dump_system(S))
        assert load_system(p) == S


def test_bad_involution_names_field():
    with pytest.raises(SystemFileError) as exc:
        parse_system("dimension: 4\ninvolution: [[1,1,0,0],[0,1,0,0],[0,0,1,0],[0,0,0,1]]\nH = x1\n")
    assert exc.value.field == "involution"


def test_default_structure():
    S = parse_system("dimension: 4\ninvolution: R0\nH = x1^2 + y1^2\n")
    assert np.array_equal(S.symplectic, standard_structure(4))
    assert S.symplectic_name == "standard"


def test_missing_hamiltonian():
    with pytest.raises(SystemFileError):
        parse_system("dimension: 4\ninvolution: R0\n")


def test_coulomb_file_jet():
    S = parse_system(COULOMB)
    H = S.jet()
    assert H.degree in (3, 4)
    assert all(sum(e) % 2 == 1 for e, _ in H.items())


def test_results_document(tmp_path):
    p = dump_results({"value": Fraction(1, 3), "arr": np.arange(3)}, tmp_path / "r.json",
                     kind="test", provenance={"seed": 7})
    doc = load_results(p, kind="test")
    assert doc["payload"] == {"value": "1/3", "arr": [0, 1, 2]}
    assert doc["provenance"]["seed"] == 7
    with pytest.raises(SystemFileError):
        load_results(p, kind="other")
    assert not list(tmp_path.glob(".*.tmp"))


def test_csv(tmp_path):
    p = write_csv(tmp_path / "t.csv", ["sigma", "amplitude"], [[0.1, 0.3], [0.01, 0.1]])
    assert p.read_text().splitlines()[0] == "sigma,amplitude"
