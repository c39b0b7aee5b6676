from fractions import Fraction

import numpy as np
import pytest

from revbif.demos import demo_system
from revbif.io import parse_system
from revbif.normal_forms import birkhoff_normalize
from revbif.pipeline import analyze_system
from revbif.poly import Poly, PolyVector
from revbif.reduction import (BranchFamily, anti_equivariance_defect, build_reduced_map,
                              equivariance_defect, lift, numeric_branch_continue,
                              quadratic_resultant, restrict_to_fix)
from revbif.symplectic import canonical_model
from revbif.templates import canonical_h2

H42 = "(x1*y2 - x2*y1)"
H6 = "(x2*y3 - x3*y2)"


def canonical_system(n, R, H, order=4):
    return parse_system(f"dimension: {n}\norder: {order}\ninvolution: {R}\n"
                        f"symplectic: canonical\ncoordinates: canonical\nH = {H}\n")


def test_linear_only_gives_sigma_Su():
    m = canonical_model("4:2")
    nf = birkhoff_normalize(canonical_h2(4), 4, m)
    rm = build_reduced_map(nf, m)
    sigma = Poly.var(5, 4)
    Su = PolyVector.linear(m.A_hat)
    assert all((b - lift(s) * sigma).is_zero() for b, s in zip(rm.B, Su))
    G = restrict_to_fix(rm)
    assert [g.to_text(G.names) for g in G.G] == ["y1*sigma", "y2*sigma"]


@pytest.mark.parametrize("case", ["4:2", "6:2", "6:4"])
def test_demo_identities(case):
    an = analyze_system(demo_system(case))
    rm = an.reduced
    assert equivariance_defect(rm.B, rm.S).is_zero()
    assert anti_equivariance_defect(rm.B, rm.R).is_zero()
    assert all(an.restricted.dropped.values())
    assert rm.certificates["vanishes_at_origin"] and rm.certificates["linear_part_sigma_S"]


@pytest.mark.parametrize("c", [(1, 0, 1), (2, 1, 3), (Fraction(1, 2), -1, 1)])
def test_42_pattern(c):
    q = f"({c[0]})*(x1^2 + y1^2) + ({c[1]})*(x1*x2 + y1*y2) + ({c[2]})*(x2^2 + y2^2)"
    an = analyze_system(canonical_system(4, "R0hat", f"{H42}*(1 + {q})"))
    G = an.restricted
    y1, y2, s = (Poly.var(3, i) for i in range(3))
    a = an.report.coefficients
    quad = a["a1"] * y1 * y1 + a["a2"] * y1 * y2 + a["a3"] * y2 * y2 - s
    assert (G.component("x1") + y1 * quad).is_zero()
    assert (G.component("x2") + y2 * quad).is_zero()
    assert an.report.verdict == "families" and len(an.report.families) == 2


def test_42_demo_laws():
    an = analyze_system(demo_system("4:2"))
    laws = sorted(f.law_text() for f in an.report.families)
    assert laws == ["y1 = +-sqrt(sigma) + ...", "y2 = +-sqrt(sigma) + ..."]
    for f in an.report.families:
        assert f.radicand == 1 and f.sigma_sign == 1
        assert f.period(1e-3) == pytest.approx(2 * np.pi / 1.001)


def test_42_degenerate_outside():
    an = analyze_system(canonical_system(4, "R0hat", f"{H42}*(1 + x2^2 + y2^2)"))
    assert an.report.verdict == "outside" and not an.report.families


def test_resultant_matches_sylvester():
    sp = pytest.importorskip("sympy")
    s, t = sp.symbols("s t")
    rng = np.random.default_rng(3)
    for _ in range(20):
        b = [int(v) for v in rng.integers(-3, 4, size=6)]
        f = b[0] * s ** 2 + b[1] * s + b[2]
        g = b[3] * s ** 2 + b[4] * s + b[5]
        if b[0] == 0 and b[3] == 0:
            continue
        ref = sp.resultant(f, g, s) if b[0] and b[3] else None
        if ref is not None:
            assert quadratic_resultant([Fraction(v) for v in b]) == ref


def test_62_demo_no_branch():
    an = analyze_system(demo_system("6:2"))
    co = an.report.coefficients
    assert [co[f"b{k}"] for k in range(1, 7)] == [1, 0, 0, 0, 0, 1]
    assert co["resultant"] == 1
    assert an.report.verdict == "no-branch"


def test_62_common_factor_outside():
    an = analyze_system(canonical_system(6, "R1hat", f"{H6} + (x1 + y1)*(x3^2 + y3^2)"))
    assert an.report.coefficients["resultant"] == 0
    assert an.report.verdict == "outside"


def test_64_demo_families():
    an = analyze_system(demo_system("6:4"))
    co = an.report.coefficients
    assert (co["a1"], co["a2"], co["a5"], co["a7"]) == (Fraction(1, 2), Fraction(1, 3), 1, 1)
    G = an.restricted
    x1, y1, y2, y3, s = (Poly.var(5, i) for i in range(5))
    common = s + x1 / 2 + y1 / 3 + y2 * y2 + y3 * y3
    assert set(G.component_names()) == {"x2", "x3"}
    assert (G.component("x2") - y2 * common).is_zero()
    assert (G.component("x3") - y3 * common).is_zero()
    assert an.report.verdict == "families"
    ids = {f.family_id for f in an.report.families}
    assert {"G1_b0", "G2_b0"} <= ids and len(ids) == 10


def test_64_degenerate_a5():
    an = analyze_system(canonical_system(6, "R2hat", f"{H6}*(1 - x1/2 - y1/3 - (x3^2 + y3^2))"))
    assert an.report.verdict == "outside" and not an.report.families


def test_refinement_closed_form():
    an = analyze_system(canonical_system(4, "R0hat", f"{H42}*(1 + (x1^2 + y1^2 + x2^2 + y2^2))"))
    f = an.report.families[0]
    rows = numeric_branch_continue(f, [1e-2, 1e-3, 1e-4, 0.0], an.restricted)
    for r in rows:
        assert r["converged"] and r["residual"] <= 1e-12
        assert abs(r["amplitude"] - np.sqrt(r["sigma"])) <= 1e-12
    assert rows[-1]["amplitude"] == 0


def test_refinement_higher_order_correction():
    an = analyze_system(demo_system("4:2", order=6))
    f = next(f for f in an.report.families if f.family_id == "F1")
    sig = [1e-2, 1e-3, 1e-4]
    rows = numeric_branch_continue(f, sig, an.restricted)
    ratio = [(r["amplitude"] - np.sqrt(r["sigma"])) / r["sigma"] ** 1.5 for r in rows]
    # sigma = y^2 + y^4/2 gives y = sqrt(sigma) - sigma^(3/2)/4 + ...
    assert all(abs(v + 0.25) < 0.01 for v in ratio)
    amps = [r["amplitude"] for r in rows]
    assert amps == sorted(amps, reverse=True)
    # scaling law: a_j amp^2 - sigma = o(sigma)
    assert all(abs(r["amplitude"] ** 2 - r["sigma"]) / r["sigma"] < 2 * r["sigma"] for r in rows)


def test_family_round_trip():
    an = analyze_system(demo_system("6:4"))
    for f in an.report.families:
        g = BranchFamily.from_dict(f.to_dict())
        assert g.to_dict() == f.to_dict()
