"""Acceptance suite: one test per criterion, each reporting a PASS/FAIL line.

Run with ``pytest tests/test_acceptance.py -v``; the criterion lines are
printed in the terminal summary.
"""
import math
import time
from fractions import Fraction
from itertools import combinations_with_replacement

import mpmath
import numpy as np
import pytest

from helpers import random_symplectic_float
from nf_helpers import random_anti_poly, random_reversible_field, span_coefficients
from revbif.cli import main
from revbif.demos import demo_system, demo_text
from revbif.exprs import parse_hamiltonian, taylor
from revbif.io import load_results
from revbif.linalg import exact_matrix, rank
from revbif.normal_forms import (ad_matrix, belitskii_normalize, belitskii_residual,
                                 birkhoff_normalize, lie_operator_matrix, split_kernel_range)
from revbif.patterns import hamiltonian_cubic_fields_4d, reversible_cubic_fields_4d
from revbif.pipeline import (PipelineConfig, analyze_system, branches_document, scan_system,
                             verify_document)
from revbif.poly import Poly, PolyVector, poisson_bracket
from revbif.reduction import anti_equivariance_defect, equivariance_defect
from revbif.symplectic import canonical_model, involution_normal_form
from revbif.templates import canonical_h2, canonical_structure, hat_template, involution_template

SIGMAS = list(np.logspace(-2, -5, 10))


def _rdiag(case):
    R = hat_template(case)
    return [int(R[i, i]) for i in range(R.shape[0])]


def test_criterion_1_involution_normalization(criterion):
    c = criterion(1, "involution normal form from 100 random symplectic conjugates per template")
    rng = np.random.default_rng(1)
    t0 = time.time()
    worst, dims_ok, count = 0.0, True, 0
    for n in (4, 6):
        J = np.eye(n)[[k ^ 1 for k in range(n)]] * np.array([1 if k % 2 == 0 else -1 for k in range(n)])[:, None]
        for k in range(0, n + 1, 2):
            tmpl = involution_template(n, k).astype(float)
            for _ in range(100):
                S = random_symplectic_float(rng, n, scale=0.3)
                R = np.linalg.solve(S, tmpl @ S)
                out, T = involution_normal_form(R, J)
                out = out.astype(float)
                res = max(np.abs(np.linalg.solve(T, R @ T) - tmpl).max(),
                          np.abs(T.T @ J @ T - J).max())
                worst = max(worst, res)
                dims_ok &= np.array_equal(out, tmpl) and int(round(np.trace(out) + n)) // 2 == k
                count += 1
    dt = time.time() - t0
    ok = worst <= 1e-9 and dims_ok and dt < 10
    assert c.report(ok, f"{count} conjugates, max residual {worst:.1e}, dim Fix preserved {dims_ok}, {dt:.1f} s")


def test_criterion_2_normal_form_exactness(criterion):
    c = criterion(2, "exact Birkhoff and Belitskii normal forms in the reference families")
    rng = np.random.default_rng(2)
    t0 = time.time()
    m = canonical_model("4:2")
    rd = _rdiag("4:2")
    H = analyze_system(demo_system("4:2")).H_rescaled.truncate(4) + random_anti_poly(rng, 4, 4, rd)
    nf = birkhoff_normalize(H, 4, m)
    K = canonical_structure(4)
    Ht = nf.normalized
    brackets = all(poisson_bracket(Ht.grade(2), Ht.grade(d), K).is_zero() for d in (3, 4))
    anti = (Ht.substitute_linear(hat_template("4:2")) + Ht).is_zero()
    coef = span_coefficients(nf.field().grade(3), hamiltonian_cubic_fields_4d())
    X = PolyVector.linear(m.A_hat) + random_reversible_field(rng, 4, 3, rd)
    bl = belitskii_normalize(X, 3, m)
    resid = belitskii_residual(bl.normalized, m.A_hat).is_zero()
    in12 = span_coefficients(bl.normalized.grade(3), reversible_cubic_fields_4d()) is not None
    dt = time.time() - t0
    ok = brackets and anti and coef is not None and resid and in12 and dt < 30
    acoef = "none" if coef is None else ", ".join(f"{k}={v}" for k, v in coef.items())
    assert c.report(ok, f"brackets zero {brackets}, anti-invariant {anti}, {acoef}; "
                        f"Belitskii residual zero {resid}, in 12-parameter family {in12}; {dt:.1f} s")


def _brute_force_kernel(n, d, rdiag):
    sp = pytest.importorskip("sympy")
    xs = sp.symbols(" ".join(f"v{i}" for i in range(n)))
    K = sp.Matrix(canonical_structure(n).tolist())
    H2 = sp.sympify(canonical_h2(n).to_text([str(x) for x in xs]).replace("^", "**"),
                    locals={str(x): x for x in xs})
    mons = [sp.Mul(*c) for c in combinations_with_replacement(xs, d)]
    gH = [sp.diff(H2, x) for x in xs]

    def bracket(f):
        gf = [sp.diff(f, x) for x in xs]
        return sp.expand(sum(gH[i] * K[i, j] * gf[j] for i in range(n) for j in range(n)))

    imgs = [sp.Poly(bracket(mo), *xs) for mo in mons]
    keys = sorted({t for p in imgs for t in p.as_dict()})
    M = sp.Matrix([[p.as_dict().get(k, 0) for p in imgs] for k in keys])
    N = M.nullspace()
    sign = [int(np.prod([rdiag[i] ** e for i, e in enumerate(sp.Poly(mo, *xs).monoms()[0])])) for mo in mons]
    inv_rows = [j for j, s in enumerate(sign) if s == 1]
    if not N:
        return 0, []
    B = sp.Matrix.hstack(*N)
    anti_dim = B.shape[1] - B.extract(inv_rows, list(range(B.shape[1]))).rank()
    return anti_dim, mons


def test_criterion_3_kernel_dimension_oracle(criterion):
    c = criterion(3, "brute-force kernel dimensions agree with the graded split")
    t0 = time.time()
    rows, ok = [], True
    for case, n, d, expect in (("4:2", 4, 3, 0), ("4:2", 4, 4, 3), ("6:2", 6, 3, 10), ("6:4", 6, 3, 2)):
        rd = _rdiag(case)
        brute, _ = _brute_force_kernel(n, d, rd)
        op = ad_matrix(canonical_h2(n), d, "anti", canonical_structure(n), rd)
        split = split_kernel_range(op).kernel.shape[1]
        ok &= brute == split == expect
        rows.append(f"({case}, d={d}) brute {brute} split {split}")
    # the quartic kernel is spanned by H2 times the three invariant quadratics
    op = ad_matrix(canonical_h2(4), 4, "anti", canonical_structure(4), _rdiag("4:2"))
    kern = split_kernel_range(op).kernel
    x1, y1, x2, y2 = (Poly.var(4, i) for i in range(4))
    fam = [canonical_h2(4) * q for q in (x1 * x1 + y1 * y1, x1 * x2 + y1 * y2, x2 * x2 + y2 * y2)]
    F = exact_matrix(np.array([list(op.coords(p)) for p in fam], dtype=object).T)
    same = rank(F) == 3 and rank(np.concatenate([F, kern], axis=1)) == 3
    ok &= same
    dt = time.time() - t0
    assert c.report(ok, "; ".join(rows) + f"; quartic kernel = H2 x {{three quadratics}} {same}; {dt:.1f} s")


def test_criterion_4_two_families_42(criterion, tmp_path):
    c = criterion(4, "4:2 demo: two square-root families verified by shooting")
    t0 = time.time()
    sysf = tmp_path / "d42.sys"
    sysf.write_text(demo_text("4:2"))
    grid = ",".join(f"{s:.17g}" for s in SIGMAS)
    rc1 = main(["branches", "--input", str(sysf), "--out", str(tmp_path), "--sigma-grid", grid])
    doc = load_results(tmp_path / "branches.json", kind="branches")["payload"]
    laws = sorted(e["family"]["leading_law"] for e in doc["families"])
    laws_ok = laws == ["y1 = +-sqrt(sigma) + ...", "y2 = +-sqrt(sigma) + ..."]
    rc2 = main(["verify", "--input", str(tmp_path / "branches.json"), "--out", str(tmp_path)])
    res = load_results(tmp_path / "orbits.json", kind="orbits")["payload"]
    fams = res["families"]
    closure = max(r["closure_residual"] for r in res["records"])
    slopes = [f["checks"]["slope"] for f in fams]
    perr = max(f["checks"]["period_limit_error"] for f in fams)
    dt = time.time() - t0
    ok = (rc1 == 0 and rc2 == 0 and laws_ok and len(fams) == 2 and closure <= 1e-10
          and all(abs(s - 0.5) <= 0.02 for s in slopes) and perr <= 1e-4 and dt < 120)
    assert c.report(ok, f"laws {laws}; closure {closure:.1e}; slopes {[round(s, 4) for s in slopes]}; "
                        f"period error {perr:.1e}; {dt:.1f} s")


def test_criterion_5_absence_62(criterion):
    c = criterion(5, "6:2 demo: nonzero resultant and an empty 10^4-seed scan, positive control finds orbits")
    t0 = time.time()
    an = analyze_system(demo_system("6:2"))
    co = an.report.coefficients
    pair = [co[f"b{k}"] for k in range(1, 7)] == [1, 0, 0, 0, 0, 1]
    res = co["resultant"]
    exact = isinstance(res, Fraction) and res != 0
    rep = scan_system(demo_system("6:2"), 10000, 0.1, 0.5, seed=0)
    nontrivial = [r for r in rep["found"]]
    pos = scan_system(demo_system("4:2"), 200, 0.1, 0.5, seed=0)
    dt = time.time() - t0
    ok = pair and exact and rep["count"] == 10000 and not nontrivial and pos["found"] and dt < 300
    assert c.report(ok, f"pair (x2^2, x3^2) {pair}; resultant {res}; scan outcomes {rep['outcomes']}; "
                        f"positive control found {len(pos['found'])}/200; {dt:.1f} s")


def test_criterion_6_two_parameter_families_64(criterion):
    c = criterion(6, "6:4 demo: five lambda directions, amplitude -> 0, period -> 2 pi / alpha (alpha = 1, 2)")
    t0 = time.time()
    details, ok = [], True
    for alpha in (1, 2):
        an = analyze_system(demo_system("6:4", alpha))
        co = an.report.coefficients
        ok &= co["a5"] == 1 and co["a7"] == 1
        doc = branches_document(an, SIGMAS)
        dirs = {tuple(e["family"]["center_direction"]) for e in doc["families"]}
        res = verify_document(doc)
        target = 2 * math.pi / alpha
        perr = max(f["checks"]["period_limit_error"] for f in res["families"])
        last_amp = max(r["amplitude"] for r in res["records"] if math.isclose(abs(r["sigma"]), min(SIGMAS)))
        ok &= len(dirs) == 5 and ((1.0, 0.0) in dirs) and res["passed"] and perr <= 1e-4
        ok &= all(f["checks"]["amplitude_monotone"] for f in res["families"])
        details.append(f"alpha={alpha}: {len(res['families'])} families over {len(dirs)} directions, "
                       f"period -> {target:.6f} within {perr:.1e}, final amplitude {last_amp:.1e}")
    dt = time.time() - t0
    ok &= dt < 180
    assert c.report(ok, "; ".join(details) + f"; {dt:.1f} s")


def test_criterion_7_reduced_map_structure(criterion):
    c = criterion(7, "reduced map identities and restricted patterns for each demo")
    parts, ok = [], True
    for case in ("4:2", "6:2", "6:4"):
        an = analyze_system(demo_system(case))
        rm, G = an.reduced, an.restricted
        eq = equivariance_defect(rm.B, rm.S).is_zero()
        anti = anti_equivariance_defect(rm.B, rm.R).is_zero()
        dropped = all(G.dropped.values())
        if case == "4:2":
            y1, y2, s = (Poly.var(3, i) for i in range(3))
            a = an.report.coefficients
            q = a["a1"] * y1 * y1 + a["a2"] * y1 * y2 + a["a3"] * y2 * y2 - s
            pat = (G.component("x1") + y1 * q).is_zero() and (G.component("x2") + y2 * q).is_zero()
        elif case == "6:4":
            x1, y1, y2, y3, s = (Poly.var(5, i) for i in range(5))
            common = s + x1 / 2 + y1 / 3 + y2 * y2 + y3 * y3
            pat = (G.component("x2") - y2 * common).is_zero() and (G.component("x3") - y3 * common).is_zero()
        else:
            x2, x3, s = (Poly.var(3, i) for i in range(3))
            pat = (G.component("x1") - x2 * x2).is_zero() and (G.component("y1") - x3 * x3).is_zero()
        ok &= eq and anti and dropped and pat
        parts.append(f"{case}: equivariant {eq}, anti-equivariant {anti}, dropped exact {dropped}, pattern {pat}")
    assert c.report(ok, "; ".join(parts))


def test_criterion_8_coulomb_ingestion(criterion):
    c = criterion(8, "two-charge Hamiltonian: order-4 jet is anti-invariant with Taylor error slope >= 4.8")
    consts = {"q": Fraction(1), "a": Fraction(1), "b": Fraction(0)}
    src = "-q/sqrt((x-a)^2+(y-b)^2) + q/sqrt((x+a)^2+(y+b)^2)"
    e = parse_hamiltonian(src, ("x", "u", "y", "v"), consts)
    P = taylor(e, [0, 0, 0, 0], 4)
    R = [-1, 1, -1, 1]
    anti = all(np.prod([r ** k for r, k in zip(R, ex)]) == -1 for ex, _ in P.items())
    anti &= (P.substitute_linear(exact_matrix(np.diag(R))) + P).is_zero()
    mpmath.mp.dps = 60
    direction = [mpmath.mpf(v) for v in ("0.6", "0.3", "-0.7", "0.2")]
    hs = np.logspace(-3, -1, 9)
    errs = []
    for h in hs:
        pt = [mpmath.mpf(h) * d for d in direction]
        x, u, y, v = pt
        exact_val = -1 / mpmath.sqrt((x - 1) ** 2 + y ** 2) + 1 / mpmath.sqrt((x + 1) ** 2 + y ** 2)
        poly_val = sum(mpmath.mpf(cf.numerator) / cf.denominator
                       * mpmath.fprod(p ** k for p, k in zip(pt, ex)) for ex, cf in P.items())
        errs.append(float(abs(exact_val - poly_val)))
    slope = np.polyfit(np.log(hs), np.log(errs), 1)[0]
    ok = anti and slope >= 4.8 and P.coefficient((0, 0, 0, 0)) == 0
    assert c.report(ok, f"anti-invariant termwise {anti}; error slope {slope:.3f}; "
                        f"jet {P.to_text(['x', 'u', 'y', 'v'])}")


if __name__ == "__main__":
    raise SystemExit(pytest.main([__file__, "-v"]))
