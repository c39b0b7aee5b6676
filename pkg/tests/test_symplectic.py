from fractions import Fraction

import numpy as np
import pytest

from helpers import quadratic_from_linear, random_symplectic_exact, random_symplectic_float
from revbif.linalg import exact_matrix, inverse, is_exact
from revbif.poly import Poly
from revbif.symplectic import (ClassificationError, InvolutionError, build_model, canonical_model,
                               classify_system, fix_decompose, involution_normal_form, time_rescale)
from revbif.templates import canonical_h2, hat_template, involution_template, standard_structure


def test_fix_decompose_identity_and_template():
    Ep, Em, _ = fix_decompose(exact_matrix(np.eye(4, dtype=int)))
    assert Ep.shape == (4, 4) and Em.shape[1] == 0
    Ep, Em, cross = fix_decompose(involution_template(6, 4), standard_structure(6))
    assert (Ep.shape[1], Em.shape[1]) == (4, 2) and cross == 0


def test_fix_decompose_random_conjugate(rng):
    S = random_symplectic_float(rng, 6)
    R = S @ involution_template(6, 2).astype(float) @ np.linalg.inv(S)
    Ep, Em, cross = fix_decompose(R, standard_structure(6).astype(float))
    assert (Ep.shape[1], Em.shape[1]) == (2, 4)
    assert cross <= 1e-12 * max(1.0, np.abs(np.linalg.inv(standard_structure(6).astype(float))).max()) * 100


def test_template_is_fixed_point():
    R = involution_template(4, 2)
    tmpl, T = involution_normal_form(R)
    assert np.array_equal(tmpl, R)
    assert not np.any(T - np.eye(4, dtype=int))


def test_minus_identity():
    tmpl, _ = involution_normal_form(exact_matrix(-np.eye(4, dtype=int)))
    assert not np.any(tmpl + np.eye(4, dtype=int))


@pytest.mark.parametrize("n,k", [(4, 2), (6, 2), (6, 4)])
def test_exact_conjugates_recovered(rng, n, k):
    J = standard_structure(n)
    for _ in range(5):
        S = random_symplectic_exact(rng, n)
        R = inverse(S) @ involution_template(n, k) @ S
        tmpl, T = involution_normal_form(R, J)
        assert np.array_equal(tmpl, involution_template(n, k))
        assert not np.any(inverse(T) @ R @ T - tmpl)
        assert not np.any(T.T @ (-inverse(J)) @ T - J)


def test_non_symplectic_rejected():
    R = exact_matrix([[1, 0, 0, 0], [0, -1, 0, 0], [0, 0, 1, 0], [0, 0, 0, -1]])
    with pytest.raises(InvolutionError):
        involution_normal_form(R)


def A42(a, b, c, d):
    return exact_matrix([[0, 0, a, b], [0, 0, c, d], [-d, b, 0, 0], [c, -a, 0, 0]])


def test_classify_42_unit():
    H = quadratic_from_linear(A42(1, 0, 0, 1))
    cls = classify_system(H, involution_template(4, 2))
    assert cls.case == "4:2" and cls.alpha == 1
    ev = sorted(np.round(np.array(cls.eigenvalues).imag, 12))
    assert ev == [-1, -1, 1, 1]


def test_classify_42_alpha_matches_eigensolver():
    A = A42(2, 1, 1, 3)
    cls = classify_system(quadratic_from_linear(A), involution_template(4, 2))
    w = np.linalg.eigvals(A.astype(float))
    assert np.allclose(sorted(np.abs(w.imag)), [np.sqrt(5)] * 4)
    assert abs(float(cls.alpha) - np.sqrt(5)) < 1e-14


def test_classify_62_resonance_condition():
    # b e - a f + d g - c h = -1 with (a, b, c, d, e, f, g, h) = (1, 0, 0, 0, 0, 1, 0, 0)
    a, b, c, d, e, f, g, h = 1, 0, 0, 0, 0, 1, 0, 0
    A = exact_matrix([[0, 0, a, b, c, d], [0, 0, e, f, g, h], [-f, b, 0, 0, 0, 0],
                      [e, -a, 0, 0, 0, 0], [-h, d, 0, 0, 0, 0], [g, -c, 0, 0, 0, 0]])
    cls = classify_system(quadratic_from_linear(A), involution_template(6, 2))
    assert cls.case == "6:2" and cls.alpha == 1
    mods = sorted(np.round(np.abs(np.array(cls.eigenvalues)), 10))
    assert mods == [0, 0, 1, 1, 1, 1]


def test_hyperbolic_sign_rejected():
    with pytest.raises(ClassificationError, match="hyperbolic"):
        classify_system(quadratic_from_linear(A42(1, 0, 0, -1)), involution_template(4, 2))


def test_invariant_monomial_named():
    H = quadratic_from_linear(A42(1, 0, 0, 1)) + Poly.monomial((0, 0, 2, 0))
    with pytest.raises(ClassificationError, match="x2\\^2"):
        classify_system(H, involution_template(4, 2))


def _check_model(m, A=None):
    Pinv = inverse(m.P) if m.exact else np.linalg.inv(m.P.astype(float))
    A = m.A if A is None else A
    tol = 0 if m.exact else 1e-10
    ra = np.abs((Pinv @ A @ m.P - m.A_hat * (m.alpha if m.rescaled else 1)).astype(float)).max()
    rr = np.abs((Pinv @ m.R @ m.P - m.R_hat).astype(float)).max()
    assert ra <= tol and rr <= tol
    rev = m.A_hat @ m.R_hat + m.R_hat @ m.A_hat
    assert np.abs(rev.astype(float)).max() <= 1e-12


def test_random_64_canonicalization(rng):
    for _ in range(10):
        while True:
            a, b, c, d, e, f, g, h = (Fraction(int(v)) for v in rng.integers(-3, 4, size=8))
            if b * c - a * d + f * g - e * h < 0 and b * c - a * d != 0:
                break
        A = exact_matrix([[0, 0, 0, 0, a, b], [0, 0, 0, 0, c, d], [0, 0, 0, 0, e, f],
                          [0, 0, 0, 0, g, h], [-d, b, -h, f, 0, 0], [c, -a, g, -e, 0, 0]])
        cls, m = build_model(quadratic_from_linear(A), involution_template(6, 4))
        assert cls.case == "6:4"
        _check_model(m)
        r = time_rescale(m)
        w = np.linalg.eigvals(r.A_hat.astype(float))
        assert np.allclose(sorted(np.abs(w)), [0, 0, 1, 1, 1, 1], atol=1e-10)


def test_42_model_matches_hat_involution():
    cls, m = build_model(quadratic_from_linear(A42(1, 0, 0, 1)), involution_template(4, 2))
    assert np.array_equal(m.R_hat, hat_template("4:2"))
    _check_model(m)
    # the pullback form is antisymmetric and compatible with the involution
    Jh = m.J_hat
    assert not np.any(Jh + Jh.T)
    assert not np.any(Jh @ m.R_hat - m.R_hat.T @ Jh)


def test_canonical_input_identity():
    m = canonical_model("6:4", 1, rescaled=False)
    assert not np.any(m.P - np.eye(6, dtype=int))
    assert canonical_model("6:4", 2).period == pytest.approx(np.pi)


def test_rescale_alpha_two():
    m = canonical_model("4:2", 2, rescaled=False)
    r = time_rescale(m)
    assert r.rescaled and r.alpha == 2
    assert not np.any(r.A_hat * 2 - m.A_hat)
    assert time_rescale(canonical_model("4:2", 1, rescaled=False)).A_hat.tolist() == \
        canonical_model("4:2", 1, rescaled=False).A_hat.tolist()
