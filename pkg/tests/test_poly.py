from fractions import Fraction

import numpy as np
import pytest

from revbif.poly import (Poly, PolyVector, hamiltonian_vector_field, monomials, poisson_bracket,
                         precision, truncation)
from revbif.templates import standard_structure


def random_poly(rng, n=4, deg=3, terms=6):
    t = {}
    for _ in range(terms):
        e = tuple(int(v) for v in rng.multinomial(int(rng.integers(0, deg + 1)), [1 / n] * n))
        t[e] = Fraction(int(rng.integers(-5, 6)), int(rng.integers(1, 4)))
    return Poly(n, t)


def test_ring_axioms(rng):
    for _ in range(20):
        p, q, r = (random_poly(rng) for _ in range(3))
        assert (p + q) * r == p * r + q * r
        assert p * q == q * p
        assert (p * q) * r == p * (q * r)
        assert (p - p).is_zero()


def test_truncation_drops_and_records():
    x = Poly.var(2, 0)
    with truncation(3) as log:
        p = (1 + x) ** 5
    assert p.degree == 3
    assert p.coefficient((3, 0)) == 10
    assert log.truncated


def test_monomial_count():
    assert len(monomials(4, 3)) == 20
    assert len(monomials(6, 4)) == 126


def test_evaluate_and_compose():
    x, y = Poly.var(2, 0), Poly.var(2, 1)
    p = x * x * y - 3 * y
    assert p.evaluate([2, 5]) == 5
    q = p.compose([x + y, x - y])
    pt = [0.3, -1.1]
    assert abs(q.evaluate(pt) - p.evaluate([pt[0] + pt[1], pt[0] - pt[1]])) < 1e-14


def test_poisson_bracket_canonical_pairs():
    J = standard_structure(4)
    x1, y1 = Poly.var(4, 0), Poly.var(4, 1)
    assert poisson_bracket(x1, y1, J) == Poly.const(4, 1)
    assert poisson_bracket(y1, x1, J) == Poly.const(4, -1)


def test_jacobi_identity(rng):
    J = standard_structure(4)
    for _ in range(5):
        f, g, h = (random_poly(rng, terms=4) for _ in range(3))
        s = (poisson_bracket(f, poisson_bracket(g, h, J), J)
             + poisson_bracket(g, poisson_bracket(h, f, J), J)
             + poisson_bracket(h, poisson_bracket(f, g, J), J))
        assert s.is_zero()


def test_float_mode_matches_exact(rng):
    p = random_poly(rng)
    q = random_poly(rng)
    with precision("float"):
        pf, qf = p.to_float(), q.to_float()
        prod = pf * qf
    ex = (p * q).to_float()
    assert (prod - ex).max_abs_coefficient() < 1e-12


def test_compiled_field_matches_polynomial(rng):
    H = random_poly(rng, deg=4, terms=10)
    X = hamiltonian_vector_field(H, standard_structure(4))
    cf = X.compile()
    pts = rng.normal(size=(7, 4))
    v, Jm = cf.both(pts)
    for k, p in enumerate(pts):
        ref = np.array([float(c.evaluate(list(p))) for c in X])
        assert np.allclose(v[k], ref, atol=1e-12)
    h = 1e-6
    num = np.stack([(cf.both(pts + h * e)[0] - cf.both(pts - h * e)[0]) / (2 * h)
                    for e in np.eye(4)], axis=-1)
    assert np.allclose(Jm, num, atol=1e-6)


def test_lie_bracket_antisymmetric(rng):
    X = PolyVector([random_poly(rng, terms=3) for _ in range(4)])
    Y = PolyVector([random_poly(rng, terms=3) for _ in range(4)])
    assert (X.lie_bracket(Y) + Y.lie_bracket(X)).is_zero()


def test_dimension_mismatch():
    with pytest.raises(ValueError):
        Poly.var(2, 0) + Poly.var(3, 0)
