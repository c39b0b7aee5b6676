"""Random reversible inputs and span membership for normal-form tests."""
from fractions import Fraction

import numpy as np

from revbif.linalg import exact_matrix, rank, solve
from revbif.normal_forms import parity_basis, vector_parity_basis
from revbif.poly import Poly, PolyVector


def rational(rng, lo=-4, hi=5, den=4):
    return Fraction(int(rng.integers(lo, hi)), int(rng.integers(1, den + 1)))


def random_anti_poly(rng, n, d, rdiag):
    return Poly(n, {e: rational(rng) for e in parity_basis(n, d, rdiag, "anti")})


def random_reversible_field(rng, n, d, rdiag):
    comps = [dict() for _ in range(n)]
    for e, i in vector_parity_basis(n, d, rdiag, "anti"):
        comps[i][e] = rational(rng)
    return PolyVector(Poly(n, t) for t in comps)


def field_coords(X, keys):
    return [X[i].coefficient(e) for e, i in keys]


def span_coefficients(X, basis: dict):
    """Coefficients of ``X`` on the named fields, or ``None`` when outside the span."""
    names = list(basis)
    keys = sorted({(e, i) for B in basis.values() for i, c in enumerate(B) for e in c.terms}
                  | {(e, i) for i, c in enumerate(X) for e in c.terms})
    M = exact_matrix(np.array([field_coords(basis[k], keys) for k in names], dtype=object).T)
    b = exact_matrix(np.array(field_coords(X, keys), dtype=object))
    if rank(np.concatenate([M, b[:, None]], axis=1)) != rank(M):
        return None
    return dict(zip(names, solve(M, b)))
