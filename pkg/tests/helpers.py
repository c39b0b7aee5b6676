"""Shared constructors for tests."""
from fractions import Fraction

import numpy as np

from revbif.linalg import exact_matrix
from revbif.poly import Poly
from revbif.templates import standard_structure


def quadratic_from_linear(A, J=None) -> Poly:
    """``H2`` with ``J Hess(H2) = A`` for the standard structure ``J``."""
    A = np.asarray(A, dtype=object)
    n = A.shape[0]
    J = standard_structure(n) if J is None else np.asarray(J, dtype=object)
    S = -(J @ A)  # J^{-1} = -J for the standard structure
    terms = {}
    for i in range(n):
        for j in range(n):
            e = [0] * n
            e[i] += 1
            e[j] += 1
            terms[tuple(e)] = terms.get(tuple(e), 0) + Fraction(S[i, j]) / 2
    return Poly(n, terms)


def random_symplectic_exact(rng, n, steps=4):
    """Product of rational symplectic shears in ``(x1, y1, x2, y2, ...)`` order."""
    J = standard_structure(n)
    T = exact_matrix(np.eye(n, dtype=int))
    m = n // 2
    xs, ys = list(range(0, n, 2)), list(range(1, n, 2))
    for k in range(steps):
        S = np.zeros((m, m), dtype=object)
        for i in range(m):
            for j in range(i, m):
                v = Fraction(int(rng.integers(-2, 3)), int(rng.integers(1, 3)))
                S[i, j] = S[j, i] = v
        E = exact_matrix(np.eye(n, dtype=int))
        # alternate x += S y and y += S x
        a, b = (xs, ys) if k % 2 == 0 else (ys, xs)
        for i in range(m):
            for j in range(m):
                E[a[i], b[j]] = S[i, j]
        T = T @ E
    assert not np.any(T @ J @ T.T - J)
    return T


def random_symplectic_float(rng, n, scale=0.6):
    from scipy.linalg import expm
    J = standard_structure(n).astype(float)
    S = rng.normal(size=(n, n)) * scale
    S = S + S.T
    return expm(J @ S)
