"""Dense linear algebra over exact rationals or floats.

Matrices are numpy arrays. Arrays with ``dtype=object`` hold
:class:`fractions.Fraction` entries and are reduced by exact Gaussian
elimination; float arrays go through numpy/scipy with a rank tolerance.
"""
from __future__ import annotations

from fractions import Fraction
from typing import Sequence

import numpy as np
import scipy.linalg as sla

__all__ = [
    "is_exact", "exact_matrix", "float_matrix", "identity", "rref", "rank",
    "nullspace", "column_basis", "solve", "inverse", "max_abs", "frac_str",
    "parse_scalar", "matrix_to_json", "matrix_from_json", "blockdiag",
]


def is_exact(M) -> bool:
    """True when ``M`` is an object array (exact rational entries)."""
    return isinstance(M, np.ndarray) and M.dtype == object


def _to_fraction(v):
    if isinstance(v, Fraction):
        return v
    if isinstance(v, (int, np.integer)):
        return Fraction(int(v))
    if isinstance(v, str):
        return Fraction(v.strip())
    if isinstance(v, (float, np.floating)):
        if not np.isfinite(v):
            raise ValueError("non-finite entry")
        return Fraction(float(v))
    raise TypeError(f"cannot convert {type(v).__name__} to Fraction")


def exact_matrix(rows) -> np.ndarray:
    """Object array of Fractions built from nested sequences or an array."""
    arr = np.asarray(rows, dtype=object)
    out = np.empty(arr.shape, dtype=object)
    for idx in np.ndindex(arr.shape):
        out[idx] = _to_fraction(arr[idx])
    return out


def float_matrix(M) -> np.ndarray:
    return np.asarray(np.asarray(M, dtype=object).astype(float), dtype=float)


def identity(n: int, exact: bool = True) -> np.ndarray:
    if exact:
        return exact_matrix(np.eye(n, dtype=int))
    return np.eye(n)


def blockdiag(*blocks, exact: bool = True) -> np.ndarray:
    n = sum(np.asarray(b).shape[0] for b in blocks)
    out = identity(n, exact) * 0
    k = 0
    for b in blocks:
        b = np.asarray(b)
        m = b.shape[0]
        out[k:k + m, k:k + m] = exact_matrix(b) if exact else np.asarray(b, float)
        k += m
    return out


def max_abs(M) -> float:
    M = np.asarray(M)
    if M.size == 0:
        return 0.0
    return float(np.max(np.abs(M.astype(float))))


def _tol(M, tol):
    if tol is not None:
        return tol
    scale = max(1.0, max_abs(M))
    return 1e-10 * scale * max(M.shape)


def rref(M, tol: float | None = None):
    """Reduced row echelon form.

    Parameters
    ----------
    M : ndarray
        Object (exact) or float matrix.
    tol : float, optional
        Pivot threshold for float input. Ignored in exact mode.

    Returns
    -------
    R : ndarray
        Row-reduced copy of ``M``.
    pivots : list of int
        Pivot column indices.
    """
    exact = is_exact(M)
    R = M.copy() if exact else np.array(M, dtype=float)
    nrows, ncols = R.shape
    eps = 0.0 if exact else _tol(R, tol)
    pivots = []
    r = 0
    for c in range(ncols):
        if r >= nrows:
            break
        if exact:
            p = next((i for i in range(r, nrows) if R[i, c] != 0), None)
        else:
            i = r + int(np.argmax(np.abs(R[r:, c])))
            p = i if abs(R[i, c]) > eps else None
        if p is None:
            continue
        if p != r:
            R[[r, p]] = R[[p, r]]
        piv = R[r, c]
        R[r] = R[r] / piv
        for i in range(nrows):
            if i != r and R[i, c] != 0:
                R[i] = R[i] - R[i, c] * R[r]
        if not exact:
            R[np.abs(R) <= eps * 1e-3] = 0.0
        pivots.append(c)
        r += 1
    return R, pivots


def rank(M, tol: float | None = None) -> int:
    M = np.asarray(M)
    if M.size == 0:
        return 0
    if is_exact(M):
        return len(rref(M)[1])
    s = np.linalg.svd(M.astype(float), compute_uv=False)
    return int(np.sum(s > _tol(M, tol)))


def nullspace(M, tol: float | None = None) -> np.ndarray:
    """Basis of the right null space as the columns of an ``(ncols, k)`` array."""
    M = np.asarray(M)
    ncols = M.shape[1]
    if is_exact(M):
        if M.shape[0] == 0:
            return identity(ncols, True)
        R, piv = rref(M)
        free = [c for c in range(ncols) if c not in piv]
        N = np.empty((ncols, len(free)), dtype=object)
        N[:] = Fraction(0)
        for k, fc in enumerate(free):
            N[fc, k] = Fraction(1)
            for row, pc in enumerate(piv):
                N[pc, k] = -R[row, fc]
        return N
    if M.shape[0] == 0:
        return np.eye(ncols)
    return sla.null_space(M.astype(float), rcond=1e-10)


def column_basis(M, tol: float | None = None):
    """Indices of a maximal independent set of columns of ``M``.

    Exact input uses the rref pivots; float input uses column-pivoted QR so
    that the chosen columns are well conditioned.
    """
    M = np.asarray(M)
    if M.size == 0:
        return []
    if is_exact(M):
        return rref(M)[1]
    Mf = M.astype(float)
    _, Rq, perm = sla.qr(Mf, pivoting=True, mode="economic")
    d = np.abs(np.diag(Rq))
    r = int(np.sum(d > _tol(Mf, tol)))
    return sorted(int(p) for p in perm[:r])


def solve(M, b, tol: float | None = None):
    """Some solution of ``M x = b``; raises ``LinAlgError`` if inconsistent.

    In exact mode the solution with free variables set to zero is returned;
    float mode returns the least-squares minimum-norm solution.
    """
    M = np.asarray(M)
    b = np.asarray(b)
    vec = b.ndim == 1
    B = b.reshape(len(b), -1)
    if is_exact(M):
        aug = np.concatenate([M, exact_matrix(B)], axis=1)
        R, piv = rref(aug)
        n = M.shape[1]
        if any(p >= n for p in piv):
            raise np.linalg.LinAlgError("inconsistent linear system")
        X = np.empty((n, B.shape[1]), dtype=object)
        X[:] = Fraction(0)
        for row, pc in enumerate(piv):
            X[pc] = R[row, n:]
        return X[:, 0] if vec else X
    Mf = M.astype(float)
    Bf = B.astype(float)
    X, *_ = np.linalg.lstsq(Mf, Bf, rcond=None)
    res = np.max(np.abs(Mf @ X - Bf)) if Bf.size else 0.0
    if res > 1e-8 * max(1.0, np.max(np.abs(Bf)) if Bf.size else 1.0):
        raise np.linalg.LinAlgError(f"inconsistent linear system (residual {res:.2e})")
    return X[:, 0] if vec else X


def inverse(M):
    M = np.asarray(M)
    n = M.shape[0]
    if is_exact(M):
        try:
            return solve(M, identity(n, True)) if rank(M) == n else _singular()
        except np.linalg.LinAlgError:
            _singular()
    return np.linalg.inv(M.astype(float))


def _singular():
    raise np.linalg.LinAlgError("singular matrix")


def frac_str(v) -> str:
    """Rational as ``"p/q"`` (or ``"p"``); floats as shortest round-trip repr."""
    if isinstance(v, Fraction):
        return str(v.numerator) if v.denominator == 1 else f"{v.numerator}/{v.denominator}"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    return repr(float(v))


def parse_scalar(s, exact: bool = True):
    """Inverse of :func:`frac_str`; strings containing ``.``/``e`` become floats
    unless ``exact`` forces an exact binary conversion."""
    if isinstance(s, (int, Fraction)):
        return Fraction(s) if exact else float(s)
    if isinstance(s, float):
        return Fraction(s) if exact else s
    s = str(s).strip()
    looks_float = any(ch in s.lower() for ch in ".en") and "/" not in s
    if looks_float and not exact:
        return float(s)
    if looks_float:
        return Fraction(float(s)) if s.lower() in ("inf", "-inf", "nan") else Fraction(s)
    return Fraction(s) if exact else float(Fraction(s))


def matrix_to_json(M) -> list:
    M = np.asarray(M)
    return [[frac_str(v) if is_exact(M) else float(v) for v in row] for row in M]


def matrix_from_json(rows: Sequence[Sequence], exact: bool | None = None) -> np.ndarray:
    if exact is None:
        exact = all(isinstance(v, (str, int)) and not (isinstance(v, str) and any(c in v.lower() for c in ".e"))
                    for row in rows for v in row)
    if exact:
        return exact_matrix([[parse_scalar(v, True) for v in row] for row in rows])
    return np.array([[float(parse_scalar(v, False)) for v in row] for row in rows], dtype=float)
