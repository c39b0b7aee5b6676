"""Named matrices: involution templates, Poisson structures and canonical parts.

Coordinates are ordered ``(x1, y1, x2, y2[, x3, y3])``.

* ``R0``, ``R1``, ``R2`` are the linear symplectic involution normal forms in
  the original coordinates: in R^4 with a 2-dimensional fixed space, and in R^6
  with fixed spaces of dimension 2 and 4.
* ``R0hat``, ``R1hat``, ``R2hat`` are the corresponding involutions in the
  canonical coordinates where the linear part is a pair of rotations.
* ``standard`` is the block-diagonal Poisson structure with ``{x_k, y_k} = 1``.
* ``canonical`` is the Poisson structure of the canonical coordinates.
"""
from __future__ import annotations

import numpy as np

from .linalg import exact_matrix, identity

__all__ = [
    "involution_template", "hat_template", "standard_structure",
    "canonical_structure", "canonical_linear_part", "canonical_h2",
    "named_involution", "named_structure", "CASES", "case_from_dims",
    "rotation_coordinates", "center_coordinates",
]

CASES = ("4:2", "6:2", "6:4")

_ROT = [[0, 1], [-1, 0]]
_K4 = [[0, 0, -1, 0], [0, 0, 0, -1], [1, 0, 0, 0], [0, 1, 0, 0]]


def _diag(*d):
    return exact_matrix(np.diag(d))


def involution_template(n: int, dim_fix: int) -> np.ndarray:
    """``diag(1,...,1,-1,...,-1)`` with ``dim_fix`` leading ones (must be even)."""
    if dim_fix % 2 or not 0 <= dim_fix <= n:
        raise ValueError(f"no symplectic involution template with dim Fix = {dim_fix} in R^{n}")
    return _diag(*([1] * dim_fix + [-1] * (n - dim_fix)))


def hat_template(case: str) -> np.ndarray:
    return {
        "4:2": _diag(-1, 1, -1, 1),
        "6:2": _diag(-1, -1, 1, -1, 1, -1),
        "6:4": _diag(1, 1, -1, 1, -1, 1),
    }[case]


def standard_structure(n: int) -> np.ndarray:
    J = identity(n) * 0
    for k in range(n // 2):
        J[2 * k, 2 * k + 1] = 1
        J[2 * k + 1, 2 * k] = -1
    return exact_matrix(J)


def canonical_structure(n: int) -> np.ndarray:
    """Poisson structure of the canonical coordinates.

    In R^4 it couples ``x1`` with ``x2`` and ``y1`` with ``y2``; in R^6 the
    center plane keeps the standard block and the two rotation planes carry
    the R^4 structure.
    """
    if n == 4:
        return exact_matrix(_K4)
    if n == 6:
        K = identity(6) * 0
        K[0, 1], K[1, 0] = 1, -1
        K[2:, 2:] = exact_matrix(_K4)
        return exact_matrix(K)
    raise ValueError("only n = 4 or 6")


def canonical_linear_part(n: int, alpha=1) -> np.ndarray:
    """Rotation blocks ``[[0, a], [-a, 0]]`` on the rotation planes."""
    A = identity(n) * 0
    start = 0 if n == 4 else 2
    for k in range(start, n, 2):
        A[k, k + 1] = alpha
        A[k + 1, k] = -alpha
    if isinstance(alpha, (float, np.floating)):
        return A.astype(float)
    return exact_matrix(A)


def canonical_h2(n: int):
    """Quadratic Hamiltonian generating the canonical linear part (alpha = 1)."""
    from .poly import Poly

    if n == 4:
        return Poly(4, {(1, 0, 0, 1): 1, (0, 1, 1, 0): -1})
    return Poly(6, {(0, 0, 1, 0, 0, 1): 1, (0, 0, 0, 1, 1, 0): -1})


def rotation_coordinates(n: int) -> list[int]:
    return list(range(n)) if n == 4 else [2, 3, 4, 5]


def center_coordinates(n: int) -> list[int]:
    return [] if n == 4 else [0, 1]


def case_from_dims(n: int, dim_fix: int) -> str | None:
    return {(4, 2): "4:2", (6, 2): "6:2", (6, 4): "6:4"}.get((n, dim_fix))


_NAMED = {
    "R0": (4, "tmpl", 2), "R1": (6, "tmpl", 2), "R2": (6, "tmpl", 4),
    "R0hat": (4, "hat", "4:2"), "R1hat": (6, "hat", "6:2"), "R2hat": (6, "hat", "6:4"),
}


def named_involution(name: str, n: int) -> np.ndarray:
    """Resolve ``R0/R1/R2``, ``R0hat/R1hat/R2hat``, ``Id`` or ``-Id``."""
    if name == "Id":
        return identity(n)
    if name == "-Id":
        return identity(n) * -1
    if name not in _NAMED:
        raise KeyError(name)
    dim, kind, arg = _NAMED[name]
    if dim != n:
        raise ValueError(f"template {name} lives in R^{dim}, not R^{n}")
    return involution_template(n, arg) if kind == "tmpl" else hat_template(arg)


def named_structure(name: str, n: int) -> np.ndarray:
    if name == "standard":
        return standard_structure(n)
    if name == "canonical":
        return canonical_structure(n)
    raise KeyError(name)
