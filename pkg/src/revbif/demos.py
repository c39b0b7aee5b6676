"""Built-in demonstration systems in canonical coordinates.

* ``4:2``: ``H = H2 (1 + r^2 + r^4/2)`` with ``r^2`` the squared norm, so the
  cubic coefficients are ``(a1, a2, a3) = (1, 0, 1)``; the sextic term makes
  the higher-order corrections visible.
* ``6:2``: ``H = H2 + x1 (x3^2 + y3^2) - y1 (x2^2 + y2^2)``; the leading
  quadratic pair of the restricted map is ``(x2^2, x3^2)``.
* ``6:4``: ``H = H2 (1 - x1/2 - y1/3 - |z2|^2 - |z3|^2)`` giving
  ``a1 = 1/2, a2 = 1/3, a5 = a7 = 1, a6 = 0``.

``alpha`` scales the whole Hamiltonian, so the linear frequency is ``alpha``.
"""
from __future__ import annotations

from fractions import Fraction

from .io import SystemFile, dump_system, parse_system
from .templates import canonical_structure, hat_template

__all__ = ["DEMO_HAMILTONIANS", "demo_system", "demo_text", "DEMO_CASES"]

DEMO_CASES = ("4:2", "6:2", "6:4")

DEMO_HAMILTONIANS = {
    "4:2": "(x1*y2 - x2*y1)*(1 + (x1^2 + y1^2 + x2^2 + y2^2)"
           " + (x1^2 + y1^2 + x2^2 + y2^2)^2/2)",
    "6:2": "(x2*y3 - x3*y2) + x1*(x3^2 + y3^2) - y1*(x2^2 + y2^2)",
    "6:4": "(x2*y3 - x3*y2)*(1 - x1/2 - y1/3 - (x2^2 + y2^2) - (x3^2 + y3^2))",
}

_INVOLUTION = {"4:2": "R0hat", "6:2": "R1hat", "6:4": "R2hat"}


def demo_text(case: str, alpha=1, order: int = 4) -> str:
    """System-file text of a demo."""
    if case not in DEMO_HAMILTONIANS:
        raise KeyError(f"no demo for case {case!r}")
    n = 4 if case == "4:2" else 6
    a = Fraction(alpha)
    H = DEMO_HAMILTONIANS[case]
    if a != 1:
        H = f"({a})*({H})"
    return (f"dimension: {n}\n"
            f"order: {order}\n"
            "mode: exact\n"
            f"involution: {_INVOLUTION[case]}\n"
            "symplectic: canonical\n"
            "coordinates: canonical\n"
            f"H = {H}\n")


def demo_system(case: str, alpha=1, order: int = 4) -> SystemFile:
    return parse_system(demo_text(case, alpha, order))
