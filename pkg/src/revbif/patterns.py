"""Reference shapes of low-order normal forms in canonical coordinates.

Each function returns a basis (one field per free coefficient) of a known
normal-form family, so that computed kernels can be compared against it.
"""
from __future__ import annotations

from typing import Sequence

from .exprs import expand, parse_hamiltonian
from .poly import Poly, PolyVector

__all__ = ["reversible_cubic_fields_4d", "hamiltonian_cubic_fields_4d",
           "quadratic_fields_6d_four", "pattern_basis"]

_V4 = ("x1", "y1", "x2", "y2")
_V6 = ("x1", "y1", "x2", "y2", "x3", "y3")


def pattern_basis(components: Sequence[str], variables: Sequence[str],
                  params: Sequence[str]) -> dict[str, PolyVector]:
    """Split a field linear in ``params`` into one field per parameter.

    Parameters are parsed as extra variables and the coefficient of each is
    read off the expanded components.
    """
    n, p = len(variables), len(params)
    names = tuple(variables) + tuple(params)
    polys = [expand(parse_hamiltonian(c, names), n + p) for c in components]
    out = {}
    for k, name in enumerate(params):
        comps = []
        for P in polys:
            terms = {}
            for e, c in P.terms.items():
                pe = e[n:]
                if sum(pe) == 1 and pe[k] == 1:
                    terms[e[:n]] = c
                elif sum(pe) > 1:
                    raise ValueError("pattern is not linear in its parameters")
            comps.append(Poly(n, terms))
        out[name] = PolyVector(comps)
    return out


def reversible_cubic_fields_4d() -> dict[str, PolyVector]:
    """Twelve-parameter cubic part of the reversible normal form on R^4
    (two unit rotations, involution ``diag(-1, 1, -1, 1)``)."""
    rho1, rho2 = "(x1^2 + y1^2)", "(x2^2 + y2^2)"
    w, s = "(y1*x2 - x1*y2)", "(x1*x2 + y1*y2)"
    comps = [
        f"(c1*y1 + c2*y2)*{rho1} + c3*y2*{rho2} + (c4*x1 + c5*x2)*{w} + c6*y2*{s}",
        f"(-c1*x1 - c2*x2)*{rho1} - c3*x2*{rho2} + (c4*y1 + c5*y2)*{w} - c6*x2*{s}",
        f"(-c7*y1 - c8*y2)*{rho1} - (c9*y1 + c10*y2)*{rho2} - (c11*y1 + c12*y2)*{s}",
        f"(c7*x1 + c8*x2)*{rho1} + (c9*x1 + c10*x2)*{rho2} + (c11*x1 + c12*x2)*{s}",
    ]
    return pattern_basis(comps, _V4, [f"c{k}" for k in range(1, 13)])


def hamiltonian_cubic_fields_4d() -> dict[str, PolyVector]:
    """Three-parameter cubic part for the Hamiltonian reversible case on R^4
    with the canonical Poisson structure."""
    q = "(a1*(x1^2 + y1^2) + a2*(x1*x2 + y1*y2) + a3*(x2^2 + y2^2))"
    comps = [
        "a1*y1*(x1^2 + y1^2) + a2*(2*x1*x2*y1 - x1^2*y2 + y1^2*y2)"
        " + a3*(3*x2^2*y1 - 2*x1*x2*y2 + y1*y2^2)",
        f"(a2*y1 + 2*a3*y2)*(x2*y1 - x1*y2) - x1*{q}",
        f"(2*a1*x1 + a2*x2)*(x1*y2 - x2*y1) + y2*{q}",
        f"(2*a1*y1 + a2*y2)*(x1*y2 - x2*y1) - x2*{q}",
    ]
    return pattern_basis(comps, _V4, ["a1", "a2", "a3"])


def quadratic_fields_6d_four(kappa=1) -> dict[str, PolyVector]:
    """Two-parameter quadratic part on R^6 for the involution with a
    four-dimensional fixed space; ``kappa`` scales the center components."""
    from fractions import Fraction

    k = Fraction(kappa) if not isinstance(kappa, float) else kappa
    kt = f"({k})" if not isinstance(k, float) else repr(k)
    h = "(x3*y2 - x2*y3)"
    comps = [
        f"-b*{h}*{kt}", f"a*{h}*{kt}",
        "(-a*x1 - b*y1)*y2", "x2*(a*x1 + b*y1)",
        "(-a*x1 - b*y1)*y3", "x3*(a*x1 + b*y1)",
    ]
    return pattern_basis(comps, _V6, ["a", "b"])
