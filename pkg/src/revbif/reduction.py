"""Finite-order reduced bifurcation map and branch classification.

For a normal-form field ``S u + h(u)`` (``S`` the semisimple linear part) a
rotating solution ``exp((1+sigma) S t) u`` exists exactly when

    B(u, sigma) = sigma S u - h(u) = 0,

because ``h`` commutes with the rotations. Symmetric orbits correspond to
zeros of ``B`` on ``Fix(R)``, where half of its components vanish
identically; the rest form the restricted map ``G``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import numpy as np

from .linalg import exact_matrix, is_exact
from .normal_forms import NormalFormResult
from .poly import Poly, PolyVector, default_names
from .symplectic import CanonicalModel

__all__ = [
    "ReductionError", "ReducedMap", "RestrictedMap", "BranchFamily",
    "BranchReport", "build_reduced_map", "restrict_to_fix", "analyze_branches",
    "quadratic_resultant", "numeric_branch_continue", "lift", "FIX_NAMES",
]


class ReductionError(ValueError):
    pass


def lift(p: Poly, extra: int = 1) -> Poly:
    """Embed ``p`` into a ring with ``extra`` trailing variables."""
    return Poly(p.nvars + extra, {e + (0,) * extra: c for e, c in p.terms.items()})


def _names(n: int) -> list[str]:
    return list(default_names(n + 1))


FIX_NAMES = {"4:2": ("y1", "y2"), "6:2": ("x2", "x3"), "6:4": ("x1", "y1", "y2", "y3")}


@dataclass
class ReducedMap:
    """``B(u, sigma)`` as a PolyVector in ``n + 1`` variables (``sigma`` last).

    Attributes
    ----------
    B : PolyVector
    S : ndarray
        Semisimple linear part.
    R : ndarray
        Canonical involution.
    order : int
        Truncation order of the normal form it came from.
    certificates : dict
        Exact (or tolerance-checked) identities verified on construction.
    """

    B: PolyVector
    S: np.ndarray
    R: np.ndarray
    order: int
    case: str = ""
    certificates: dict = field(default_factory=dict)

    @property
    def n(self) -> int:
        return self.S.shape[0]

    def names(self) -> list[str]:
        return _names(self.n)

    def to_dict(self) -> dict:
        nm = self.names()
        return {"case": self.case, "order": self.order, "variables": nm,
                "B": self.B.to_text(nm), "certificates": self.certificates}


def _zero(v: PolyVector, exact: bool, tol: float = 1e-10) -> bool:
    return v.is_zero() if exact else v.chop(tol).is_zero()


def equivariance_defect(B: PolyVector, S) -> PolyVector:
    """``DB(u, sigma) . S u - S B(u, sigma)`` (u-derivative only)."""
    n = S.shape[0]
    Su = PolyVector([lift(c) for c in PolyVector.linear(S)] + [Poly.zero(n + 1)])
    return B.derivative_along(Su) - B.apply_matrix(S)


def _pad(M):
    n = M.shape[0]
    exact = is_exact(M)
    out = np.empty((n + 1, n + 1), dtype=object if exact else float)
    out[:] = Fraction(0) if exact else 0.0
    out[:n, :n] = M
    if exact:
        out = exact_matrix(out)
    return out


def anti_equivariance_defect(B: PolyVector, R) -> PolyVector:
    """``R B(u, sigma) + B(R u, sigma)``."""
    Rp = _pad(R)
    Rp[-1, -1] = 1
    n = R.shape[0]
    RB = PolyVector(list(B) + [Poly.zero(n + 1)]).apply_matrix(Rp)
    BR = B.substitute_linear(Rp)
    return PolyVector(list(RB)[:n]) + BR


def build_reduced_map(nf: NormalFormResult, model: CanonicalModel, N: int | None = None) -> ReducedMap:
    """Assemble ``B = sigma S u - h(u)`` from a normal form.

    Raises
    ------
    ReductionError
        If the normal-form linear part differs from the model's or an
        equivariance identity fails.
    """
    X = nf.field()
    N = nf.order if N is None else N
    exact = nf.mode == "exact"
    S = model.A_hat if exact else np.asarray(model.A_hat, dtype=float)
    A = X.linear_part()
    if np.max(np.abs((A - S).astype(float))) > (0 if exact else 1e-10):
        raise ReductionError("normal-form linear part does not match the canonical model")
    n = S.shape[0]
    h = (X - X.grade(1)).truncate(N)
    sigma = Poly.var(n + 1, n)
    Su = PolyVector.linear(S)
    B = PolyVector(lift(Su[i]) * sigma - lift(h[i]) for i in range(n))
    R = model.R_hat if exact else np.asarray(model.R_hat, dtype=float)
    eq = equivariance_defect(B, S)
    anti = anti_equivariance_defect(B, R)
    zero_at_origin = all(c.coefficient((0,) * n + (k,)) == 0 for c in B for k in range(0, N + 2))
    lin = PolyVector(Poly(n + 1, {e: c for e, c in comp.terms.items() if sum(e[:n]) == 1})
                     for comp in B)
    lin_ok = _zero(lin - PolyVector(lift(Su[i]) * sigma for i in range(n)), exact)
    certs = {"equivariance": _zero(eq, exact), "anti_equivariance": _zero(anti, exact),
             "vanishes_at_origin": zero_at_origin, "linear_part_sigma_S": lin_ok,
             "mode": nf.mode}
    if not all(v for k, v in certs.items() if k != "mode"):
        raise ReductionError(f"reduced map certificates failed: {certs}")
    return ReducedMap(B, S, R, N, model.case, certs)


@dataclass
class RestrictedMap:
    """``G = B`` restricted to ``Fix(R)``.

    Attributes
    ----------
    G : list of Poly
        Components in variables ``names`` (fixed-space coordinates, then sigma).
    names : list of str
    fix_indices : list of int
        Positions of the fixed-space coordinates in ``u``.
    component_indices : list of int
        Positions in ``B`` of the kept components.
    dropped : dict
        Component name -> True when it is the zero polynomial on Fix.
    """

    G: list
    names: list
    fix_indices: list
    component_indices: list
    dropped: dict
    n: int
    case: str = ""
    exact: bool = True

    @property
    def m(self) -> int:
        return len(self.fix_indices)

    def component_names(self) -> list[str]:
        nm = _names(self.n)
        return [nm[i] for i in self.component_indices]

    def component(self, name: str) -> Poly:
        return self.G[self.component_names().index(name)]

    def evaluate(self, point) -> np.ndarray:
        return np.array([float(g.evaluate(point)) for g in self.G])

    def to_dict(self) -> dict:
        return {"case": self.case, "variables": self.names,
                "components": dict(zip(self.component_names(),
                                       [g.to_text(self.names) for g in self.G])),
                "dropped_components_vanish": self.dropped}


def restrict_to_fix(rm: ReducedMap, R=None) -> RestrictedMap:
    """Substitute the fixed-space parametrization into ``B``.

    Components of ``B`` with ``R``-eigenvalue ``+1`` must vanish identically
    on ``Fix(R)``; this is certified and they are dropped.
    """
    R = rm.R if R is None else R
    n = rm.n
    rd = [int(round(float(R[i, i]))) for i in range(n)]
    if any(R[i, j] != 0 for i in range(n) for j in range(n) if i != j):
        raise ReductionError("restriction needs a diagonal involution")
    fix = [i for i in range(n) if rd[i] == 1]
    keep = [i for i in range(n) if rd[i] == -1]
    m = len(fix)
    subs = {i: k for k, i in enumerate(fix)}
    subs[n] = m  # sigma

    def restrict(p: Poly) -> Poly:
        t = {}
        for e, c in p.terms.items():
            if any(e[i] for i in range(n) if i not in subs):
                continue
            ne = [0] * (m + 1)
            for i, k in subs.items():
                ne[k] = e[i]
            ne = tuple(ne)
            t[ne] = t.get(ne, 0) + c
        return Poly(m + 1, t)

    all_names = _names(n)
    exact = rm.certificates.get("mode", "exact") == "exact"
    dropped = {}
    for i in fix:
        g = restrict(rm.B[i])
        if not exact:
            g = g.chop(1e-10)
        dropped[all_names[i]] = g.is_zero()
        if not g.is_zero():
            raise ReductionError(f"component {all_names[i]} of B does not vanish on Fix(R): {g.to_text()}")
    G = [restrict(rm.B[i]) for i in keep]
    names = [all_names[i] for i in fix] + ["sigma"]
    return RestrictedMap(G, names, fix, keep, dropped, n, rm.case, exact)


def quadratic_resultant(b: Sequence) -> object:
    """Resultant of ``b1 s^2 + b2 s t + b3 t^2`` and ``b4 s^2 + b5 s t + b6 t^2``."""
    b1, b2, b3, b4, b5, b6 = b
    return (b1 * b6 - b3 * b4) ** 2 - (b1 * b5 - b2 * b4) * (b2 * b6 - b3 * b5)


@dataclass
class BranchFamily:
    """One family of symmetric periodic orbits predicted by ``G``.

    The family lives on the subset of ``Fix(R)`` where ``zero_coordinates``
    vanish and the center coordinates follow ``center_direction * sigma``. On
    that subset the amplitude coordinate solves ``equation = 0`` (``G_k``
    divided by the amplitude), whose leading law is

        amplitude = +-sqrt(radicand * sigma),   radicand = -(1 + c . dir) / q

    with ``q`` the amplitude-squared coefficient and ``c`` the linear center
    coefficients.
    """

    case: str
    family_id: str
    fix_names: list
    fix_indices: list
    zero_coordinates: list
    amplitude_coordinate: str
    center_coordinates: list
    center_direction: tuple
    equation: Poly
    equation_names: list
    sigma_coefficient: object
    amplitude_coefficient: object
    center_coefficients: tuple
    lam: float | None = None
    period_limit: float = 2 * math.pi
    alpha: object = 1
    valid: bool = True
    condition: str = ""
    parameters: list = field(default_factory=lambda: ["sigma"])

    @property
    def radicand(self) -> float:
        """``r`` with ``amplitude^2 = r sigma`` at leading order."""
        c = float(self.sigma_coefficient) + sum(
            float(ci) * float(di) for ci, di in zip(self.center_coefficients, self.center_direction))
        return -c / float(self.amplitude_coefficient)

    @property
    def sigma_sign(self) -> int:
        r = self.radicand
        return 1 if r > 0 else -1

    def leading_amplitude(self, sigma: float) -> float:
        return math.sqrt(max(self.radicand * sigma, 0.0))

    def law_text(self) -> str:
        r = Fraction(self.radicand).limit_denominator(10 ** 6)
        s = "sigma" if r == 1 else f"({r})*sigma"
        return f"{self.amplitude_coordinate} = +-sqrt({s}) + ..."

    def period(self, sigma: float) -> float:
        """Physical period ``2 pi / ((1 + sigma) alpha)``."""
        return 2 * math.pi / ((1 + sigma) * float(self.alpha))

    def point(self, sigma: float, amplitude: float, sign: int = 1) -> np.ndarray:
        """Fixed-space coordinates (ordered as ``fix_names``)."""
        v = np.zeros(len(self.fix_names))
        for name, d in zip(self.center_coordinates, self.center_direction):
            v[self.fix_names.index(name)] = d * sigma
        v[self.fix_names.index(self.amplitude_coordinate)] = sign * amplitude
        return v

    def to_dict(self) -> dict:
        def num(v):
            return str(v) if isinstance(v, Fraction) else v

        return {"case": self.case, "family_id": self.family_id, "parameters": self.parameters,
                "fix_coordinates": self.fix_names, "fix_indices": self.fix_indices,
                "zero_coordinates": self.zero_coordinates,
                "amplitude_coordinate": self.amplitude_coordinate,
                "center_coordinates": self.center_coordinates,
                "center_direction": list(self.center_direction), "lambda": self.lam,
                "equation": self.equation.to_text(self.equation_names),
                "equation_variables": self.equation_names,
                "sigma_coefficient": num(self.sigma_coefficient),
                "amplitude_coefficient": num(self.amplitude_coefficient),
                "center_coefficients": [num(c) for c in self.center_coefficients],
                "radicand": self.radicand, "sigma_sign": self.sigma_sign,
                "leading_law": self.law_text(), "exponent": "1/2",
                "period_limit": self.period_limit, "alpha": num(self.alpha),
                "valid": self.valid, "condition": self.condition, "symmetric": True}

    @classmethod
    def from_dict(cls, d: dict) -> "BranchFamily":
        from .exprs import expand, parse_hamiltonian
        from .linalg import parse_scalar

        names = d["equation_variables"]
        eq = expand(parse_hamiltonian(d["equation"], names), len(names))

        def val(v):
            return parse_scalar(v) if isinstance(v, str) else v

        return cls(d["case"], d["family_id"], d["fix_coordinates"], d["fix_indices"],
                   d["zero_coordinates"], d["amplitude_coordinate"], d["center_coordinates"],
                   tuple(d["center_direction"]), eq, names, val(d["sigma_coefficient"]),
                   val(d["amplitude_coefficient"]),
                   tuple(val(c) for c in d["center_coefficients"]), d.get("lambda"),
                   d["period_limit"], val(d["alpha"]), d["valid"], d["condition"],
                   d.get("parameters", ["sigma"]))


@dataclass
class BranchReport:
    """Outcome of :func:`analyze_branches`.

    ``verdict`` is ``"families"``, ``"no-branch"`` or ``"outside"`` (a
    genericity condition fails; nothing is predicted).
    """

    case: str
    verdict: str
    families: list
    coefficients: dict
    certificates: dict
    notes: list = field(default_factory=list)

    def to_dict(self) -> dict:
        def num(v):
            return str(v) if isinstance(v, Fraction) else v

        return {"case": self.case, "verdict": self.verdict,
                "families": [f.to_dict() for f in self.families],
                "coefficients": {k: num(v) for k, v in self.coefficients.items()},
                "certificates": self.certificates, "notes": self.notes}


def _restrict_zero(p: Poly, idx: Sequence[int]) -> Poly:
    return Poly(p.nvars, {e: c for e, c in p.terms.items() if not any(e[i] for i in idx)})


def _coef(p: Poly, names: list, mono: dict):
    e = [0] * len(names)
    for k, v in mono.items():
        e[names.index(k)] = v
    return p.coefficient(tuple(e))


def _is_zero_coef(c, exact) -> bool:
    return c == 0 if exact else abs(float(c)) < 1e-12


def _family(G: RestrictedMap, comp: int, amp: str, zeros: list, centers: list, direction,
            fid: str, alpha, lam=None) -> BranchFamily:
    names = G.names
    zi = [names.index(z) for z in zeros]
    ai = names.index(amp)
    g = _restrict_zero(G.G[comp], zi)
    F = g.divide_by_variable(ai)
    s = _coef(F, names, {"sigma": 1})
    q = _coef(F, names, {amp: 2})
    cc = tuple(_coef(F, names, {c: 1}) for c in centers)
    return BranchFamily(G.case, fid, names[:-1], G.fix_indices, zeros, amp, centers,
                        tuple(direction), F, names, s, q, cc, lam,
                        2 * math.pi / float(alpha), alpha,
                        parameters=["sigma"] if not centers else ["sigma", "lambda"])


def analyze_branches(G: RestrictedMap, case: str | None = None, alpha=1,
                     lambdas: Sequence[float] = (0.0, 0.5, -0.5, 1.0)) -> BranchReport:
    """Classify the zero set of ``G`` near the origin.

    Parameters
    ----------
    G : RestrictedMap
    case : str, optional
        Defaults to ``G.case``.
    alpha : number
        Physical frequency, used for the limiting period.
    lambdas : sequence of float
        Ratios ``a/b`` of the center direction ``(a, b)`` in the 6:4 case; the
        chart boundary ``(1, 0)`` is always added.
    """
    case = case or G.case
    exact = G.exact
    names = G.names
    certs, coeffs, notes = {}, {}, []
    if case == "4:2":
        gx1, gx2 = G.G
        a1 = -_coef(gx1, names, {"y1": 3})
        a2 = -_coef(gx1, names, {"y1": 2, "y2": 1})
        a3 = -_coef(gx1, names, {"y1": 1, "y2": 2})
        coeffs.update(a1=a1, a2=a2, a3=a3)
        # pattern -y_j(a1 y1^2 + a2 y1 y2 + a3 y2^2 - sigma) through cubic order
        y1, y2, s = (Poly.var(3, i) for i in range(3))
        quad = y1 * y1 * a1 + y1 * y2 * a2 + y2 * y2 * a3 - s
        pat = [-(y1 * quad), -(y2 * quad)]
        low = [_low(g, 3) for g in G.G]
        certs["pattern"] = all(_poly_zero(l - p, exact) for l, p in zip(low, pat))
        for comp, zero in ((0, "y1"), (1, "y2")):
            certs[f"G_{'x1' if comp == 0 else 'x2'}_vanishes_on_{zero}_axis"] = _poly_zero(
                _restrict_zero(G.G[comp], [names.index(zero)]), exact)
        if _is_zero_coef(a1, exact) or _is_zero_coef(a3, exact):
            return BranchReport(case, "outside", [], coeffs, certs,
                                ["a1*a3 = 0: genericity condition fails, no prediction"])
        fams = [_family(G, 1, "y2", ["y1"], [], (), "F1", alpha),
                _family(G, 0, "y1", ["y2"], [], (), "F2", alpha)]
        for f in fams:
            f.condition = "a1*a3 != 0"
        return BranchReport(case, "families", fams, coeffs, certs, notes)
    if case == "6:2":
        c1, c2 = G.G[0], G.G[1]
        b = [_coef(c1, names, {"x2": 2}), _coef(c1, names, {"x2": 1, "x3": 1}), _coef(c1, names, {"x3": 2}),
             _coef(c2, names, {"x2": 2}), _coef(c2, names, {"x2": 1, "x3": 1}), _coef(c2, names, {"x3": 2})]
        for k, v in enumerate(b, 1):
            coeffs[f"b{k}"] = v
        res = quadratic_resultant(b)
        coeffs["resultant"] = res
        # the last two components: x_j(-sigma + delta) + ...
        for k, (comp, var) in enumerate(((2, "x2"), (3, "x3"))):
            g = G.G[comp]
            lin = _coef(g, names, {var: 1, "sigma": 1})
            rest = g - Poly(g.nvars, {tuple(1 if nm in (var, "sigma") else 0 for nm in names): lin})
            low = _low(rest, 2)
            coeffs[f"sigma_coefficient_{var}"] = lin
            certs[f"component_{var}_has_no_quadratic_correction"] = _poly_zero(low, exact)
            notes.append(f"component {G.component_names()[comp]}: "
                         f"{g.to_text(names)}; correction beyond -sigma*{var} starts at degree "
                         f"{min((sum(e[:-1]) for e in rest.terms), default='none')}")
        certs["quadratic_forms_have_common_root"] = _is_zero_coef(res, exact)
        if _is_zero_coef(res, exact):
            return BranchReport(case, "outside", [], coeffs, certs,
                                notes + ["zero resultant: the leading quadratic forms share a factor"])
        return BranchReport(case, "no-branch", [], coeffs, certs,
                            notes + ["nonzero resultant: (x2, x3) = (0, 0) is an isolated zero of G"])
    if case == "6:4":
        gx2, gx3 = G.G
        yi2, yi3 = names.index("y2"), names.index("y3")
        try:
            F2 = gx2.divide_by_variable(yi2)
            F3 = gx3.divide_by_variable(yi3)
        except ValueError:
            return BranchReport(case, "outside", [], coeffs, {"factor_pattern": False},
                                ["G components are not divisible by y2, y3"])
        keys = [("a1", {"x1": 1}), ("a2", {"y1": 1}), ("a3", {"x1": 2}), ("a4", {"y1": 2}),
                ("a5", {"y2": 2}), ("a6", {"y2": 1, "y3": 1}), ("a7", {"y3": 2}),
                ("a_x1y1", {"x1": 1, "y1": 1})]
        for k, mono in keys:
            coeffs[k] = _coef(F2, names, mono)
        coeffs["a7"] = _coef(F3, names, {"y3": 2})
        coeffs["a5_second"] = _coef(F3, names, {"y2": 2})
        certs["common_factor_through_quadratic"] = _poly_zero(_low(F2 - F3, 2), exact)
        certs["sigma_coefficient_one"] = (_coef(F2, names, {"sigma": 1}) == 1)
        if _is_zero_coef(coeffs["a5"], exact) or _is_zero_coef(coeffs["a7"], exact):
            return BranchReport(case, "outside", [], coeffs, certs,
                                ["a5*a7 = 0: genericity condition fails, no prediction"])
        dirs = [((float(l), 1.0), float(l)) for l in lambdas] + [((1.0, 0.0), None)]
        fams = []
        for j, (d, lam) in enumerate(dirs):
            tag = "b0" if lam is None else f"l{j}"
            for comp, amp, zero, fid in ((1, "y3", "y2", "G1"), (0, "y2", "y3", "G2")):
                f = _family(G, comp, amp, [zero], ["x1", "y1"], d, f"{fid}_{tag}", alpha, lam)
                f.condition = "a5*a7 != 0"
                fams.append(f)
        notes.append("center direction (x1, y1) = (a sigma, b sigma) with lambda = a/b; "
                     "b = 0 handled as (sigma, 0)")
        return BranchReport(case, "families", fams, coeffs, certs, notes)
    raise ReductionError(f"unknown case {case!r}")


def _low(p: Poly, d: int) -> Poly:
    """Terms of total degree ``<= d`` counting sigma."""
    return Poly(p.nvars, {e: c for e, c in p.terms.items() if sum(e) <= d})


def _poly_zero(p: Poly, exact: bool) -> bool:
    return p.is_zero() if exact else p.chop(1e-10).is_zero()


def numeric_branch_continue(family: BranchFamily, sigmas: Sequence[float], G: RestrictedMap | None = None,
                            tol: float = 1e-12, max_iter: int = 50) -> list[dict]:
    """Refine the leading-order law by Newton's method on the family equation.

    Returns one row per sigma: ``sigma``, ``amplitude``, fixed-space point,
    ``residual`` (max over all components of ``G`` when given, else of the
    family equation) and ``converged``.
    """
    F = family.equation.to_float()
    names = family.equation_names
    ai = names.index(family.amplitude_coordinate)
    dF = F.partial(ai)
    rows = []
    for s in sigmas:
        s = float(s)
        row = {"sigma": s, "family_id": family.family_id}
        if s == 0 or s * family.sigma_sign < 0:
            row.update(amplitude=0.0, point=[0.0] * len(family.fix_names), residual=0.0,
                       converged=s == 0, iterations=0,
                       note="" if s == 0 else "sigma on the wrong side of the family")
            rows.append(row)
            continue
        r = family.leading_amplitude(s)
        ok, it = False, 0
        for it in range(1, max_iter + 1):
            pt = _eq_point(family, s, r)
            f = float(F.evaluate(pt))
            df = float(dF.evaluate(pt))
            if df == 0:
                break
            step = f / df
            r -= step
            if abs(step) <= 1e-15 * max(1.0, abs(r)):
                ok = True
                break
        pt = _eq_point(family, s, r)
        res = abs(float(F.evaluate(pt))) * abs(r)
        v = family.point(s, r)
        if G is not None:
            full = list(v) + [s]
            res = float(np.max(np.abs(G.evaluate(full))))
        row.update(amplitude=abs(r), point=[float(x) for x in family.point(s, abs(r))],
                   residual=res, converged=bool(ok and res <= tol), iterations=it)
        rows.append(row)
    return rows


def _eq_point(family: BranchFamily, s: float, r: float) -> list[float]:
    v = list(family.point(s, r)) + [s]
    return v
