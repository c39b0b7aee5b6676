"""Sparse multivariate polynomials graded by total degree.

Coefficients are :class:`fractions.Fraction` in exact mode or Python floats in
float mode. The truncation order and the precision mode are properties of the
computation context (see :func:`truncation` and :func:`precision`), not of
individual polynomials: every product drops terms above the active order and
records that it did so.
"""
from __future__ import annotations

import contextvars
import math
from contextlib import contextmanager
from dataclasses import dataclass
from fractions import Fraction
from types import MappingProxyType
from typing import Iterable, Iterator, Mapping, Sequence

import numpy as np

__all__ = [
    "Poly", "PolyVector", "TruncationLog", "truncation", "precision",
    "current_order", "current_mode", "scalar", "default_names",
    "poisson_bracket", "hamiltonian_vector_field", "monomials", "CompiledField",
]

Exponent = tuple


@dataclass
class TruncationLog:
    """Records terms dropped by products inside a :func:`truncation` block."""

    order: int | None
    dropped: int = 0

    @property
    def truncated(self) -> bool:
        return self.dropped > 0


@dataclass(frozen=True)
class _Context:
    order: int | None
    mode: str
    log: TruncationLog | None


_CTX: contextvars.ContextVar[_Context] = contextvars.ContextVar(
    "revbif_poly_context", default=_Context(None, "exact", None))


@contextmanager
def truncation(order: int | None):
    """Context in which all polynomial products are truncated at ``order``.

    Yields a :class:`TruncationLog` whose ``truncated`` flag tells whether any
    term was dropped.
    """
    if order is not None and order < 0:
        raise ValueError("truncation order must be non-negative")
    ctx = _CTX.get()
    log = TruncationLog(order)
    token = _CTX.set(_Context(order, ctx.mode, log))
    try:
        yield log
    finally:
        _CTX.reset(token)


@contextmanager
def precision(mode: str):
    """Context selecting ``"exact"`` (Fraction) or ``"float"`` coefficients."""
    if mode not in ("exact", "float"):
        raise ValueError(f"unknown precision mode {mode!r}")
    ctx = _CTX.get()
    token = _CTX.set(_Context(ctx.order, mode, ctx.log))
    try:
        yield
    finally:
        _CTX.reset(token)


def current_order() -> int | None:
    return _CTX.get().order


def current_mode() -> str:
    return _CTX.get().mode


def _record_drop(count: int) -> None:
    log = _CTX.get().log
    if log is not None and count:
        log.dropped += count


def scalar(value, mode: str | None = None):
    """Coerce a raw number to the coefficient type of ``mode``."""
    mode = mode or current_mode()
    if mode == "exact":
        if isinstance(value, Fraction):
            return value
        if isinstance(value, (bool, np.bool_)):
            raise TypeError("boolean is not a scalar")
        if isinstance(value, (int, np.integer)):
            return Fraction(int(value))
        if isinstance(value, str):
            return Fraction(value)
        if isinstance(value, (float, np.floating)):
            if not math.isfinite(value):
                raise ValueError("non-finite coefficient")
            return Fraction(float(value))
        raise TypeError(f"unsupported scalar type {type(value).__name__}")
    v = float(value)
    if not math.isfinite(v):
        raise ValueError("non-finite coefficient")
    return v


def _check_coeff(c):
    if isinstance(c, Fraction):
        return c
    if isinstance(c, (int, np.integer)) and not isinstance(c, bool):
        return Fraction(int(c))
    if isinstance(c, (float, np.floating)):
        c = float(c)
        if not math.isfinite(c):
            raise ValueError("non-finite coefficient")
        return c
    return scalar(c)


def default_names(nvars: int) -> tuple[str, ...]:
    """Phase-variable names ``x1, y1, x2, y2, ...``; an odd trailing slot is
    named ``sigma`` (used for maps in ``(u, sigma)``)."""
    names = []
    for k in range(nvars // 2):
        names += [f"x{k + 1}", f"y{k + 1}"]
    if nvars % 2:
        names.append("sigma" if nvars > 1 else "x1")
    return tuple(names)


def monomials(nvars: int, degree: int) -> list[tuple]:
    """All exponent vectors of total ``degree`` in graded-lex order."""
    out = []

    def rec(prefix, left, k):
        if k == nvars - 1:
            out.append(tuple(prefix) + (left,))
            return
        for e in range(left, -1, -1):
            rec(prefix + [e], left - e, k + 1)

    if nvars == 0:
        return [()] if degree == 0 else []
    rec([], degree, 0)
    return out


def _glex_key(e):
    return (sum(e), tuple(-x for x in e))


class Poly:
    """Immutable sparse polynomial in ``nvars`` variables.

    Parameters
    ----------
    nvars : int
        Number of variables.
    terms : mapping, optional
        ``{exponent tuple: coefficient}``. Zero coefficients are discarded and
        terms above the active truncation order are dropped (and recorded).
    """

    __slots__ = ("nvars", "_terms", "_hash")

    def __init__(self, nvars: int, terms: Mapping[tuple, object] | None = None):
        self.nvars = int(nvars)
        clean = {}
        order = current_order()
        dropped = 0
        for e, c in (terms or {}).items():
            e = tuple(int(x) for x in e)
            if len(e) != self.nvars or any(x < 0 for x in e):
                raise ValueError(f"bad exponent {e} for {self.nvars} variables")
            c = _check_coeff(c)
            if c == 0:
                continue
            if order is not None and sum(e) > order:
                dropped += 1
                continue
            clean[e] = clean.get(e, 0) + c
            if clean[e] == 0:
                del clean[e]
        _record_drop(dropped)
        self._terms = clean
        self._hash = None

    @classmethod
    def _raw(cls, nvars: int, terms: dict) -> "Poly":
        p = cls.__new__(cls)
        p.nvars = nvars
        p._terms = terms
        p._hash = None
        return p

    # construction helpers
    @classmethod
    def zero(cls, nvars: int) -> "Poly":
        return cls._raw(nvars, {})

    @classmethod
    def const(cls, nvars: int, c) -> "Poly":
        return cls(nvars, {(0,) * nvars: scalar(c) if not isinstance(c, (Fraction, float)) else c})

    @classmethod
    def var(cls, nvars: int, i: int, c=1) -> "Poly":
        e = [0] * nvars
        e[i] = 1
        return cls(nvars, {tuple(e): scalar(c) if isinstance(c, int) else c})

    @classmethod
    def monomial(cls, exponent: Sequence[int], c=1) -> "Poly":
        return cls(len(exponent), {tuple(exponent): scalar(c) if isinstance(c, int) else c})

    @classmethod
    def from_linear(cls, row: Sequence) -> "Poly":
        n = len(row)
        terms = {}
        for j, c in enumerate(row):
            if c != 0:
                e = [0] * n
                e[j] = 1
                terms[tuple(e)] = _check_coeff(c)
        return cls(n, terms)

    # views
    @property
    def terms(self) -> Mapping[tuple, object]:
        return MappingProxyType(self._terms)

    def items(self) -> list[tuple[tuple, object]]:
        """Terms in graded-lex order."""
        return sorted(self._terms.items(), key=lambda kv: _glex_key(kv[0]))

    def coefficient(self, exponent: Sequence[int]):
        return self._terms.get(tuple(exponent), 0)

    def is_zero(self) -> bool:
        return not self._terms

    def __bool__(self) -> bool:
        return bool(self._terms)

    def __len__(self) -> int:
        return len(self._terms)

    @property
    def degree(self) -> int:
        """Total degree; ``-1`` for the zero polynomial."""
        return max((sum(e) for e in self._terms), default=-1)

    @property
    def min_degree(self) -> int:
        return min((sum(e) for e in self._terms), default=-1)

    def is_exact(self) -> bool:
        return all(isinstance(c, Fraction) for c in self._terms.values())

    def degrees(self) -> list[int]:
        return sorted({sum(e) for e in self._terms})

    # arithmetic
    def _check(self, other: "Poly"):
        if not isinstance(other, Poly):
            raise TypeError("expected Poly")
        if other.nvars != self.nvars:
            raise ValueError(f"dimension mismatch: {self.nvars} vs {other.nvars}")

    def _coerce(self, other):
        if isinstance(other, Poly):
            self._check(other)
            return other
        return Poly.const(self.nvars, other)

    def __add__(self, other) -> "Poly":
        other = self._coerce(other)
        t = dict(self._terms)
        for e, c in other._terms.items():
            v = t.get(e, 0) + c
            if v == 0:
                t.pop(e, None)
            else:
                t[e] = v
        return Poly._raw(self.nvars, t)

    __radd__ = __add__

    def __neg__(self) -> "Poly":
        return Poly._raw(self.nvars, {e: -c for e, c in self._terms.items()})

    def __sub__(self, other) -> "Poly":
        return self + (-self._coerce(other))

    def __rsub__(self, other) -> "Poly":
        return (-self) + other

    def scale(self, c) -> "Poly":
        c = _check_coeff(c)
        if c == 0:
            return Poly.zero(self.nvars)
        return Poly._raw(self.nvars, {e: v * c for e, v in self._terms.items()})

    def __mul__(self, other) -> "Poly":
        if not isinstance(other, Poly):
            return self.scale(other)
        self._check(other)
        order = current_order()
        t: dict = {}
        dropped = 0
        for e1, c1 in self._terms.items():
            d1 = sum(e1)
            for e2, c2 in other._terms.items():
                if order is not None and d1 + sum(e2) > order:
                    dropped += 1
                    continue
                e = tuple(a + b for a, b in zip(e1, e2))
                t[e] = t.get(e, 0) + c1 * c2
        _record_drop(dropped)
        return Poly._raw(self.nvars, {e: c for e, c in t.items() if c != 0})

    def __rmul__(self, other) -> "Poly":
        return self.scale(other)

    def __truediv__(self, c) -> "Poly":
        if isinstance(c, Poly):
            raise TypeError("polynomial division is not supported")
        c = _check_coeff(c)
        return self.scale(1 / c if isinstance(c, Fraction) else 1.0 / c)

    def __pow__(self, k: int) -> "Poly":
        if k < 0:
            raise ValueError("negative power")
        out = Poly.const(self.nvars, 1)
        base = self
        while k:
            if k & 1:
                out = out * base
            k >>= 1
            if k:
                base = base * base
        return out

    def partial(self, i: int) -> "Poly":
        """Derivative with respect to variable ``i`` (0-based)."""
        if not 0 <= i < self.nvars:
            raise ValueError(f"variable index {i} out of range")
        t = {}
        for e, c in self._terms.items():
            if e[i]:
                ne = list(e)
                ne[i] -= 1
                t[tuple(ne)] = c * e[i]
        return Poly._raw(self.nvars, t)

    def gradient(self) -> "PolyVector":
        return PolyVector([self.partial(i) for i in range(self.nvars)])

    def grade(self, d: int) -> "Poly":
        """Homogeneous part of total degree ``d``."""
        return Poly._raw(self.nvars, {e: c for e, c in self._terms.items() if sum(e) == d})

    def truncate(self, order: int) -> "Poly":
        return Poly._raw(self.nvars, {e: c for e, c in self._terms.items() if sum(e) <= order})

    def homogeneous_parts(self) -> dict[int, "Poly"]:
        return {d: self.grade(d) for d in self.degrees()}

    def map_coefficients(self, fn) -> "Poly":
        return Poly(self.nvars, {e: fn(c) for e, c in self._terms.items()})

    def to_float(self) -> "Poly":
        return Poly._raw(self.nvars, {e: float(c) for e, c in self._terms.items()})

    def to_exact(self) -> "Poly":
        return Poly._raw(self.nvars, {e: Fraction(c) for e, c in self._terms.items()})

    def chop(self, tol: float) -> "Poly":
        """Drop float coefficients with ``|c| <= tol`` (exact ones are kept)."""
        return Poly._raw(self.nvars, {e: c for e, c in self._terms.items()
                                      if isinstance(c, Fraction) or abs(c) > tol})

    def max_abs_coefficient(self) -> float:
        return max((abs(float(c)) for c in self._terms.values()), default=0.0)

    def divide_by_variable(self, i: int) -> "Poly":
        """Exact quotient by ``x_i``; raises ``ValueError`` if not divisible."""
        t = {}
        for e, c in self._terms.items():
            if e[i] == 0:
                raise ValueError(f"not divisible by variable {i}")
            ne = list(e)
            ne[i] -= 1
            t[tuple(ne)] = c
        return Poly._raw(self.nvars, t)

    # evaluation and substitution
    def __call__(self, *point):
        if len(point) == 1 and isinstance(point[0], (list, tuple, np.ndarray)):
            point = tuple(point[0])
        return self.evaluate(point)

    def evaluate(self, point: Sequence):
        if len(point) != self.nvars:
            raise ValueError("dimension mismatch in evaluation")
        total = 0
        for e, c in self._terms.items():
            term = c
            for x, k in zip(point, e):
                if k:
                    term = term * x ** k
            total = total + term
        return total

    def compose(self, subs: Sequence["Poly"]) -> "Poly":
        """``f(g_1(y), ..., g_n(y))`` truncated at the active order."""
        if len(subs) != self.nvars:
            raise ValueError(f"dimension mismatch: need {self.nvars} substitutions")
        m = subs[0].nvars if subs else 0
        if any(g.nvars != m for g in subs):
            raise ValueError("substituted polynomials must share dimension")
        cache: dict[tuple[int, int], Poly] = {}

        def power(i, k):
            if k == 0:
                return Poly.const(m, 1)
            if (i, k) not in cache:
                cache[(i, k)] = subs[i] if k == 1 else power(i, k - 1) * subs[i]
            return cache[(i, k)]

        out: dict = {}
        for e, c in self._terms.items():
            term = Poly.const(m, c) if not isinstance(c, Fraction) else Poly._raw(m, {(0,) * m: c})
            for i, k in enumerate(e):
                if k:
                    term = term * power(i, k)
            for te, tc in term._terms.items():
                out[te] = out.get(te, 0) + tc
        return Poly._raw(m, {e: c for e, c in out.items() if c != 0})

    def substitute_linear(self, M) -> "Poly":
        """``f(M x)`` for an ``n x n`` matrix ``M``; degree-preserving."""
        M = np.asarray(M, dtype=object)
        if M.shape != (self.nvars, self.nvars):
            raise ValueError(f"dimension mismatch: matrix {M.shape} for {self.nvars} variables")
        return self.compose([Poly.from_linear(list(M[i])) for i in range(self.nvars)])

    def hessian(self) -> np.ndarray:
        """Constant Hessian of the quadratic part, as an object array."""
        q = self.grade(2)
        H = np.empty((self.nvars, self.nvars), dtype=object)
        zero = 0.0 if not q.is_exact() else Fraction(0)
        H[:] = zero
        for e, c in q._terms.items():
            idx = [i for i, k in enumerate(e) for _ in range(k)]
            i, j = idx
            if i == j:
                H[i, i] = H[i, i] + 2 * c
            else:
                H[i, j] = H[i, j] + c
                H[j, i] = H[j, i] + c
        return H

    # comparison and text
    def __eq__(self, other) -> bool:
        if isinstance(other, (int, Fraction, float)):
            other = Poly.const(self.nvars, other) if other != 0 else Poly.zero(self.nvars)
        if not isinstance(other, Poly):
            return NotImplemented
        return self.nvars == other.nvars and self._terms == other._terms

    def __hash__(self) -> int:
        if self._hash is None:
            self._hash = hash((self.nvars, frozenset(self._terms.items())))
        return self._hash

    def to_text(self, names: Sequence[str] | None = None) -> str:
        """Canonical text ``3/2*x1^2*y1 - x2`` in graded-lex order."""
        names = tuple(names) if names is not None else default_names(self.nvars)
        if len(names) != self.nvars:
            raise ValueError("wrong number of variable names")
        if not self._terms:
            return "0"
        parts = []
        for e, c in self.items():
            mon = "*".join(names[i] if k == 1 else f"{names[i]}^{k}" for i, k in enumerate(e) if k)
            neg = c < 0
            a = -c if neg else c
            if isinstance(a, Fraction):
                cs = str(a.numerator) if a.denominator == 1 else f"{a.numerator}/{a.denominator}"
            else:
                cs = repr(float(a))
            if mon:
                body = mon if cs == "1" else f"{cs}*{mon}"
            else:
                body = cs
            parts.append(("-" if neg else "+", body))
        text = ("-" if parts[0][0] == "-" else "") + parts[0][1]
        for sgn, body in parts[1:]:
            text += f" {sgn} {body}"
        return text

    def __repr__(self) -> str:
        return f"Poly({self.to_text()})"


def _as_matrix(J, n):
    J = np.asarray(J, dtype=object)
    if J.shape != (n, n):
        raise ValueError(f"dimension mismatch: structure matrix {J.shape} for {n} variables")
    return J


def poisson_bracket(f: Poly, g: Poly, J) -> Poly:
    """``{f, g} = grad(f)^T J grad(g)``.

    ``J`` is the Poisson structure (``X_H = J grad H``); with the standard
    structure ``{x1, y1} = 1``.
    """
    if f.nvars != g.nvars:
        raise ValueError(f"dimension mismatch: {f.nvars} vs {g.nvars}")
    n = f.nvars
    J = _as_matrix(J, n)
    df = [f.partial(i) for i in range(n)]
    dg = [g.partial(j) for j in range(n)]
    out = Poly.zero(n)
    for i in range(n):
        if df[i].is_zero():
            continue
        acc = Poly.zero(n)
        for j in range(n):
            if J[i, j] != 0 and not dg[j].is_zero():
                acc = acc + dg[j].scale(J[i, j])
        if not acc.is_zero():
            out = out + df[i] * acc
    return out


def hamiltonian_vector_field(H: Poly, J) -> "PolyVector":
    """``X_H = J grad H``."""
    n = H.nvars
    J = _as_matrix(J, n)
    grad = [H.partial(j) for j in range(n)]
    comps = []
    for i in range(n):
        acc = Poly.zero(n)
        for j in range(n):
            if J[i, j] != 0 and not grad[j].is_zero():
                acc = acc + grad[j].scale(J[i, j])
        comps.append(acc)
    return PolyVector(comps)


class PolyVector:
    """Immutable tuple of :class:`Poly` components sharing one dimension."""

    __slots__ = ("comps",)

    def __init__(self, comps: Iterable[Poly]):
        comps = tuple(comps)
        if not comps:
            raise ValueError("empty PolyVector")
        n = comps[0].nvars
        if any(c.nvars != n for c in comps):
            raise ValueError("components must share dimension")
        self.comps = comps

    @classmethod
    def zero(cls, nvars: int, length: int | None = None) -> "PolyVector":
        return cls([Poly.zero(nvars)] * (length or nvars))

    @classmethod
    def linear(cls, A) -> "PolyVector":
        """The field ``x -> A x``."""
        A = np.asarray(A, dtype=object)
        return cls([Poly.from_linear(list(A[i])) for i in range(A.shape[0])])

    @property
    def nvars(self) -> int:
        return self.comps[0].nvars

    def __len__(self) -> int:
        return len(self.comps)

    def __iter__(self) -> Iterator[Poly]:
        return iter(self.comps)

    def __getitem__(self, i):
        return self.comps[i]

    def __add__(self, other: "PolyVector") -> "PolyVector":
        self._check(other)
        return PolyVector(a + b for a, b in zip(self.comps, other.comps))

    def __sub__(self, other: "PolyVector") -> "PolyVector":
        self._check(other)
        return PolyVector(a - b for a, b in zip(self.comps, other.comps))

    def __neg__(self) -> "PolyVector":
        return PolyVector(-a for a in self.comps)

    def scale(self, c) -> "PolyVector":
        return PolyVector(a.scale(c) for a in self.comps)

    def __mul__(self, c) -> "PolyVector":
        if isinstance(c, Poly):
            return PolyVector(a * c for a in self.comps)
        return self.scale(c)

    __rmul__ = __mul__

    def _check(self, other):
        if not isinstance(other, PolyVector) or len(other) != len(self) or other.nvars != self.nvars:
            raise ValueError("PolyVector shape mismatch")

    def __eq__(self, other) -> bool:
        return isinstance(other, PolyVector) and self.comps == other.comps

    def __hash__(self) -> int:
        return hash(self.comps)

    def is_zero(self) -> bool:
        return all(c.is_zero() for c in self.comps)

    @property
    def degree(self) -> int:
        return max(c.degree for c in self.comps)

    def grade(self, d: int) -> "PolyVector":
        return PolyVector(c.grade(d) for c in self.comps)

    def truncate(self, order: int) -> "PolyVector":
        return PolyVector(c.truncate(order) for c in self.comps)

    def to_float(self) -> "PolyVector":
        return PolyVector(c.to_float() for c in self.comps)

    def chop(self, tol: float) -> "PolyVector":
        return PolyVector(c.chop(tol) for c in self.comps)

    def linear_part(self) -> np.ndarray:
        """Matrix of the degree-1 part (object array)."""
        n = self.nvars
        exact = all(c.grade(1).is_exact() for c in self.comps)
        A = np.empty((len(self), n), dtype=object)
        A[:] = Fraction(0) if exact else 0.0
        for i, c in enumerate(self.comps):
            for e, v in c.grade(1).terms.items():
                A[i, e.index(1)] = v
        return A

    def evaluate(self, point):
        return [c.evaluate(point) for c in self.comps]

    def jacobian(self) -> list[list[Poly]]:
        return [[c.partial(j) for j in range(self.nvars)] for c in self.comps]

    def apply_matrix(self, M) -> "PolyVector":
        """``M X`` (matrix acting on the component index)."""
        M = np.asarray(M, dtype=object)
        out = []
        for i in range(M.shape[0]):
            acc = Poly.zero(self.nvars)
            for j in range(M.shape[1]):
                if M[i, j] != 0:
                    acc = acc + self.comps[j].scale(M[i, j])
            out.append(acc)
        return PolyVector(out)

    def substitute_linear(self, M) -> "PolyVector":
        """Components evaluated at ``M x`` (no action on the component index)."""
        return PolyVector(c.substitute_linear(M) for c in self.comps)

    def compose(self, subs: Sequence[Poly]) -> "PolyVector":
        return PolyVector(c.compose(subs) for c in self.comps)

    def directional(self, f: Poly) -> Poly:
        """Lie derivative ``grad(f) . X`` of a function along this field."""
        out = Poly.zero(self.nvars)
        for i, c in enumerate(self.comps):
            if not c.is_zero():
                df = f.partial(i)
                if not df.is_zero():
                    out = out + df * c
        return out

    def derivative_along(self, other: "PolyVector") -> "PolyVector":
        """``DX . Y``: this field differentiated along ``other``."""
        return PolyVector(other.directional(c) for c in self.comps)

    def lie_bracket(self, other: "PolyVector") -> "PolyVector":
        """``[X, Y] = DY.X - DX.Y`` (the Lie derivative of ``Y`` along ``X``)."""
        return other.derivative_along(self) - self.derivative_along(other)

    def to_text(self, names=None) -> list[str]:
        return [c.to_text(names) for c in self.comps]

    def compile(self) -> "CompiledField":
        return CompiledField(self)

    def __repr__(self) -> str:
        return "PolyVector([" + ", ".join(self.to_text()) + "])"


class CompiledField:
    """Vectorized float evaluator for a :class:`PolyVector` and its Jacobian.

    Monomials are built degree by degree from a parent monomial times one
    variable and then contracted with dense coefficient matrices, so a batch of
    ``M`` points costs one gather-multiply per monomial plus two matmuls.
    """

    def __init__(self, vec: PolyVector, jacobian: bool = True):
        self.n = vec.nvars
        self.m = len(vec)
        jac_polys = [[c.partial(j) for j in range(self.n)] for c in vec.comps] if jacobian else []
        needed = set()
        for c in vec.comps:
            needed.update(c.terms)
        for row in jac_polys:
            for p in row:
                needed.update(p.terms)
        # close under the canonical parent (drop one from the last nonzero slot)
        stack = list(needed)
        while stack:
            e = stack.pop()
            if sum(e) == 0:
                continue
            k = max(i for i, x in enumerate(e) if x)
            parent = list(e)
            parent[k] -= 1
            parent = tuple(parent)
            if parent not in needed:
                needed.add(parent)
                stack.append(parent)
        needed.add((0,) * self.n)
        order = sorted(needed, key=_glex_key)
        self.index = {e: i for i, e in enumerate(order)}
        self.levels = []
        maxdeg = max(sum(e) for e in order)
        for d in range(1, maxdeg + 1):
            idx, par, var = [], [], []
            for e in order:
                if sum(e) != d:
                    continue
                k = max(i for i, x in enumerate(e) if x)
                p = list(e)
                p[k] -= 1
                idx.append(self.index[e])
                par.append(self.index[tuple(p)])
                var.append(k)
            self.levels.append((np.array(idx), np.array(par), np.array(var)))
        self.nmon = len(order)
        self.C = np.zeros((self.nmon, self.m))
        for j, c in enumerate(vec.comps):
            for e, v in c.terms.items():
                self.C[self.index[e], j] = float(v)
        self.CJ = None
        if jacobian:
            self.CJ = np.zeros((self.nmon, self.m * self.n))
            for i, row in enumerate(jac_polys):
                for j, p in enumerate(row):
                    for e, v in p.terms.items():
                        self.CJ[self.index[e], i * self.n + j] = float(v)

    def monomial_values(self, X: np.ndarray) -> np.ndarray:
        X = np.atleast_2d(X)
        Mv = np.empty((X.shape[0], self.nmon))
        Mv[:, 0] = 1.0
        for idx, par, var in self.levels:
            Mv[:, idx] = Mv[:, par] * X[:, var]
        return Mv

    def __call__(self, X: np.ndarray) -> np.ndarray:
        X = np.asarray(X, dtype=float)
        single = X.ndim == 1
        out = self.monomial_values(X) @ self.C
        return out[0] if single else out

    def both(self, X: np.ndarray):
        """Field values ``(M, m)`` and Jacobians ``(M, m, n)`` in one pass."""
        X = np.atleast_2d(np.asarray(X, dtype=float))
        Mv = self.monomial_values(X)
        return Mv @ self.C, (Mv @ self.CJ).reshape(X.shape[0], self.m, self.n)

    def jac(self, X: np.ndarray) -> np.ndarray:
        X = np.asarray(X, dtype=float)
        single = X.ndim == 1
        J = self.both(X)[1]
        return J[0] if single else J
