"""Closed-form Hamiltonian expressions: parsing, printing and Taylor jets.

Grammar::

    expr   := term (('+' | '-') term)*
    term   := unary (('*' | '/') unary)*
    unary  := ('-' | '+') unary | power
    power  := atom ('^' ['-'|'+'] INTEGER)?
    atom   := NUMBER | NAME | 'sqrt' '(' expr ')' | '(' expr ')'

Names resolve to phase variables or to constants bound by the caller.
"""
from __future__ import annotations

import math
import re
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Mapping, Sequence

from .poly import Poly, current_mode, precision, truncation

__all__ = [
    "Span", "Expr", "ExprSyntaxError", "ExpansionError", "parse_hamiltonian",
    "to_text", "taylor", "polynomial_degree", "expand", "evaluate",
]


class ExprSyntaxError(ValueError):
    """Parse failure carrying a 1-based line and column."""

    def __init__(self, message: str, line: int, col: int):
        super().__init__(f"{message} (line {line}, column {col})")
        self.line = line
        self.col = col


class ExpansionError(ValueError):
    """Raised when an expression is not analytic at the expansion center."""


@dataclass(frozen=True)
class Span:
    start: int
    end: int
    line: int
    col: int


@dataclass(frozen=True)
class Expr:
    """AST node.

    ``kind`` is one of ``const, var, add, sub, mul, div, pow, sqrt, neg``.
    ``value`` holds the Fraction of a constant, the index of a variable or the
    integer exponent of ``pow``; ``name`` keeps the source name of variables
    and bound constants (and the literal text of numbers).
    """

    kind: str
    args: tuple = ()
    value: object = None
    name: str | None = None
    span: Span | None = field(default=None, compare=False, repr=False)

    def __post_init__(self):
        if self.kind == "pow" and not isinstance(self.value, int):
            raise ValueError("pow exponents must be integers")


_TOKEN = re.compile(r"""
    (?P<ws>[ \t\r\n]+)
  | (?P<num>(?:\d+\.\d*|\.\d+|\d+)(?:[eE][+-]?\d+)?)
  | (?P<name>[A-Za-z_][A-Za-z_0-9]*)
  | (?P<op>[-+*/^()])
""", re.VERBOSE)


def _tokenize(text: str):
    pos = 0
    toks = []
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if not m:
            line, col = _linecol(text, pos)
            raise ExprSyntaxError(f"unexpected character {text[pos]!r}", line, col)
        if m.lastgroup != "ws":
            toks.append((m.lastgroup, m.group(), m.start(), m.end()))
        pos = m.end()
    toks.append(("end", "", len(text), len(text)))
    return toks


def _linecol(text: str, pos: int) -> tuple[int, int]:
    line = text.count("\n", 0, pos) + 1
    col = pos - (text.rfind("\n", 0, pos) + 1) + 1
    return line, col


class _Parser:
    def __init__(self, text, variables, constants):
        self.text = text
        self.toks = _tokenize(text)
        self.i = 0
        self.variables = {v: k for k, v in enumerate(variables)}
        self.constants = dict(constants or {})

    def peek(self):
        return self.toks[self.i]

    def take(self):
        t = self.toks[self.i]
        self.i += 1
        return t

    def error(self, msg, tok):
        line, col = _linecol(self.text, tok[2])
        raise ExprSyntaxError(msg, line, col)

    def span(self, start, end):
        line, col = _linecol(self.text, start)
        return Span(start, end, line, col)

    def expect(self, s):
        t = self.peek()
        if t[1] != s:
            what = "end of input" if t[0] == "end" else repr(t[1])
            self.error(f"expected {s!r}, found {what}", t)
        return self.take()

    def parse(self):
        e = self.expr()
        t = self.peek()
        if t[0] != "end":
            self.error(f"unexpected {t[1]!r}", t)
        return e

    def expr(self):
        left = self.term()
        while self.peek()[1] in ("+", "-"):
            op = self.take()[1]
            right = self.term()
            left = Expr("add" if op == "+" else "sub", (left, right),
                        span=self.span(left.span.start, right.span.end))
        return left

    def term(self):
        left = self.unary()
        while self.peek()[1] in ("*", "/"):
            op = self.take()[1]
            right = self.unary()
            left = Expr("mul" if op == "*" else "div", (left, right),
                        span=self.span(left.span.start, right.span.end))
        return left

    def unary(self):
        t = self.peek()
        if t[1] in ("-", "+"):
            self.take()
            inner = self.unary()
            if t[1] == "+":
                return inner
            return Expr("neg", (inner,), span=self.span(t[2], inner.span.end))
        return self.power()

    def power(self):
        base = self.atom()
        if self.peek()[1] != "^":
            return base
        self.take()
        sign = 1
        paren = False
        if self.peek()[1] == "(":
            self.take()
            paren = True
        if self.peek()[1] in ("-", "+"):
            sign = -1 if self.take()[1] == "-" else 1
        t = self.peek()
        if t[0] != "num" or not re.fullmatch(r"\d+", t[1]):
            self.error("non-integer exponent", t)
        self.take()
        end = t[3]
        if paren:
            end = self.expect(")")[3]
        if self.peek()[1] == "^":
            self.error("chained exponents need parentheses", self.peek())
        return Expr("pow", (base,), value=sign * int(t[1]), span=self.span(base.span.start, end))

    def atom(self):
        t = self.peek()
        if t[0] == "num":
            self.take()
            return Expr("const", value=Fraction(t[1]), name=t[1], span=self.span(t[2], t[3]))
        if t[0] == "name":
            self.take()
            name = t[1]
            if name == "sqrt":
                self.expect("(")
                inner = self.expr()
                close = self.expect(")")
                return Expr("sqrt", (inner,), span=self.span(t[2], close[3]))
            if name in self.variables:
                return Expr("var", value=self.variables[name], name=name, span=self.span(t[2], t[3]))
            if name in self.constants:
                return Expr("const", value=self.constants[name], name=name, span=self.span(t[2], t[3]))
            if self.peek()[1] == "(":
                self.error(f"unknown function {name!r}", t)
            self.error(f"unknown identifier {name!r}", t)
        if t[1] == "(":
            self.take()
            inner = self.expr()
            self.expect(")")
            return inner
        what = "end of input" if t[0] == "end" else repr(t[1])
        self.error(f"unexpected {what}", t)


def parse_hamiltonian(text: str, variables: Sequence[str] = ("x1", "y1", "x2", "y2"),
                      constants: Mapping[str, object] | None = None) -> Expr:
    """Parse ``text`` into an :class:`Expr`.

    Parameters
    ----------
    text : str
        Expression source.
    variables : sequence of str
        Phase-variable names; position gives the variable index.
    constants : mapping, optional
        Named numeric constants (Fraction or float values).

    Raises
    ------
    ExprSyntaxError
        On malformed input, unknown identifiers or non-integer exponents.
    """
    consts = {}
    for k, v in (constants or {}).items():
        if k in variables:
            raise ValueError(f"constant {k!r} shadows a variable")
        consts[k] = v if isinstance(v, (Fraction, float)) else Fraction(v)
    return _Parser(text, list(variables), consts).parse()


_PREC = {"add": 1, "sub": 1, "mul": 2, "div": 2, "neg": 3, "pow": 4}


def to_text(e: Expr) -> str:
    """Print an expression so that parsing the output gives back ``e``."""
    k = e.kind
    if k == "const":
        if e.name is not None:
            return e.name
        v = e.value
        if isinstance(v, Fraction) and v.denominator == 1 and v >= 0:
            return str(v.numerator)
        raise ValueError("constant without a printable name")
    if k == "var":
        return e.name
    if k == "sqrt":
        return f"sqrt({to_text(e.args[0])})"
    if k == "neg":
        return f"-{_wrap(e.args[0], 3, True)}"
    if k == "pow":
        return f"{_wrap(e.args[0], 5, False)}^{e.value}"
    op = {"add": " + ", "sub": " - ", "mul": "*", "div": "/"}[k]
    p = _PREC[k]
    return _wrap(e.args[0], p, False) + op + _wrap(e.args[1], p, True)


def _wrap(e: Expr, prec: int, right: bool) -> str:
    s = to_text(e)
    inner = _PREC.get(e.kind, 6)
    if e.kind == "const" and s.startswith("-"):
        inner = 0
    if inner < prec or (right and inner == prec and e.kind in _PREC):
        return f"({s})"
    return s


def polynomial_degree(e: Expr) -> int | None:
    """Degree bound when ``e`` is a polynomial in the variables, else ``None``."""
    k = e.kind
    if k == "const":
        return 0
    if k == "var":
        return 1
    if k == "neg":
        return polynomial_degree(e.args[0])
    if k in ("add", "sub", "mul"):
        a, b = (polynomial_degree(x) for x in e.args)
        if a is None or b is None:
            return None
        return max(a, b) if k != "mul" else a + b
    if k == "div":
        a, b = (polynomial_degree(x) for x in e.args)
        return a if (a is not None and b == 0) else None
    if k == "pow":
        a = polynomial_degree(e.args[0])
        if a is None:
            return None
        if e.value >= 0:
            return a * e.value
        return 0 if a == 0 else None
    if k == "sqrt":
        return 0 if polynomial_degree(e.args[0]) == 0 else None
    raise ValueError(f"unknown node {k}")


def evaluate(e: Expr, point: Sequence[float]):
    """Direct evaluation (works with floats, Fractions or mpmath numbers)."""
    k = e.kind
    if k == "const":
        return e.value
    if k == "var":
        return point[e.value]
    if k == "neg":
        return -evaluate(e.args[0], point)
    if k == "sqrt":
        v = evaluate(e.args[0], point)
        if hasattr(v, "sqrt"):
            return v.sqrt()
        try:
            import mpmath
            if isinstance(v, mpmath.mpf):
                return mpmath.sqrt(v)
        except ImportError:  # pragma: no cover
            pass
        return math.sqrt(v)
    if k == "pow":
        return evaluate(e.args[0], point) ** e.value
    a, b = _coerce(*(evaluate(x, point) for x in e.args))
    if k == "add":
        return a + b
    if k == "sub":
        return a - b
    if k == "mul":
        return a * b
    if b == 0:
        _zero_div(e)
    return a / b


def _coerce(a, b):
    # Fractions do not mix with mpmath numbers; lift them to the other type
    if isinstance(a, Fraction) and not isinstance(b, (Fraction, int, float)):
        a = type(b)(a.numerator) / a.denominator
    elif isinstance(b, Fraction) and not isinstance(a, (Fraction, int, float)):
        b = type(a)(b.numerator) / b.denominator
    return a, b


def _zero_div(e):
    raise ZeroDivisionError(f"division by zero at span {e.span}")


def _split(p: Poly):
    zero = (0,) * p.nvars
    c0 = p.coefficient(zero)
    return c0, p - Poly.const(p.nvars, c0) if c0 != 0 else p


def _series(p: Poly, coeffs: Sequence, order: int) -> Poly:
    """``sum_k coeffs[k] * u^k`` for ``u = p - p(0)`` (u has min degree >= 1)."""
    n = p.nvars
    _, u = _split(p)
    out = Poly.const(n, coeffs[0])
    term = Poly.const(n, 1)
    for k in range(1, order + 1):
        term = term * u
        if term.is_zero():
            break
        out = out + term.scale(coeffs[k])
    return out


def _sqrt_scalar(c, exact: bool, span):
    if c <= 0:
        raise ExpansionError(f"nonpositive radicand {c} at the expansion center (span {span})")
    if exact:
        c = Fraction(c)
        rn, rd = math.isqrt(c.numerator), math.isqrt(c.denominator)
        if rn * rn == c.numerator and rd * rd == c.denominator:
            return Fraction(rn, rd)
        raise ExpansionError(f"radicand {c} at the center is not a rational square; use float mode")
    return math.sqrt(float(c))


def _jet(e: Expr, center, n: int, order: int, exact: bool) -> Poly:
    k = e.kind
    one = Fraction(1) if exact else 1.0
    if k == "const":
        v = e.value
        return Poly.const(n, Fraction(v) if exact else float(v))
    if k == "var":
        i = e.value
        return Poly.const(n, center[i]) + Poly.var(n, i, one)
    if k == "neg":
        return -_jet(e.args[0], center, n, order, exact)
    if k in ("add", "sub", "mul"):
        a = _jet(e.args[0], center, n, order, exact)
        b = _jet(e.args[1], center, n, order, exact)
        return a + b if k == "add" else (a - b if k == "sub" else a * b)
    if k == "div":
        a = _jet(e.args[0], center, n, order, exact)
        b = _jet(e.args[1], center, n, order, exact)
        return a * _reciprocal(b, order, e.span)
    if k == "pow":
        base = _jet(e.args[0], center, n, order, exact)
        p = base ** abs(e.value)
        return p if e.value >= 0 else _reciprocal(p, order, e.span)
    if k == "sqrt":
        g = _jet(e.args[0], center, n, order, exact)
        g0, _ = _split(g)
        r0 = _sqrt_scalar(g0, exact, e.span)
        # sqrt(g0 + u) = r0 * sum_k binom(1/2, k) (u/g0)^k
        coeffs = []
        c = Fraction(1)
        for j in range(order + 1):
            coeffs.append((c / Fraction(g0) ** j * r0) if exact else float(c) / float(g0) ** j * r0)
            c = c * (Fraction(1, 2) - j) / (j + 1)
        return _series(g, coeffs, order)
    raise ValueError(f"unknown node {k}")


def _reciprocal(g: Poly, order: int, span) -> Poly:
    g0, _ = _split(g)
    if g0 == 0:
        raise ExpansionError(f"zero denominator at the expansion center (span {span})")
    inv = 1 / g0
    coeffs = [inv * (-inv) ** j for j in range(order + 1)]
    return _series(g, coeffs, order)


def taylor(expr: Expr, center: Sequence, order: int, nvars: int | None = None,
           mode: str | None = None) -> Poly:
    """Taylor polynomial of ``expr`` at ``center`` in shifted variables ``h = x - center``.

    Computed by jet arithmetic truncated at ``order``: quotients by geometric
    series and square roots by the binomial series, both in the part of the
    argument vanishing at the center.

    Raises
    ------
    ExpansionError
        Zero denominator or nonpositive radicand at the center, or an
        irrational square root in exact mode.
    """
    mode = mode or current_mode()
    exact = mode == "exact"
    nvars = nvars or len(center)
    c = [Fraction(v) if exact else float(v) for v in center]
    with precision(mode), truncation(order):
        return _jet(expr, c, nvars, order, exact)


def expand(expr: Expr, nvars: int, mode: str = "exact") -> Poly:
    """Exact expansion of a polynomial expression at the origin."""
    d = polynomial_degree(expr)
    if d is None:
        raise ExpansionError("expression is not a polynomial")
    return taylor(expr, [0] * nvars, d, nvars, mode)
