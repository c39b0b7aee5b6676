"""Reversible Birkhoff and Belitskii normal forms by homological equations.

Both normalizations work degree by degree in canonical coordinates, where
the involution is diagonal so that the parity subspaces are spanned by
monomials. At each degree the homogeneous part is split into a kernel part
(kept) and a range part, which is removed by the time-1 flow of a generator
chosen in the complementary parity so that reversibility survives.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import numpy as np

from .linalg import exact_matrix, is_exact, nullspace, rank, solve, max_abs
from .poly import (Poly, PolyVector, hamiltonian_vector_field, monomials,
                   poisson_bracket, precision, truncation)
from .symplectic import CanonicalModel

__all__ = [
    "SemisimplicityError", "NormalFormError", "GradedOperator", "Split",
    "monomial_sign", "parity_basis", "vector_parity_basis", "ad_matrix",
    "lie_operator_matrix", "split_kernel_range", "lie_transform",
    "vector_lie_transform", "birkhoff_normalize", "belitskii_normalize",
    "check_birkhoff_condition", "belitskii_residual", "NormalFormResult",
    "is_reversible",
]

FLOAT_TOL = 1e-12


class SemisimplicityError(ValueError):
    """Kernel and range of a graded operator do not span its space."""


class NormalFormError(ValueError):
    pass


def monomial_sign(e: Sequence[int], rdiag: Sequence[int]) -> int:
    """Sign ``s`` with ``x^e o R = s x^e`` for ``R = diag(rdiag)``."""
    s = 1
    for k, r in zip(e, rdiag):
        if r == -1 and k % 2:
            s = -s
    return s


def _parity_ok(sign: int, parity: str) -> bool:
    return parity == "all" or (parity == "invariant" and sign == 1) or (parity == "anti" and sign == -1)


def _opposite(parity: str) -> str:
    return {"all": "all", "anti": "invariant", "invariant": "anti"}[parity]


def parity_basis(n: int, d: int, rdiag: Sequence[int], parity: str) -> list[tuple]:
    """Degree-``d`` monomials with the requested ``R``-parity."""
    return [e for e in monomials(n, d) if _parity_ok(monomial_sign(e, rdiag), parity)]


def vector_parity_basis(n: int, d: int, rdiag: Sequence[int], parity: str) -> list[tuple]:
    """Vector monomials ``x^e e_i`` as ``(e, i)``.

    ``anti`` selects reversible fields (``V(Rx) = -R V(x)``) and ``invariant``
    selects equivariant ones (``V(Rx) = R V(x)``).
    """
    out = []
    for e in monomials(n, d):
        s = monomial_sign(e, rdiag)
        for i in range(n):
            rel = s * int(rdiag[i])  # +1: equivariant, -1: reversible
            if parity == "all" or (parity == "invariant" and rel == 1) or (parity == "anti" and rel == -1):
                out.append((e, i))
    return out


@dataclass
class GradedOperator:
    """Matrix of a graded linear operator on homogeneous polynomials.

    For ``parity="all"`` the operator acts on the full degree-``d`` space and
    ``matrix`` is square. For a parity restriction the space is the parity
    subspace ``V`` (``basis``); ``matrix`` maps ``V`` to the opposite-parity
    subspace ``W`` (``codomain``) and ``partner`` maps ``W`` back to ``V``, so
    that ``partner @ matrix`` is the square operator induced on ``V``.
    """

    degree: int
    parity: str
    basis: list
    codomain: list
    matrix: np.ndarray
    partner: np.ndarray
    kind: str = "hamiltonian"

    @property
    def dim(self) -> int:
        return len(self.basis)

    def coords(self, p) -> np.ndarray:
        """Coordinates of a polynomial (or PolyVector) on ``basis``."""
        return _coords(p, self.basis, self.kind, self.matrix)

    def element(self, v, space: str = "domain"):
        basis = self.basis if space == "domain" else self.codomain
        return _element(v, basis, self.kind, self.nvars)

    @property
    def nvars(self) -> int:
        b = self.basis or self.codomain
        if not b:
            return 0
        return len(b[0]) if self.kind == "hamiltonian" else len(b[0][0])


def _coords(p, basis, kind, M):
    exact = is_exact(M)
    v = np.empty(len(basis), dtype=object if exact else float)
    for k, b in enumerate(basis):
        v[k] = p.coefficient(b) if kind == "hamiltonian" else p[b[1]].coefficient(b[0])
    if exact:
        v = exact_matrix(v)
    return v


def _element(v, basis, kind, n):
    if kind == "hamiltonian":
        return Poly(n, {b: c for b, c in zip(basis, v) if c != 0})
    comps = [dict() for _ in range(n)]
    for (e, i), c in zip(basis, v):
        if c != 0:
            comps[i][e] = c
    return PolyVector(Poly(n, t) for t in comps)


def _matrix_from_images(images, codomain, kind, exact):
    M = np.empty((len(codomain), len(images)), dtype=object if exact else float)
    M[:] = Fraction(0) if exact else 0.0
    index = {b: k for k, b in enumerate(codomain)}
    for j, img in enumerate(images):
        if kind == "hamiltonian":
            items = img.terms.items()
            for e, c in items:
                if e not in index:
                    raise NormalFormError(f"operator image leaves the expected parity subspace ({e})")
                M[index[e], j] = c
        else:
            for i, comp in enumerate(img):
                for e, c in comp.terms.items():
                    if (e, i) not in index:
                        raise NormalFormError("operator image leaves the expected parity subspace")
                    M[index[(e, i)], j] = c
    return M


def ad_matrix(H2: Poly, d: int, parity: str, J, rdiag: Sequence[int] | None = None) -> GradedOperator:
    """Matrix of ``H -> {H2, H}`` on degree-``d`` polynomials.

    Parameters
    ----------
    H2 : Poly
        Homogeneous quadratic.
    d : int
    parity : {"all", "anti", "invariant"}
        Parity subspace of ``H o R = -+ H`` to act on.
    J : ndarray
        Poisson structure.
    rdiag : sequence of int, optional
        Diagonal of the (diagonal) involution; required unless ``parity="all"``.
    """
    n = H2.nvars
    if not H2.is_zero() and (H2.degree != 2 or H2.min_degree != 2):
        raise NormalFormError("H2 must be a homogeneous quadratic")
    if parity != "all" and rdiag is None:
        raise NormalFormError("parity restriction needs the involution diagonal")
    rd = rdiag if rdiag is not None else [1] * n
    exact = H2.is_exact() and is_exact(np.asarray(J))
    V = parity_basis(n, d, rd, parity)
    W = parity_basis(n, d, rd, _opposite(parity))
    with truncation(None):
        imgV = [poisson_bracket(H2, Poly(n, {e: 1}), J) for e in V]
        imgW = imgV if parity == "all" else [poisson_bracket(H2, Poly(n, {e: 1}), J) for e in W]
    F = _matrix_from_images(imgV, W, "hamiltonian", exact)
    G = F if parity == "all" else _matrix_from_images(imgW, V, "hamiltonian", exact)
    return GradedOperator(d, parity, V, W, F, G, "hamiltonian")


def _lie_image(A_field: PolyVector, A, W: PolyVector) -> PolyVector:
    # DW . Ax - A W
    return W.derivative_along(A_field) - W.apply_matrix(A)


def lie_operator_matrix(A, d: int, parity: str, rdiag: Sequence[int] | None = None) -> GradedOperator:
    """Matrix of ``W -> DW.Ax - A W`` (the bracket ``[Ax, W]``) on degree-``d`` fields.

    ``parity="anti"`` acts on reversible fields, ``"invariant"`` on
    equivariant ones; the operator exchanges the two.
    """
    A = np.asarray(A)
    n = A.shape[0]
    if parity != "all" and rdiag is None:
        raise NormalFormError("parity restriction needs the involution diagonal")
    rd = rdiag if rdiag is not None else [1] * n
    exact = is_exact(A)
    Af = PolyVector.linear(A)
    V = vector_parity_basis(n, d, rd, parity)
    W = vector_parity_basis(n, d, rd, _opposite(parity))

    def unit(b):
        comps = [Poly.zero(n)] * n
        comps[b[1]] = Poly(n, {b[0]: 1})
        return PolyVector(comps)

    with truncation(None):
        imgV = [_lie_image(Af, A, unit(b)) for b in V]
        imgW = imgV if parity == "all" else [_lie_image(Af, A, unit(b)) for b in W]
    F = _matrix_from_images(imgV, W, "vector", exact)
    G = F if parity == "all" else _matrix_from_images(imgW, V, "vector", exact)
    return GradedOperator(d, parity, V, W, F, G, "vector")


@dataclass
class _Block:
    v: np.ndarray  # indices into the domain V
    w: np.ndarray  # indices into the codomain W
    kernel: np.ndarray
    range: np.ndarray
    basis: np.ndarray  # [kernel | range], square and invertible
    F: np.ndarray
    GF: np.ndarray


@dataclass
class Split:
    """Kernel/range splitting of the space of a :class:`GradedOperator`.

    The operator is first broken into the connected components of its
    sparsity pattern (for rotations these are the blocks of fixed per-plane
    degree), and each block is split separately.

    Attributes
    ----------
    kernel : ndarray
        Basis (columns) of ``ker(matrix)`` inside the space ``V``.
    range : ndarray
        Basis (columns) of the range ``partner(W)`` inside ``V``.
    """

    op: GradedOperator
    kernel: np.ndarray
    range: np.ndarray
    blocks: list = field(repr=False, default_factory=list)

    def decompose(self, b):
        """``b = k + r`` with ``k`` in the kernel and ``r`` in the range."""
        k = b * 0
        r = b * 0
        for blk in self.blocks:
            bb = b[blk.v]
            if not np.any(bb != 0):
                continue
            c = solve(blk.basis, bb)
            nk = blk.kernel.shape[1]
            if nk:
                k[blk.v] = blk.kernel @ c[:nk]
            if blk.range.shape[1]:
                r[blk.v] = blk.range @ c[nk:]
        return k, r

    def solve(self, b):
        """Preimage ``w`` in ``W`` with ``partner @ w = b`` lying in ``matrix(V)``.

        ``matrix(V)`` is a complement of ``ker(partner)``, so the preimage is
        unique.
        """
        exact = is_exact(self.op.matrix)
        out = np.empty(len(self.op.codomain), dtype=object if exact else float)
        out[:] = Fraction(0) if exact else 0.0
        for blk in self.blocks:
            bb = b[blk.v]
            if not np.any(bb != 0) or not len(blk.w):
                continue
            y = solve(blk.GF, bb)
            out[blk.w] = blk.F @ y
        return out


def _components(F, G, nv, nw):
    # union-find over V (0..nv-1) and W (nv..nv+nw-1) linked by nonzeros
    parent = list(range(nv + nw))

    def find(a):
        while parent[a] != a:
            parent[a] = parent[parent[a]]
            a = parent[a]
        return a

    for i, j in zip(*np.nonzero(F != 0)):
        parent[find(nv + int(i))] = find(int(j))
    for i, j in zip(*np.nonzero(G != 0)):
        parent[find(int(i))] = find(nv + int(j))
    groups: dict[int, tuple[list, list]] = {}
    for a in range(nv + nw):
        g = groups.setdefault(find(a), ([], []))
        (g[0] if a < nv else g[1]).append(a if a < nv else a - nv)
    return [(np.array(v, dtype=int), np.array(w, dtype=int)) for v, w in groups.values()]


def split_kernel_range(op: GradedOperator) -> Split:
    """Kernel and range of ``op`` and a solver on the range.

    Raises
    ------
    SemisimplicityError
        If ``dim ker + rank != dim`` or the two subspaces intersect.
    """
    from .linalg import column_basis

    F, G = op.matrix, op.partner
    dim, nw = op.dim, len(op.codomain)
    exact = is_exact(F)
    dt = object if exact else float
    zero = Fraction(0) if exact else 0.0
    blocks, kcols, rcols = [], [], []
    for v, w in _components(F, G, dim, nw):
        if not len(v):
            continue
        Fb = F[np.ix_(w, v)]
        Gb = G[np.ix_(v, w)]
        if len(w):
            Kb = nullspace(Fb)
            Rb = Gb[:, column_basis(Gb)] if Gb.size else np.empty((len(v), 0), dtype=dt)
        else:
            Kb = exact_matrix(np.eye(len(v), dtype=int)) if exact else np.eye(len(v))
            Rb = np.empty((len(v), 0), dtype=dt)
        Bb = np.concatenate([Kb, Rb], axis=1)
        if Bb.shape[1] != len(v) or rank(Bb) != len(v):
            raise SemisimplicityError(
                f"degree {op.degree} ({op.parity}): dim ker {Kb.shape[1]} + rank {Rb.shape[1]} "
                f"!= dim {len(v)} on a block; the linear part is not semisimple in these coordinates")
        blocks.append(_Block(v, w, Kb, Rb, Bb, Fb, Gb @ Fb if len(w) else None))
        for cols, M in ((kcols, Kb), (rcols, Rb)):
            for j in range(M.shape[1]):
                col = np.empty(dim, dtype=dt)
                col[:] = zero
                col[v] = M[:, j]
                cols.append(col)
    K = np.array(kcols, dtype=dt).T.reshape(dim, len(kcols))
    Rg = np.array(rcols, dtype=dt).T.reshape(dim, len(rcols))
    return Split(op, K, Rg, blocks)


def lie_transform(F: Poly, chi: Poly, J) -> Poly:
    """``exp(L_chi) F = sum_k {..{F, chi}.., chi}/k!`` (time-1 flow of ``X_chi``)."""
    out = F
    term = F
    k = 1
    while True:
        term = poisson_bracket(term, chi, J)
        if term.is_zero():
            break
        term = term / k if term.is_exact() else term * (1.0 / k)
        out = out + term
        k += 1
        if k > 200:
            raise NormalFormError("Lie series did not terminate (set a truncation order)")
    return out


def vector_lie_transform(X: PolyVector, W: PolyVector) -> PolyVector:
    """``exp(ad_W) X`` with ``ad_W X = [W, X] = DX.W - DW.X``: the pullback of
    ``X`` by the time-1 flow of ``W``."""
    out = X
    term = X
    k = 1
    while True:
        term = W.lie_bracket(term)
        if term.is_zero():
            break
        term = term.scale(Fraction(1, k) if all(c.is_exact() for c in term) else 1.0 / k)
        out = out + term
        k += 1
        if k > 200:
            raise NormalFormError("Lie series did not terminate (set a truncation order)")
    return out


def _function_lie_transform(F: Poly, W: PolyVector) -> Poly:
    out = F
    term = F
    k = 1
    while True:
        term = W.directional(term)
        if term.is_zero():
            break
        term = term / k if term.is_exact() else term * (1.0 / k)
        out = out + term
        k += 1
        if k > 200:
            raise NormalFormError("Lie series did not terminate")
    return out


def is_reversible(X: PolyVector, R) -> bool:
    """``X(Rx) = -R X(x)`` as a polynomial identity."""
    R = np.asarray(R)
    return (X.substitute_linear(R) + X.apply_matrix(R)).is_zero()


@dataclass
class NormalFormResult:
    """Normalized jet with per-degree generators and certificates.

    Attributes
    ----------
    kind : str
        ``"birkhoff"`` (Hamiltonian jets) or ``"belitskii"`` (vector fields).
    source : Poly or PolyVector
        Input jet (canonical coordinates).
    normalized : Poly or PolyVector
    generators : dict
        Degree -> generator (Poly for Birkhoff, PolyVector for Belitskii).
    certificates : dict
        Degree -> ``{"kernel_dim", "range_dim", "residual", "zero", "reversible"}``.
    order : int
    mode : str
    poisson : ndarray
        Poisson structure used (Birkhoff only).
    A : ndarray
        Linear part.
    rdiag : list
    """

    kind: str
    source: object
    normalized: object
    generators: dict
    certificates: dict
    order: int
    mode: str
    poisson: np.ndarray
    A: np.ndarray
    rdiag: list
    case: str = ""

    def field(self) -> PolyVector:
        """Normalized vector field (``J grad H`` for Birkhoff)."""
        if self.kind == "belitskii":
            return self.normalized
        with precision(self.mode), truncation(self.order - 1):
            return hamiltonian_vector_field(self.normalized, self.poisson)

    def nonlinear_field(self) -> PolyVector:
        X = self.field()
        return X - X.grade(1)

    @property
    def passed(self) -> bool:
        return all(c["zero"] and c["reversible"] for c in self.certificates.values())

    def coordinate_map(self) -> PolyVector:
        """Input coordinates as polynomials in normalized coordinates.

        Kept through degree ``order - 1`` for Hamiltonians (the field order)
        and ``order`` for vector fields.
        """
        n = len(self.rdiag)
        comps = [Poly.var(n, i) for i in range(n)]
        deg = self.order - 1 if self.kind == "birkhoff" else self.order
        with precision(self.mode), truncation(deg):
            for d in sorted(self.generators):
                g = self.generators[d]
                if self.kind == "birkhoff":
                    comps = [lie_transform(c, g, self.poisson) for c in comps]
                else:
                    comps = [_function_lie_transform(c, g) for c in comps]
        return PolyVector(comps)

    def to_dict(self) -> dict:
        src = self.source.to_text() if isinstance(self.source, Poly) else self.source.to_text()
        nrm = self.normalized.to_text() if isinstance(self.normalized, Poly) else self.normalized.to_text()
        return {"kind": self.kind, "case": self.case, "order": self.order, "mode": self.mode,
                "source": src, "normalized": nrm,
                "generators": {str(d): (g.to_text() if isinstance(g, Poly) else g.to_text())
                               for d, g in sorted(self.generators.items())},
                "certificates": {str(d): c for d, c in sorted(self.certificates.items())},
                "passed": self.passed}


def _rdiag(model: CanonicalModel) -> list[int]:
    R = model.R_hat
    n = R.shape[0]
    if any(R[i, j] != 0 for i in range(n) for j in range(n) if i != j):
        raise NormalFormError("canonical involution must be diagonal")
    return [int(R[i, i]) for i in range(n)]


def _chop_poly(p: Poly, mode: str) -> Poly:
    if mode == "exact":
        return p
    return p.chop(FLOAT_TOL * max(1.0, p.max_abs_coefficient()))


def birkhoff_normalize(H: Poly, N: int, model: CanonicalModel) -> NormalFormResult:
    """Reversible Birkhoff normal form through degree ``N``.

    Parameters
    ----------
    H : Poly
        Anti-invariant Hamiltonian in canonical coordinates (rescaled time).
    N : int
        Truncation order.
    model : CanonicalModel

    Returns
    -------
    NormalFormResult
        ``{H2, Ht_d} = 0`` and ``Ht o R = -Ht`` are certified for each degree.
    """
    K = model.poisson_hat
    rd = _rdiag(model)
    n = H.nvars
    mode = "exact" if (H.is_exact() and model.exact) else "float"
    if mode == "float":
        K = np.asarray(K, dtype=float)
        H = H.to_float()
    H2 = H.grade(2)
    A = hamiltonian_vector_field(H2, K).linear_part()
    Ahat = model.A_hat
    if max_abs((A - Ahat).astype(float)) > (0 if mode == "exact" else 1e-10):
        raise NormalFormError("linear part of H does not match the canonical model")
    Rm = np.diag(rd).astype(object) if mode == "exact" else np.diag(rd).astype(float)
    if mode == "exact":
        Rm = exact_matrix(Rm)
    defect = _chop_poly(H.substitute_linear(Rm) + H, mode)
    if not defect.is_zero():
        raise NormalFormError(f"H is not anti-invariant: {defect.to_text()}")
    gens, certs = {}, {}
    with precision(mode), truncation(N):
        cur = H.truncate(N)
        for d in range(3, N + 1):
            op = ad_matrix(H2, d, "anti", K, rd)
            sp = split_kernel_range(op)
            b = op.coords(cur.grade(d))
            k, r = sp.decompose(b)
            if any(v != 0 for v in r) if mode == "exact" else np.max(np.abs(r), initial=0) > FLOAT_TOL:
                w = sp.solve(-r)
                chi = op.element(w, "codomain")
                gens[d] = chi
                cur = _chop_poly(lie_transform(cur, chi, K), mode)
            Hd = cur.grade(d)
            res = _chop_poly(poisson_bracket(H2, Hd, K), mode)
            anti = _chop_poly(cur.substitute_linear(Rm) + cur, mode)
            certs[d] = {"kernel_dim": int(sp.kernel.shape[1]), "range_dim": int(sp.range.shape[1]),
                        "space_dim": op.dim, "residual": res.to_text(),
                        "residual_max": res.max_abs_coefficient(),
                        "zero": res.is_zero(), "reversible": anti.is_zero()}
            if not (res.is_zero() and anti.is_zero()):
                raise NormalFormError(f"degree {d} certificate failed: {res.to_text()}")
    return NormalFormResult("birkhoff", H, cur, gens, certs, N, mode, K, Ahat, rd, model.case)


def belitskii_residual(X: PolyVector, A) -> PolyVector:
    """``A^T h(x) - h'(x) A^T x`` for the nonlinear part ``h`` of ``X``."""
    A = np.asarray(A)
    h = X - X.grade(1)
    At = A.T
    return h.apply_matrix(At) - h.derivative_along(PolyVector.linear(At))


def belitskii_normalize(X: PolyVector, N: int, model: CanonicalModel) -> NormalFormResult:
    """Reversible Belitskii normal form of a vector field through degree ``N``.

    Generators are equivariant fields, so the normalizing flows commute with
    the involution and reversibility is preserved.
    """
    rd = _rdiag(model)
    n = X.nvars
    exact = all(c.is_exact() for c in X) and model.exact
    mode = "exact" if exact else "float"
    Ahat = model.A_hat if exact else np.asarray(model.A_hat, dtype=float)
    if not exact:
        X = X.to_float()
    A = X.linear_part()
    if max_abs((A - Ahat).astype(float)) > (0 if exact else 1e-10):
        raise NormalFormError("linear part of X does not match the canonical model")
    Rm = exact_matrix(np.diag(rd)) if exact else np.diag(rd).astype(float)
    defect = X.substitute_linear(Rm) + X.apply_matrix(Rm)
    if not exact:
        defect = defect.chop(1e-10 * max(1.0, max(c.max_abs_coefficient() for c in X)))
    if not defect.is_zero():
        raise NormalFormError("X is not reversible")
    gens, certs = {}, {}
    with precision(mode), truncation(N):
        cur = X.truncate(N)
        for d in range(2, N + 1):
            op = lie_operator_matrix(Ahat, d, "anti", rd)
            sp = split_kernel_range(op)
            b = op.coords(cur.grade(d))
            k, r = sp.decompose(b)
            nonzero = any(v != 0 for v in r) if exact else np.max(np.abs(r), initial=0) > FLOAT_TOL
            if nonzero:
                # X_d + [W, Ax] = X_d - L(W); choose L(W) = r
                w = sp.solve(r)
                Wf = op.element(w, "codomain")
                gens[d] = Wf
                cur = vector_lie_transform(cur, Wf)
                if not exact:
                    cur = cur.chop(FLOAT_TOL)
            res = belitskii_residual(cur.grade(1) + cur.grade(d), Ahat)
            if not exact:
                res = res.chop(1e-10)
            rev = (cur.substitute_linear(Rm) + cur.apply_matrix(Rm))
            if not exact:
                rev = rev.chop(1e-10)
            certs[d] = {"kernel_dim": int(sp.kernel.shape[1]), "range_dim": int(sp.range.shape[1]),
                        "space_dim": op.dim, "residual": [c.to_text() for c in res],
                        "residual_max": max(c.max_abs_coefficient() for c in res),
                        "zero": res.is_zero(), "reversible": rev.is_zero()}
            if not (res.is_zero() and rev.is_zero()):
                raise NormalFormError(f"degree {d} Belitskii certificate failed")
    return NormalFormResult("belitskii", X, cur, gens, certs, N, mode, None, Ahat, rd, model.case)


def check_birkhoff_condition(H: Poly, model: CanonicalModel, N: int) -> dict:
    """Evaluate ``{H2, H_d}`` for ``3 <= d <= N``.

    When every bracket vanishes the Belitskii identity of ``X_H`` is checked
    as well (it is implied, and verified rather than assumed).

    Returns
    -------
    dict
        ``passed``, ``failed_degrees``, per-degree residual text and the
        Belitskii check (``None`` when the bracket test fails).
    """
    K = model.poisson_hat
    exact = H.is_exact() and model.exact
    if not exact:
        K = np.asarray(K, dtype=float)
    H2 = H.grade(2)
    residuals, failed = {}, []
    for d in range(3, N + 1):
        r = poisson_bracket(H2, H.grade(d), K)
        if not exact:
            r = r.chop(1e-10 * max(1.0, H.max_abs_coefficient()))
        residuals[d] = r.to_text()
        if not r.is_zero():
            failed.append(d)
    bel = None
    if not failed:
        with truncation(N - 1):
            X = hamiltonian_vector_field(H.truncate(N), K)
        res = belitskii_residual(X, model.A_hat if exact else np.asarray(model.A_hat, float))
        if not exact:
            res = res.chop(1e-10)
        bel = res.is_zero()
    return {"passed": not failed and bool(bel), "failed_degrees": failed,
            "residuals": residuals, "belitskii": bel}
