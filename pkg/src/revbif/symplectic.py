"""Linear symplectic involutions, classification and canonical coordinates.

All structure matrices passed in are Poisson structures ``J`` with
``X_H = J grad H``; the associated bilinear form is ``Omega = -J^{-1}``, which
equals ``J`` for the standard structure.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from fractions import Fraction

import numpy as np

from . import templates
from .linalg import (column_basis, exact_matrix, identity, inverse, is_exact,
                     matrix_to_json, max_abs, nullspace, rank)
from .poly import Poly, hamiltonian_vector_field

__all__ = [
    "InvolutionError", "ClassificationError", "CanonicalizationError",
    "form_from_structure", "check_involution", "fix_decompose",
    "involution_normal_form", "Classification", "classify_system",
    "CanonicalModel", "canonicalize", "time_rescale", "canonical_model",
    "linear_part", "build_model",
]

TOL = 1e-10


class InvolutionError(ValueError):
    pass


class ClassificationError(ValueError):
    pass


class CanonicalizationError(ValueError):
    pass


def _exact(*Ms) -> bool:
    return all(is_exact(np.asarray(M)) for M in Ms)


def _is_zero(M, tol=TOL) -> bool:
    M = np.asarray(M)
    if is_exact(M):
        return all(v == 0 for v in M.ravel())
    return max_abs(M) <= tol * max(1.0, max_abs(M))


def _residual(M) -> float:
    return max_abs(M)


def form_from_structure(J) -> np.ndarray:
    """Bilinear form ``Omega = -J^{-1}`` of a Poisson structure ``J``."""
    return -inverse(np.asarray(J))


def check_involution(R, J=None, tol: float = 1e-12) -> None:
    """Raise :class:`InvolutionError` unless ``R^2 = Id`` (and ``R J R^T = J``)."""
    R = np.asarray(R)
    n = R.shape[0]
    I = identity(n, is_exact(R))
    if not _is_zero(R @ R - I, tol):
        raise InvolutionError("R is not an involution (R^2 != Id)")
    if J is not None:
        J = np.asarray(J)
        if not _is_zero(R @ J @ R.T - J, tol):
            raise InvolutionError("R is not symplectic (R J R^T != J)")


def fix_decompose(R, J=None):
    """Bases of ``Fix(R)`` and ``Fix(-R)`` from the projectors ``(Id +- R)/2``.

    Returns
    -------
    E_plus, E_minus : ndarray
        Basis vectors as columns (``n x k`` and ``n x (n-k)``).
    cross : float
        ``max |Omega(e, f)|`` between the two bases (``0.0`` without ``J``).
    """
    R = np.asarray(R)
    check_involution(R)
    n = R.shape[0]
    exact = is_exact(R)
    I = identity(n, exact)
    half = Fraction(1, 2) if exact else 0.5
    Pp = (I + R) * half
    Pm = (I - R) * half
    Ep = Pp[:, column_basis(Pp)]
    Em = Pm[:, column_basis(Pm)]
    if Ep.shape[1] + Em.shape[1] != n:
        raise InvolutionError("fixed spaces do not split R^n")
    cross = 0.0
    if J is not None and Ep.shape[1] and Em.shape[1]:
        W = form_from_structure(J)
        C = Ep.T @ W @ Em
        cross = _residual(C)
        if exact and cross != 0:
            raise InvolutionError("Fix(R) and Fix(-R) are not symplectically orthogonal")
        if not exact and cross > 1e-9 * max(1.0, max_abs(W)):
            raise InvolutionError(f"Fix(R) and Fix(-R) are not symplectically orthogonal ({cross:.2e})")
    return Ep, Em, cross


def _darboux(B, W, exact: bool):
    """Symplectic Gram-Schmidt on the columns of ``B`` for the form ``W``."""
    vecs = [B[:, k].copy() for k in range(B.shape[1])]
    pairs = []

    def om(u, v):
        return u @ W @ v

    while vecs:
        e = vecs.pop(0)
        vals = [om(e, v) for v in vecs]
        if exact:
            j = next((k for k, v in enumerate(vals) if v != 0), None)
        else:
            j = int(np.argmax(np.abs(vals))) if vals else None
            if j is not None and abs(vals[j]) <= 1e-12 * max(1.0, float(np.max(np.abs(e)))):
                j = None
        if j is None:
            raise InvolutionError("form degenerates on a fixed subspace")
        f = vecs.pop(j)
        f = f / vals[j]
        if not exact:
            s = math.sqrt(np.linalg.norm(e) / max(np.linalg.norm(f), 1e-300))
            e, f = e / s, f * s
        vecs = [v - om(v, f) * e + om(v, e) * f for v in vecs]
        pairs.append((e, f))
    return pairs


def involution_normal_form(R, J=None):
    """Symplectic ``T`` with ``T^{-1} R T = diag(1,..,1,-1,..,-1)``.

    The columns of ``T`` are Darboux pairs built separately on ``Fix(R)`` and
    ``Fix(-R)``, so ``T^T Omega T`` is the standard form.

    Returns
    -------
    template : ndarray
        The normal form (dim Fix(R) leading ones).
    T : ndarray
    """
    R = np.asarray(R)
    n = R.shape[0]
    exact = is_exact(R) and (J is None or is_exact(np.asarray(J)))
    if J is None:
        J = templates.standard_structure(n)
    J = np.asarray(J) if exact else np.asarray(J, dtype=float)
    if not exact:
        R = R.astype(float)
    check_involution(R, J, 1e-12 if exact else 1e-9)
    W = form_from_structure(J)
    Ep, Em, _ = fix_decompose(R, J)
    cols = []
    for B in (Ep, Em):
        for e, f in _darboux(B, W, exact):
            cols += [e, f]
    T = np.stack(cols, axis=1) if cols else identity(n, exact)
    tmpl = templates.involution_template(n, Ep.shape[1])
    if not exact:
        tmpl = tmpl.astype(float)
        T = T.astype(float)
    Tinv = inverse(T)
    Jstd = templates.standard_structure(n)
    if not _is_zero(Tinv @ R @ T - tmpl, 1e-9) or not _is_zero(T.T @ W @ T - (Jstd if exact else Jstd.astype(float)), 1e-9):
        raise InvolutionError("involution normal form verification failed")
    return tmpl, T


def linear_part(H: Poly, J) -> np.ndarray:
    """``A = J Hess(H_2)``."""
    return hamiltonian_vector_field(H.grade(2), J).linear_part()


def _perfect_square(q):
    if not isinstance(q, Fraction) or q <= 0:
        return None
    rn, rd = math.isqrt(q.numerator), math.isqrt(q.denominator)
    if rn * rn == q.numerator and rd * rd == q.denominator:
        return Fraction(rn, rd)
    return None


@dataclass
class Classification:
    """Outcome of :func:`classify_system`.

    ``route`` is ``"canonical"`` when the input already is in canonical
    coordinates, else ``"template"``; ``T`` maps template coordinates to the
    input coordinates and ``A`` is the linear part in template coordinates.
    """

    case: str
    alpha2: object
    alpha: object
    coefficients: dict
    eigenvalues: list
    route: str
    T: np.ndarray
    A: np.ndarray
    R_template: np.ndarray
    condition: str
    condition_value: object
    dropped_constant: object = 0

    def to_dict(self) -> dict:
        return {"case": self.case, "alpha2": self.alpha2, "alpha": self.alpha,
                "coefficients": self.coefficients,
                "eigenvalues": [[float(z.real), float(z.imag)] for z in self.eigenvalues],
                "route": self.route, "condition": self.condition,
                "condition_value": self.condition_value}


def _anti_invariance_defect(H: Poly, R) -> Poly:
    return H.substitute_linear(R) + H


def classify_system(H: Poly, R, J=None) -> Classification:
    """Decide the case (4:2, 6:2 or 6:4) of a reversible Hamiltonian.

    Verifies ``H o R = -H`` termwise, builds ``A = J Hess(H_2)`` and applies
    the ellipticity condition of the case.

    Raises
    ------
    ClassificationError
        Anti-invariance violated (offending monomials listed), nonzero linear
        part, excluded hyperbolic sign or an unsupported dimension pair.
    """
    n = H.nvars
    R = np.asarray(R)
    exact = H.is_exact() and is_exact(R) and (J is None or is_exact(np.asarray(J)))
    if J is None:
        J = templates.standard_structure(n)
    J = np.asarray(J)
    if not exact:
        R, J = R.astype(float), J.astype(float)
    if n not in (4, 6):
        raise ClassificationError(f"dimension {n} not supported (4 or 6)")
    if not H.grade(1).is_zero():
        raise ClassificationError(f"nonzero linear part of H: {H.grade(1).to_text()}")
    c0 = H.coefficient((0,) * n)
    Hn = H - Poly.const(n, c0) if c0 != 0 else H
    check_involution(R, J, 1e-12 if exact else 1e-9)
    defect = _anti_invariance_defect(Hn, R)
    if not exact:
        defect = defect.chop(1e-12 * max(1.0, Hn.max_abs_coefficient()))
    if not defect.is_zero():
        bad = ", ".join(Poly(n, {e: c}).to_text() for e, c in defect.items()[:8])
        raise ClassificationError(f"H is not anti-invariant: H o R + H has terms {bad}")
    dim_fix = rank((identity(n, exact) + R))
    case = templates.case_from_dims(n, dim_fix)
    if case is None:
        raise ClassificationError(f"no case for n={n}, dim Fix(R)={dim_fix}")
    # already canonical?
    Rhat = templates.hat_template(case)
    Kc = templates.canonical_structure(n)
    A_in = linear_part(Hn, J)
    if _is_zero(R - Rhat) and _is_zero(J - Kc):
        rc = templates.rotation_coordinates(n)[0]
        alpha = A_in[rc, rc + 1]
        if alpha > 0 and _is_zero(A_in - templates.canonical_linear_part(n, alpha if exact else float(alpha))):
            ev = np.linalg.eigvals(A_in.astype(float))
            return Classification(case, alpha * alpha, alpha, {"alpha": alpha}, sorted(ev, key=lambda z: (z.imag, z.real)),
                                  "canonical", identity(n, exact), A_in, Rhat, "alpha > 0", alpha, c0)
    tmpl, T = involution_normal_form(R, J)
    Ht = Hn.substitute_linear(T)
    Jstd = templates.standard_structure(n)
    A = linear_part(Ht, Jstd if exact else Jstd.astype(float))
    if case == "4:2":
        a, b, c, d = A[0, 2], A[0, 3], A[1, 2], A[1, 3]
        coeffs = dict(a=a, b=b, c=c, d=d)
        alpha2 = a * d - b * c
        cond, cval = "ad-bc > 0", alpha2
        ok = alpha2 > 0
        expect = [[0, 0, a, b], [0, 0, c, d], [-d, b, 0, 0], [c, -a, 0, 0]]
    elif case == "6:2":
        a, b, c, d = (A[0, k] for k in range(2, 6))
        e, f, g, h = (A[1, k] for k in range(2, 6))
        coeffs = dict(a=a, b=b, c=c, d=d, e=e, f=f, g=g, h=h)
        cval = b * e - a * f + d * g - c * h
        alpha2 = -cval
        cond, ok = "be-af+dg-ch < 0", cval < 0
        expect = [[0, 0, a, b, c, d], [0, 0, e, f, g, h], [-f, b, 0, 0, 0, 0],
                  [e, -a, 0, 0, 0, 0], [-h, d, 0, 0, 0, 0], [g, -c, 0, 0, 0, 0]]
    else:
        a, b = A[0, 4], A[0, 5]
        c, d = A[1, 4], A[1, 5]
        e, f = A[2, 4], A[2, 5]
        g, h = A[3, 4], A[3, 5]
        coeffs = dict(a=a, b=b, c=c, d=d, e=e, f=f, g=g, h=h)
        cval = b * c - a * d + f * g - e * h
        alpha2 = -cval
        cond, ok = "bc-ad+fg-eh < 0", cval < 0
        expect = [[0, 0, 0, 0, a, b], [0, 0, 0, 0, c, d], [0, 0, 0, 0, e, f],
                  [0, 0, 0, 0, g, h], [-d, b, -h, f, 0, 0], [c, -a, g, -e, 0, 0]]
    E = np.array(expect, dtype=object)
    if not _is_zero((A - E).astype(float) if not exact else A - exact_matrix(E)):
        raise ClassificationError(f"linear part does not have the {case} block pattern")
    if not ok:
        raise ClassificationError(
            f"case {case}: condition {cond} fails (value {cval}); the hyperbolic sign is excluded")
    root = _perfect_square(alpha2) if exact else None
    alpha = root if root is not None else math.sqrt(float(alpha2))
    ev = np.linalg.eigvals(A.astype(float))
    return Classification(case, alpha2, alpha, coeffs, sorted(ev, key=lambda z: (z.imag, z.real)),
                          "template", T, A, tmpl, cond, cval, c0)


@dataclass
class CanonicalModel:
    """Canonical linear data of one case.

    Attributes
    ----------
    case : str
    P : ndarray
        Input coordinates ``x = P xhat``.
    A, R, J : ndarray
        Linear part, involution and Poisson structure in input coordinates.
    A_hat, R_hat : ndarray
        Canonical linear part and involution.
    J_hat : ndarray
        Pulled-back form ``P^T Omega P``.
    poisson_hat : ndarray
        Poisson structure of the canonical coordinates ``P^{-1} J P^{-T}``.
    alpha : Fraction or float
    rescaled : bool
        When set, ``A_hat`` has unit frequency and Hamiltonians are divided by
        ``alpha`` (time rescaling); ``alpha`` keeps the physical frequency.
    method : str
        ``"template"``, ``"eigen"`` or ``"identity"``.
    diagnostics : dict
    """

    case: str
    P: np.ndarray
    A: np.ndarray
    R: np.ndarray
    J: np.ndarray
    A_hat: np.ndarray
    R_hat: np.ndarray
    J_hat: np.ndarray
    poisson_hat: np.ndarray
    alpha: object
    rescaled: bool = False
    method: str = "template"
    diagnostics: dict = field(default_factory=dict)

    @property
    def n(self) -> int:
        return self.P.shape[0]

    @property
    def exact(self) -> bool:
        return is_exact(self.P) and isinstance(self.alpha, Fraction)

    @property
    def period(self) -> float:
        """Physical period ``2 pi / alpha`` of the linear rotations."""
        return 2 * math.pi / float(self.alpha)

    def fix_indices(self) -> list[int]:
        return [i for i in range(self.n) if self.R_hat[i, i] == 1]

    def perp_indices(self) -> list[int]:
        return [i for i in range(self.n) if self.R_hat[i, i] == -1]

    def to_canonical(self, H: Poly) -> Poly:
        """``H o P``, divided by ``alpha`` when the model is rescaled."""
        Hc = H.substitute_linear(self.P)
        if self.rescaled and self.alpha != 1:
            Hc = Hc / self.alpha
        return Hc

    def to_dict(self) -> dict:
        return {"case": self.case, "alpha": self.alpha, "rescaled": self.rescaled,
                "method": self.method, "P": matrix_to_json(self.P), "A": matrix_to_json(self.A),
                "R": matrix_to_json(self.R), "J": matrix_to_json(self.J),
                "A_hat": matrix_to_json(self.A_hat), "R_hat": matrix_to_json(self.R_hat),
                "J_hat": matrix_to_json(self.J_hat), "poisson_hat": matrix_to_json(self.poisson_hat),
                "diagnostics": self.diagnostics}


def _closed_form_P(case: str, A, alpha, exact: bool):
    """Closed-form transforms for matrices in template coordinates."""
    one = Fraction(1) if exact else 1.0
    z = 0 * one
    if case == "4:2":
        a, b, c, d = A[0, 2], A[0, 3], A[1, 2], A[1, 3]
        if alpha == 0:
            return None
        return [[z, -b / alpha, z, -a / alpha], [z, -d / alpha, z, -c / alpha],
                [z, z, one, z], [one, z, z, z]]
    if case == "6:4":
        a, b, c, d = A[0, 4], A[0, 5], A[1, 4], A[1, 5]
        e, f, g, h = A[2, 4], A[2, 5], A[3, 4], A[3, 5]
        den = b * c - a * d
        if den == 0 or alpha == 0:
            return None
        al = alpha
        return [[(b * e - a * f) / den, (-b * g + a * h) / den, z, -b / al, z, -a / al],
                [(d * e - c * f) / den, (-d * g + c * h) / den, z, -d / al, z, -c / al],
                [z, one, z, -f / al, z, -e / al],
                [one, z, z, -h / al, z, -g / al],
                [z, z, z, z, one, z],
                [z, z, one, z, z, z]]
    a, b, c, d = (A[0, k] for k in range(2, 6))
    e, f, g, h = (A[1, k] for k in range(2, 6))
    d1 = d * g - c * h
    d2 = b * e - a * f
    if d1 == 0 or d2 == 0 or alpha == 0:
        return None
    al = alpha
    # the row-5 blank of the displayed template is taken as 0 and verified below
    return [[z, z, -d * al / d1, z, -c * al / d1, z],
            [z, z, -h * al / d1, z, -g * al / d1, z],
            [(d * f - b * h) / d2, (c * f - b * g) / d2, z, (-d * f + b * h) / d1, z, (-c * f + b * g) / d1],
            [(-d * e + a * h) / d2, (-c * e + a * g) / d2, z, (d * e - a * h) / d1, z, (c * e - a * g) / d1],
            [z, one, z, z, z, one],
            [one, z, z, one, z, z]]


def _eigen_P(case: str, A, R, alpha, exact: bool):
    """Transform assembled from eigenvectors of ``A`` adapted to ``R``.

    On each rotation plane one basis vector is taken in ``Fix(R)`` and its
    partner is ``-+ A v / alpha``; center vectors span ``ker A`` inside the
    fixed space prescribed by the canonical involution.
    """
    n = A.shape[0]
    I = identity(n, exact)
    if not exact:
        A, R, I = A.astype(float), R.astype(float), np.eye(n)
    W = A @ A + I * (alpha * alpha)
    V = nullspace(np.concatenate([W, I - R], axis=0))
    if V.shape[1] != 2:
        raise CanonicalizationError(f"rotation eigenspace inside Fix(R) has dimension {V.shape[1]}, expected 2")
    Rhat = templates.hat_template(case)
    P = np.empty((n, n), dtype=object if exact else float)
    rot = templates.rotation_coordinates(n)
    x_in_fix = Rhat[rot[0], rot[0]] == 1
    for k, col in zip(rot[::2], range(2)):
        v = V[:, col]
        if x_in_fix:
            P[:, k], P[:, k + 1] = v, -(A @ v) / alpha
        else:
            P[:, k + 1], P[:, k] = v, (A @ v) / alpha
    cen = templates.center_coordinates(n)
    if cen:
        sign = Rhat[cen[0], cen[0]]
        C = nullspace(np.concatenate([A, I - R * sign], axis=0))
        if C.shape[1] != 2:
            raise CanonicalizationError(f"kernel of A inside the prescribed fixed space has dimension {C.shape[1]}")
        P[:, 0], P[:, 1] = C[:, 0], C[:, 1]
    if rank(P) != n:
        raise CanonicalizationError("eigenvector transform is singular")
    return P


def _verify(P, A, R, case, alpha, exact):
    Pinv = inverse(P)
    Ahat = templates.canonical_linear_part(A.shape[0], alpha if exact else float(alpha))
    Rhat = templates.hat_template(case)
    if not exact:
        Rhat = Rhat.astype(float)
    ra = Pinv @ A @ P - Ahat
    rr = Pinv @ R @ P - Rhat
    return Pinv, Ahat, Rhat, _residual(ra), _residual(rr)


def canonicalize(A, case: str, R=None, J=None, alpha=None, *, T=None) -> CanonicalModel:
    """Canonical coordinates for a classified linear part.

    Parameters
    ----------
    A : ndarray
        Linear part in template coordinates (standard structure, involution
        ``R0/R1/R2``) unless ``R``/``J`` say otherwise.
    case : str
    R, J : ndarray, optional
        Involution and Poisson structure of the coordinates of ``A``.
    alpha : optional
        Frequency; computed from ``A`` if omitted.
    T : ndarray, optional
        Transform from these coordinates to the user's input coordinates; the
        returned ``P`` is ``T P_c`` and ``A``, ``R``, ``J`` refer to the input.

    Raises
    ------
    CanonicalizationError
        When both the closed form and the eigenvector construction fail.
    """
    A = np.asarray(A)
    n = A.shape[0]
    if R is None:
        R = templates.involution_template(n, 2 if case in ("4:2", "6:2") else 4)
    if J is None:
        J = templates.standard_structure(n)
    if alpha is None:
        ev = np.linalg.eigvals(A.astype(float))
        alpha2_f = float(np.max(np.abs(ev.imag))) ** 2
        alpha = math.sqrt(alpha2_f)
        if is_exact(A):
            # exact alpha^2 from trace(A^2) = -4 alpha^2
            a2 = -sum((A @ A)[i, i] for i in range(n)) / 4
            root = _perfect_square(a2)
            alpha = root if root is not None else alpha
    exact = is_exact(A) and isinstance(alpha, Fraction) and is_exact(np.asarray(R)) and is_exact(np.asarray(J))
    R = np.asarray(R)
    J = np.asarray(J)
    if not exact:
        A, R, J, alpha = A.astype(float), R.astype(float), J.astype(float), float(alpha)
    tol = 0 if exact else 1e-10
    diag = {}
    P = None
    method = None
    Rhat_t = templates.hat_template(case)
    if _is_zero(A - templates.canonical_linear_part(n, alpha)) and _is_zero(R - (Rhat_t if exact else Rhat_t.astype(float))):
        P, method = identity(n, exact), "identity"
    if P is None and _is_zero(R - (templates.involution_template(n, 2 if case in ("4:2", "6:2") else 4)
                                     if exact else templates.involution_template(n, 2 if case in ("4:2", "6:2") else 4).astype(float))):
        cf = _closed_form_P(case, A, alpha, exact)
        if cf is not None:
            Pc = exact_matrix(cf) if exact else np.array(cf, dtype=float)
            if rank(Pc) == n:
                _, _, _, ra, rr = _verify(Pc, A, R, case, alpha, exact)
                diag["closed_form_residuals"] = [ra, rr]
                if ra <= tol and rr <= tol:
                    P, method = Pc, "template"
        else:
            diag["closed_form_residuals"] = "denominator vanishes"
    if P is None:
        P, method = _eigen_P(case, A, R, alpha, exact), "eigen"
    Pinv, Ahat, Rhat, ra, rr = _verify(P, A, R, case, alpha, exact)
    if ra > (tol if exact else 1e-10) or rr > (tol if exact else 1e-10):
        raise CanonicalizationError(f"canonical transform failed verification (residuals {ra:.2e}, {rr:.2e})")
    diag["residual_A"] = ra
    diag["residual_R"] = rr
    if T is not None:
        T = np.asarray(T)
        if not exact:
            T = T.astype(float)
        Tinv = inverse(T)
        P = T @ P
        A = T @ A @ Tinv
        R = T @ R @ Tinv
        J = T @ J @ T.T
        Pinv = inverse(P)
    W = form_from_structure(J)
    J_hat = P.T @ W @ P
    poisson_hat = Pinv @ J @ Pinv.T
    diag["similarity_vs_pullback"] = _residual(Pinv @ W @ P - J_hat)
    return CanonicalModel(case, P, A, R, J, Ahat, Rhat, J_hat, poisson_hat, alpha,
                          False, method, diag)


def time_rescale(model: CanonicalModel) -> CanonicalModel:
    """Unit-frequency copy of ``model`` (``A_hat / alpha``, flag set)."""
    if model.alpha == 0:
        raise ValueError("alpha = 0 cannot be rescaled")
    if model.rescaled:
        return model
    return replace(model, A_hat=model.A_hat / model.alpha if model.alpha != 1 else model.A_hat,
                   rescaled=True)


def build_model(H: Poly, R, J=None) -> tuple[Classification, CanonicalModel]:
    """Classify and canonicalize in one step; returns the unrescaled model."""
    cls = classify_system(H, R, J)
    n = H.nvars
    Jin = templates.standard_structure(n) if J is None else np.asarray(J)
    if cls.route == "canonical":
        model = canonicalize(cls.A, cls.case, R=np.asarray(R), J=Jin, alpha=cls.alpha)
        return cls, model
    Jstd = templates.standard_structure(n)
    model = canonicalize(cls.A, cls.case, R=cls.R_template, J=Jstd, alpha=cls.alpha, T=cls.T)
    return cls, model


def canonical_model(case: str, alpha=1, rescaled: bool = True) -> CanonicalModel:
    """Identity-transform model for Hamiltonians given in canonical coordinates."""
    n = 4 if case == "4:2" else 6
    a = Fraction(alpha) if not isinstance(alpha, float) else alpha
    K = templates.canonical_structure(n)
    A = templates.canonical_linear_part(n, a)
    R = templates.hat_template(case)
    m = canonicalize(A, case, R=R, J=K, alpha=a)
    return time_rescale(m) if rescaled else m
