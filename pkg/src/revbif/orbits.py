"""Symmetric periodic orbits: shooting, continuation and absence scans.

A periodic orbit of a reversible field that meets ``Fix(R)`` at ``t = 0``
meets it again at ``t = T/2``; the shooting map is therefore

    F(v, T) = C_perp flow_{T/2}(v),   v in Fix(R),

with ``C_perp`` picking the coordinates that vanish on ``Fix(R)`` (``R`` is
diagonal in canonical coordinates). One fixed-space coordinate is pinned to
select a member of the family; Jacobians come from variational equations.
"""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field
from typing import Sequence

import numpy as np

from .integrate import integrate, variational_rhs
from .poly import CompiledField, Poly, PolyVector

__all__ = ["FlowConfig", "OrbitRecord", "ShootingError", "FamilyLost", "as_field", "flow",
           "reversibility_residual", "orbit_reversibility_residual", "shoot_batch",
           "symmetric_shoot", "continue_family", "absence_scan", "certify_orbit",
           "quasi_random_fix_seeds"]


class ShootingError(RuntimeError):
    """Shooting failed; ``status`` is ``"diverged"``, ``"trivial"``,
    ``"window"`` or ``"integration"``. Near-singular Jacobians are handled by
    a truncated SVD and show up in the record's ``condition``."""

    def __init__(self, status: str, message: str, record=None):
        super().__init__(f"{status}: {message}")
        self.status = status
        self.record = record


class FamilyLost(RuntimeError):
    def __init__(self, message, records):
        super().__init__(message)
        self.records = records


@dataclass
class FlowConfig:
    """Integrator and Newton settings plus the fixed-space splitting.

    ``fix_indices`` and ``perp_indices`` partition the coordinates; the
    projectors are the corresponding coordinate projections.
    """

    rtol: float = 1e-12
    atol: float = 1e-14
    max_step: float = np.inf
    max_steps: int = 20000
    max_iter: int = 25
    newton_tol: float = 1e-10
    newton_rtol: float = 1e-8
    amplitude_floor: float = 1e-8
    rcond: float = 1e-10
    fix_indices: tuple = ()
    perp_indices: tuple = ()

    def __post_init__(self):
        if self.rtol <= 0 or self.atol <= 0 or self.newton_tol <= 0:
            raise ValueError("tolerances must be positive")
        fi, pi = set(self.fix_indices), set(self.perp_indices)
        if fi & pi:
            raise ValueError("fixed and complementary index sets overlap")

    @classmethod
    def for_involution(cls, R, **kw) -> "FlowConfig":
        d = [int(round(float(R[i, i]))) for i in range(R.shape[0])]
        offdiag = any(float(R[i, j]) != 0 for i in range(R.shape[0]) for j in range(R.shape[0]) if i != j)
        if offdiag or any(v not in (1, -1) for v in d):
            raise ValueError("shooting needs a diagonal involution (use canonical coordinates)")
        return cls(fix_indices=tuple(i for i, v in enumerate(d) if v == 1),
                   perp_indices=tuple(i for i, v in enumerate(d) if v == -1), **kw)

    @property
    def n(self) -> int:
        return len(self.fix_indices) + len(self.perp_indices)

    def projectors(self):
        n = self.n
        Pf = np.zeros((n, n))
        Pf[list(self.fix_indices), list(self.fix_indices)] = 1
        return Pf, np.eye(n) - Pf

    def converged(self, resid, amplitude):
        return resid <= np.minimum(self.newton_tol, self.newton_rtol * np.maximum(amplitude, 0))

    def to_dict(self) -> dict:
        d = asdict(self)
        d["fix_indices"] = list(self.fix_indices)
        d["perp_indices"] = list(self.perp_indices)
        d["max_step"] = None if not np.isfinite(self.max_step) else self.max_step
        return d


@dataclass
class OrbitRecord:
    """A certified symmetric periodic orbit (or a failed attempt).

    Attributes
    ----------
    v : list of float
        Initial point, exactly in ``Fix(R)``.
    T : float
        Period.
    amplitude : float
        ``|v|``.
    closure_residual : float
        ``|flow_T(v) - v|`` from an independent full-period integration.
    fix_residual : float
        ``|C_perp flow_{T/2}(v)|``.
    """

    v: list
    T: float
    amplitude: float
    closure_residual: float
    fix_residual: float
    sigma: float | None = None
    family_id: str = ""
    iterations: int = 0
    condition: float = float("nan")
    status: str = "converged"
    extra: dict = field(default_factory=dict)

    @property
    def ok(self) -> bool:
        return self.status == "converged"

    def to_dict(self) -> dict:
        d = asdict(self)
        d["v"] = [float(x) for x in self.v]
        return d


def as_field(X) -> CompiledField:
    if isinstance(X, CompiledField):
        return X
    if isinstance(X, PolyVector):
        return X.to_float().compile()
    raise TypeError("expected a PolyVector or CompiledField")


def flow(X, x0, T, cfg: FlowConfig | None = None, dense: bool = False, sample_fractions=None):
    """Integrate ``X`` from ``x0`` (one point or a batch) for signed time ``T``.

    Raises
    ------
    ShootingError
        With status ``"integration"`` on step-size underflow or blow-up of a
        single trajectory.
    """
    cfg = cfg or FlowConfig()
    f = as_field(X)
    res = integrate(f, x0, T, cfg.rtol, cfg.atol, cfg.max_step, cfg.max_steps,
                    sample_fractions=sample_fractions, dense=dense)
    if np.ndim(x0) == 1 and not res.ok[0]:
        raise ShootingError("integration", res.message[0])
    return res


def reversibility_residual(X: PolyVector, R, points) -> float:
    """``max |X(R x) + R X(x)|`` over sample points."""
    R = np.asarray(R, dtype=float)
    f = as_field(X)
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    return float(np.max(np.abs(f(pts @ R.T) + f(pts) @ R.T), initial=0.0))


def orbit_reversibility_residual(X, R, points, T: float, cfg: FlowConfig | None = None) -> float:
    """``max |flow_T(R x) - R flow_{-T}(x)|`` over sample points."""
    R = np.asarray(R, dtype=float)
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    a = flow(X, pts @ R.T, T, cfg).y
    b = flow(X, pts, -T, cfg).y @ R.T
    return float(np.max(np.abs(a - b)))


def _svd_solve(J, F, rcond):
    U, s, Vt = np.linalg.svd(J, full_matrices=False)
    smax = s[:, :1]
    keep = s > rcond * np.maximum(smax, 1e-300)
    inv = np.where(keep, 1.0 / np.where(keep, s, 1.0), 0.0)
    step = -np.einsum("mji,mj->mi", Vt, inv * np.einsum("mji,mj->mi", U, F))
    with np.errstate(divide="ignore"):
        cond = np.where(s[:, -1] > 0, s[:, 0] / s[:, -1], np.inf)
    return step, cond


def shoot_batch(X, cfg: FlowConfig, V0, T0, free, max_iter: int | None = None,
                period_window: tuple | None = None, amplitude_cap: float | None = None,
                verify: bool = True) -> list[OrbitRecord]:
    """Gauss-Newton shooting for a batch of seeds.

    Parameters
    ----------
    X : PolyVector or CompiledField
    cfg : FlowConfig
    V0 : array (M, n)
        Seeds in ``Fix(R)`` (complement coordinates are zeroed).
    T0 : array (M,)
        Period seeds. Rows whose period turns nonpositive or exceeds four
        times the seed stop with status ``"diverged"``.
    free : array of int (M, k)
        Fixed-space coordinates solved for (the others stay pinned); may have
        ``k = 0``. The period is always free.
    period_window : (lo, hi), optional
        Rows whose period leaves the window stop with status ``"window"``.
    amplitude_cap : float, optional
        Rows whose amplitude exceeds the cap stop with status ``"diverged"``.
    """
    f = as_field(X)
    n = cfg.n
    fix = np.array(cfg.fix_indices, dtype=int)
    perp = np.array(cfg.perp_indices, dtype=int)
    V = np.array(V0, dtype=float, ndmin=2).copy()
    M = len(V)
    V[:, perp] = 0.0
    T = np.broadcast_to(np.asarray(T0, dtype=float), (M,)).copy()
    Tseed = T.copy()
    free = np.asarray(free, dtype=int).reshape(M, -1)
    k = len(fix)
    col = {int(i): j for j, i in enumerate(fix)}
    free_cols = np.vectorize(lambda i: col[int(i)])(free) if free.size else free
    rhs = variational_rhs(f.both, n, k)
    max_iter = cfg.max_iter if max_iter is None else max_iter
    status = np.array(["running"] * M, dtype=object)
    iters = np.zeros(M, dtype=int)
    resid = np.full(M, np.inf)
    cond = np.full(M, np.nan)
    first = np.full(M, np.nan)
    E = np.zeros((n, k))
    E[fix, np.arange(k)] = 1.0
    for it in range(max_iter + 1):
        act = np.nonzero(status == "running")[0]
        if not len(act):
            break
        Z0 = np.concatenate([V[act], np.broadcast_to(E.ravel(), (len(act), n * k))], axis=1)
        res = integrate(rhs, Z0, T[act] / 2, cfg.rtol, cfg.atol, cfg.max_step, cfg.max_steps,
                        error_dims=n)
        bad = ~res.ok
        status[act[bad]] = "integration"
        good = np.nonzero(~bad)[0]
        act = act[good]
        if not len(act):
            break
        Z = res.y[good]
        xh = Z[:, :n]
        Phi = Z[:, n:].reshape(-1, n, k)
        Fv = xh[:, perp]
        amp = np.linalg.norm(V[act], axis=1)
        r = np.linalg.norm(Fv, axis=1)
        resid[act] = r
        new = np.isnan(first[act])
        first[act[new]] = r[new]
        conv = cfg.converged(r, amp)
        status[act[conv]] = "converged"
        iters[act] = it
        if it == max_iter:
            status[act[~conv]] = "diverged"
            break
        go = ~conv & (r < 1e6 * np.maximum(first[act], 1e-300)) & np.isfinite(r)
        status[act[~conv & ~go]] = "diverged"
        act, Fv, Phi, xh = act[go], Fv[go], Phi[go], xh[go]
        if not len(act):
            break
        Jv = Phi[:, perp, :]
        fc = free_cols[act]
        cols = [np.take_along_axis(Jv, fc[:, None, :].repeat(len(perp), 1), axis=2)] if fc.size else []
        dT = 0.5 * f(xh)[:, perp]
        J = np.concatenate(cols + [dT[:, :, None]], axis=2)
        step, c = _svd_solve(J, Fv, cfg.rcond)
        cond[act] = c
        if fc.size:
            rows = np.repeat(act, fc.shape[1])
            V[rows, free[act].ravel()] += step[:, :-1].ravel()
        T[act] += step[:, -1]
        runaway = (T[act] <= 0) | (T[act] > 4 * Tseed[act])
        status[act[runaway]] = "diverged"
        if period_window is not None:
            out = (T[act] < period_window[0]) | (T[act] > period_window[1])
            status[act[out]] = "window"
        if amplitude_cap is not None:
            big = np.linalg.norm(V[act], axis=1) > amplitude_cap
            status[act[big & (status[act] == "running")]] = "diverged"
    amp = np.linalg.norm(V, axis=1)
    trivial = (status == "converged") & (amp < cfg.amplitude_floor)
    status[trivial] = "trivial"
    if period_window is not None:
        out = (status == "converged") & ((T < period_window[0]) | (T > period_window[1]))
        status[out] = "window"
    closure = np.full(M, np.nan)
    okrows = np.nonzero(status == "converged")[0]
    if verify and len(okrows):
        full = integrate(f, V[okrows], T[okrows], cfg.rtol, cfg.atol, cfg.max_step, cfg.max_steps)
        closure[okrows] = np.linalg.norm(full.y - V[okrows], axis=1)
        closure[okrows[~full.ok]] = np.inf
    recs = []
    for i in range(M):
        recs.append(OrbitRecord(list(V[i]), float(T[i]), float(amp[i]), float(closure[i]),
                                float(resid[i]), iterations=int(iters[i]), condition=float(cond[i]),
                                status=str(status[i])))
    return recs


def _anchor_free(cfg: FlowConfig, v, rotation_fix: Sequence[int], pinned: Sequence[int] = ()):
    """Free fixed-space coordinates: all except the largest rotation-plane one
    and any explicitly pinned coordinates."""
    rot = [i for i in rotation_fix if i in cfg.fix_indices]
    anchor = max(rot, key=lambda i: abs(v[i]))
    return [i for i in cfg.fix_indices if i != anchor and i not in pinned], anchor


def symmetric_shoot(X, cfg: FlowConfig, v0, T0: float, rotation_fix: Sequence[int] | None = None,
                    pinned: Sequence[int] = (), period_window=None) -> OrbitRecord:
    """Shoot one symmetric periodic orbit from a seed in ``Fix(R)``.

    Raises
    ------
    ShootingError
        On divergence, equilibrium convergence or a rejected record.
    """
    v0 = np.asarray(v0, dtype=float)
    rot = list(cfg.fix_indices) if rotation_fix is None else list(rotation_fix)
    free, anchor = _anchor_free(cfg, v0, rot, pinned)
    rec = shoot_batch(X, cfg, v0[None], [T0], [free], period_window=period_window)[0]
    rec.extra["anchor"] = int(anchor)
    if rec.status != "converged":
        raise ShootingError(rec.status, f"residual {rec.fix_residual:.3e} after {rec.iterations} "
                            f"iterations (condition {rec.condition:.3e})", rec)
    if not rec.closure_residual <= max(cfg.newton_tol, 10 * cfg.atol):
        rec.extra["closure_note"] = "closure residual above Newton tolerance"
    return rec


def certify_orbit(X, cfg: FlowConfig, rec: OrbitRecord, R, H: Poly | None = None,
                  samples: int = 16) -> dict:
    """Orbit-level checks: symmetry ``R flow_{T-t}(v) = flow_t(v)`` and, when
    ``H`` is given, conservation ``|H(flow_t(v)) - H(v)|``."""
    R = np.asarray(R, dtype=float)
    fr = np.linspace(0, 1, samples + 1)
    res = flow(X, np.asarray(rec.v), rec.T, cfg, sample_fractions=fr)
    S = res.samples
    sym = float(np.max(np.abs(S[::-1] @ R.T - S)))
    out = {"symmetry_residual": sym}
    if H is not None:
        hv = np.array([float(H.evaluate(list(p))) for p in S])
        out["energy_drift"] = float(np.max(np.abs(hv - hv[0])))
    return out


def continue_family(X, cfg: FlowConfig, seeds: Sequence[tuple], family_id: str = "",
                    pinned: Sequence[int] = (), rotation_fix: Sequence[int] | None = None,
                    alpha: float = 1.0, max_failures: int = 2) -> list[OrbitRecord]:
    """Shoot along a family, warm-starting each point from the previous one.

    Parameters
    ----------
    seeds : sequence of (sigma, v_seed, T_seed)
        Ordered by decreasing ``|sigma|``.
    pinned : sequence of int
        Fixed-space coordinates held at their seed values.

    Returns
    -------
    list of OrbitRecord
        One per seed (failed ones carry their status).

    Raises
    ------
    FamilyLost
        After ``max_failures`` consecutive failures.
    """
    out, fails = [], 0
    prevT = None
    for sigma, v, T0 in seeds:
        v = np.asarray(v, dtype=float)
        tries = [T0] if prevT is None else [T0, prevT]
        rec = None
        for Ts in tries:
            try:
                rec = symmetric_shoot(X, cfg, v, Ts, rotation_fix, pinned)
                break
            except ShootingError as err:
                rec = err.record
        rec.sigma = float(sigma)
        rec.family_id = family_id
        rec.extra["period_prediction"] = 2 * math.pi / ((1 + sigma) * alpha)
        rec.extra["period_discrepancy"] = abs(rec.T - rec.extra["period_prediction"])
        out.append(rec)
        if rec.ok:
            fails = 0
            prevT = rec.T
        else:
            fails += 1
            if fails >= max_failures:
                raise FamilyLost(f"family {family_id} lost at sigma={sigma}", out)
    return out


def quasi_random_fix_seeds(cfg: FlowConfig, count: int, radius: float, seed: int = 0,
                           method: str = "halton") -> np.ndarray:
    """Seeds uniformly distributed in ``Fix(R)`` intersected with a ball."""
    from scipy.stats import qmc

    k = len(cfg.fix_indices)
    out = np.zeros((count, cfg.n))
    if count == 0:
        return out
    eng = qmc.Halton(d=k + 1, seed=seed) if method == "halton" else qmc.Sobol(d=k + 1, seed=seed)
    U = eng.random(count)
    if k == 2:
        r = radius * np.sqrt(U[:, 0])
        th = 2 * np.pi * U[:, 1]
        pts = np.stack([r * np.cos(th), r * np.sin(th)], axis=1)
    elif k == 1:
        pts = radius * (2 * U[:, :1] - 1)
    else:
        from scipy.special import ndtri

        z = ndtri(np.clip(U[:, :k], 1e-12, 1 - 1e-12))
        z /= np.linalg.norm(z, axis=1, keepdims=True)
        pts = z * radius * (U[:, k:k + 1] ** (1.0 / k))
    out[:, list(cfg.fix_indices)] = pts
    return out


def absence_scan(X, cfg: FlowConfig, radius: float, count: int, period_window: tuple,
                 rotation_fix: Sequence[int] | None = None, seed: int = 0,
                 T_center: float | None = None, batch: int = 2500,
                 max_iter: int = 12) -> dict:
    """Shoot from quasi-random seeds in ``Fix(R)`` within ``radius``.

    Every Newton outcome is reported. The verdict ``"no symmetric orbit found"``
    is issued only when no run converges to a record with amplitude in
    ``(amplitude_floor, radius)``; it is numerical evidence, not a proof.
    """
    from scipy.stats import qmc

    lo, hi = period_window
    report = {"radius": radius, "count": count, "period_window": [lo, hi], "seed": seed,
              "outcomes": {}, "found": [], "verdict": None,
              "note": "numerical evidence only"}
    if count == 0:
        return report
    seeds = quasi_random_fix_seeds(cfg, count, radius, seed)
    Tgen = qmc.Halton(d=1, seed=seed + 1, scramble=True).random(count)[:, 0]
    T0 = lo + (hi - lo) * Tgen
    rot = list(cfg.fix_indices) if rotation_fix is None else list(rotation_fix)
    counts: dict[str, int] = {}
    per_seed = []
    for s in range(0, count, batch):
        V = seeds[s:s + batch]
        free = []
        for v in V:
            fr, _ = _anchor_free(cfg, v, rot)
            free.append(fr)
        recs = shoot_batch(X, cfg, V, T0[s:s + batch], free, max_iter=max_iter,
                           period_window=(lo, hi), amplitude_cap=10 * radius)
        for j, r in enumerate(recs):
            counts[r.status] = counts.get(r.status, 0) + 1
            per_seed.append({"seed_index": s + j, "status": r.status, "T": r.T,
                             "amplitude": r.amplitude, "fix_residual": r.fix_residual,
                             "iterations": r.iterations})
            if r.ok and cfg.amplitude_floor < r.amplitude < radius:
                report["found"].append(r.to_dict())
    report["outcomes"] = counts
    report["per_seed"] = per_seed
    report["verdict"] = "no symmetric orbit found" if not report["found"] else "symmetric orbits found"
    return report
