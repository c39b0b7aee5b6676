"""Batched Dormand-Prince 5(4) integration of autonomous fields.

Many trajectories are advanced together, each with its own step size and
end time, so that shooting scans vectorize over seeds. A single trajectory
can also keep its steps for continuous (dense) evaluation.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

__all__ = ["IntegrationError", "BatchResult", "DenseSolution", "integrate",
           "variational_rhs", "C", "A", "B", "E", "P"]

C = np.array([0, 1 / 5, 3 / 10, 4 / 5, 8 / 9, 1, 1])
A = [
    [],
    [1 / 5],
    [3 / 40, 9 / 40],
    [44 / 45, -56 / 15, 32 / 9],
    [19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729],
    [9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656],
    [35 / 384, 0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84],
]
B = np.array([35 / 384, 0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84, 0])
E = np.array([71 / 57600, 0, -71 / 16695, 71 / 1920, -17253 / 339200, 22 / 525, -1 / 40])
# quartic continuous extension: y(t0 + th) = y0 + h K^T P [th, th^2, th^3, th^4]
P = np.array([
    [1, -8048581381 / 2820520608, 8663915743 / 2820520608, -12715105075 / 11282082432],
    [0, 0, 0, 0],
    [0, 131558114200 / 32700410799, -68118460800 / 10900136933, 87487479700 / 32700410799],
    [0, -1754552775 / 470086768, 14199869525 / 1410260304, -10690763975 / 1880347072],
    [0, 127303824393 / 49829197408, -318862633887 / 49829197408, 701980252875 / 199316789632],
    [0, -282668133 / 205662961, 2019193451 / 616988883, -1453857185 / 822651844],
    [0, 40617522 / 29380423, -110615467 / 29380423, 69997945 / 29380423],
])

SAFETY, MIN_FACTOR, MAX_FACTOR = 0.9, 0.2, 10.0


class IntegrationError(RuntimeError):
    pass


@dataclass
class DenseSolution:
    """Continuous evaluation of one trajectory from stored steps."""

    t: np.ndarray
    h: np.ndarray
    y: np.ndarray
    K: np.ndarray
    direction: float

    def __call__(self, t) -> np.ndarray:
        t = np.atleast_1d(np.asarray(t, dtype=float))
        s = self.direction * t
        tt = np.abs(self.t)
        idx = np.clip(np.searchsorted(tt, s, side="right") - 1, 0, len(self.h) - 1)
        theta = (s - tt[idx]) / self.h[idx]
        powers = np.stack([theta ** (k + 1) for k in range(4)], axis=-1)
        Q = np.einsum("msd,sk->mkd", self.K[idx], P)
        out = self.y[idx] + self.h[idx, None] * np.einsum("mkd,mk->md", Q, powers)
        return out


@dataclass
class BatchResult:
    """End states of a batch.

    Attributes
    ----------
    y : ndarray (M, d)
        State at ``t_end`` (last reached state for failed rows).
    ok : ndarray of bool (M,)
    nsteps, nrejected : ndarray of int
    samples : ndarray (M, K, d) or None
        States at ``sample_fractions * t_end``.
    message : list of str
    dense : DenseSolution or None
    """

    y: np.ndarray
    ok: np.ndarray
    nsteps: np.ndarray
    nrejected: np.ndarray
    samples: np.ndarray | None = None
    message: list = field(default_factory=list)
    dense: DenseSolution | None = None


def _rms(x, axis=-1):
    return np.sqrt(np.mean(x * x, axis=axis))


def integrate(f: Callable[[np.ndarray], np.ndarray], y0, t_end, rtol: float = 1e-10,
              atol: float = 1e-12, max_step: float = np.inf, max_steps: int = 100000,
              error_dims: int | None = None, sample_fractions=None, dense: bool = False,
              first_step: float | None = None) -> BatchResult:
    """Integrate ``y' = f(y)`` for a batch of initial values.

    Parameters
    ----------
    f : callable
        Maps an ``(M, d)`` array of states to derivatives.
    y0 : array_like (M, d) or (d,)
    t_end : float or array_like (M,)
        Signed end times; negative values integrate backwards.
    rtol, atol : float
    max_step : float
    max_steps : int
        Per-row accepted-step budget.
    error_dims : int, optional
        Only the first ``error_dims`` components enter the error norm
        (used to leave variational components out of step control).
    sample_fractions : array_like, optional
        Fractions in ``[0, 1]`` of ``t_end`` at which states are also recorded
        (by continuous extension).
    dense : bool
        Keep all steps of a single trajectory.
    """
    y0 = np.asarray(y0, dtype=float)
    single = y0.ndim == 1
    Y = np.atleast_2d(y0).copy()
    M, d = Y.shape
    T = np.broadcast_to(np.asarray(t_end, dtype=float), (M,)).copy()
    direction = np.where(T < 0, -1.0, 1.0)
    span = np.abs(T)
    ed = d if error_dims is None else error_dims
    if dense and M != 1:
        raise ValueError("dense output needs a single trajectory")
    fr = None if sample_fractions is None else np.asarray(sample_fractions, dtype=float)
    samples = None if fr is None else np.full((M, len(fr), d), np.nan)
    next_sample = np.zeros(M, dtype=int)
    if fr is not None:
        order = np.argsort(fr)
        fr_sorted = fr[order]
        at0 = fr_sorted <= 0
        for k in np.nonzero(at0)[0]:
            samples[:, order[k]] = Y
        next_sample[:] = int(np.sum(at0))

    def F(idx, Z):
        return direction[idx, None] * f(Z)

    t = np.zeros(M)
    ok = np.zeros(M, dtype=bool)
    failed = np.zeros(M, dtype=bool)
    nsteps = np.zeros(M, dtype=int)
    nrej = np.zeros(M, dtype=int)
    msg = [""] * M
    done = span == 0
    ok[done] = True

    all_idx = np.arange(M)
    K0 = np.zeros((M, d))
    act = all_idx[~done]
    if len(act):
        K0[act] = F(act, Y[act])
    h = np.zeros(M)
    if first_step is not None:
        h[:] = first_step
    elif len(act):
        scale = atol + rtol * np.abs(Y[act, :ed])
        d0 = _rms(Y[act, :ed] / scale)
        d1 = _rms(K0[act, :ed] / scale)
        h0 = np.where((d0 < 1e-5) | (d1 < 1e-5), 1e-6, 0.01 * d0 / np.maximum(d1, 1e-300))
        h[act] = h0
    h = np.minimum(np.minimum(h, max_step), np.maximum(span, 1e-300))
    store = [] if dense else None

    while True:
        act = all_idx[~(done | failed)]
        if not len(act):
            break
        ha = np.minimum(h[act], span[act] - t[act])
        y = Y[act]
        Ks = np.empty((7, len(act), d))
        Ks[0] = K0[act]
        for s in range(1, 7):
            dy = np.zeros_like(y)
            for j, a in enumerate(A[s]):
                if a:
                    dy += a * Ks[j]
            Ks[s] = F(act, y + ha[:, None] * dy)
        ynew = y + ha[:, None] * np.einsum("s,smd->md", B, Ks)
        err = ha[:, None] * np.einsum("s,smd->md", E, Ks[:, :, :ed])
        scale = atol + rtol * np.maximum(np.abs(y[:, :ed]), np.abs(ynew[:, :ed]))
        en = _rms(err / scale)
        finite = np.all(np.isfinite(ynew), axis=1) & np.isfinite(en)
        en = np.where(finite, en, np.inf)
        accept = en <= 1.0
        with np.errstate(divide="ignore", over="ignore"):
            fac = np.where(en == 0, MAX_FACTOR, SAFETY * en ** -0.2)
        fac = np.clip(fac, MIN_FACTOR, MAX_FACTOR)
        fac = np.where(accept, fac, np.minimum(fac, 1.0))
        a_idx = act[accept]
        r_idx = act[~accept]
        nrej[r_idx] += 1
        if len(a_idx):
            acc = np.nonzero(accept)[0]
            t_old = t[a_idx].copy()
            if fr is not None:
                _record_samples(samples, next_sample, fr, order, fr_sorted, a_idx, acc,
                                t_old, ha, y, Ks, span)
            if store is not None:
                store.append((t_old[0], ha[acc][0], y[acc][0].copy(), Ks[:, acc[0]].copy()))
            t[a_idx] = t_old + ha[acc]
            Y[a_idx] = ynew[acc]
            K0[a_idx] = Ks[6][acc]
            nsteps[a_idx] += 1
            fin = a_idx[np.abs(span[a_idx] - t[a_idx]) <= 1e-14 * np.maximum(1.0, span[a_idx])]
            t[fin] = span[fin]
            done[fin] = True
            ok[fin] = True
            over = a_idx[(nsteps[a_idx] >= max_steps) & ~done[a_idx]]
            for i in over:
                msg[i] = "maximum number of steps reached"
            failed[over] = True
        h[act] = np.minimum(ha * fac, max_step)
        tiny = act[(h[act] < 1e-14 * np.maximum(1.0, span[act])) & ~done[act]]
        for i in tiny:
            msg[i] = "step size underflow"
        failed[tiny] = True
        bad = act[~finite]
        for i in bad:
            if not msg[i]:
                msg[i] = "non-finite state"

    if fr is not None:
        # samples exactly at the end time
        for k in range(len(fr)):
            hit = ok & np.isnan(samples[:, order[k], 0]) & (fr_sorted[k] >= 1 - 1e-14)
            samples[hit, order[k]] = Y[hit]
    dsol = None
    if store is not None and store:
        tt = np.array([s[0] for s in store]) * direction[0]
        dsol = DenseSolution(tt, np.array([s[1] for s in store]), np.array([s[2] for s in store]),
                             np.array([s[3] for s in store]), direction[0])
    res = BatchResult(Y[0] if single else Y, ok[0:1] if single else ok, nsteps, nrej,
                      None if samples is None else (samples[0] if single else samples), msg, dsol)
    return res


def _record_samples(samples, next_sample, fr, order, fr_sorted, rows, acc, t_old, ha, y, Ks, span):
    nk = len(fr_sorted)
    for r_local, (row, a) in enumerate(zip(rows, acc)):
        k = next_sample[row]
        t_new = t_old[r_local] + ha[a]
        while k < nk and fr_sorted[k] * span[row] <= t_new * (1 + 1e-15):
            theta = (fr_sorted[k] * span[row] - t_old[r_local]) / ha[a]
            powers = theta ** np.arange(1, 5)
            Q = P @ powers
            samples[row, order[k]] = y[a] + ha[a] * Q @ Ks[:, a]
            k += 1
        next_sample[row] = k


def variational_rhs(field_eval, d: int, k: int):
    """Right-hand side of a state plus ``k`` tangent columns.

    ``field_eval(X)`` must return ``(values (M, d), jacobians (M, d, d))``.
    The augmented state is ``[x, Phi.ravel()]`` with ``Phi`` of shape ``(d, k)``.
    """

    def rhs(Z):
        X = Z[:, :d]
        Phi = Z[:, d:].reshape(-1, d, k)
        v, J = field_eval(X)
        return np.concatenate([v, np.matmul(J, Phi).reshape(len(Z), d * k)], axis=1)

    return rhs
