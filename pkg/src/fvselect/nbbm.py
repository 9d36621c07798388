"""N-branching Brownian motion: fixed-size population of standard Brownian
particles where each particle branches at rate 1 and every branch event
removes the current minimum, keeping the mass constant.

The front travels at a speed below sqrt(2) that increases toward sqrt(2) with
N; the centered stationary profile is compared against the minimal travelling
wave 2x*exp(-sqrt(2)x).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from numba import njit

from . import qsd
from .measures import AnalyticLaw, EmpiricalMeasure, EstimatorResult

C_MIN = math.sqrt(2.0)

MAX_THINNING_DT = 0.01  # per-step branching by thinning is only valid for small dt


@dataclass
class NbbmState:
    positions: np.ndarray
    time: float = 0.0
    branch_count: int = 0

    @property
    def n_particles(self) -> int:
        return int(self.positions.size)


def nbbm_init(n_particles: int, initial, rng: np.random.Generator) -> NbbmState:
    if n_particles < 2:
        raise ValueError("need at least 2 particles")
    if callable(initial):
        pos = np.asarray(initial(n_particles, rng), dtype=float)
    else:
        pos = np.asarray(initial, dtype=float).copy()
    if pos.size != n_particles:
        raise ValueError("initial positions must match n_particles")
    return NbbmState(positions=pos)


def nbbm_step(state: NbbmState, dt: float, rng: np.random.Generator) -> NbbmState:
    """Diffuse all particles, then apply the branch/kill events of the step."""
    if not (0 < dt <= MAX_THINNING_DT):
        raise ValueError(f"dt must lie in (0, {MAX_THINNING_DT}] for the "
                         "per-step branching approximation")
    n = state.n_particles
    pos = state.positions + math.sqrt(dt) * rng.standard_normal(n)
    branchers = np.flatnonzero(rng.random(n) < -np.expm1(-dt))
    branchers = rng.permutation(branchers)
    for i in branchers:
        pos[np.argmin(pos)] = pos[i]
    return NbbmState(positions=pos, time=state.time + dt,
                     branch_count=state.branch_count + branchers.size)


@njit(cache=True)
def _nbbm_core(positions, n_steps, dt, seed, record_stride,
               rec_times, rec_min, rec_median):  # pragma: no cover
    np.random.seed(seed)
    n = positions.shape[0]
    sqrt_dt = math.sqrt(dt)
    p_branch = -math.expm1(-dt)
    branch_count = 0
    n_rec = 0
    branchers = np.empty(n, np.int64)
    for step in range(n_steps):
        for i in range(n):
            positions[i] += sqrt_dt * np.random.normal()
        nb = 0
        for i in range(n):
            if np.random.random() < p_branch:
                branchers[nb] = i
                nb += 1
        if nb > 0:
            for k in range(nb - 1, 0, -1):
                j = np.random.randint(0, k + 1)
                tmp = branchers[k]
                branchers[k] = branchers[j]
                branchers[j] = tmp
            for k in range(nb):
                imin = 0
                for i in range(1, n):
                    if positions[i] < positions[imin]:
                        imin = i
                positions[imin] = positions[branchers[k]]
            branch_count += nb
        if (step + 1) % record_stride == 0:
            rec_times[n_rec] = (step + 1) * dt
            rec_min[n_rec] = positions.min()
            rec_median[n_rec] = np.median(positions)
            n_rec += 1
    return branch_count, n_rec


def nbbm_run(state: NbbmState, horizon: float, dt: float,
             rng: np.random.Generator, record_interval: float = 0.1):
    """Run to the horizon; returns (state, times, min_traj, median_traj)."""
    if not (0 < dt <= MAX_THINNING_DT):
        raise ValueError(f"dt must lie in (0, {MAX_THINNING_DT}]")
    n_steps = int(round(horizon / dt))
    stride = max(int(round(record_interval / dt)), 1)
    cap = n_steps // stride + 2
    rec_times = np.empty(cap)
    rec_min = np.empty(cap)
    rec_median = np.empty(cap)
    pos = state.positions.copy()
    seed = int(rng.integers(0, 2**32 - 1))
    branches, n_rec = _nbbm_core(pos, n_steps, dt, seed, stride,
                                 rec_times, rec_min, rec_median)
    new_state = NbbmState(positions=pos, time=state.time + n_steps * dt,
                          branch_count=state.branch_count + branches)
    return (new_state, rec_times[:n_rec] + state.time,
            rec_min[:n_rec], rec_median[:n_rec])


def front_speed(times, positions, fit_window: float) -> EstimatorResult:
    """Least-squares slope of the front trajectory over its trailing window,
    with the SE taken from slopes of contiguous sub-windows (which absorbs
    residual autocorrelation)."""
    t = np.asarray(times, dtype=float)
    x = np.asarray(positions, dtype=float)
    if t.size < 4:
        raise ValueError("trajectory too short")
    spacing = float(np.min(np.diff(t)))
    if t[-1] - t[0] < 2 * fit_window - spacing:
        raise ValueError("trajectory must cover at least twice the fit window")
    sel = t >= t[-1] - fit_window
    ts, xs = t[sel], x[sel]
    if np.ptp(xs) == 0:
        raise ValueError("degenerate (constant) trajectory")
    slope = float(np.polyfit(ts, xs, 1)[0])
    n_sub = 8
    edges = np.linspace(ts[0], ts[-1] + 1e-12, n_sub + 1)
    subs = []
    for k in range(n_sub):
        m = (ts >= edges[k]) & (ts < edges[k + 1])
        if m.sum() >= 3 and np.ptp(ts[m]) > 0:
            subs.append(np.polyfit(ts[m], xs[m], 1)[0])
    subs = np.array(subs)
    se = float(subs.std(ddof=1) / math.sqrt(subs.size)) if subs.size > 1 else 0.0
    return EstimatorResult(estimate=slope, std_error=se,
                           ci_low=slope - 3 * se, ci_high=slope + 3 * se,
                           n_effective=float(subs.size))


def wave_profile(c: float) -> AnalyticLaw:
    """The travelling-wave profile of speed c >= sqrt(2): the QSD with
    eigenvalue 1/c^2, rescaled in space by c (w_c(x) = c * pi_{1/c^2}(c x))."""
    if c < C_MIN:
        raise ValueError(f"no travelling wave below speed sqrt(2); got {c}")
    q = qsd.make_qsd(1.0 / c**2)
    law = qsd.qsd_law(q)

    def cdf(x):
        return law.cdf(np.asarray(x, dtype=float) * c)

    def cdf_antideriv(x):
        return law.cdf_antideriv(np.asarray(x, dtype=float) * c) / c

    return AnalyticLaw(cdf=cdf, cdf_antideriv=cdf_antideriv,
                       ppf=lambda p: law.inverse_cdf(p) / c,
                       mean_value=q.mean() / c)


def wave_density(c: float, x) -> np.ndarray:
    if c < C_MIN:
        raise ValueError(f"no travelling wave below speed sqrt(2); got {c}")
    q = qsd.make_qsd(1.0 / c**2)
    return c * np.asarray(qsd.qsd_density(q, np.asarray(x, dtype=float) * c))


def centered_profile(state: NbbmState) -> EmpiricalMeasure:
    """Empirical measure of positions seen from the running minimum."""
    shifted = state.positions - state.positions.min()
    # the minimum itself sits at 0, outside the open half-line; nudge it
    shifted = np.maximum(shifted, 1e-12)
    return EmpiricalMeasure.from_samples(shifted)


def pooled_centered_profile(snapshots: list[np.ndarray]) -> EmpiricalMeasure:
    pooled = np.concatenate([s - s.min() for s in snapshots])
    return EmpiricalMeasure.from_samples(np.maximum(pooled, 1e-12))
