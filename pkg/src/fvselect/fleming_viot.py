"""The N-particle Fleming-Viot system: drift -1 Brownian particles on (0, inf)
where a particle hitting 0 instantly jumps onto another particle chosen
uniformly at random.

Two execution paths share the same stepping rule: a plain-numpy fv_step /
fv_run for unit-scale work and observer hooks, and a numba core used by
estimate_stationary for the long ergodic runs. Killed particles within one
step are resurrected sequentially in uniformly random order, each onto the
current end-of-step position of a uniformly chosen other interior particle.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np
from numba import njit

from . import qsd
from .measures import EmpiricalMeasure, EstimatorResult, batch_means

MIN_GUARANTEED_N = 12  # lambda_N is only proven finite from this size up


class MassExtinctionError(RuntimeError):
    def __init__(self, time: float, dt: float):
        super().__init__(
            f"all particles killed within one step at t={time:g}; "
            f"dt={dt:g} is too coarse for this configuration")
        self.time = time


class InsufficientDataError(RuntimeError):
    pass


@dataclass
class ParticleSystemState:
    positions: np.ndarray
    time: float = 0.0
    jumps: int = 0

    @property
    def n_particles(self) -> int:
        return int(self.positions.size)

    def renormalised_jumps(self) -> float:
        return self.jumps / self.n_particles


@dataclass(frozen=True)
class JumpEvent:
    time: float
    dying_index: int
    target_index: int
    positions_snapshot: Optional[np.ndarray] = None

    def __post_init__(self):
        if self.dying_index == self.target_index:
            raise ValueError("a particle cannot jump onto itself")


@dataclass
class StationarySummary:
    lambda_hat: EstimatorResult
    xi_hat: EmpiricalMeasure
    varpi_hat: EmpiricalMeasure
    mean_interjump: EstimatorResult
    burn_in_used: float
    n_particles: int
    n_events: int
    finiteness_guaranteed: bool
    # time-batched payloads kept for identity z-scores
    xi_times: np.ndarray = field(repr=False, default=None)
    xi_positions: np.ndarray = field(repr=False, default=None)   # (k, N)
    varpi_times: np.ndarray = field(repr=False, default=None)
    varpi_positions: np.ndarray = field(repr=False, default=None)  # (m, N)


def fv_init(n_particles: int, initial, rng: np.random.Generator) -> ParticleSystemState:
    """State at time 0; `initial` is a sampler(n, rng) or explicit positions."""
    if n_particles < 2:
        raise ValueError("the Fleming-Viot system needs at least 2 particles")
    if callable(initial):
        pos = np.asarray(initial(n_particles, rng), dtype=float)
    else:
        pos = np.asarray(initial, dtype=float).copy()
    if pos.size != n_particles:
        raise ValueError("initial positions must match n_particles")
    if np.any(pos <= 0):
        raise ValueError("initial positions must all be positive")
    return ParticleSystemState(positions=pos)


def _propose(positions: np.ndarray, dt: float, z: np.ndarray,
             u: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Shared stepping rule: Gaussian proposals plus bridge kill draws.

    Returns (proposals, killed_mask); permutation-equivariant in its inputs.
    """
    xp = positions - dt + math.sqrt(dt) * z
    killed = xp <= 0
    interior = ~killed
    killed[interior] |= u[interior] < np.exp(
        -2.0 * positions[interior] * xp[interior] / dt)
    return xp, killed


def fv_step(state: ParticleSystemState, dt: float,
            rng: np.random.Generator) -> tuple[ParticleSystemState, list[JumpEvent]]:
    """One step: diffuse every particle, then resurrect the killed ones."""
    if dt <= 0:
        raise ValueError("dt must be positive")
    n = state.n_particles
    xp, killed = _propose(state.positions, dt, rng.standard_normal(n), rng.random(n))
    t_new = state.time + dt
    if not np.any(killed):
        return ParticleSystemState(xp, t_new, state.jumps), []
    if np.all(killed):
        raise MassExtinctionError(time=t_new, dt=dt)
    events = []
    order = rng.permutation(np.flatnonzero(killed))
    dead = killed.copy()
    for i in order:
        while True:
            j = int(rng.integers(n))
            if j != i and not dead[j]:
                break
        xp[i] = xp[j]
        dead[i] = False
        events.append(JumpEvent(time=t_new, dying_index=int(i), target_index=j,
                                positions_snapshot=None))
    # snapshots are attached once the whole step is resolved, so that every
    # recorded configuration has N interior particles
    events = [JumpEvent(e.time, e.dying_index, e.target_index, xp.copy())
              for e in events]
    return ParticleSystemState(xp, t_new, state.jumps + len(events)), events


def fv_run(state: ParticleSystemState, horizon: float, dt: float,
           observers: list[Callable], rng: np.random.Generator) -> ParticleSystemState:
    """Step to the horizon, invoking observer(state, events) after every step."""
    if horizon < 0:
        raise ValueError("horizon must be non-negative")
    n_steps = int(round(horizon / dt))
    for _ in range(n_steps):
        state, events = fv_step(state, dt, rng)
        for obs in observers:
            obs(state, events)
    return state


@njit(cache=True)
def _fv_core(positions, n_steps, dt, seed, snap_stride, esnap_stride,
             event_times, snap_times, snap_pos, esnap_times,
             esnap_pos):  # pragma: no cover
    # returns (status, n_events, n_snap, n_esnap); status 1 = extinction,
    # 2 = an output buffer overflowed (caller grows and reruns)
    np.random.seed(seed)
    n = positions.shape[0]
    sqrt_dt = math.sqrt(dt)
    xp = np.empty(n)
    dead = np.zeros(n, np.bool_)
    killed_idx = np.empty(n, np.int64)
    n_events = 0
    n_snap = 0
    n_esnap = 0
    for step in range(n_steps):
        n_killed = 0
        for i in range(n):
            prop = positions[i] - dt + sqrt_dt * np.random.normal()
            is_dead = prop <= 0.0
            if not is_dead:
                q = 2.0 * positions[i] * prop / dt
                if q < 40.0 and np.random.random() < math.exp(-q):
                    is_dead = True
            xp[i] = prop
            dead[i] = is_dead
            if is_dead:
                killed_idx[n_killed] = i
                n_killed += 1
        t_now = (step + 1) * dt
        if n_killed == n:
            return 1, n_events, n_snap, n_esnap
        if n_killed > 0:
            # uniformly random resurrection order (Fisher-Yates)
            for k in range(n_killed - 1, 0, -1):
                j = np.random.randint(0, k + 1)
                tmp = killed_idx[k]
                killed_idx[k] = killed_idx[j]
                killed_idx[j] = tmp
            for k in range(n_killed):
                i = killed_idx[k]
                while True:
                    j = np.random.randint(0, n)
                    if j != i and not dead[j]:
                        break
                xp[i] = xp[j]
                dead[i] = False
            for k in range(n_killed):
                if n_events >= event_times.shape[0]:
                    return 2, n_events, n_snap, n_esnap
                event_times[n_events] = t_now
                if n_events % esnap_stride == 0:
                    if n_esnap >= esnap_times.shape[0]:
                        return 2, n_events, n_snap, n_esnap
                    esnap_times[n_esnap] = t_now
                    for i in range(n):
                        esnap_pos[n_esnap, i] = xp[i]
                    n_esnap += 1
                n_events += 1
        for i in range(n):
            positions[i] = xp[i]
        if (step + 1) % snap_stride == 0:
            if n_snap >= snap_times.shape[0]:
                return 2, n_events, n_snap, n_esnap
            snap_times[n_snap] = t_now
            for i in range(n):
                snap_pos[n_snap, i] = positions[i]
            n_snap += 1
    return 0, n_events, n_snap, n_esnap


def _run_core(positions: np.ndarray, horizon: float, dt: float, seed: int,
              snap_interval: float, max_event_snapshots: int):
    n = positions.size
    n_steps = int(round(horizon / dt))
    snap_stride = max(int(round(snap_interval / dt)), 1)
    expected_events = int(0.8 * n * horizon) + 1000
    esnap_stride = max(expected_events // max_event_snapshots, 1)
    cap_events = 4 * expected_events
    while True:
        event_times = np.empty(cap_events)
        snap_times = np.empty(n_steps // snap_stride + 2)
        snap_pos = np.empty((snap_times.size, n))
        esnap_times = np.empty(cap_events // esnap_stride + 2)
        esnap_pos = np.empty((esnap_times.size, n))
        work = positions.copy()
        status, n_events, n_snap, n_esnap = _fv_core(
            work, n_steps, dt, seed, snap_stride, esnap_stride,
            event_times, snap_times, snap_pos, esnap_times, esnap_pos)
        if status == 1:
            raise MassExtinctionError(time=horizon, dt=dt)
        if status == 2:
            cap_events *= 4
            continue
        return (work, event_times[:n_events], snap_times[:n_snap],
                snap_pos[:n_snap], esnap_times[:n_esnap], esnap_pos[:n_esnap])


def estimate_stationary(n_particles: int, initial, dt: float, horizon: float,
                        burn_in: float, rng: np.random.Generator,
                        snap_interval: float = 0.5,
                        max_event_snapshots: int = 4000,
                        n_batches: int = 20) -> StationarySummary:
    """Long-run ergodic estimates of the jump rate and the mean stationary
    measures of the continuous-time system and the jump-time chain."""
    if not (horizon > burn_in > 0):
        raise ValueError("need horizon > burn_in > 0")
    if n_particles < MIN_GUARANTEED_N:
        warnings.warn(
            f"N={n_particles} < {MIN_GUARANTEED_N}: finiteness of the long-run "
            "jump rate is not guaranteed at this size", stacklevel=2)
    state = fv_init(n_particles, initial, rng)
    seed = int(rng.integers(0, 2**32 - 1))
    (_, event_times, snap_times, snap_pos,
     esnap_times, esnap_pos) = _run_core(
        state.positions, horizon, dt, seed, snap_interval, max_event_snapshots)

    post = event_times > burn_in
    post_times = event_times[post]
    if post_times.size < 1000:
        raise InsufficientDataError(
            f"only {post_times.size} post-burn-in jump events; extend the horizon")
    span = horizon - burn_in
    # jump rate per particle via windowed batch means
    n_windows = 20 * n_batches
    counts, _ = np.histogram(post_times, bins=np.linspace(burn_in, horizon,
                                                          n_windows + 1))
    rates = counts / (n_particles * span / n_windows)
    lambda_hat = batch_means(rates, n_batches=n_batches)

    keep_snap = snap_times > burn_in
    xi_times = snap_times[keep_snap]
    xi_positions = snap_pos[keep_snap]
    if xi_times.size < 2 * n_batches:
        raise InsufficientDataError("too few post-burn-in snapshots")
    keep_esnap = esnap_times > burn_in
    varpi_times = esnap_times[keep_esnap]
    varpi_positions = esnap_pos[keep_esnap]
    if varpi_times.size == 0:
        raise InsufficientDataError("no post-burn-in jump-event snapshots")

    interjump = np.diff(post_times)
    mean_interjump = batch_means(interjump, n_batches=n_batches)

    return StationarySummary(
        lambda_hat=lambda_hat,
        xi_hat=EmpiricalMeasure.from_samples(xi_positions.ravel()),
        varpi_hat=EmpiricalMeasure.from_samples(varpi_positions.ravel()),
        mean_interjump=mean_interjump,
        burn_in_used=burn_in,
        n_particles=n_particles,
        n_events=int(post_times.size),
        finiteness_guaranteed=n_particles >= MIN_GUARANTEED_N,
        xi_times=xi_times,
        xi_positions=xi_positions,
        varpi_times=varpi_times,
        varpi_positions=varpi_positions,
    )


def _batched_mean(values_2d: np.ndarray, times: np.ndarray,
                  n_batches: int = 20) -> tuple[float, float]:
    """Mean and batch-means SE of a per-snapshot statistic pooled over time."""
    per_snap = values_2d.mean(axis=1)
    edges = np.linspace(times[0], times[-1] + 1e-12, n_batches + 1)
    idx = np.clip(np.searchsorted(edges, times, side="right") - 1, 0, n_batches - 1)
    bm = np.array([per_snap[idx == k].mean() for k in range(n_batches)
                   if np.any(idx == k)])
    est = float(per_snap.mean())
    se = float(bm.std(ddof=1) / math.sqrt(bm.size)) if bm.size > 1 else 0.0
    return est, se


def green_identity_check(summary: StationarySummary, f,
                         gf=None) -> tuple[float, float, float]:
    """Check xi(f) = lambda_N * varpi(Gf); returns (lhs, rhs, z_score).

    gf may be supplied in closed form; otherwise Gf is tabulated on a dense
    grid with the Green kernel and interpolated at the jump-time positions.
    """
    if gf is None:
        top = float(max(summary.xi_positions.max(), summary.varpi_positions.max()))
        grid = np.linspace(1e-6, top + 1.0, 4000)
        table = qsd.green_apply(f, grid)

        def gf(x):
            return np.interp(x, grid, table)

    lam = summary.lambda_hat.estimate
    lam_se = summary.lambda_hat.std_error
    lhs, lhs_se = _batched_mean(f(summary.xi_positions), summary.xi_times)
    gvals = gf(summary.varpi_positions)
    rhs_raw, rhs_raw_se = _batched_mean(gvals, summary.varpi_times)
    rhs = lam * rhs_raw
    rhs_se = math.sqrt((lam * rhs_raw_se) ** 2 + (rhs_raw * lam_se) ** 2)
    denom = math.sqrt(lhs_se**2 + rhs_se**2)
    z = 0.0 if denom == 0 and lhs == rhs else (lhs - rhs) / max(denom, 1e-300)
    return lhs, rhs, z
