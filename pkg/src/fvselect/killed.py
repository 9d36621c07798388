"""Monte Carlo for the single killed particle: conditioned-evolution flows.

flow_theta evolves an ensemble for a fixed time and keeps survivors, giving a
conditional sample of the time-t conditioned law together with an estimate of
the negative log-survival. flow_vartheta instead runs until the accumulated
negative log-survival first exceeds a level y.

Conditioning is by rejection (keep survivors), so survivor counts shrink like
exp(-t/2); callers are warned below 100 survivors and an explicit degeneracy
error is raised on extinction.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np
from numba import njit, prange

from .measures import EmpiricalMeasure

DEGENERACY_THRESHOLD = 100


class EnsembleDegeneracyError(RuntimeError):
    def __init__(self, time: float):
        super().__init__(f"conditioned ensemble went extinct at time {time:g}")
        self.time = time


@dataclass
class ConditionedEnsemble:
    particles: np.ndarray
    log_survival: float
    time: float
    initial_count: int

    def measure(self) -> EmpiricalMeasure:
        return EmpiricalMeasure.from_samples(self.particles)

    @property
    def survivor_count(self) -> int:
        return int(self.particles.size)


@njit(parallel=True, cache=True)
def _evolve_core(positions, n_steps, dt, seeds):  # pragma: no cover
    n = positions.shape[0]
    alive = np.ones(n, np.bool_)
    sqrt_dt = math.sqrt(dt)
    for i in prange(n):
        np.random.seed(seeds[i])
        x = positions[i]
        ok = True
        for _ in range(n_steps):
            xp = x - dt + sqrt_dt * np.random.normal()
            if xp <= 0.0:
                ok = False
                break
            q = 2.0 * x * xp / dt
            if q < 40.0 and np.random.random() < math.exp(-q):
                ok = False
                break
            x = xp
        positions[i] = x
        alive[i] = ok
    return alive


@njit(parallel=True, cache=True)
def _death_steps_core(positions, max_steps, dt, seeds):  # pragma: no cover
    # death[i] = 0-based index of the killing step, or max_steps if it survives;
    # survivors get their end-of-chunk position written back.
    n = positions.shape[0]
    death = np.full(n, max_steps, np.int64)
    sqrt_dt = math.sqrt(dt)
    for i in prange(n):
        np.random.seed(seeds[i])
        x = positions[i]
        for s in range(max_steps):
            xp = x - dt + sqrt_dt * np.random.normal()
            if xp <= 0.0:
                death[i] = s
                break
            q = 2.0 * x * xp / dt
            if q < 40.0 and np.random.random() < math.exp(-q):
                death[i] = s
                break
            x = xp
        if death[i] == max_steps:
            positions[i] = x
    return death


def _particle_seeds(rng: np.random.Generator, n: int) -> np.ndarray:
    return rng.integers(0, 2**32 - 1, size=n, dtype=np.uint32)


def _draw_initial(initial, n, rng) -> np.ndarray:
    if callable(initial):
        pos = np.asarray(initial(n, rng), dtype=float)
    else:
        pos = np.asarray(initial, dtype=float).copy()
        if n is not None and n != pos.size:
            raise ValueError("explicit initial positions must match n")
    if np.any(pos <= 0):
        raise ValueError("initial positions must be positive")
    return pos


def flow_theta(initial, t: float, n: int, dt: float,
               rng: np.random.Generator) -> ConditionedEnsemble:
    """Conditioned law at time t from initial law `initial` (sampler or array)."""
    ensembles = flow_theta_grid(initial, [t], n, dt, rng)
    return ensembles[0]


def flow_theta_grid(initial, t_grid, n: int, dt: float,
                    rng: np.random.Generator) -> list[ConditionedEnsemble]:
    """Conditioned ensembles at each time of an increasing grid, evolved
    incrementally (survivors of one horizon seed the next)."""
    t_grid = [float(t) for t in t_grid]
    if any(t < 0 for t in t_grid) or any(b <= a for a, b in zip(t_grid, t_grid[1:])):
        raise ValueError("t_grid must be non-negative and strictly increasing")
    if n is not None and n < 1000:
        raise ValueError("need n >= 1000 for a usable conditioned ensemble")
    if dt <= 0:
        raise ValueError("dt must be positive")
    pos = _draw_initial(initial, n, rng)
    n0 = pos.size
    out = []
    prev_t = 0.0
    for t in t_grid:
        n_steps = int(round((t - prev_t) / dt))
        if n_steps > 0:
            alive = _evolve_core(pos, n_steps, dt, _particle_seeds(rng, pos.size))
            pos = pos[alive]
        prev_t = t
        if pos.size == 0:
            raise EnsembleDegeneracyError(time=t)
        if pos.size < DEGENERACY_THRESHOLD:
            warnings.warn(f"only {pos.size} survivors at t={t:g}: "
                          "ensemble is degenerating", stacklevel=2)
        out.append(ConditionedEnsemble(
            particles=pos.copy(),
            log_survival=-math.log(pos.size / n0),
            time=t,
            initial_count=n0,
        ))
    return out


def flow_vartheta(initial, y: float, n: int, dt: float, rng: np.random.Generator,
                  chunk_steps: int = 2000,
                  max_time: float = 1e4) -> ConditionedEnsemble:
    """Evolve until the accumulated negative log-survival first exceeds y.

    The returned ensemble's `time` estimates the level-crossing time T_y.
    """
    if y < 0:
        raise ValueError("y must be non-negative")
    if n is not None and n < 1000:
        raise ValueError("need n >= 1000 for a usable conditioned ensemble")
    if dt <= 0:
        raise ValueError("dt must be positive")
    pos = _draw_initial(initial, n, rng)
    n0 = pos.size
    if y == 0:
        return ConditionedEnsemble(pos, 0.0, 0.0, n0)
    threshold = n0 * math.exp(-y)  # crossing when survivors drop below this
    steps_done = 0
    max_steps = int(round(max_time / dt))
    while steps_done < max_steps:
        chunk = min(chunk_steps, max_steps - steps_done)
        seeds = _particle_seeds(rng, pos.size)
        scratch = pos.copy()
        death = _death_steps_core(scratch, chunk, dt, seeds)
        order = np.sort(death)
        # survivors after m chunk-steps = count(death >= m)
        lo_count = int(np.sum(death >= chunk))
        if lo_count >= threshold:
            pos = scratch[death == chunk]
            steps_done += chunk
            if pos.size == 0:
                raise EnsembleDegeneracyError(time=steps_done * dt)
            continue
        # crossing happens inside this chunk: find the first step m with
        # survivors < threshold, then replay the same seeds for m steps
        counts = pos.size - np.searchsorted(order, np.arange(chunk + 1))
        m = int(np.argmax(counts < threshold))
        alive = _evolve_core(pos, m, dt, seeds)
        pos = pos[alive]
        steps_done += m
        if pos.size == 0:
            raise EnsembleDegeneracyError(time=steps_done * dt)
        if pos.size < DEGENERACY_THRESHOLD:
            warnings.warn(f"only {pos.size} survivors in flow_vartheta",
                          stacklevel=2)
        return ConditionedEnsemble(
            particles=pos,
            log_survival=-math.log(pos.size / n0),
            time=steps_done * dt,
            initial_count=n0,
        )
    raise RuntimeError(f"log-survival never exceeded {y} before t={max_time}")


def survival_rate_estimate(initial, t_grid, n: int, dt: float,
                           rng: np.random.Generator) -> list[tuple[float, float]]:
    """Per-time decay-rate estimates (t, -ln(survival fraction)/t)."""
    t_grid = [float(t) for t in t_grid]
    if any(t <= 0 for t in t_grid):
        raise ValueError("decay rates need strictly positive times")
    ensembles = flow_theta_grid(initial, t_grid, n, dt, rng)
    return [(e.time, e.log_survival / e.time) for e in ensembles]
