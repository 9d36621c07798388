"""Single-step propagation of a drift -1 Brownian particle with absorption at 0.

The step proposes a Gaussian endpoint and applies the Brownian-bridge crossing
probability exp(-2 x x' / dt) for the kill within the step (the bridge law is
drift-independent, so this correction is exact for constant drift).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np
from numba import njit, prange


@dataclass(frozen=True)
class StepOutcome:
    status: str  # "alive" or "killed"
    position: Optional[float] = None

    def __post_init__(self):
        if self.status == "alive" and (self.position is None or self.position <= 0):
            raise ValueError("alive outcome must carry a positive position")


def step_with_absorption(x: float, dt: float, rng: np.random.Generator,
                         bridge_correction: bool = True) -> StepOutcome:
    """One Euler step with the within-step bridge kill check.

    bridge_correction=False is a diagnostic mode that only kills on a
    non-positive endpoint; it systematically overestimates survival.
    """
    if x <= 0 or dt <= 0:
        raise ValueError("position and step size must be positive")
    xp = x - dt + math.sqrt(dt) * rng.standard_normal()
    if xp <= 0:
        return StepOutcome(status="killed")
    if bridge_correction and rng.random() < math.exp(-2.0 * x * xp / dt):
        return StepOutcome(status="killed")
    return StepOutcome(status="alive", position=xp)


def step_positions(positions: np.ndarray, dt: float, rng: np.random.Generator,
                   bridge_correction: bool = True) -> tuple[np.ndarray, np.ndarray]:
    """Vectorized step: returns (new_positions, alive_mask).

    Dead entries of new_positions are not meaningful.
    """
    if dt <= 0:
        raise ValueError("step size must be positive")
    x = np.asarray(positions, dtype=float)
    xp = x - dt + math.sqrt(dt) * rng.standard_normal(x.size)
    alive = xp > 0
    if bridge_correction:
        hit = np.zeros(x.size, dtype=bool)
        hit[alive] = rng.random(alive.sum()) < np.exp(
            -2.0 * x[alive] * xp[alive] / dt)
        alive &= ~hit
    return xp, alive


def sample_hitting_time(x: float, rng: np.random.Generator) -> float:
    """Exact hitting time of 0 from x: inverse Gaussian, mean x and shape x^2."""
    if x <= 0:
        raise ValueError("initial position must be positive")
    return float(rng.wald(mean=x, scale=x * x))


def sample_hitting_times(x: float, n: int, rng: np.random.Generator) -> np.ndarray:
    if x <= 0:
        raise ValueError("initial position must be positive")
    return rng.wald(mean=x, scale=x * x, size=n)


@njit(parallel=True, cache=True)
def _survival_kernel(x0, n_paths, n_steps, dt, block_seeds, bridge):  # pragma: no cover
    n_blocks = block_seeds.shape[0]
    per_block = (n_paths + n_blocks - 1) // n_blocks
    sqrt_dt = math.sqrt(dt)
    survived = 0
    for b in prange(n_blocks):
        np.random.seed(block_seeds[b])
        lo = b * per_block
        hi = min(n_paths, lo + per_block)
        local = 0
        for _ in range(lo, hi):
            x = x0
            alive = True
            for _ in range(n_steps):
                xp = x - dt + sqrt_dt * np.random.normal()
                if xp <= 0.0:
                    alive = False
                    break
                if bridge:
                    q = 2.0 * x * xp / dt
                    # kill probability exp(-q) is negligible for large q
                    if q < 40.0 and np.random.random() < math.exp(-q):
                        alive = False
                        break
                x = xp
            if alive:
                local += 1
        survived += local
    return survived


def stepped_survival(x: float, t: float, dt: float, n_paths: int,
                     rng: np.random.Generator, bridge_correction: bool = True,
                     n_blocks: int = 256) -> tuple[float, float]:
    """Monte Carlo survival estimate by stepping; returns (estimate, std_error)."""
    if x <= 0 or t <= 0 or dt <= 0 or n_paths < 1:
        raise ValueError("x, t, dt must be positive and n_paths >= 1")
    n_steps = int(round(t / dt))
    seeds = rng.integers(0, 2**32 - 1, size=n_blocks, dtype=np.uint32)
    k = _survival_kernel(x, n_paths, n_steps, dt, seeds, bridge_correction)
    p = k / n_paths
    se = math.sqrt(max(p * (1 - p), 1e-300) / n_paths)
    return p, se
