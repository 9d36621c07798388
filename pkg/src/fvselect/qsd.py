"""Closed-form and semi-analytic quantities for Brownian motion with drift -1
killed at 0: the quasi-stationary family, survival law, hitting-time moments,
the Green (expected-occupation) kernel, and tail-rate diagnostics.

The QSD family is parametrised by its eigenvalue lam in (0, 1/2]:
density M * x * exp(-x) at lam = 1/2, else M * exp(-x) * sinh(beta * x)
with beta = sqrt(1 - 2*lam) and M = 2*lam / beta.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import integrate, optimize
from scipy import special

from .measures import AnalyticLaw

LAMBDA_MIN = 0.5


@dataclass(frozen=True)
class QsdParams:
    """One member of the QSD family, with its derived constants."""

    lam: float
    beta: float
    norm_const: float

    @property
    def is_minimal(self) -> bool:
        return self.beta == 0.0

    def mean(self) -> float:
        return 1.0 / self.lam


@dataclass(frozen=True)
class SurvivalQuery:
    x0: float
    t: float

    def __post_init__(self):
        if self.x0 <= 0:
            raise ValueError("initial position must be positive")
        if self.t < 0:
            raise ValueError("time must be non-negative")


def make_qsd(lam: float) -> QsdParams:
    """Build the QSD with eigenvalue lam in (0, 1/2]."""
    if not (0.0 < lam <= 0.5):
        raise ValueError(f"no QSD for eigenvalue {lam}: must lie in (0, 1/2]")
    if lam == 0.5:
        return QsdParams(lam=0.5, beta=0.0, norm_const=1.0)
    beta = math.sqrt(1.0 - 2.0 * lam)
    return QsdParams(lam=lam, beta=beta, norm_const=2.0 * lam / beta)


def qsd_density(q: QsdParams, x) -> np.ndarray | float:
    x = np.asarray(x, dtype=float)
    if np.any(x < 0):
        raise ValueError("density is defined on x >= 0")
    if q.is_minimal:
        out = q.norm_const * x * np.exp(-x)
    else:
        # exp(-x) * sinh(beta x) written without the overflowing sinh
        b = q.beta
        out = 0.5 * q.norm_const * (np.exp(-(1 - b) * x) - np.exp(-(1 + b) * x))
    return out if out.ndim else float(out)


def qsd_cdf(q: QsdParams, x) -> np.ndarray | float:
    x = np.asarray(x, dtype=float)
    if q.is_minimal:
        out = -np.expm1(-x) - x * np.exp(-x)
    else:
        b = q.beta
        half_m = q.norm_const / 2.0
        out = half_m * (-np.expm1(-(1 - b) * x) / (1 - b)
                        + np.expm1(-(1 + b) * x) / (1 + b))
    out = np.clip(out, 0.0, 1.0)
    return out if out.ndim else float(out)


def _qsd_cdf_antideriv(q: QsdParams, x) -> np.ndarray:
    # antiderivative of the CDF, used for segment-exact W1 against samples
    x = np.asarray(x, dtype=float)
    if q.is_minimal:
        return x + np.exp(-x) * (x + 2.0)
    b = q.beta
    half_m = q.norm_const / 2.0
    return x + half_m * (np.exp(-(1 - b) * x) / (1 - b) ** 2
                         - np.exp(-(1 + b) * x) / (1 + b) ** 2)


def qsd_law(q: QsdParams) -> AnalyticLaw:
    """The QSD as an AnalyticLaw usable by the distance toolkit."""

    def ppf(p: float) -> float:
        hi = 1.0
        while qsd_cdf(q, hi) < p:
            hi *= 2.0
        return float(optimize.brentq(lambda x: qsd_cdf(q, x) - p, 0.0, hi, xtol=1e-13))

    return AnalyticLaw(
        cdf=lambda x: qsd_cdf(q, x),
        cdf_antideriv=lambda x: _qsd_cdf_antideriv(q, x),
        ppf=ppf,
        mean_value=q.mean(),
    )


def qsd_sample(q: QsdParams, n: int, rng: np.random.Generator) -> np.ndarray:
    """i.i.d. samples from the QSD.

    The minimal QSD x*exp(-x) is Gamma(2, 1). Otherwise the density is
    proportional to exp(-(1-beta)x) * (1 - exp(-2*beta*x)), sampled by
    rejection from the dominating Exp(1-beta) with acceptance probability
    1 - exp(-2*beta*x).
    """
    if n < 1:
        raise ValueError("need n >= 1")
    if q.is_minimal:
        return rng.gamma(shape=2.0, scale=1.0, size=n)
    b = q.beta
    out = np.empty(n)
    filled = 0
    # acceptance rate is 2b/(1+b); oversample accordingly
    while filled < n:
        todo = n - filled
        batch = int(todo * (1 + b) / (2 * b) * 1.2) + 16
        prop = rng.exponential(scale=1.0 / (1.0 - b), size=batch)
        keep = prop[rng.random(batch) < -np.expm1(-2.0 * b * prop)]
        take = min(keep.size, todo)
        out[filled:filled + take] = keep[:take]
        filled += take
    return out


def survival_prob(x, t) -> np.ndarray | float:
    """P_x(tau > t) for dX = -dt + dW absorbed at 0.

    Evaluated as Phi((x-t)/sqrt(t)) - exp(2x + log Phi(-(x+t)/sqrt(t))),
    with the second term in log-space so that large x never overflows.
    """
    x = np.asarray(x, dtype=float)
    t = np.asarray(t, dtype=float)
    if np.any(x <= 0):
        raise ValueError("initial position must be positive")
    if np.any(t < 0):
        raise ValueError("time must be non-negative")
    x, t = np.broadcast_arrays(x, t)
    out = np.ones(x.shape)
    pos = t > 0
    if np.any(pos):
        xt, tt = x[pos], t[pos]
        rt = np.sqrt(tt)
        first = special.ndtr((xt - tt) / rt)
        second = np.exp(2.0 * xt + special.log_ndtr(-(xt + tt) / rt))
        out[pos] = np.clip(first - second, 0.0, 1.0)
    return out if out.ndim else float(out)


def hitting_mgf(x: float, z: float) -> float:
    """E_x[exp(z * tau)] = exp(-x * (sqrt(1 - 2z) - 1)); finite only for z <= 1/2."""
    if x <= 0:
        raise ValueError("initial position must be positive")
    if z > 0.5:
        raise ValueError("exponential moment is infinite for z > 1/2")
    return math.exp(-x * (math.sqrt(1.0 - 2.0 * z) - 1.0))


def green_g1(x) -> np.ndarray | float:
    """G1(x) = E_x[tau] = x."""
    x = np.asarray(x, dtype=float)
    if np.any(x < 0):
        raise ValueError("position must be non-negative")
    out = x.copy()
    return out if out.ndim else float(out)


def green_apply(f, x_grid) -> np.ndarray:
    """Expected-occupation transform Gf(x) = E_x[int_0^tau f(X_s) ds].

    Computed from the exact kernel of the generator (the bounded solution of
    (1/2) u'' - u' = -f with u(0) = 0 and no exp(2x) component):
        Gf(x) = int_0^x (1 - e^{-2y}) f(y) dy
              + int_x^inf (e^{-2(y-x)} - e^{-2y}) f(y) dy.
    """
    grid = np.asarray(x_grid, dtype=float)
    if grid.size == 0 or np.any(grid <= 0) or np.any(np.diff(grid) <= 0):
        raise ValueError("x_grid must be strictly increasing and positive")
    out = np.empty(grid.size)
    for i, x in enumerate(grid):
        inner, _ = integrate.quad(
            lambda y: (-np.expm1(-2.0 * y)) * f(y), 0.0, x,
            epsabs=1e-12, epsrel=1e-10, limit=200)
        outer, _ = integrate.quad(
            lambda y: (np.exp(-2.0 * (y - x)) - np.exp(-2.0 * y)) * f(y),
            x, np.inf, epsabs=1e-12, epsrel=1e-10, limit=200)
        out[i] = inner + outer
    return out


def t_y_qsd(q: QsdParams, y: float) -> float:
    """Time for a QSD to accumulate negative log-survival y: exactly y / lam."""
    if y < 0:
        raise ValueError("y must be non-negative")
    return y / q.lam


def t_y_pointmass(x: float, y: float, tol: float = 1e-8) -> float:
    """Time at which -ln P_x(tau > t) first exceeds y, by monotone root-finding."""
    if x <= 0:
        raise ValueError("initial position must be positive")
    if y < 0:
        raise ValueError("y must be non-negative")
    if y == 0:
        return 0.0

    def g(t):
        return -math.log(survival_prob(x, t)) - y

    hi = 1.0
    while g(hi) < 0:
        hi *= 2.0
        if hi > 1e9:
            raise RuntimeError("failed to bracket the log-survival level")
    return float(optimize.brentq(g, 0.0, hi, xtol=tol))


def tail_rate(samples, fit_fraction: float = 0.05) -> float:
    """Least-squares slope of ln(empirical tail) vs x over the top order statistics.

    Estimates the exponential tail rate; for the minimal QSD this approaches -1.
    """
    x = np.sort(np.asarray(samples, dtype=float))
    n = x.size
    if n < 1000:
        raise ValueError("tail-rate fit needs at least 1000 samples")
    if not (0.0 < fit_fraction <= 0.5):
        raise ValueError("fit_fraction must lie in (0, 0.5]")
    k = max(int(n * fit_fraction), 10)
    top = x[n - k: n - 1]  # drop the max: its tail probability is 0
    tail = (n - np.arange(n - k, n - 1) - 1) / n
    if top[-1] - top[0] < 1e-12:
        raise ValueError("degenerate samples: no spread in the fit window")
    slope = np.polyfit(top, np.log(tail), 1)[0]
    return float(slope)
