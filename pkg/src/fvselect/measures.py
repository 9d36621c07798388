"""Empirical measures on the half-line and the statistics toolkit.

Provides weighted empirical measures with exact Wasserstein-1 and
Kolmogorov-Smirnov distances (against other empirical measures or against
analytic laws with known CDFs), plus batch-means confidence intervals for
ergodic time averages.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np
from scipy import optimize
from scipy import stats as sps


class DegenerateMeasureError(ValueError):
    pass


@dataclass(frozen=True)
class EmpiricalMeasure:
    """Weighted point set on (0, inf), points sorted ascending, weights sum to 1."""

    points: np.ndarray
    weights: np.ndarray

    @staticmethod
    def from_samples(samples, weights=None) -> "EmpiricalMeasure":
        pts = np.asarray(samples, dtype=float)
        if pts.size == 0:
            raise DegenerateMeasureError("empty sample set")
        if np.any(pts <= 0):
            raise ValueError("empirical measures in this artifact live on (0, inf)")
        if weights is None:
            w = np.full(pts.size, 1.0 / pts.size)
        else:
            w = np.asarray(weights, dtype=float)
            if w.shape != pts.shape or np.any(w < 0):
                raise ValueError("weights must be non-negative and match points")
            w = w / w.sum()
        order = np.argsort(pts, kind="stable")
        return EmpiricalMeasure(points=pts[order], weights=w[order])

    def __post_init__(self):
        if self.points.size == 0:
            raise DegenerateMeasureError("empty measure")
        if np.any(np.diff(self.points) < 0):
            raise ValueError("points must be sorted ascending")
        if abs(self.weights.sum() - 1.0) > 1e-12:
            raise ValueError("weights must sum to 1")

    def cdf_steps(self):
        """Support points and the CDF value attained at each (right-continuous)."""
        return self.points, np.cumsum(self.weights)

    def mean(self) -> float:
        return float(np.dot(self.points, self.weights))

    def integrate(self, f: Callable[[np.ndarray], np.ndarray]) -> float:
        return float(np.dot(f(self.points), self.weights))

    def quantile(self, q: float) -> float:
        cum = np.cumsum(self.weights)
        idx = int(np.searchsorted(cum, q, side="left"))
        idx = min(idx, self.points.size - 1)
        return float(self.points[idx])


@dataclass(frozen=True)
class AnalyticLaw:
    """A law on (0, inf) given by its CDF, with optional closed-form helpers.

    cdf_antideriv is an antiderivative of the CDF; when present, W1 against an
    empirical measure is computed segment-exactly instead of by quadrature.
    """

    cdf: Callable[[np.ndarray], np.ndarray]
    cdf_antideriv: Optional[Callable[[np.ndarray], np.ndarray]] = None
    ppf: Optional[Callable[[float], float]] = None
    mean_value: Optional[float] = None

    def inverse_cdf(self, q: float) -> float:
        if self.ppf is not None:
            return self.ppf(q)
        hi = 1.0
        while self.cdf(hi) < q:
            hi *= 2.0
            if hi > 1e12:
                raise RuntimeError("inverse CDF bracket failed")
        return float(optimize.brentq(lambda x: self.cdf(x) - q, 0.0, hi, xtol=1e-12))


@dataclass(frozen=True)
class EstimatorResult:
    estimate: float
    std_error: float
    ci_low: float
    ci_high: float
    n_effective: float

    def __post_init__(self):
        if not (self.ci_low <= self.estimate <= self.ci_high):
            raise ValueError("confidence interval must contain the estimate")


def _w1_empirical(a: EmpiricalMeasure, b: EmpiricalMeasure) -> float:
    # exact integral of |F_a - F_b| over the union of the supports
    grid = np.union1d(a.points, b.points)
    fa = np.cumsum(a.weights)[np.searchsorted(a.points, grid, side="right") - 1]
    fa[np.searchsorted(a.points, grid, side="right") == 0] = 0.0
    fb = np.cumsum(b.weights)[np.searchsorted(b.points, grid, side="right") - 1]
    fb[np.searchsorted(b.points, grid, side="right") == 0] = 0.0
    return float(np.sum(np.abs(fa[:-1] - fb[:-1]) * np.diff(grid)))


def _w1_vs_analytic(emp: EmpiricalMeasure, law: AnalyticLaw) -> float:
    if law.cdf_antideriv is None:
        # fallback: discretize the analytic law on a fine quantile grid
        m = max(200_000, emp.points.size)
        qs = (np.arange(m) + 0.5) / m
        disc = np.array([law.inverse_cdf(q) for q in qs])
        return _w1_empirical(emp, EmpiricalMeasure.from_samples(disc))
    pts = np.concatenate([[0.0], emp.points])
    cum = np.concatenate([[0.0], np.cumsum(emp.weights)])[:-1]
    anti = law.cdf_antideriv
    f_pts = np.asarray(law.cdf(pts), dtype=float)
    a_pts = np.asarray(anti(pts), dtype=float)
    dx = np.diff(pts)
    d_anti = np.diff(a_pts)
    # per-segment sign of F - c is constant except where F crosses the step
    # level; crossings are rare (order sqrt(n)), handled individually
    below = f_pts[1:] <= cum
    above = f_pts[:-1] >= cum
    crossing = ~(below | above)
    total = float(np.sum(cum[below] * dx[below] - d_anti[below]))
    total += float(np.sum(d_anti[above] - cum[above] * dx[above]))
    for i in np.flatnonzero(crossing):
        lo, up, c = pts[i], pts[i + 1], cum[i]
        xc = optimize.brentq(lambda x: law.cdf(x) - c, lo, up, xtol=1e-13)
        ac = float(anti(xc))
        total += c * (xc - lo) - (ac - a_pts[i])
        total += (a_pts[i + 1] - ac) - c * (up - xc)
    # tail beyond the last sample: integral of 1 - F
    hi = max(emp.points[-1] * 2 + 50.0, 100.0)
    total += (hi - emp.points[-1]) - (float(anti(hi)) - a_pts[-1])
    return total


def w1(a, b) -> float:
    """Wasserstein-1 distance on the line between empirical/analytic laws."""
    if isinstance(a, AnalyticLaw) and isinstance(b, EmpiricalMeasure):
        return _w1_vs_analytic(b, a)
    if isinstance(b, AnalyticLaw) and isinstance(a, EmpiricalMeasure):
        return _w1_vs_analytic(a, b)
    if isinstance(a, EmpiricalMeasure) and isinstance(b, EmpiricalMeasure):
        return _w1_empirical(a, b)
    raise TypeError("w1 expects EmpiricalMeasure or AnalyticLaw arguments")


def w1_truncated(a: EmpiricalMeasure, b: EmpiricalMeasure, cap: float = 1.0) -> float:
    """W1 over the bounded metric min(|x-y|, cap); equals the capped CDF-area."""
    # quantile coupling is optimal in 1d for any convex cost of |x-y|;
    # evaluate the coupling cost with the truncated ground metric.
    grid = np.unique(np.concatenate([np.cumsum(a.weights), np.cumsum(b.weights)]))
    grid = grid[(grid > 0) & (grid <= 1)]
    prev = 0.0
    total = 0.0
    for q in grid:
        qa = a.quantile(min(q, 1.0) - 1e-15)
        qb = b.quantile(min(q, 1.0) - 1e-15)
        total += min(abs(qa - qb), cap) * (q - prev)
        prev = q
    return float(total)


def ks(a, b) -> float:
    """Kolmogorov-Smirnov sup-distance between CDFs."""
    if isinstance(a, AnalyticLaw) and isinstance(b, EmpiricalMeasure):
        a, b = b, a
    if isinstance(a, EmpiricalMeasure) and isinstance(b, AnalyticLaw):
        cum = np.cumsum(a.weights)
        fb = np.asarray(b.cdf(a.points), dtype=float)
        lower = np.concatenate([[0.0], cum[:-1]])
        return float(max(np.max(np.abs(cum - fb)), np.max(np.abs(lower - fb))))
    if isinstance(a, EmpiricalMeasure) and isinstance(b, EmpiricalMeasure):
        grid = np.union1d(a.points, b.points)
        fa = np.concatenate([[0.0], np.cumsum(a.weights)])[
            np.searchsorted(a.points, grid, side="right")]
        fb = np.concatenate([[0.0], np.cumsum(b.weights)])[
            np.searchsorted(b.points, grid, side="right")]
        return float(np.max(np.abs(fa - fb)))
    raise TypeError("ks expects EmpiricalMeasure or AnalyticLaw arguments")


def batch_means(series, n_batches: int = 20, confidence: float = 0.95) -> EstimatorResult:
    """Mean of a (possibly autocorrelated) series with batch-means standard error."""
    x = np.asarray(series, dtype=float)
    if n_batches < 20:
        raise ValueError("need at least 20 batches for a usable batch-means CI")
    if x.size < 2 * n_batches:
        raise ValueError(f"series of length {x.size} too short for {n_batches} batches")
    bsize = x.size // n_batches
    trimmed = x[: bsize * n_batches]
    bm = trimmed.reshape(n_batches, bsize).mean(axis=1)
    est = float(trimmed.mean())
    se = float(bm.std(ddof=1) / np.sqrt(n_batches))
    tcrit = float(sps.t.ppf(0.5 + confidence / 2, df=n_batches - 1))
    var_x = float(trimmed.var(ddof=1))
    n_eff = float(trimmed.size) if se == 0.0 else max(var_x / se**2, 1.0)
    return EstimatorResult(
        estimate=est,
        std_error=se,
        ci_low=est - tcrit * se,
        ci_high=est + tcrit * se,
        n_effective=n_eff,
    )
