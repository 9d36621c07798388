import numpy as np
import pytest

from fvselect import qsd
from fvselect.measures import (
    AnalyticLaw,
    DegenerateMeasureError,
    EmpiricalMeasure,
    EstimatorResult,
    batch_means,
    ks,
    w1,
    w1_truncated,
)


def dirac(x):
    return EmpiricalMeasure.from_samples([x])


class TestEmpiricalMeasure:
    def test_empty_sample_set_rejected(self):
        with pytest.raises(DegenerateMeasureError):
            EmpiricalMeasure.from_samples([])

    def test_nonpositive_points_rejected(self):
        with pytest.raises(ValueError):
            EmpiricalMeasure.from_samples([1.0, 0.0, 2.0])

    def test_weights_normalised_and_sorted(self):
        m = EmpiricalMeasure.from_samples([3.0, 1.0, 2.0], weights=[2.0, 1.0, 1.0])
        assert np.allclose(m.points, [1.0, 2.0, 3.0])
        assert np.allclose(m.weights, [0.25, 0.25, 0.5])
        assert abs(m.weights.sum() - 1.0) < 1e-12

    def test_mismatched_or_negative_weights_rejected(self):
        with pytest.raises(ValueError):
            EmpiricalMeasure.from_samples([1.0, 2.0], weights=[1.0])
        with pytest.raises(ValueError):
            EmpiricalMeasure.from_samples([1.0, 2.0], weights=[1.0, -0.5])

    def test_mean_and_integrate(self):
        m = EmpiricalMeasure.from_samples([1.0, 3.0])
        assert m.mean() == pytest.approx(2.0)
        assert m.integrate(lambda x: x**2) == pytest.approx(5.0)

    def test_quantile(self):
        m = EmpiricalMeasure.from_samples([1.0, 2.0, 3.0, 4.0])
        assert m.quantile(0.1) == 1.0
        assert m.quantile(0.9) == 4.0


class TestEstimatorResult:
    def test_interval_must_contain_estimate(self):
        with pytest.raises(ValueError):
            EstimatorResult(estimate=2.0, std_error=0.1, ci_low=0.0,
                            ci_high=1.0, n_effective=10.0)


class TestW1:
    def test_identical_inputs_give_zero(self):
        m = EmpiricalMeasure.from_samples([1.0, 2.0, 5.0])
        assert w1(m, m) == 0.0

    def test_point_masses(self):
        assert w1(dirac(1.0), dirac(3.0)) == pytest.approx(2.0)

    def test_type_errors(self):
        with pytest.raises(TypeError):
            w1(dirac(1.0), [1.0, 2.0])

    def test_metric_axioms_on_random_small_measures(self, rng):
        for _ in range(20):
            ms = [EmpiricalMeasure.from_samples(rng.uniform(0.1, 5.0, size=k),
                                                weights=rng.uniform(0.1, 1.0, size=k))
                  for k in rng.integers(2, 10, size=3)]
            a, b, c = ms
            assert w1(a, b) == pytest.approx(w1(b, a), abs=1e-12)
            assert w1(a, a) == 0.0
            assert w1(a, c) <= w1(a, b) + w1(b, c) + 1e-12

    def test_against_analytic_matches_quadrature(self, rng):
        law = qsd.qsd_law(qsd.make_qsd(0.5))
        samples = rng.gamma(2.0, 1.0, size=300)
        emp = EmpiricalMeasure.from_samples(samples)
        grid = np.linspace(1e-9, 120.0, 1_200_001)
        f_law = law.cdf(grid)
        pts, cum = emp.cdf_steps()
        f_emp = np.concatenate([[0.0], cum])[np.searchsorted(pts, grid, "right")]
        brute = np.trapezoid(np.abs(f_law - f_emp), grid)
        assert w1(emp, law) == pytest.approx(brute, abs=1e-4)

    def test_analytic_agrees_with_dense_discretization(self, rng):
        q = qsd.make_qsd(0.5)
        law = qsd.qsd_law(q)
        emp = EmpiricalMeasure.from_samples(qsd.qsd_sample(q, 1_000_000, rng))
        disc = EmpiricalMeasure.from_samples(qsd.qsd_sample(q, 10_000_000, rng))
        assert abs(w1(emp, law) - w1(emp, disc)) < 0.002

    def test_large_sample_close_to_own_law(self, rng):
        q = qsd.make_qsd(0.5)
        emp = EmpiricalMeasure.from_samples(qsd.qsd_sample(q, 1_000_000, rng))
        assert w1(emp, qsd.qsd_law(q)) < 0.005

    def test_fallback_path_without_antideriv(self, rng):
        base = qsd.qsd_law(qsd.make_qsd(0.5))
        bare = AnalyticLaw(cdf=base.cdf, ppf=base.ppf)
        emp = EmpiricalMeasure.from_samples(qsd.qsd_sample(qsd.make_qsd(0.5),
                                                          50_000, rng))
        assert w1(emp, bare) == pytest.approx(w1(emp, base), abs=0.01)


class TestW1Truncated:
    def test_bounded_by_cap_and_by_plain_w1(self, rng):
        a = EmpiricalMeasure.from_samples(rng.uniform(0.1, 3.0, size=40))
        b = EmpiricalMeasure.from_samples(rng.uniform(5.0, 50.0, size=40))
        t = w1_truncated(a, b, cap=1.0)
        assert t <= 1.0 + 1e-12
        assert t <= w1(a, b) + 1e-12

    def test_matches_plain_w1_for_close_measures(self, rng):
        a = EmpiricalMeasure.from_samples(rng.uniform(1.0, 1.5, size=30))
        b = EmpiricalMeasure.from_samples(rng.uniform(1.0, 1.5, size=30))
        assert w1_truncated(a, b, cap=10.0) == pytest.approx(w1(a, b), abs=1e-10)


class TestKS:
    def test_identical_gives_zero(self):
        m = EmpiricalMeasure.from_samples([1.0, 2.0])
        assert ks(m, m) == 0.0

    def test_point_masses(self):
        assert ks(dirac(1.0), dirac(3.0)) == pytest.approx(1.0)

    def test_dkw_scale_against_analytic(self, rng):
        q = qsd.make_qsd(0.5)
        emp = EmpiricalMeasure.from_samples(qsd.qsd_sample(q, 1_000_000, rng))
        assert ks(emp, qsd.qsd_law(q)) < 0.002

    def test_type_errors(self):
        with pytest.raises(TypeError):
            ks(dirac(1.0), 3.0)


class TestBatchMeans:
    def test_constant_series_has_zero_se(self):
        r = batch_means(np.full(400, 2.5))
        assert r.estimate == pytest.approx(2.5)
        assert r.std_error == 0.0

    def test_iid_normal_se_scale(self, rng):
        r = batch_means(rng.standard_normal(10_000), n_batches=20)
        assert 0.005 < r.std_error < 0.015

    def test_ar1_inflates_se(self, rng):
        n = 20_000
        eps = rng.standard_normal(n)
        x = np.empty(n)
        x[0] = eps[0]
        for i in range(1, n):
            x[i] = 0.9 * x[i - 1] + eps[i]
        iid_se = 1.0 / np.sqrt(n)
        assert batch_means(x, n_batches=20).std_error > 2 * iid_se

    def test_preconditions(self):
        with pytest.raises(ValueError):
            batch_means(np.arange(100), n_batches=10)
        with pytest.raises(ValueError):
            batch_means(np.arange(30), n_batches=20)
