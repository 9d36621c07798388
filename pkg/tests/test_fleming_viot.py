import math

import numpy as np
import pytest

from fvselect import fleming_viot as fv
from fvselect import qsd
from fvselect.measures import batch_means, w1


def pimin_sampler(n, rng):
    return qsd.qsd_sample(qsd.make_qsd(0.5), n, rng)


class TestInit:
    def test_explicit_positions(self, rng):
        state = fv.fv_init(2, [1.0, 2.0], rng)
        assert state.n_particles == 2
        assert state.time == 0.0 and state.jumps == 0

    def test_sampler_initial(self, rng):
        state = fv.fv_init(100, pimin_sampler, rng)
        assert state.positions.size == 100
        assert np.all(state.positions > 0)

    def test_too_few_particles(self, rng):
        with pytest.raises(ValueError):
            fv.fv_init(1, [1.0], rng)

    def test_nonpositive_position(self, rng):
        with pytest.raises(ValueError):
            fv.fv_init(2, [1.0, 0.0], rng)

    def test_size_mismatch(self, rng):
        with pytest.raises(ValueError):
            fv.fv_init(3, [1.0, 2.0], rng)


class TestJumpEvent:
    def test_self_target_rejected(self):
        with pytest.raises(ValueError):
            fv.JumpEvent(time=1.0, dying_index=3, target_index=3)


class TestStep:
    def test_quiet_step_has_no_events(self, rng):
        state = fv.fv_init(5, np.full(5, 50.0), rng)
        new, events = fv.fv_step(state, 1e-4, rng)
        assert events == []
        assert new.jumps == 0
        assert new.time == pytest.approx(1e-4)

    def test_two_particles_forced_target(self, rng):
        state = fv.fv_init(2, [0.05, 5.0], rng)
        for _ in range(5000):
            new, events = fv.fv_step(state, 1e-3, rng)
            if events:
                (e,) = events
                assert e.dying_index == 0
                assert e.target_index == 1
                assert new.positions[0] == new.positions[1]
                assert np.all(e.positions_snapshot > 0)
                break
            state = new
        else:
            pytest.fail("no kill observed")

    def test_positions_stay_positive_and_count_conserved(self, rng):
        state = fv.fv_init(50, pimin_sampler, rng)
        for _ in range(2000):
            state, _ = fv.fv_step(state, 1e-3, rng)
            assert state.positions.size == 50
            assert np.all(state.positions > 0)

    def test_mass_extinction_error(self, rng):
        state = fv.fv_init(2, [1e-8, 1e-8], rng)
        with pytest.raises(fv.MassExtinctionError):
            for _ in range(50):
                state, _ = fv.fv_step(state, 1e-2, rng)

    def test_jump_rate_near_half_from_qsd_start(self, rng):
        state = fv.fv_init(100, pimin_sampler, rng)
        state = fv.fv_run(state, 1.0, 1e-3, [], rng)
        assert 0.35 <= state.renormalised_jumps() <= 0.65

    def test_bad_dt(self, rng):
        with pytest.raises(ValueError):
            fv.fv_step(fv.fv_init(2, [1.0, 2.0], rng), 0.0, rng)


class TestProposeEquivariance:
    def test_permutation_equivariance(self, rng):
        n = 64
        x = rng.uniform(0.05, 4.0, n)
        z = rng.standard_normal(n)
        u = rng.random(n)
        perm = rng.permutation(n)
        xp, killed = fv._propose(x, 1e-2, z, u)
        xp_p, killed_p = fv._propose(x[perm], 1e-2, z[perm], u[perm])
        assert np.array_equal(xp[perm], xp_p)
        assert np.array_equal(killed[perm], killed_p)


class TestRun:
    def test_zero_horizon(self, rng):
        state = fv.fv_init(10, pimin_sampler, rng)
        seen = []
        out = fv.fv_run(state, 0.0, 1e-3, [lambda s, e: seen.append(s)], rng)
        assert seen == []
        assert out.time == 0.0

    def test_jump_counter_monotone_and_linear_growth(self, rng):
        # after burn-in the jump counter grows linearly: windowed rates over
        # the two halves agree within batch-means noise (the rate is strongly
        # autocorrelated, so Poisson-scale errors would be far too tight)
        burn, half = 20.0, 100.0
        state = fv.fv_init(100, pimin_sampler, rng)
        counts = []
        window_marks = []

        def watch(s, events):
            counts.append(s.jumps)
            while len(window_marks) * 1.0 + burn <= s.time + 1e-9:
                window_marks.append(s.jumps)

        fv.fv_run(state, burn + 2 * half, 2e-3, [watch], rng)
        assert all(b >= a for a, b in zip(counts, counts[1:]))
        per_window = np.diff(np.asarray(window_marks, dtype=float)) / 100.0
        first, second = per_window[:100], per_window[100:200]
        r1 = batch_means(first, n_batches=20)
        r2 = batch_means(second, n_batches=20)
        assert abs(r1.estimate - r2.estimate) <= 3 * math.hypot(
            r1.std_error, r2.std_error)
        # doubling the elapsed time roughly doubles the jumps
        total = first.sum() + second.sum()
        assert 1.8 <= total / first.sum() <= 2.2


@pytest.fixture(scope="module")
def summary_n100():
    rng = np.random.default_rng(99)
    return fv.estimate_stationary(100, pimin_sampler, 1e-3, 250.0, 50.0, rng)


class TestEstimateStationary:
    def test_preconditions(self, rng):
        with pytest.raises(ValueError):
            fv.estimate_stationary(100, pimin_sampler, 1e-3, 10.0, 20.0, rng)

    def test_insufficient_events(self, rng):
        with pytest.raises(fv.InsufficientDataError):
            fv.estimate_stationary(20, pimin_sampler, 1e-3, 25.0, 20.0, rng)

    def test_small_system_warns(self, rng):
        with pytest.warns(UserWarning, match="finiteness"):
            s = fv.estimate_stationary(8, pimin_sampler, 1e-3, 400.0, 20.0, rng)
        assert not s.finiteness_guaranteed

    def test_summary_shape(self, summary_n100):
        s = summary_n100
        assert s.n_particles == 100
        assert s.finiteness_guaranteed
        assert s.lambda_hat.estimate > 0
        assert s.lambda_hat.ci_low <= s.lambda_hat.estimate <= s.lambda_hat.ci_high
        assert np.all(s.xi_hat.points > 0)
        assert np.all(s.varpi_hat.points > 0)
        assert s.n_events >= 1000

    def test_interjump_identity(self, summary_n100):
        s = summary_n100
        prod = s.lambda_hat.estimate * 100 * s.mean_interjump.estimate
        se = math.hypot(s.lambda_hat.std_error * 100 * s.mean_interjump.estimate,
                        s.lambda_hat.estimate * 100 * s.mean_interjump.std_error)
        assert abs(prod - 1.0) <= 3 * se

    def test_lower_bound_on_jump_rate(self, summary_n100):
        iota = -100 * math.log(1 - 1 / 100)
        s = summary_n100
        assert s.lambda_hat.estimate >= 0.5 / iota - 3 * s.lambda_hat.std_error

    def test_deterministic_given_seed(self):
        a = fv.estimate_stationary(30, pimin_sampler, 2e-3, 80.0, 10.0,
                                   np.random.default_rng(7))
        b = fv.estimate_stationary(30, pimin_sampler, 2e-3, 80.0, 10.0,
                                   np.random.default_rng(7))
        assert a.lambda_hat == b.lambda_hat
        assert np.array_equal(a.xi_hat.points, b.xi_hat.points)
        assert np.array_equal(a.varpi_hat.points, b.varpi_hat.points)

    def test_initial_condition_forgotten(self, summary_n100):
        rng = np.random.default_rng(123)
        far = fv.estimate_stationary(100, lambda n, r: np.full(n, 5.0),
                                     1e-3, 250.0, 50.0, rng)
        s = summary_n100
        gap = 3 * math.hypot(s.lambda_hat.std_error, far.lambda_hat.std_error)
        assert abs(s.lambda_hat.estimate - far.lambda_hat.estimate) <= gap
        assert w1(s.xi_hat, far.xi_hat) < 0.05


class TestGreenIdentity:
    def test_zero_function(self, summary_n100):
        lhs, rhs, z = fv.green_identity_check(
            summary_n100, f=lambda x: np.zeros_like(x),
            gf=lambda x: np.zeros_like(x))
        assert lhs == 0.0 and rhs == 0.0 and z == 0.0

    def test_constant_one(self, summary_n100):
        lhs, rhs, z = fv.green_identity_check(
            summary_n100, f=lambda x: np.ones_like(x), gf=lambda x: x)
        assert lhs == pytest.approx(1.0)
        assert abs(z) <= 3

    def test_exponential_with_tabulated_transform(self, summary_n100):
        # leave gf unspecified so the transform is tabulated numerically
        lhs, rhs, z = fv.green_identity_check(summary_n100,
                                              f=lambda x: np.exp(-x))
        closed_lhs, closed_rhs, closed_z = fv.green_identity_check(
            summary_n100, f=lambda x: np.exp(-x),
            gf=lambda x: (2.0 / 3.0) * (-np.expm1(-x)))
        assert lhs == closed_lhs
        assert rhs == pytest.approx(closed_rhs, rel=1e-4)
        assert abs(z) <= 3 and abs(closed_z) <= 3
