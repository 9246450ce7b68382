import math

import numpy as np
import pytest
from scipy.integrate import quad

from ouirrev.exceptions import PotentialUndefinedError, UndefinedEntropyError
from ouirrev.model import build_model
from ouirrev.stationary import stationary_density, stationary_law
from ouirrev.transient import (
    GaussianState,
    entropy,
    free_energy,
    instantaneous_rates,
    potential,
    propagate,
    transition_density,
)

from conftest import rotational_model, thermo_corpus
from oracles import gaussian_kl

FD_STEP = 1e-4


def entropy_rate_fd(model, x0, t):
    h = FD_STEP * max(1.0, t)
    return (entropy(propagate(model, x0, t + h)) - entropy(propagate(model, x0, t - h))) / (2 * h)


class TestPropagate:
    def test_time_zero(self):
        m = rotational_model(1.0)
        state = propagate(m, [1.0, 2.0], 0.0)
        assert np.array_equal(state.mean, [1.0, 2.0])
        assert np.array_equal(state.cov, np.zeros((2, 2)))

    def test_scalar_formulas(self):
        lam, t, x0 = 1.3, 0.8, 2.0
        state = propagate(build_model([[lam]], [[1.0]]), [x0], t)
        assert state.mean[0] == pytest.approx(x0 * math.exp(-lam * t), rel=1e-12)
        assert state.cov[0, 0] == pytest.approx((1 - math.exp(-2 * lam * t)) / (2 * lam), rel=1e-12)

    def test_sweeping_growth(self, sweeping_model):
        # unstable first axis: variance integral of e^{2s} over [0, 1]
        state = propagate(sweeping_model, [0.0, 0.0], 1.0)
        assert state.cov[0, 0] == pytest.approx((math.e**2 - 1) / 2, rel=1e-12)

    def test_composition(self):
        m = rotational_model(0.8)
        x0 = np.array([1.0, -1.0])
        t, s = 0.6, 1.1
        full = propagate(m, x0, t + s)
        part = propagate(m, x0, s)
        from ouirrev.linalg import expm

        e = expm(-m.B * t)
        assert np.max(np.abs(full.mean - e @ part.mean)) < 1e-9
        cov = e @ part.cov @ e.T + propagate(m, x0, t).cov
        assert np.max(np.abs(full.cov - cov)) < 1e-9

    def test_converges_to_stationary(self):
        for m in [rotational_model(1.0), build_model([[2.0, 1.0], [1.0, 2.0]], np.eye(2))]:
            law = stationary_law(m)
            t = 25.0 / law.classification.spectrum_B.min_real_part
            state = propagate(m, [3.0, -2.0], t)
            assert np.max(np.abs(state.cov - law.Xi)) < 1e-6
            assert np.max(np.abs(state.mean)) < 1e-6

    def test_negative_time_rejected(self):
        with pytest.raises(ValueError):
            propagate(rotational_model(1.0), [0.0, 0.0], -0.5)


class TestTransitionDensity:
    def test_long_time_limit_is_stationary(self):
        m = build_model([[1.0]], [[1.0]])
        law = stationary_law(m)
        for x in (-1.0, 0.0, 0.7):
            p = transition_density(m, [x], 40.0, [5.0])
            assert p == pytest.approx(stationary_density(law, [x]), rel=1e-9)

    def test_chapman_kolmogorov_by_quadrature(self):
        m = build_model([[1.0]], [[1.0]])
        t, s, x0, x = 0.7, 0.4, 1.0, -0.3

        def integrand(y):
            return transition_density(m, [x], t, [y]) * transition_density(m, [y], s, [x0])

        val, _ = quad(integrand, -12.0, 12.0, epsabs=1e-10)
        assert val == pytest.approx(transition_density(m, [x], t + s, [x0]), abs=1e-6)

    def test_detailed_balance_symmetry_reversible(self, reversible_2d):
        law = stationary_law(reversible_2d)
        rng = np.random.default_rng(67)
        for _ in range(5):
            x, y = rng.standard_normal(2), rng.standard_normal(2)
            t = rng.uniform(0.1, 1.5)
            lhs = transition_density(reversible_2d, x, t, y) * stationary_density(law, y)
            rhs = transition_density(reversible_2d, y, t, x) * stationary_density(law, x)
            assert abs(lhs - rhs) <= 1e-9

    def test_nonpositive_time_rejected(self):
        with pytest.raises(ValueError):
            transition_density(rotational_model(1.0), [0.0, 0.0], 0.0, [0.0, 0.0])


class TestEntropy:
    def test_standard_gaussian_2d(self):
        state = GaussianState(t=1.0, mean=np.zeros(2), cov=np.eye(2))
        assert entropy(state) == pytest.approx(1 + math.log(2 * math.pi), rel=1e-14)

    def test_scaled_scalar(self):
        for c in (0.2, 1.0, 9.0):
            state = GaussianState(t=1.0, mean=np.zeros(1), cov=np.array([[c]]))
            assert entropy(state) == pytest.approx(0.5 * math.log(2 * math.pi * math.e * c), rel=1e-13)

    def test_matches_quadrature(self):
        m = build_model([[1.0]], [[1.0]])
        state = propagate(m, [2.0], 0.6)
        mu, var = state.mean[0], state.cov[0, 0]

        def neg_plogp(x):
            p = math.exp(-((x - mu) ** 2) / (2 * var)) / math.sqrt(2 * math.pi * var)
            return -p * math.log(p)

        val, _ = quad(neg_plogp, mu - 14 * math.sqrt(var), mu + 14 * math.sqrt(var), epsabs=1e-12)
        assert val == pytest.approx(entropy(state), abs=1e-8)

    def test_point_mass_is_error(self):
        state = GaussianState(t=0.0, mean=np.zeros(2), cov=np.zeros((2, 2)))
        with pytest.raises(UndefinedEntropyError):
            entropy(state)


class TestFreeEnergy:
    def test_scalar_potential(self):
        # A = 1, B = 1: U(x) = x^2 so that 2 A^{-1} b(x) = -2x = -grad U
        m = build_model([[1.0]], [[1.0]])
        assert potential(m, [2.0]) == pytest.approx(4.0, rel=1e-14)

    def test_irreversible_rejected(self):
        m = rotational_model(1.0)
        state = propagate(m, [1.0, 0.0], 1.0)
        with pytest.raises(PotentialUndefinedError):
            free_energy(m, state)

    def test_strictly_decreasing_from_point_start(self, reversible_2d):
        values = [
            free_energy(reversible_2d, propagate(reversible_2d, [2.0, 0.0], t))
            for t in np.arange(0.1, 3.1, 0.1)
        ]
        assert all(v2 < v1 for v1, v2 in zip(values, values[1:]))

    def test_stationary_state_is_minimum(self, reversible_2d):
        law = stationary_law(reversible_2d)
        stat = GaussianState(t=math.inf, mean=np.zeros(2), cov=law.Xi)
        psi_min = free_energy(reversible_2d, stat)
        for t in (0.3, 1.0, 2.5):
            state = propagate(reversible_2d, [2.0, 0.0], t)
            assert free_energy(reversible_2d, state) > psi_min - 1e-12


class TestInstantaneousRates:
    def test_stationary_consistency(self):
        for m in [rotational_model(1.0), build_model([[2.0, 1.0], [1.0, 2.0]], np.eye(2))]:
            law = stationary_law(m)
            snap = instantaneous_rates(m, GaussianState(t=1.0, mean=np.zeros(m.n), cov=law.Xi))
            assert snap.epr_t == pytest.approx(law.epr, abs=1e-9)
            assert abs(snap.entropy_rate) <= 1e-9

    def test_entropy_balance_finite_difference(self):
        for m, x0 in thermo_corpus():
            for t in (0.1, 0.5, 1.0, 2.0):
                snap = instantaneous_rates(m, propagate(m, x0, t))
                fd = entropy_rate_fd(m, x0, t)
                assert abs(fd - snap.entropy_rate) <= 1e-5

    def test_free_energy_decay_rate(self, reversible_2d):
        x0 = np.array([2.0, 0.0])
        for t in (0.2, 0.5, 1.0, 2.0):
            h = FD_STEP * max(1.0, t)
            dpsi = (
                free_energy(reversible_2d, propagate(reversible_2d, x0, t + h))
                - free_energy(reversible_2d, propagate(reversible_2d, x0, t - h))
            ) / (2 * h)
            snap = instantaneous_rates(reversible_2d, propagate(reversible_2d, x0, t))
            assert abs(dpsi + snap.epr_t) <= 1e-5

    def test_rotational_long_time_limits(self):
        m = rotational_model(1.0)
        law = stationary_law(m)
        snap = instantaneous_rates(m, propagate(m, [2.0, 0.0], 15.0))
        assert abs(snap.entropy_rate) < 1e-8
        assert snap.epr_t == pytest.approx(2.0, abs=1e-8)
        assert snap.epr_t == pytest.approx(law.epr, abs=1e-8)

    def test_snapshot_free_energy_only_when_reversible(self, reversible_2d):
        rev_snap = instantaneous_rates(reversible_2d, propagate(reversible_2d, [1.0, 1.0], 0.5))
        assert rev_snap.free_energy is not None
        rot = rotational_model(1.0)
        rot_snap = instantaneous_rates(rot, propagate(rot, [1.0, 1.0], 0.5))
        assert rot_snap.free_energy is None


class TestRelativeEntropy:
    def test_kl_to_stationary_nonincreasing(self):
        for m, x0 in thermo_corpus():
            law = stationary_law(m)
            times = np.arange(0.1, 3.0, 0.2)
            kls = []
            for t in times:
                state = propagate(m, x0, t)
                kls.append(gaussian_kl(state.mean, state.cov, np.zeros(m.n), law.Xi))
            assert all(k2 <= k1 + 1e-10 for k1, k2 in zip(kls, kls[1:]))
