import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from switchlab.bounds import (
    LN2,
    Ensemble,
    bloch_state,
    computation_cost,
    depolarize_qubit,
    double_well_demo,
    encode_work,
    equator_ensemble,
    holevo_bound,
    landauer_comparison,
    max_lifetime,
    noisy_holevo_bound,
)
from switchlab.quantum import DensityMatrix, StateVector, binary_entropy
from switchlab.switch import SwitchParams, barrier_energy, noise_temperature, overlap_analytic

eps_open = st.floats(1e-6, 0.5 - 1e-6)


def random_pure_ensemble(seed, n):
    r = np.random.default_rng(seed)
    states = []
    for _ in range(n):
        v = r.standard_normal(2) + 1j * r.standard_normal(2)
        states.append(StateVector(v / np.linalg.norm(v)))
    w = r.random(n)
    return Ensemble(tuple(states), tuple(w / w.sum()))


class TestEncoding:
    def test_unit(self):
        assert encode_work(math.exp(-1), 1.0) == pytest.approx(1.0, abs=1e-15)

    def test_high_temperature_limit(self):
        p = SwitchParams(0.3, T=500.0)
        assert encode_work(0.1, noise_temperature(p)) == pytest.approx(500 * math.log(10), rel=1e-6)

    @pytest.mark.parametrize("D,T", [(0.5, 0.25), (1, 1), (2, 4), (0.5, 0)])
    def test_equals_barrier_at_switch_error(self, D, T):
        p = SwitchParams(D, T=T)
        assert encode_work(overlap_analytic(p), noise_temperature(p)) == pytest.approx(barrier_energy(p), rel=1e-12)

    def test_range(self):
        for bad in (0.0, 0.6, -1.0):
            with pytest.raises(ValueError):
                encode_work(bad, 1.0)

    def test_landauer(self):
        r = landauer_comparison(0.5 - 1e-12, 1.0, 1.0)
        assert r.ratio == pytest.approx(1.0, rel=1e-9)


class TestLifetime:
    def test_values(self):
        assert max_lifetime(0.5, 1.0) == 2.0
        assert max_lifetime(0.01, 3.0) == pytest.approx(300.0)
        assert math.isinf(max_lifetime(0.0, 1.0))

    @given(eps_open, st.floats(0.1, 10))
    def test_consistent_with_encode_work(self, eps, theta):
        assert encode_work(eps, theta) == pytest.approx(theta * math.log(max_lifetime(eps, 2.0) / 2.0), rel=1e-12)

    def test_kramers_identity(self):
        p = SwitchParams(1.1, T=0.4)
        eps = overlap_analytic(p)
        assert math.exp(barrier_energy(p) / noise_temperature(p)) == pytest.approx(max_lifetime(eps, 1.0), rel=1e-12)


class TestCost:
    def test_long_computation(self):
        assert computation_cost(1e20, 1.0).ratio == pytest.approx(46.0517, abs=1e-4)

    def test_two_steps(self):
        assert computation_cost(2, 1.0).value == pytest.approx(2 * LN2)

    def test_zero_temperature_floor(self):
        theta = noise_temperature(SwitchParams(1.0))
        assert computation_cost(100, theta).value == pytest.approx(0.5 * 100 * math.log(100))

    def test_superlinear(self):
        n = np.logspace(0.5, 25, 50)
        per_step = [computation_cost(x, 1.0).value / x for x in n]
        assert np.all(np.diff(per_step) > 0)

    def test_confidence_term(self):
        base = computation_cost(1e6, 1.0).value
        assert computation_cost(1e6, 1.0, confidence=0.01).value == pytest.approx(base + 1e6 * math.log(100))

    def test_small_n(self):
        with pytest.raises(ValueError):
            computation_cost(1, 1.0)


class TestHolevo:
    def test_orthogonal_pair(self):
        e = Ensemble.uniform([StateVector(np.array([1, 0])), StateVector(np.array([0, 1]))])
        assert holevo_bound(e) == pytest.approx(LN2, abs=1e-14)

    def test_single_state(self):
        assert holevo_bound(Ensemble.uniform([bloch_state(0.3, 1.0)])) == pytest.approx(0.0, abs=1e-14)

    def test_equator(self):
        e = equator_ensemble(4)
        np.testing.assert_allclose(e.average().matrix, np.eye(2) / 2, atol=1e-15)
        assert holevo_bound(e) == pytest.approx(LN2, abs=1e-14)

    def test_noisy_orthogonal_pair(self):
        e = Ensemble.uniform([StateVector(np.array([1, 0])), StateVector(np.array([0, 1]))])
        r = noisy_holevo_bound(e, 0.1)
        assert r.value == pytest.approx(0.3681, abs=1e-4)
        assert r.value == pytest.approx(LN2 - binary_entropy(0.1), abs=1e-14)

    def test_noise_limits(self):
        e = equator_ensemble(3)
        assert noisy_holevo_bound(e, 0.0).value == pytest.approx(holevo_bound(e), abs=1e-14)
        assert noisy_holevo_bound(e, 0.5).value == pytest.approx(0.0, abs=1e-14)

    @given(st.integers(0, 10**6), st.integers(1, 5), st.floats(0, 0.5))
    def test_bounded_and_decreasing(self, seed, n, eps):
        e = random_pure_ensemble(seed, n)
        h = holevo_bound(e)
        r = noisy_holevo_bound(e, eps)
        assert 0 <= r.value <= h + 1e-12
        assert h <= LN2 + 1e-12
        assert r.value <= r.bound + 1e-12

    def test_non_qubit_rejected(self):
        e = Ensemble.uniform([DensityMatrix(np.eye(3) / 3)])
        with pytest.raises(ValueError):
            noisy_holevo_bound(e, 0.1)

    def test_depolarize_map(self):
        rho = bloch_state(0.0, 0.0).density()
        np.testing.assert_allclose(depolarize_qubit(rho, 0.1).matrix, np.diag([0.9, 0.1]))

    def test_bad_probabilities(self):
        with pytest.raises(ValueError):
            Ensemble((bloch_state(0, 0),), (0.5,))

    @given(st.floats(0, 0.5))
    def test_complementarity(self, eps):
        assert (LN2 - binary_entropy(eps)) + binary_entropy(eps) == pytest.approx(LN2, abs=1e-15)


class TestDoubleWell:
    def test_report(self):
        r = double_well_demo(200.0, 1.0)
        assert r.entropy == pytest.approx(LN2, abs=1e-12)
        assert r.decomposition_mismatch < 1e-15
        assert r.free_energy_excess == pytest.approx(200 * LN2, rel=1e-12)
        assert r.extractable_work == pytest.approx(200 * LN2, rel=1e-12)
        assert 0 < r.gibbs_entropy_deficit < 1e-5

    def test_requires_high_temperature(self):
        with pytest.raises(ValueError):
            double_well_demo(1.0, 1.0)
