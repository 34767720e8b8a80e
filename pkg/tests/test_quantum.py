import math

import numpy as np
import pytest
import scipy.linalg
from hypothesis import given
from hypothesis import strategies as st
from scipy.stats import poisson

from switchlab.quantum import (
    SIGMA1,
    SIGMA3,
    DensityMatrix,
    SpaceSpec,
    StateVector,
    TruncationError,
    binary_entropy,
    coherent_state,
    displaced_thermal_state,
    displacement,
    embed,
    minimal_cutoff,
    overlap,
    partial_trace,
    tensor,
    thermal_state,
    trace_distance,
    von_neumann_entropy,
)


def random_rho(rng, d, rank=None):
    g = rng.standard_normal((d, rank or d)) + 1j * rng.standard_normal((d, rank or d))
    m = g @ g.conj().T
    return m / np.trace(m).real


def sqrtm_fidelity(a, b):
    """Textbook oracle (Tr sqrt(sqrt(a) b sqrt(a)))^2 via scipy.linalg.sqrtm."""
    s = scipy.linalg.sqrtm(a)
    return float(np.trace(scipy.linalg.sqrtm(s @ b @ s)).real ** 2)


class TestSpaces:
    def test_dim_is_product(self):
        assert SpaceSpec((2, 3, 4)).dim == 24

    def test_rejects_zero_dim(self):
        with pytest.raises(ValueError):
            SpaceSpec((2, 0))

    def test_concatenation(self):
        assert (SpaceSpec((2,)) + SpaceSpec((5,))).factor_dims == (2, 5)


class TestDensityMatrix:
    def test_rejects_non_hermitian(self):
        with pytest.raises(ValueError):
            DensityMatrix(np.array([[0.5, 0.1], [0.0, 0.5]]))

    def test_rejects_bad_trace(self):
        with pytest.raises(ValueError):
            DensityMatrix(np.eye(2))

    def test_rejects_negative(self):
        with pytest.raises(ValueError):
            DensityMatrix(np.diag([1.1, -0.1]))

    def test_state_vector_norm_checked(self):
        with pytest.raises(ValueError):
            StateVector(np.array([1.0, 1.0]))

    def test_factor_round_trip(self, rng):
        m = random_rho(rng, 4, 2)
        f = DensityMatrix(m).get_factor()
        np.testing.assert_allclose(f @ f.conj().T, m, atol=1e-12)


class TestCoherentState:
    @pytest.mark.parametrize("alpha", [0.0, 0.7, 2.0, 1.5j])
    def test_photon_statistics_are_poissonian(self, alpha):
        psi = coherent_state(alpha, minimal_cutoff(abs(alpha)))
        probs = np.abs(psi.amplitudes) ** 2
        np.testing.assert_allclose(probs, poisson.pmf(np.arange(len(probs)), abs(alpha) ** 2), atol=1e-12)

    def test_eigenvector_of_annihilation(self):
        alpha = 1.3 - 0.4j
        n = minimal_cutoff(abs(alpha)) + 10
        psi = coherent_state(alpha, n).amplitudes
        a = np.diag(np.sqrt(np.arange(1, n)), 1)
        np.testing.assert_allclose((a @ psi)[: n - 20], alpha * psi[: n - 20], atol=1e-10)

    def test_matches_displaced_vacuum(self):
        alpha, n = 1.1, 40
        vac = np.zeros(n)
        vac[0] = 1
        np.testing.assert_allclose(displacement(alpha, n) @ vac, coherent_state(alpha, n).amplitudes, atol=1e-12)

    def test_truncation_error(self):
        with pytest.raises(TruncationError):
            coherent_state(3.0, 10)

    def test_zero_temperature_pointer_overlap(self):
        n = minimal_cutoff(2.0)
        a, b = coherent_state(1.0, n), coherent_state(-1.0, n)
        assert overlap(a.density(), b.density()) == pytest.approx(math.exp(-4.0), rel=1e-12)


class TestComposite:
    def test_partial_trace_of_product(self, rng):
        a, b = DensityMatrix(random_rho(rng, 2)), DensityMatrix(random_rho(rng, 3))
        ab = tensor(a, b)
        np.testing.assert_allclose(partial_trace(ab, [0]).matrix, a.matrix, atol=1e-14)
        np.testing.assert_allclose(partial_trace(ab, [1]).matrix, b.matrix, atol=1e-14)

    def test_partial_trace_preserves_factor(self, rng):
        a, b = DensityMatrix(random_rho(rng, 2, 1)), DensityMatrix(random_rho(rng, 3, 2))
        red = partial_trace(tensor(a, b), [1])
        f = red.get_factor()
        np.testing.assert_allclose(f @ f.conj().T, b.matrix, atol=1e-13)

    def test_embed(self):
        op = embed(SIGMA3, 0, SpaceSpec((2, 3)))
        np.testing.assert_allclose(op, np.kron(SIGMA3, np.eye(3)))


class TestOverlap:
    @given(st.integers(2, 5), st.integers(0, 2**31 - 1))
    def test_matches_sqrtm_oracle(self, d, seed):
        r = np.random.default_rng(seed)
        a, b = random_rho(r, d), random_rho(r, d)
        assert overlap(DensityMatrix(a), DensityMatrix(b)) == pytest.approx(sqrtm_fidelity(a, b), abs=1e-9)

    @given(st.integers(2, 5), st.integers(0, 2**31 - 1))
    def test_symmetric(self, d, seed):
        r = np.random.default_rng(seed)
        a, b = DensityMatrix(random_rho(r, d)), DensityMatrix(random_rho(r, d))
        assert overlap(a, b) == pytest.approx(overlap(b, a), abs=1e-12)

    def test_pure_states(self, rng):
        u = rng.standard_normal(3) + 1j * rng.standard_normal(3)
        v = rng.standard_normal(3) + 1j * rng.standard_normal(3)
        u, v = u / np.linalg.norm(u), v / np.linalg.norm(v)
        expected = abs(np.vdot(u, v)) ** 2
        assert overlap(StateVector(u), StateVector(v)) == pytest.approx(expected, abs=1e-12)

    def test_space_mismatch(self):
        with pytest.raises(ValueError):
            overlap(DensityMatrix(np.eye(2) / 2), DensityMatrix(np.eye(3) / 3))

    @pytest.mark.parametrize("D,T", [(0.5, 0.25), (1.0, 1.0), (2.0, 0.25)])
    def test_gaussian_overlap_tiny_values(self, D, T):
        n = 60 + int(10 * D * D)
        a = displaced_thermal_state(D, n, T)
        b = displaced_thermal_state(-D, n, T)
        expected = math.exp(-4 * D * D * math.tanh(1 / (2 * T)))
        assert overlap(a, b) == pytest.approx(expected, rel=1e-6)


class TestEntropy:
    def test_maximally_mixed(self):
        assert von_neumann_entropy(np.eye(4) / 4) == pytest.approx(math.log(4), abs=1e-14)

    def test_pure_is_zero(self):
        assert von_neumann_entropy(np.diag([1.0, 0.0])) == 0.0

    @given(st.floats(0.0, 1.0))
    def test_binary_matches_diagonal_state(self, p):
        assert binary_entropy(p) == pytest.approx(von_neumann_entropy(np.diag([p, 1 - p])), abs=1e-10)

    def test_binary_out_of_range(self):
        with pytest.raises(ValueError):
            binary_entropy(1.5)

    def test_thermal_entropy(self):
        # Bose gas oracle: S = (n+1) ln(n+1) - n ln n
        T = 1.3
        nbar = 1 / math.expm1(1 / T)
        expected = (nbar + 1) * math.log(nbar + 1) - nbar * math.log(nbar)
        assert von_neumann_entropy(thermal_state(200, T)) == pytest.approx(expected, rel=1e-10)


def test_trace_distance_orthogonal():
    assert trace_distance(np.diag([1.0, 0]), np.diag([0, 1.0])) == pytest.approx(1.0)


def test_conjugation_preserves_spectrum(rng):
    rho = DensityMatrix(random_rho(rng, 2))
    out = rho.conjugate_by(SIGMA1)
    np.testing.assert_allclose(np.linalg.eigvalsh(out.matrix), np.linalg.eigvalsh(rho.matrix), atol=1e-14)
