import math

import numpy as np
import pytest

from switchlab.dynamics import (
    BathSpec,
    DaviesGenerator,
    LindbladGenerator,
    asymptotic_mixture,
    build_generator,
    estimate_lifetime,
    evolve,
    gibbs_state,
    relax_excited,
    relaxation_heat,
    spectral_factor,
    trace_norm_of_generator,
)
from switchlab.quantum import (
    SIGMA3,
    DensityMatrix,
    annihilation,
    coherent_state,
    embed,
    overlap,
    tensor,
    trace_distance,
)
from switchlab.switch import SwitchParams, biased_gibbs, flip_energy


def random_state(space, seed):
    r = np.random.default_rng(seed)
    g = r.standard_normal((space.dim, 3)) + 1j * r.standard_normal((space.dim, 3))
    # keep weight on low Fock levels so truncation does not matter
    n = space.factor_dims[1]
    damp = np.kron(np.ones(2), np.exp(-np.arange(n) / 3.0))
    return DensityMatrix.from_factor(damp[:, None] * g, space)


class TestSpectralFactor:
    @pytest.mark.parametrize("form", ["flat", "ohmic"])
    @pytest.mark.parametrize("T", [0.1, 1.0, 7.0])
    def test_kms(self, form, T):
        w = np.linspace(0.05, 6, 30)
        ratio = spectral_factor(-w, T, form) / spectral_factor(w, T, form)
        np.testing.assert_allclose(ratio, np.exp(-w / T), rtol=1e-10)

    def test_zero_temperature_forbids_absorption(self):
        assert spectral_factor(np.array([-1.0]), 0.0)[0] == 0.0


class TestGenerator:
    def test_detailed_balance_by_bin(self):
        p = SwitchParams(0.8, T=0.6, cutoff=30)
        g = build_generator(p, BathSpec(), include_spin_flip=True)
        freqs = g.frequencies
        checked = 0
        for b, w in enumerate(freqs):
            if w <= 1e-6:
                continue
            partner = np.flatnonzero(np.abs(freqs + w) < 1e-9)
            if partner.size == 0:
                continue
            for c in range(len(g.strengths)):
                assert g.bin_rates[c, partner[0]] / g.bin_rates[c, b] == pytest.approx(math.exp(-w / p.T), rel=1e-10)
                checked += 1
        assert checked > 10

    def test_block_form_matches_jump_form(self):
        p = SwitchParams(0.7, T=0.8, cutoff=28)
        g = build_generator(p, BathSpec(gamma_1=0.05), include_spin_flip=True)
        plain = LindbladGenerator(g.hamiltonian, g.jumps)
        rho = random_state(p.space, 1)
        np.testing.assert_allclose(g.apply(rho), plain.apply(rho), atol=1e-11)

    def test_decoupled_limit_is_textbook_damped_oscillator(self):
        T, gamma = 0.9, 0.3
        p = SwitchParams(0.0, T=T, cutoff=25)
        g = build_generator(p, BathSpec(gamma_o=gamma))
        n = p.n_levels
        nbar = 1 / math.expm1(1 / T)
        a = embed(annihilation(n), 1, p.space)
        textbook = LindbladGenerator(g.hamiltonian, [(a, 2 * gamma * (nbar + 1)), (a.conj().T, 2 * gamma * nbar)])
        rho = random_state(p.space, 2)
        np.testing.assert_allclose(g.apply(rho), textbook.apply(rho), atol=1e-11)

    def test_coherence_decay_rate(self):
        gamma, alpha = 0.4, 0.8
        p = SwitchParams(0.0, T=0.5)
        g = build_generator(p, BathSpec(gamma_o=gamma))
        osc = coherent_state(alpha, p.n_levels).density()
        up = DensityMatrix(np.diag([1.0, 0.0]))
        rho0 = tensor(up, osc)
        a = embed(annihilation(p.n_levels), 1, p.space)
        for t in (0.5, 2.0, 5.0):
            mean_a = np.trace(a @ evolve(g, rho0, t).matrix)
            expected = alpha * math.exp(-gamma * t) * np.exp(-1j * t)
            assert abs(mean_a) == pytest.approx(abs(expected), rel=1e-2)
            assert mean_a == pytest.approx(expected, rel=1e-2, abs=1e-12)

    @pytest.mark.parametrize("sector", ["+", "-"])
    @pytest.mark.parametrize("method", ["displacement", "exponential"])
    def test_biased_gibbs_stationary(self, sector, method):
        p = SwitchParams(1.0, T=0.5)
        g = build_generator(p, BathSpec())
        assert trace_norm_of_generator(g, biased_gibbs(p, sector, method).rho) < 1e-8

    def test_full_gibbs_is_unique_fixed_point_with_flip(self):
        p = SwitchParams(0.6, T=0.7)
        g = build_generator(p, BathSpec(gamma_1=0.05), include_spin_flip=True)
        assert trace_distance(g.stationary_state(), gibbs_state(p, p.T).matrix) < 1e-6

    def test_zero_temperature_branch(self):
        p = SwitchParams(0.5, T=0.0)
        g = build_generator(p, BathSpec(T=0.0))
        assert trace_norm_of_generator(g, biased_gibbs(p, "+").rho) < 1e-8


class TestEvolve:
    def test_zero_time_is_identity(self):
        p = SwitchParams(0.5, T=0.5)
        g = build_generator(p, BathSpec())
        rho = random_state(p.space, 3)
        assert evolve(g, rho, 0.0) is rho

    def test_negative_time(self):
        g = LindbladGenerator(np.eye(2))
        with pytest.raises(ValueError):
            evolve(g, DensityMatrix(np.eye(2) / 2), -1.0)

    def test_stationary_input_unchanged(self):
        p = SwitchParams(1.0, T=0.5)
        g = build_generator(p, BathSpec())
        rho = biased_gibbs(p, "-").rho
        assert trace_distance(evolve(g, rho, 7.0), rho) < 1e-8

    def test_qubit_amplitude_damping(self):
        gamma = 0.7
        sm = np.array([[0, 0], [1, 0]], dtype=complex)  # |1> -> |0> with basis (excited, ground)
        g = LindbladGenerator(np.diag([0.5, -0.5]), [(sm, gamma)])
        rho = evolve(g, DensityMatrix(np.diag([1.0, 0.0])), 1.3)
        assert rho.matrix[0, 0].real == pytest.approx(math.exp(-gamma * 1.3), rel=1e-12)

    def test_runge_kutta_path_agrees_with_exact(self):
        n = 20
        a = annihilation(n)
        g = LindbladGenerator(a.conj().T @ a, [(a, 0.5)])
        rho0 = coherent_state(1.0, n).density()
        ref = evolve(DaviesGenerator(g.hamiltonian, [a + a.conj().T], [0.5], 0.0), rho0, 1.0)
        out = evolve(g, rho0, 1.0, dt=0.1 / g.rate_bound() * 0.9)
        assert trace_distance(out, ref) < 1e-6

    def test_step_size_violation(self):
        n = 20
        a = annihilation(n)
        g = LindbladGenerator(a.conj().T @ a, [(a, 0.5)])
        with pytest.raises(ValueError):
            evolve(g, coherent_state(1.0, n).density(), 1.0, dt=1.0)

    def test_converges_to_sector_mixture(self):
        p = SwitchParams(1.0, T=0.5)
        b = BathSpec()
        g = build_generator(p, b)
        rho0 = random_state(p.space, 4)
        final = evolve(g, rho0, 20.0 / b.gamma_o)
        assert trace_distance(final, asymptotic_mixture(p, rho0)) < 1e-6

    def test_overlap_monotone_along_flow(self):
        p = SwitchParams(0.6, T=0.4, cutoff=30)
        g = build_generator(p, BathSpec(gamma_1=0.1), include_spin_flip=True)
        r1, r2 = random_state(p.space, 5), random_state(p.space, 6)
        values = [overlap(evolve(g, r1, t), evolve(g, r2, t)) for t in np.linspace(0, 4, 9)]
        assert all(b >= a - 1e-9 for a, b in zip(values, values[1:]))

    def test_spin_populations_conserved_without_flip(self):
        p = SwitchParams(0.8, T=0.5)
        g = build_generator(p, BathSpec())
        rho0 = random_state(p.space, 7)
        s3 = embed(SIGMA3, 0, p.space)
        assert evolve(g, rho0, 3.0).expect(s3) == pytest.approx(rho0.expect(s3), abs=1e-10)


class TestRelaxation:
    @pytest.mark.parametrize("D", [0.5, 1.0, 2.0])
    def test_heat_equals_flip_energy(self, D):
        p = SwitchParams(D, T=0.3)
        assert relaxation_heat(p, BathSpec()) == pytest.approx(flip_energy(p), rel=1e-2)

    def test_zero_displacement(self):
        assert relaxation_heat(SwitchParams(0.0, T=0.3), BathSpec()) == pytest.approx(0.0, abs=1e-10)

    def test_final_state(self):
        p = SwitchParams(1.0, T=0.3)
        r = relax_excited(p, BathSpec(), "-")
        assert trace_distance(r.final, biased_gibbs(p, "-").rho) < 1e-5


class TestLifetime:
    def test_unprotected_reference(self):
        est = estimate_lifetime(SwitchParams(0.0, T=0.2), BathSpec())
        assert est.ratio == pytest.approx(1.0, rel=0.05)
        # sigma3 of a bare spin relaxes at 2 gamma_1
        assert est.tau0 == pytest.approx(1 / (2 * 0.01), rel=1e-3)
        assert not est.flagged

    def test_protection_grows_with_displacement(self):
        b = BathSpec()
        r1 = estimate_lifetime(SwitchParams(0.5, T=0.2), b).ratio
        r2 = estimate_lifetime(SwitchParams(0.8, T=0.2), b).ratio
        assert 1.0 < r1 < r2
