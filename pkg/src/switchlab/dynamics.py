"""Weak-coupling (Davies) dynamics of the switch in a thermal bath.

The bath couples to the oscillator through (a + a^dag) and, optionally, to the
spin through sigma1.  Each coupling operator is split into eigenoperators of
the truncated switch Hamiltonian; emission and absorption at Bohr frequency
Omega obey the KMS ratio exp(-Omega / T).

Because the generator commutes with [H, .], it is block diagonal in the Bohr
frequency of the density-matrix element.  :class:`DaviesGenerator` assembles
these blocks in the energy eigenbasis and propagates each one with an exact
matrix exponential, so very slow spin-flip processes (lifetimes of 1e4 to 1e6
in units of 1/gamma) can be integrated without stiffness problems.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property

import numpy as np
import scipy.linalg
from scipy.integrate import solve_ivp

from . import _kernels
from .quantum import SIGMA1, SIGMA3, DensityMatrix, annihilation, embed, trace_distance
from .switch import (
    SwitchParams,
    SwitchState,
    biased_gibbs,
    build_hamiltonian,
    excited_state,
    mean_energy,
)

BOHR_TOL = 1e-9
EXACT_SUPEROP_DIM = 256


class ConvergenceError(RuntimeError):
    pass


@dataclass(frozen=True)
class BathSpec:
    """Bath parameters.

    ``gamma_o`` is the amplitude damping rate of the decoupled oscillator
    (<a> ~ exp(-gamma_o t)); ``gamma_1`` is the spin-flip rate at zero Bohr
    frequency, so an unprotected spin depolarises as exp(-2 gamma_1 t).
    ``T=None`` takes the temperature from the switch parameters.
    """

    gamma_o: float = 1.0
    gamma_1: float = 0.01
    T: float | None = None
    spectral: str = "flat"

    def __post_init__(self):
        if self.gamma_o <= 0 or self.gamma_1 < 0:
            raise ValueError("rates must be positive")
        if self.T is not None and self.T < 0:
            raise ValueError("temperature must be non-negative")
        if self.spectral not in ("flat", "ohmic"):
            raise ValueError(f"unknown spectral density {self.spectral!r}")

    def temperature(self, p: SwitchParams) -> float:
        return p.T if self.T is None else self.T


def spectral_factor(omega: np.ndarray, temperature: float, form: str = "flat",
                    omega0: float = 1.0) -> np.ndarray:
    """Relative rate of a transition releasing energy ``omega`` into the bath.

    flat:  1 for omega >= 0, exp(omega / T) for omega < 0
    ohmic: (omega / omega0) / (1 - exp(-omega / T)), T / omega0 at omega = 0
    Both satisfy f(-w) = exp(-w / T) f(w).
    """
    w = np.asarray(omega, dtype=float)
    if form == "flat":
        if temperature <= 0:
            return np.where(w >= 0, 1.0, 0.0)
        return np.where(w >= 0, 1.0, np.exp(np.minimum(w, 0.0) / temperature))
    if temperature <= 0:
        return np.maximum(w, 0.0) / omega0
    x = w / temperature
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        val = np.where(np.abs(x) < 1e-12, temperature / omega0, (w / omega0) / -np.expm1(-x))
    return np.where(np.isfinite(val), val, 0.0)


# ---------------------------------------------------------------------------
# Generic Lindblad generator
# ---------------------------------------------------------------------------


class LindbladGenerator:
    """L(rho) = -i[H, rho] + sum_k g_k (A_k rho A_k^dag - {A_k^dag A_k, rho} / 2)."""

    def __init__(self, hamiltonian, jumps=()):
        self.hamiltonian = np.asarray(hamiltonian, dtype=complex)
        self._jumps = tuple((np.asarray(a, dtype=complex), float(g)) for a, g in jumps)

    @property
    def jumps(self):
        return self._jumps

    @property
    def dim(self) -> int:
        return self.hamiltonian.shape[0]

    def apply(self, rho) -> np.ndarray:
        r = rho.matrix if isinstance(rho, DensityMatrix) else np.asarray(rho)
        h = self.hamiltonian
        out = -1j * (h @ r - r @ h)
        for a, g in self.jumps:
            ad = a.conj().T
            ada = ad @ a
            out += g * (a @ r @ ad - 0.5 * (ada @ r + r @ ada))
        return out

    def superoperator(self) -> np.ndarray:
        """Matrix acting on row-major vec(rho)."""
        n = self.dim
        eye = np.eye(n)
        h = self.hamiltonian
        s = -1j * (np.kron(h, eye) - np.kron(eye, h.T))
        for a, g in self.jumps:
            ada = a.conj().T @ a
            s += g * (np.kron(a, a.conj()) - 0.5 * np.kron(ada, eye) - 0.5 * np.kron(eye, ada.T))
        return s

    def rate_bound(self) -> float:
        """Upper bound on the magnitude of any generator eigenvalue."""
        b = 2.0 * np.linalg.norm(self.hamiltonian, 2)
        for a, g in self.jumps:
            b += 2.0 * abs(g) * np.linalg.norm(a, 2) ** 2
        return float(b)


# ---------------------------------------------------------------------------
# Davies generator in the eigenbasis
# ---------------------------------------------------------------------------


def _cluster(values: np.ndarray, tol: float):
    """Group sorted-adjacent values closer than ``tol``; return (labels, centres)."""
    order = np.argsort(values, kind="stable")
    sorted_vals = values[order]
    breaks = np.concatenate([[True], np.diff(sorted_vals) > tol])
    group = np.cumsum(breaks) - 1
    labels = np.empty(values.size, dtype=np.int64)
    labels[order] = group
    centres = np.bincount(group, weights=sorted_vals) / np.bincount(group)
    return labels, centres


class DaviesGenerator(LindbladGenerator):
    """Davies generator built from coupling operators and their bath strengths."""

    def __init__(self, hamiltonian, couplings, strengths, temperature, spectral="flat",
                 omega0=1.0, tol=BOHR_TOL):
        h = np.asarray(hamiltonian, dtype=complex)
        self.hamiltonian = 0.5 * (h + h.conj().T)
        self.temperature = float(temperature)
        self.spectral = spectral
        self.omega0 = float(omega0)
        energies, basis = np.linalg.eigh(self.hamiltonian)
        self.energies = energies
        self.basis = basis

        level, level_e = _cluster(energies, tol)
        self.level = level
        self.level_energies = level_e
        bohr = level_e[:, None] - level_e[None, :]
        lab_lv, centres = _cluster(bohr.ravel(), tol)
        centres[lab_lv[np.argmin(np.abs(bohr.ravel()))]] = 0.0
        lab_lv = lab_lv.reshape(bohr.shape)
        # labels[j, i]: bin of E_j - E_i for eigenstates j, i
        self.labels = np.ascontiguousarray(lab_lv[level[:, None], level[None, :]])
        self.frequencies = centres

        vd = basis.conj().T
        self.couplings = np.ascontiguousarray(
            np.stack([vd @ np.asarray(a, dtype=complex) @ basis for a in couplings]))
        self.strengths = np.asarray(strengths, dtype=float)
        factor = spectral_factor(centres, self.temperature, spectral, self.omega0)
        self.bin_rates = self.strengths[:, None] * factor[None, :]
        self.rates = np.ascontiguousarray(self.bin_rates[:, self.labels])

    @property
    def dim(self) -> int:
        return self.energies.size

    @cached_property
    def decay(self) -> np.ndarray:
        """sum over bins of rate * A_w^dag A_w, in the eigenbasis."""
        return _kernels.decay_matrix(self.couplings, self.rates, self.labels)

    @cached_property
    def blocks(self):
        """List of (rows, cols, L_block) covering every density-matrix element."""
        flat = self.labels.ravel()
        order = np.argsort(flat, kind="stable")
        bounds = np.flatnonzero(np.diff(flat[order])) + 1
        out = []
        n = self.dim
        for idx in np.split(order, bounds):
            rows = (idx // n).astype(np.int64)
            cols = (idx % n).astype(np.int64)
            mat = _kernels.davies_block(rows, cols, self.energies, self.couplings,
                                        self.rates, self.labels, self.decay)
            out.append((rows, cols, mat))
        return out

    @cached_property
    def jumps(self):
        """Eigenoperators A_w (original basis) with their rates; built on demand."""
        out = []
        v, vd = self.basis, self.basis.conj().T
        for c in range(self.couplings.shape[0]):
            for b in np.unique(self.labels):
                rate = self.bin_rates[c, b]
                if rate == 0.0:
                    continue
                a_w = np.where(self.labels.T == b, self.couplings[c], 0.0)
                if not np.any(a_w):
                    continue
                out.append((v @ a_w @ vd, float(rate)))
        return tuple(out)

    def to_eigenbasis(self, rho) -> np.ndarray:
        r = rho.matrix if isinstance(rho, DensityMatrix) else np.asarray(rho)
        return self.basis.conj().T @ r @ self.basis

    def from_eigenbasis(self, r) -> np.ndarray:
        return self.basis @ r @ self.basis.conj().T

    def apply(self, rho) -> np.ndarray:
        r = self.to_eigenbasis(rho)
        out = np.zeros_like(r)
        for rows, cols, mat in self.blocks:
            out[rows, cols] = mat @ r[rows, cols]
        return self.from_eigenbasis(out)

    def propagate(self, rho, t: float, blocks=None) -> np.ndarray:
        """exp(t L) rho using exact block exponentials; returns a matrix."""
        r = self.to_eigenbasis(rho)
        out = np.zeros_like(r)
        for rows, cols, mat in (self.blocks if blocks is None else blocks):
            out[rows, cols] = scipy.linalg.expm(t * mat) @ r[rows, cols]
        return self.from_eigenbasis(out)

    def expectation_trajectory(self, rho, times, observable) -> np.ndarray:
        """Tr(O rho(t)) on the grid ``times`` (sorted, >= 0), evolving only relevant blocks."""
        times = np.asarray(times, dtype=float)
        if np.any(np.diff(times) < 0) or times[0] < 0:
            raise ValueError("times must be sorted and non-negative")
        o = self.basis.conj().T @ np.asarray(observable, dtype=complex) @ self.basis
        r0 = self.to_eigenbasis(rho)
        used = [(rows, cols, mat) for rows, cols, mat in self.blocks
                if np.any(np.abs(o[cols, rows]) > 0)]
        values = np.zeros(times.size)
        for rows, cols, mat in used:
            weights = o[cols, rows]
            vec = scipy.linalg.expm(times[0] * mat) @ r0[rows, cols]
            step_cache = {}
            values[0] += np.real(weights @ vec)
            for k in range(1, times.size):
                dt = times[k] - times[k - 1]
                key = round(dt, 12)
                if key not in step_cache:
                    step_cache[key] = scipy.linalg.expm(dt * mat)
                vec = step_cache[key] @ vec
                values[k] += np.real(weights @ vec)
        return values

    def stationary_state(self) -> np.ndarray:
        """Null vector of the zero-frequency block, as a unit-trace matrix."""
        n = self.dim
        zero_bin = self.labels[0, 0]
        for rows, cols, mat in self.blocks:
            if self.labels[rows[0], cols[0]] == zero_bin:
                break
        w, vecs = np.linalg.eig(mat)
        k = int(np.argmin(np.abs(w)))
        r = np.zeros((n, n), dtype=complex)
        r[rows, cols] = vecs[:, k]
        r = self.from_eigenbasis(r)
        r = 0.5 * (r + r.conj().T)
        return r / np.trace(r).real

    def rate_bound(self) -> float:
        return float(max(np.max(np.abs(np.linalg.eigvals(m))) for _, _, m in self.blocks))


# ---------------------------------------------------------------------------
# Switch-specific construction
# ---------------------------------------------------------------------------


def oscillator_strength(b: BathSpec, temperature: float, omega0: float) -> float:
    """Coupling strength giving an amplitude damping rate gamma_o for the bare oscillator."""
    f = spectral_factor(np.array([omega0, -omega0]), temperature, b.spectral, omega0)
    return 2.0 * b.gamma_o / float(f[0] - f[1])


def spin_strength(b: BathSpec, temperature: float, omega0: float) -> float:
    """Coupling strength giving rate gamma_1 at zero Bohr frequency."""
    f0 = float(spectral_factor(np.array([0.0]), temperature, b.spectral, omega0)[0])
    if f0 == 0.0:
        return b.gamma_1
    return b.gamma_1 / f0


def build_generator(p: SwitchParams, b: BathSpec, include_spin_flip: bool = False) -> DaviesGenerator:
    """Davies generator for the switch coupled through (a + a^dag) and optionally sigma1.

    At T = 0 only energy-lowering eigenoperators (and zero-frequency ones) survive.
    """
    temp = b.temperature(p)
    n = p.n_levels
    a = annihilation(n)
    couplings = [embed(a + a.conj().T, 1, p.space)]
    strengths = [oscillator_strength(b, temp, p.omega0)]
    if include_spin_flip:
        couplings.append(embed(SIGMA1, 0, p.space))
        strengths.append(spin_strength(b, temp, p.omega0))
    return DaviesGenerator(build_hamiltonian(p), couplings, strengths, temp, b.spectral, p.omega0)


# ---------------------------------------------------------------------------
# Integration
# ---------------------------------------------------------------------------


def _finish(rho0: DensityMatrix, r: np.ndarray, tol: float = 1e-8) -> DensityMatrix:
    r = 0.5 * (r + r.conj().T)
    tr = np.trace(r).real
    if abs(tr - 1.0) > tol:
        raise ConvergenceError(f"trace drifted to {tr!r}")
    lo = np.linalg.eigvalsh(r)[0]
    if lo < -tol:
        raise ConvergenceError(f"state lost positivity (eigenvalue {lo:.3e})")
    return DensityMatrix(r / tr, rho0.space)


def evolve(g: LindbladGenerator, rho0: DensityMatrix, t: float, dt: float | None = None) -> DensityMatrix:
    """State at time ``t`` under ``g``.

    Davies generators and generators with Hilbert dimension <= 16 are propagated
    exactly by matrix exponentials (``dt`` is ignored).  Otherwise an adaptive
    RK45 integration with maximal step ``dt`` is used; this requires
    ``dt * rate_bound < 0.1``.

    Raises:
        ValueError: if ``t < 0`` or the step-size condition is violated.
        ConvergenceError: if the integrator fails or trace/positivity drift beyond 1e-8.
    """
    if t < 0:
        raise ValueError("t must be non-negative")
    if t == 0:
        return rho0
    if isinstance(g, DaviesGenerator):
        return _finish(rho0, g.propagate(rho0, t))
    n = g.dim
    vec0 = rho0.matrix.reshape(-1)
    if n * n <= EXACT_SUPEROP_DIM:
        vec = scipy.linalg.expm(t * g.superoperator()) @ vec0
        return _finish(rho0, vec.reshape(n, n))
    if dt is None or dt <= 0:
        raise ValueError("a positive step dt is required for the Runge-Kutta path")
    bound = g.rate_bound()
    if dt * bound >= 0.1:
        raise ValueError(f"step dt={dt} too coarse: dt * rate = {dt * bound:.3g} >= 0.1")

    def rhs(_, y):
        return g.apply(y.reshape(n, n)).reshape(-1)

    sol = solve_ivp(rhs, (0.0, t), vec0.astype(complex), method="RK45", max_step=dt,
                    rtol=1e-10, atol=1e-12)
    if not sol.success:
        raise ConvergenceError(sol.message)
    return _finish(rho0, sol.y[:, -1].reshape(n, n))


def trace_norm_of_generator(g: LindbladGenerator, rho) -> float:
    """||L(rho)||_1."""
    return float(np.sum(np.linalg.svd(g.apply(rho), compute_uv=False)))


# ---------------------------------------------------------------------------
# Physical procedures
# ---------------------------------------------------------------------------


def sector_populations(rho: DensityMatrix) -> tuple[float, float]:
    s3 = embed(SIGMA3, 0, rho.space)
    m = rho.expect(s3)
    return 0.5 * (1 + m), 0.5 * (1 - m)


def asymptotic_mixture(p: SwitchParams, rho0: DensityMatrix) -> DensityMatrix:
    """p_+ rho^(+) + p_- rho^(-) with p_+- the initial spin-sector populations."""
    pp, pm = sector_populations(rho0)
    m = pp * biased_gibbs(p, "+").rho.matrix + pm * biased_gibbs(p, "-").rho.matrix
    return DensityMatrix(m, p.space)


@dataclass(frozen=True)
class Relaxation:
    heat: float
    final: DensityMatrix
    time: float


def relax_excited(p: SwitchParams, b: BathSpec, sector: str = "-", tol: float = 1e-12,
                  max_time: float | None = None) -> Relaxation:
    """Relax the spin-flipped state in ``sector`` with the flip coupling off.

    The evolution time is doubled from 10 / gamma_o until the mean energy
    changes by less than ``tol`` (absolute).
    """
    g = build_generator(p, b, include_spin_flip=False)
    start = excited_state(p, sector)
    h = g.hamiltonian
    e0 = start.rho.expect(h)
    t = 10.0 / b.gamma_o
    max_time = max_time or 1e4 / b.gamma_o
    prev = evolve(g, start.rho, t)
    while True:
        t2 = 2 * t
        cur = evolve(g, start.rho, t2)
        if abs(cur.expect(h) - prev.expect(h)) < tol:
            return Relaxation(e0 - cur.expect(h), cur, t2)
        if t2 > max_time:
            raise ConvergenceError("relaxation did not converge")
        prev, t = cur, t2


def relaxation_heat(p: SwitchParams, b: BathSpec, sector: str = "-") -> float:
    """Energy released while the excited state relaxes into the new switch position."""
    return relax_excited(p, b, sector).heat


@dataclass(frozen=True)
class LifetimeEstimate:
    tau: float
    tau0: float
    fit_error: float
    flagged: bool = False
    iterations: int = 0

    def __post_init__(self):
        if not (self.tau > 0 and self.tau0 > 0):
            raise ValueError("lifetimes must be positive")

    @property
    def ratio(self) -> float:
        return self.tau / self.tau0


def polarization_lifetime(p: SwitchParams, b: BathSpec, samples: int = 41,
                          rtol: float = 1e-6, max_iter: int = 30) -> tuple[float, float, int]:
    """Decay time of <sigma3>(t) starting from rho^(+), with the spin flip on.

    Returns ``(tau, rms_log_residual, iterations)``.  The tail window
    [0.2 tau, 3 tau] is refitted until tau is self-consistent.
    """
    g = build_generator(p, b, include_spin_flip=True)
    rho0 = biased_gibbs(p, "+").rho
    s3 = embed(SIGMA3, 0, p.space)

    # initial estimate: first doubling time where the polarisation falls below 1/e
    t = 0.25 / max(b.gamma_1, 1e-300)
    while True:
        m = g.expectation_trajectory(rho0, [t], s3)[0]
        if m < math.exp(-1.0):
            break
        t *= 2.0
        if t > 1e12:
            raise ConvergenceError("polarisation does not decay")
    tau = t / -math.log(max(m, 1e-300))

    resid = float("nan")
    for it in range(1, max_iter + 1):
        times = np.linspace(0.2 * tau, 3.0 * tau, samples)
        y = g.expectation_trajectory(rho0, times, s3)
        if np.any(y <= 0):
            raise ConvergenceError("polarisation changed sign inside the fit window")
        slope, intercept = np.polyfit(times, np.log(y), 1)
        resid = float(np.sqrt(np.mean((np.log(y) - (slope * times + intercept)) ** 2)))
        new = -1.0 / slope
        if abs(new - tau) <= rtol * tau:
            return new, resid, it
        tau = new
    return tau, resid, max_iter


def estimate_lifetime(p: SwitchParams, b: BathSpec, flag_threshold: float = 1e-3) -> LifetimeEstimate:
    """Lifetime of the encoded bit and the unprotected reference (same procedure at D = 0)."""
    tau, err, iters = polarization_lifetime(p, b)
    ref = SwitchParams(0.0, p.omega0, p.T)
    tau0, err0, _ = polarization_lifetime(ref, b)
    fit_error = max(err, err0)
    return LifetimeEstimate(tau, tau0, fit_error, fit_error > flag_threshold, iters)


def is_stationary(p: SwitchParams, b: BathSpec, state: SwitchState, tol: float = 1e-8) -> bool:
    g = build_generator(p, b, include_spin_flip=False)
    return trace_norm_of_generator(g, state.rho) < tol


def gibbs_state(p: SwitchParams, temperature: float) -> DensityMatrix:
    h = build_hamiltonian(p)
    e, v = np.linalg.eigh(h)
    w = np.exp(-(e - e[0]) / temperature)
    w /= w.sum()
    return DensityMatrix.from_factor(v * np.sqrt(w), p.space)


def distance_to_mixture(p: SwitchParams, b: BathSpec, rho0: DensityMatrix, t: float) -> float:
    g = build_generator(p, b, include_spin_flip=False)
    return trace_distance(evolve(g, rho0, t), asymptotic_mixture(p, rho0))
