"""Spin-oscillator switch: Hamiltonian, stable states, overlaps and energetics.

Units: hbar = k_B = 1.  ``T`` is the bath temperature in energy units, so the
ratio ``T / omega0`` is the usual k_B T / (hbar omega0).  The joint space is
ordered spin (dim 2, index 0 = sigma3 eigenvalue +1) tensor oscillator.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .quantum import (
    SIGMA1,
    SIGMA3,
    DensityMatrix,
    SpaceSpec,
    TruncationError,
    adaptive,
    annihilation,
    coherent_state,
    default_cutoff,
    displaced_thermal_state,
    embed,
    mean_occupation,
    minimal_cutoff,
    overlap,
    partial_trace,
    tensor,
)

SECTORS = ("+", "-")


def _sign(sector: str) -> int:
    if sector == "+":
        return 1
    if sector == "-":
        return -1
    raise ValueError(f"sector must be '+' or '-', got {sector!r}")


def _flip(sector: str) -> str:
    return "-" if _sign(sector) > 0 else "+"


@dataclass(frozen=True)
class SwitchParams:
    """Switch parameters.

    ``cutoff=None`` selects ceil(D^2 + 10 D + 20 + 10 nbar(T)).
    """

    D: float
    omega0: float = 1.0
    T: float = 0.0
    cutoff: int | None = None

    def __post_init__(self):
        if self.D < 0:
            raise ValueError(f"displacement D must be non-negative, got {self.D}")
        if self.omega0 <= 0:
            raise ValueError(f"omega0 must be positive, got {self.omega0}")
        if self.T < 0:
            raise ValueError(f"temperature must be non-negative, got {self.T}")
        if self.cutoff is not None and self.cutoff < minimal_cutoff(self.D):
            raise TruncationError(
                f"cutoff {self.cutoff} below the adequacy threshold {minimal_cutoff(self.D)}"
                f" for D={self.D}"
            )

    @property
    def n_levels(self) -> int:
        if self.cutoff is not None:
            return int(self.cutoff)
        return default_cutoff(self.D, self.T, self.omega0)

    @property
    def space(self) -> SpaceSpec:
        return SpaceSpec((2, self.n_levels))

    @property
    def nbar(self) -> float:
        return mean_occupation(self.T, self.omega0)

    def with_cutoff(self, cutoff: int) -> SwitchParams:
        return SwitchParams(self.D, self.omega0, self.T, cutoff)


@dataclass(frozen=True)
class SwitchState:
    rho: DensityMatrix
    sector: str

    def __post_init__(self):
        if self.sector not in ("+", "-", "mixed"):
            raise ValueError(f"unknown sector label {self.sector!r}")
        if self.rho.space.factor_dims[0] != 2 or len(self.rho.space) != 2:
            raise ValueError("switch states live on spin x oscillator")
        if self.sector != "mixed":
            spin = partial_trace(self.rho, [0]).matrix
            target = np.zeros((2, 2))
            target[0 if self.sector == "+" else 1, 0 if self.sector == "+" else 1] = 1.0
            if np.max(np.abs(spin - target)) > 1e-9:
                raise ValueError(f"spin marginal is not |{self.sector}><{self.sector}|")


# ---------------------------------------------------------------------------
# Operators
# ---------------------------------------------------------------------------


def position_operator(cutoff: int) -> np.ndarray:
    """Dimensionless position (a + a^dag) / 2."""
    a = annihilation(cutoff)
    return 0.5 * (a + a.conj().T)


def build_hamiltonian(p: SwitchParams) -> np.ndarray:
    """omega0 [a^dag a - D (a^dag + a) sigma3] on the truncated joint space."""
    n = p.n_levels
    a = annihilation(n)
    num = a.conj().T @ a
    x2 = a + a.conj().T
    h = p.omega0 * (np.kron(np.eye(2), num) - p.D * np.kron(SIGMA3, x2))
    return 0.5 * (h + h.conj().T)


def sector_hamiltonian(p: SwitchParams, sector: str) -> np.ndarray:
    """Oscillator block of H for a definite spin sector."""
    n = p.n_levels
    a = annihilation(n)
    return p.omega0 * (a.conj().T @ a - _sign(sector) * p.D * (a + a.conj().T))


def spin_flip_operator(p: SwitchParams) -> np.ndarray:
    return embed(SIGMA1, 0, p.space)


def mean_energy(p: SwitchParams, state) -> float:
    rho = state.rho if isinstance(state, SwitchState) else state
    return rho.expect(build_hamiltonian(p))


# ---------------------------------------------------------------------------
# States
# ---------------------------------------------------------------------------


def _spin_state(sector: str) -> DensityMatrix:
    v = np.zeros(2, dtype=complex)
    v[0 if _sign(sector) > 0 else 1] = 1.0
    return DensityMatrix(np.outer(v, v), factor=v[:, None])


def ground_states(p: SwitchParams) -> tuple[SwitchState, SwitchState]:
    """The degenerate ground states |+; +D> and |-; -D>."""
    n = p.n_levels
    out = []
    for sector in SECTORS:
        osc = coherent_state(_sign(sector) * p.D, n).density()
        out.append(SwitchState(tensor(_spin_state(sector), osc), sector))
    return tuple(out)


def _gibbs_by_exponential(p: SwitchParams, sector: str) -> DensityMatrix:
    """Normalised exp(-H_sector / T) on the truncated oscillator space."""
    e, v = np.linalg.eigh(sector_hamiltonian(p, sector))
    w = np.exp(-(e - e[0]) / p.T)
    w /= w.sum()
    keep = w > 1e-300
    return DensityMatrix.from_factor(v[:, keep] * np.sqrt(w[keep]))


def biased_gibbs(p: SwitchParams, sector: str, method: str = "displacement") -> SwitchState:
    """Stable state of one switch position: |s><s| tensor displaced thermal oscillator.

    ``method="displacement"`` conjugates the truncated thermal state by the
    displacement operator; ``method="exponential"`` exponentiates the sector
    Hamiltonian directly.  At ``T = 0`` the ground-state projector is returned.
    """
    if p.T == 0:
        return ground_states(p)[0 if _sign(sector) > 0 else 1]
    if method == "displacement":
        osc = displaced_thermal_state(_sign(sector) * p.D, p.n_levels, p.T, p.omega0)
    elif method == "exponential":
        osc = _gibbs_by_exponential(p, sector)
    else:
        raise ValueError(f"unknown construction method {method!r}")
    return SwitchState(tensor(_spin_state(sector), osc), sector)


def pointer_marginal(s: SwitchState) -> DensityMatrix:
    """Oscillator state of the switch (spin traced out)."""
    return partial_trace(s.rho, [1])


def excited_state(p: SwitchParams, sector: str) -> SwitchState:
    """Spin-flipped stable state: spin in ``sector``, oscillator still at the other well."""
    base = biased_gibbs(p, _flip(sector))
    return SwitchState(base.rho.conjugate_by(spin_flip_operator(p)), sector)


def halfway_state(p: SwitchParams, sector: str) -> SwitchState:
    """Equal mixture of the excited state in ``sector`` and the stable state of the other sector.

    Both components share the oscillator position of the other sector.
    """
    excited = excited_state(p, sector).rho.matrix
    stable = biased_gibbs(p, _flip(sector)).rho.matrix
    return SwitchState(DensityMatrix(0.5 * (excited + stable), p.space), "mixed")


# ---------------------------------------------------------------------------
# Closed forms
# ---------------------------------------------------------------------------


def overlap_analytic(p: SwitchParams) -> float:
    """exp(-4 D^2 tanh(omega0 / 2T)); exp(-4 D^2) at T = 0."""
    if p.T == 0:
        return math.exp(-4.0 * p.D**2)
    return math.exp(-4.0 * p.D**2 * math.tanh(p.omega0 / (2.0 * p.T)))


def overlap_numeric(p: SwitchParams, adaptive_cutoff: bool = True) -> float:
    """Squared fidelity of the two pointer states computed in the truncated space.

    With ``adaptive_cutoff`` the cutoff is doubled from ``p.n_levels`` until the
    value changes by less than 1e-8 relative.
    """

    def at(n):
        q = p.with_cutoff(n)
        return overlap(pointer_marginal(biased_gibbs(q, "+")), pointer_marginal(biased_gibbs(q, "-")))

    if not adaptive_cutoff:
        return at(p.n_levels)
    value, _ = adaptive(at, p.n_levels)
    return float(value)


def noise_temperature(p: SwitchParams) -> float:
    """Mean oscillator energy omega0 nbar + omega0 / 2 = (omega0/2) coth(omega0 / 2T)."""
    if p.T == 0:
        return 0.5 * p.omega0
    return 0.5 * p.omega0 / math.tanh(p.omega0 / (2.0 * p.T))


def barrier_energy(p: SwitchParams) -> float:
    """Barrier W = 2 D^2 omega0 (half the spin-flip energy)."""
    return 2.0 * p.D**2 * p.omega0


def flip_energy(p: SwitchParams) -> float:
    return 2.0 * barrier_energy(p)


# ---------------------------------------------------------------------------
# Gates
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class GateResult:
    state: SwitchState
    work: float


def not_gate_unitary(p: SwitchParams) -> np.ndarray:
    """Spin-flip unitary of an instantaneous pulse, exp(-i (pi/2) sigma1) up to phase."""
    u = scipy.linalg.expm(-0.5j * math.pi * SIGMA1)
    return embed(1j * u, 0, p.space)


def not_gate(p: SwitchParams, s: SwitchState) -> GateResult:
    """Apply an instantaneous spin flip and report the invested work."""
    rho = s.rho.conjugate_by(not_gate_unitary(p))
    sector = "mixed" if s.sector == "mixed" else _flip(s.sector)
    new = SwitchState(rho, sector)
    return GateResult(new, mean_energy(p, new) - mean_energy(p, s))


def oscillator_moments(rho: DensityMatrix) -> tuple[float, float]:
    """(mean position (a + a^dag)/2, mean photon number) of an oscillator state."""
    n = rho.dim
    a = annihilation(n)
    return rho.expect(position_operator(n)), rho.expect(a.conj().T @ a)

