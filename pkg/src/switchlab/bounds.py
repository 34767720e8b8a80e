"""Closed-form bounds tying encoding accuracy and stability to work, plus Holevo quantities.

Energies are in the same units as the noise temperature ``theta`` (and the
bath temperature ``T``); information in nats.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .quantum import DensityMatrix, StateVector, as_density, binary_entropy, von_neumann_entropy
from .szilard import optimal_work

LN2 = math.log(2.0)


def _check_eps(eps: float):
    if not 0.0 < eps <= 0.5:
        raise ValueError(f"eps must lie in (0, 1/2], got {eps!r}")


@dataclass(frozen=True)
class BoundReport:
    value: float
    landauer_reference: float

    @property
    def ratio(self) -> float:
        if self.landauer_reference <= 0:
            return math.nan
        return self.value / self.landauer_reference


def encode_work(eps: float, theta: float) -> float:
    """Minimal average work to encode a bit with error ``eps``: theta ln(1/eps)."""
    _check_eps(eps)
    return theta * math.log(1.0 / eps)


def max_lifetime(eps: float, tau0: float) -> float:
    """Longest lifetime compatible with error ``eps``: tau0 / eps (inf at eps = 0)."""
    if eps == 0.0:
        return math.inf
    _check_eps(eps)
    return tau0 / eps


def computation_cost(N: float, theta: float, T: float | None = None,
                     confidence: float | None = None) -> BoundReport:
    """Leading-order work for an N-step computation, theta N ln N.

    ``confidence`` (delta in (0, 1)) adds the sub-leading term theta N ln(1/delta).
    The Landauer reference is T N with ``T`` defaulting to ``theta``.
    """
    if N < 2:
        raise ValueError("N must be at least 2")
    value = theta * N * math.log(N)
    if confidence is not None:
        if not 0.0 < confidence < 1.0:
            raise ValueError("confidence must lie in (0, 1)")
        value += theta * N * math.log(1.0 / confidence)
    ref_t = theta if T is None else T
    return BoundReport(value, ref_t * N)


def landauer_comparison(eps: float, theta: float, T: float) -> BoundReport:
    """Encoding work against the k_B T ln 2 benchmark."""
    return BoundReport(encode_work(eps, theta), T * LN2)


@dataclass(frozen=True)
class Ensemble:
    states: tuple
    probabilities: tuple

    def __post_init__(self):
        states = tuple(as_density(s) for s in self.states)
        probs = tuple(float(p) for p in self.probabilities)
        if not states or len(states) != len(probs):
            raise ValueError("need one probability per state")
        if any(p < 0 for p in probs) or abs(sum(probs) - 1.0) > 1e-12:
            raise ValueError("probabilities must be non-negative and sum to 1")
        if len({s.dim for s in states}) != 1:
            raise ValueError("all ensemble members must share one dimension")
        object.__setattr__(self, "states", states)
        object.__setattr__(self, "probabilities", probs)

    @classmethod
    def uniform(cls, states: Sequence) -> Ensemble:
        return cls(tuple(states), tuple([1.0 / len(states)] * len(states)))

    def average(self) -> DensityMatrix:
        m = sum(p * s.matrix for p, s in zip(self.probabilities, self.states))
        return DensityMatrix(m, self.states[0].space)


def holevo_bound(e: Ensemble) -> float:
    """S(sum p rho) - sum p S(rho), in nats."""
    mixed = von_neumann_entropy(e.average())
    return max(0.0, mixed - sum(p * von_neumann_entropy(s) for p, s in zip(e.probabilities, e.states)))


def depolarize_qubit(rho: DensityMatrix, eps: float) -> DensityMatrix:
    """rho -> (1 - 2 eps) rho + eps I."""
    if rho.dim != 2:
        raise ValueError("depolarize_qubit acts on qubits")
    if not 0.0 <= eps <= 0.5:
        raise ValueError("eps must lie in [0, 1/2]")
    return DensityMatrix((1 - 2 * eps) * rho.matrix + eps * np.eye(2), rho.space)


@dataclass(frozen=True)
class NoisyHolevo:
    """Exact Holevo quantity of the noisy ensemble and the two looser expressions."""

    value: float
    entropy_minus_noise: float  # S(average of the noiseless states) - S(eps)
    bound: float  # ln 2 - S(eps)


def noisy_holevo_bound(e: Ensemble, eps: float) -> NoisyHolevo:
    """Holevo quantity after each pure qubit member passes through the depolarising noise."""
    for s in e.states:
        if s.dim != 2:
            raise ValueError("noisy_holevo_bound needs qubit states")
        if abs(s.purity() - 1.0) > 1e-10:
            raise ValueError("noisy_holevo_bound needs pure states")
    noisy = Ensemble(tuple(depolarize_qubit(s, eps) for s in e.states), e.probabilities)
    s_eps = binary_entropy(eps)
    return NoisyHolevo(holevo_bound(noisy), von_neumann_entropy(e.average()) - s_eps, LN2 - s_eps)


def bloch_state(theta: float, phi: float) -> StateVector:
    return StateVector(np.array([math.cos(theta / 2), np.exp(1j * phi) * math.sin(theta / 2)]))


def equator_ensemble(n: int) -> Ensemble:
    """``n`` pure qubit states evenly spaced on the Bloch equator, uniform weights."""
    if n < 1:
        raise ValueError("n must be positive")
    return Ensemble.uniform([bloch_state(math.pi / 2, 2 * math.pi * k / n) for k in range(n)])


@dataclass(frozen=True)
class DoubleWellReport:
    entropy: float
    decomposition_mismatch: float
    free_energy_excess: float
    extractable_work: float
    gibbs_entropy_deficit: float


def double_well_demo(T: float, splitting: float, min_ratio: float = 100.0) -> DoubleWellReport:
    """Two-level double well with delocalised eigenstates and localised left/right states.

    The equilibrium state is taken as the equal mixture of the two eigenstates,
    valid when ``T / splitting >= min_ratio``.  ``gibbs_entropy_deficit`` reports
    ln 2 minus the entropy of the exact Gibbs state at this temperature.
    """
    if T <= 0 or splitting <= 0:
        raise ValueError("temperature and splitting must be positive")
    if T / splitting < min_ratio:
        raise ValueError(f"k_B T / splitting = {T / splitting:.3g} is below {min_ratio}")
    left = np.array([1.0, 0.0], dtype=complex)
    right = np.array([0.0, 1.0], dtype=complex)
    ground = (left + right) / math.sqrt(2)
    excited = (left - right) / math.sqrt(2)

    def mix(u, v):
        return 0.5 * np.outer(u, u.conj()) + 0.5 * np.outer(v, v.conj())

    eq = DensityMatrix(mix(ground, excited))
    mismatch = float(np.max(np.abs(mix(ground, excited) - mix(left, right))))
    s = von_neumann_entropy(eq)
    # a pure preparation has zero entropy; same mean energy up to the splitting
    excess = T * (s - 0.0)
    x = splitting / T
    w = np.array([1.0, math.exp(-x)])
    w /= w.sum()
    deficit = LN2 + float(np.sum(w * np.log(w)))
    return DoubleWellReport(s, mismatch, excess, optimal_work(0.0, T).W_star, deficit)
