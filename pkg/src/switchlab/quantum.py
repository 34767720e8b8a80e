"""Finite-dimensional state and operator algebra.

Density matrices optionally carry a *factor* ``F`` with ``rho = F F^dagger``.
When a state is built analytically (coherent, thermal, displaced-thermal) the
factor is exact, and :func:`overlap` uses it directly instead of an
eigendecomposition.  This keeps the squared Uhlmann fidelity accurate to
~1e-13 relative even when it is as small as 1e-7, which an eigenvalue-based
matrix square root cannot achieve.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import reduce

import numpy as np
import scipy.linalg
from scipy.special import gammaln

HERMITIAN_TOL = 1e-12
TRACE_TOL = 1e-12
PSD_TOL = 1e-10
NORM_TOL = 1e-12
CLAMP = 1e-12
TRUNCATION_TOL = 1e-12


class TruncationError(ValueError):
    """The Fock cutoff is too small for the requested state."""


@dataclass(frozen=True)
class SpaceSpec:
    """Ordered tensor-factor dimensions of a Hilbert space."""

    factor_dims: tuple[int, ...]

    def __post_init__(self):
        dims = tuple(int(d) for d in self.factor_dims)
        if not dims or any(d < 1 for d in dims):
            raise ValueError(f"invalid factor dimensions {self.factor_dims!r}")
        object.__setattr__(self, "factor_dims", dims)

    @property
    def dim(self) -> int:
        return math.prod(self.factor_dims)

    def __len__(self):
        return len(self.factor_dims)

    def __add__(self, other: SpaceSpec) -> SpaceSpec:
        return SpaceSpec(self.factor_dims + other.factor_dims)

    @classmethod
    def single(cls, dim: int) -> SpaceSpec:
        return cls((dim,))


def _as_space(space, dim):
    if space is None:
        return SpaceSpec.single(dim)
    if not isinstance(space, SpaceSpec):
        space = SpaceSpec(tuple(space))
    if space.dim != dim:
        raise ValueError(f"space {space.factor_dims} does not match dimension {dim}")
    return space


@dataclass(frozen=True, eq=False)
class StateVector:
    amplitudes: np.ndarray
    space: SpaceSpec = None

    def __post_init__(self):
        amp = np.asarray(self.amplitudes, dtype=complex).reshape(-1)
        norm = np.linalg.norm(amp)
        if abs(norm - 1.0) > NORM_TOL:
            raise ValueError(f"state vector norm {norm!r} differs from 1")
        amp.setflags(write=False)
        object.__setattr__(self, "amplitudes", amp)
        object.__setattr__(self, "space", _as_space(self.space, amp.size))

    @property
    def dim(self) -> int:
        return self.amplitudes.size

    def density(self) -> DensityMatrix:
        psi = self.amplitudes
        return DensityMatrix(np.outer(psi, psi.conj()), self.space, factor=psi[:, None])


@dataclass(frozen=True, eq=False)
class DensityMatrix:
    """Trace-one positive semidefinite matrix on a tensor-structured space.

    ``factor`` is optional; when given, ``matrix`` must equal
    ``factor @ factor.conj().T``.
    """

    matrix: np.ndarray
    space: SpaceSpec = None
    factor: np.ndarray | None = field(default=None, repr=False)
    validate: bool = field(default=True, repr=False)

    def __post_init__(self):
        m = np.array(self.matrix, dtype=complex)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise ValueError(f"density matrix must be square, got shape {m.shape}")
        if self.validate:
            _check_density(m)
        m.setflags(write=False)
        object.__setattr__(self, "matrix", m)
        object.__setattr__(self, "space", _as_space(self.space, m.shape[0]))
        if self.factor is not None:
            f = np.array(self.factor, dtype=complex)
            if f.ndim == 1:
                f = f[:, None]
            if f.shape[0] != m.shape[0]:
                raise ValueError("factor row count does not match the matrix")
            f.setflags(write=False)
            object.__setattr__(self, "factor", f)

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    @classmethod
    def from_factor(cls, factor, space=None, normalize=True) -> DensityMatrix:
        """Build ``F F^dagger``; with ``normalize`` the factor is rescaled to unit trace."""
        f = np.asarray(factor, dtype=complex)
        if f.ndim == 1:
            f = f[:, None]
        if normalize:
            f = f / np.linalg.norm(f)
        return cls(f @ f.conj().T, space, factor=f)

    @classmethod
    def maximally_mixed(cls, space) -> DensityMatrix:
        space = space if isinstance(space, SpaceSpec) else SpaceSpec(tuple(space))
        d = space.dim
        return cls(np.eye(d) / d, space, factor=np.eye(d) / math.sqrt(d))

    def purity(self) -> float:
        return float(np.real(np.vdot(self.matrix, self.matrix)))

    def expect(self, op) -> float:
        """Real part of Tr(rho op)."""
        return float(np.real(np.einsum("ij,ji->", self.matrix, op)))

    def conjugate_by(self, unitary) -> DensityMatrix:
        u = np.asarray(unitary)
        f = None if self.factor is None else u @ self.factor
        return DensityMatrix(_hermitize(u @ self.matrix @ u.conj().T), self.space, factor=f)

    def get_factor(self) -> np.ndarray:
        """Return a factor ``F`` with ``rho = F F^dagger`` (computed if absent)."""
        if self.factor is not None:
            return self.factor
        w, v = np.linalg.eigh(self.matrix)
        w = np.where(w > CLAMP, w, 0.0)
        keep = w > 0
        return v[:, keep] * np.sqrt(w[keep])


def _hermitize(m):
    return 0.5 * (m + m.conj().T)


def _check_density(m):
    scale = max(1.0, float(np.max(np.abs(m))))
    herm_err = float(np.max(np.abs(m - m.conj().T)))
    if herm_err > HERMITIAN_TOL * scale:
        raise ValueError(f"matrix is not Hermitian (deviation {herm_err:.3e})")
    tr = np.trace(m).real
    if abs(tr - 1.0) > TRACE_TOL:
        raise ValueError(f"trace {tr!r} differs from 1")
    lo = np.linalg.eigvalsh(_hermitize(m))[0]
    if lo < -PSD_TOL:
        raise ValueError(f"matrix has negative eigenvalue {lo:.3e}")


def as_density(state) -> DensityMatrix:
    if isinstance(state, DensityMatrix):
        return state
    if isinstance(state, StateVector):
        return state.density()
    if isinstance(state, np.ndarray) and state.ndim == 2:
        return DensityMatrix(state)
    raise TypeError(f"expected DensityMatrix or StateVector, got {type(state).__name__}")


# ---------------------------------------------------------------------------
# Oscillator building blocks
# ---------------------------------------------------------------------------


def annihilation(cutoff: int) -> np.ndarray:
    return np.diag(np.sqrt(np.arange(1, cutoff, dtype=float)), 1).astype(complex)


def number_operator(cutoff: int) -> np.ndarray:
    return np.diag(np.arange(cutoff, dtype=float)).astype(complex)


def displacement(alpha: complex, cutoff: int, pad: int | None = None) -> np.ndarray:
    """Displacement operator exp(alpha a^dag - alpha* a) restricted to ``cutoff`` levels.

    The exponential is taken in a padded space and then cropped, so the
    low-lying columns are those of the untruncated operator.
    """
    if pad is None:
        pad = int(math.ceil(abs(alpha) ** 2 + 10 * abs(alpha) + 20))
    big = cutoff + pad
    a = annihilation(big)
    gen = alpha * a.conj().T - np.conj(alpha) * a
    return scipy.linalg.expm(gen)[:cutoff, :cutoff]


def coherent_amplitudes(alpha: complex, cutoff: int) -> np.ndarray:
    """Unnormalised Fock amplitudes exp(-|alpha|^2/2) alpha^n / sqrt(n!)."""
    n = np.arange(cutoff)
    if alpha == 0:
        out = np.zeros(cutoff, dtype=complex)
        out[0] = 1.0
        return out
    r, phase = abs(alpha), np.angle(alpha)
    log_mag = -0.5 * r * r + n * math.log(r) - 0.5 * gammaln(n + 1)
    return np.exp(log_mag) * np.exp(1j * n * phase)


def coherent_state(alpha: complex, cutoff: int) -> StateVector:
    """Truncated coherent state, renormalised after truncation.

    Raises:
        TruncationError: if the truncated norm deficit exceeds 1e-12.
    """
    if cutoff < 1:
        raise ValueError("cutoff must be positive")
    amp = coherent_amplitudes(alpha, cutoff)
    deficit = 1.0 - float(np.vdot(amp, amp).real)
    if deficit > TRUNCATION_TOL:
        raise TruncationError(
            f"cutoff {cutoff} too small for alpha={alpha}: norm deficit {deficit:.2e}"
            f" (need about {minimal_cutoff(abs(alpha))})"
        )
    return StateVector(amp / np.linalg.norm(amp))


def minimal_cutoff(alpha_abs: float) -> int:
    """Cutoff rule for which the coherent-state norm deficit is below 1e-12."""
    return int(math.ceil(alpha_abs**2 + 10 * alpha_abs + 20))


def mean_occupation(temperature: float, omega: float = 1.0) -> float:
    """Bose occupation 1/(exp(omega/T) - 1), zero at T = 0."""
    if temperature <= 0:
        return 0.0
    return 1.0 / math.expm1(omega / temperature)


def default_cutoff(displacement_abs: float, temperature: float = 0.0, omega: float = 1.0) -> int:
    nbar = mean_occupation(temperature, omega)
    return int(math.ceil(displacement_abs**2 + 10 * displacement_abs + 20 + 10 * nbar))


def thermal_weights(cutoff: int, temperature: float, omega: float = 1.0) -> np.ndarray:
    """Truncated, renormalised Boltzmann weights of the oscillator levels."""
    if temperature <= 0:
        w = np.zeros(cutoff)
        w[0] = 1.0
        return w
    w = np.exp(-omega * np.arange(cutoff) / temperature)
    return w / w.sum()


def thermal_state(cutoff: int, temperature: float, omega: float = 1.0) -> DensityMatrix:
    w = thermal_weights(cutoff, temperature, omega)
    return DensityMatrix(np.diag(w), factor=np.diag(np.sqrt(w)))


def displaced_thermal_state(alpha: complex, cutoff: int, temperature: float,
                            omega: float = 1.0) -> DensityMatrix:
    """D(alpha) rho_thermal D(alpha)^dag with an exact factor."""
    w = thermal_weights(cutoff, temperature, omega)
    keep = w > 1e-300
    f = displacement(alpha, cutoff)[:, keep] * np.sqrt(w[keep])
    return DensityMatrix.from_factor(f)


def adaptive(fn, cutoff: int, rtol: float = 1e-8, max_doublings: int = 4):
    """Evaluate ``fn(cutoff)`` doubling the cutoff until the value is stable.

    Returns ``(value, cutoff_used)``.
    """
    prev = fn(cutoff)
    for _ in range(max_doublings):
        cutoff *= 2
        cur = fn(cutoff)
        if np.all(np.abs(np.asarray(cur) - np.asarray(prev)) <= rtol * np.abs(np.asarray(cur))):
            return cur, cutoff
        prev = cur
    raise TruncationError(f"observable did not converge up to cutoff {cutoff}")


# ---------------------------------------------------------------------------
# Pauli matrices (basis order |+>, |->, i.e. sigma3 eigenvalues +1, -1)
# ---------------------------------------------------------------------------

SIGMA1 = np.array([[0, 1], [1, 0]], dtype=complex)
SIGMA2 = np.array([[0, -1j], [1j, 0]], dtype=complex)
SIGMA3 = np.array([[1, 0], [0, -1]], dtype=complex)
IDENTITY2 = np.eye(2, dtype=complex)


# ---------------------------------------------------------------------------
# Composite systems
# ---------------------------------------------------------------------------


def tensor(*states):
    """Kronecker product of density matrices or of state vectors."""
    if not states:
        raise ValueError("tensor() needs at least one state")
    if all(isinstance(s, StateVector) for s in states):
        amp = reduce(np.kron, [s.amplitudes for s in states])
        space = reduce(lambda x, y: x + y, [s.space for s in states])
        return StateVector(amp / np.linalg.norm(amp), space)
    rhos = [as_density(s) for s in states]
    space = reduce(lambda x, y: x + y, [r.space for r in rhos])
    m = reduce(np.kron, [r.matrix for r in rhos])
    f = None
    if all(r.factor is not None for r in rhos):
        f = reduce(np.kron, [r.factor for r in rhos])
    return DensityMatrix(m, space, factor=f)


def partial_trace(rho: DensityMatrix, keep) -> DensityMatrix:
    """Reduce ``rho`` to the subsystems listed in ``keep`` (in their original order).

    Raises:
        ValueError: on out-of-range or repeated indices.
    """
    rho = as_density(rho)
    dims = rho.space.factor_dims
    keep = sorted(int(k) for k in keep)
    if len(set(keep)) != len(keep) or any(k < 0 or k >= len(dims) for k in keep):
        raise ValueError(f"invalid subsystem indices {keep} for {len(dims)} factors")
    traced = [k for k in range(len(dims)) if k not in keep]
    keep_dims = tuple(dims[k] for k in keep)
    dk = math.prod(keep_dims)
    n = len(dims)

    t = rho.matrix.reshape(dims + dims)
    perm = keep + traced
    t = t.transpose(perm + [n + p for p in perm])
    dt = math.prod(dims[k] for k in traced)
    t = t.reshape(dk, dt, dk, dt)
    reduced = np.einsum("ajbj->ab", t)

    f = None
    if rho.factor is not None:
        r = rho.factor.shape[1]
        ft = rho.factor.reshape(dims + (r,)).transpose(perm + [n])
        f = ft.reshape(dk, dt * r)
    if not keep:
        return DensityMatrix(np.array([[np.trace(reduced).real]]), SpaceSpec((1,)),
                             factor=None if f is None else f / np.linalg.norm(f))
    return DensityMatrix(_hermitize(reduced), SpaceSpec(keep_dims), factor=f)


def embed(op: np.ndarray, index: int, space: SpaceSpec) -> np.ndarray:
    """Lift a single-factor operator to the full space."""
    mats = [np.eye(d, dtype=complex) for d in space.factor_dims]
    mats[index] = np.asarray(op, dtype=complex)
    return reduce(np.kron, mats)


# ---------------------------------------------------------------------------
# Distances, fidelity, entropy
# ---------------------------------------------------------------------------


def trace_distance(rho, sigma) -> float:
    """Half the trace norm of the difference."""
    a = rho.matrix if isinstance(rho, DensityMatrix) else np.asarray(rho)
    b = sigma.matrix if isinstance(sigma, DensityMatrix) else np.asarray(sigma)
    return 0.5 * float(np.sum(np.abs(np.linalg.eigvalsh(_hermitize(a - b)))))


def trace_norm(m) -> float:
    return float(np.sum(np.linalg.svd(np.asarray(m), compute_uv=False)))


def sqrt_fidelity_from_factors(fa: np.ndarray, fb: np.ndarray) -> float:
    """Tr sqrt(sqrt(rho) sigma sqrt(rho)) for rho = fa fa^dag, sigma = fb fb^dag.

    Equals the trace norm of fa^dag fb, i.e. the sum of its singular values.
    """
    return float(np.sum(np.linalg.svd(fa.conj().T @ fb, compute_uv=False)))


def overlap(rho, sigma) -> float:
    """Squared Uhlmann fidelity (Tr sqrt(sqrt(rho) sigma sqrt(rho)))^2.

    For pure states this is |<psi|phi>|^2.  Symmetric in its arguments and
    clipped to [0, 1].
    """
    rho, sigma = as_density(rho), as_density(sigma)
    if rho.dim != sigma.dim:
        raise ValueError(f"dimension mismatch: {rho.dim} vs {sigma.dim}")
    if rho.space != sigma.space:
        raise ValueError(f"space mismatch: {rho.space.factor_dims} vs {sigma.space.factor_dims}")
    root = sqrt_fidelity_from_factors(rho.get_factor(), sigma.get_factor())
    return float(min(1.0, max(0.0, root * root)))


def von_neumann_entropy(rho) -> float:
    """Entropy -sum l ln l in nats, with 0 ln 0 = 0."""
    w = np.linalg.eigvalsh(as_density(rho).matrix)
    w = w[w > CLAMP]
    return float(-np.sum(w * np.log(w)))


def binary_entropy(eps: float) -> float:
    """S(eps) = -eps ln eps - (1 - eps) ln(1 - eps) in nats."""
    if not 0.0 <= eps <= 1.0:
        raise ValueError(f"eps must lie in [0, 1], got {eps!r}")
    return float(-sum(p * math.log(p) for p in (eps, 1.0 - eps) if p > 0.0))
