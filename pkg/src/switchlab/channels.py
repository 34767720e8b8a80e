"""Quantum channels and randomised checks of the overlap axioms.

The overlap is the squared Uhlmann fidelity from :mod:`switchlab.quantum`.
Checked properties:

* range and identity: 0 <= (rho|sigma) <= 1 and (rho|rho) = 1,
* factorisation over product states,
* monotonicity under any channel: (T rho|T sigma) >= (rho|sigma),

together with the corollaries for exact cloning (only identical or
orthogonal pairs) and exact recovery (noise must preserve the overlap).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .quantum import DensityMatrix, SpaceSpec, as_density, overlap, partial_trace, tensor, trace_distance

COMPLETENESS_TOL = 1e-10
MONOTONICITY_TOL = 1e-9
FACTORIZATION_TOL = 1e-8
IDENTITY_TOL = 1e-10
EXACT_TOL = 1e-8


@dataclass(frozen=True, eq=False)
class QuantumChannel:
    """Kraus representation; ``output_space`` defaults to a single factor."""

    kraus: tuple
    output_space: SpaceSpec | None = None
    input_space: SpaceSpec | None = None

    def __post_init__(self):
        ks = tuple(np.array(k, dtype=complex) for k in self.kraus)
        if not ks:
            raise ValueError("a channel needs at least one Kraus operator")
        shape = ks[0].shape
        if any(k.ndim != 2 or k.shape != shape for k in ks):
            raise ValueError("Kraus operators must be matrices of one shape")
        resid = completeness_residual(ks)
        if resid > COMPLETENESS_TOL:
            raise ValueError(f"Kraus operators are not trace preserving (residual {resid:.2e})")
        for k in ks:
            k.setflags(write=False)
        object.__setattr__(self, "kraus", ks)
        out = self.output_space or SpaceSpec.single(shape[0])
        inp = self.input_space or SpaceSpec.single(shape[1])
        if out.dim != shape[0] or inp.dim != shape[1]:
            raise ValueError("declared spaces do not match the Kraus shapes")
        object.__setattr__(self, "output_space", out)
        object.__setattr__(self, "input_space", inp)

    @property
    def dim_in(self) -> int:
        return self.kraus[0].shape[1]

    @property
    def dim_out(self) -> int:
        return self.kraus[0].shape[0]

    def then(self, other: QuantumChannel) -> QuantumChannel:
        """Composition: apply ``self`` first, then ``other``."""
        if other.dim_in != self.dim_out:
            raise ValueError("channel dimensions do not compose")
        ks = [b @ a for a in self.kraus for b in other.kraus]
        return QuantumChannel(tuple(ks), other.output_space, self.input_space)

    def __call__(self, rho):
        return apply_channel(self, rho)


def completeness_residual(kraus) -> float:
    s = sum(k.conj().T @ k for k in kraus)
    return float(np.max(np.abs(s - np.eye(s.shape[0]))))


def apply_channel(ch: QuantumChannel, rho) -> DensityMatrix:
    """sum_k K rho K^dag, carrying a factor through when the input has one."""
    rho = as_density(rho)
    if rho.dim != ch.dim_in:
        raise ValueError(f"channel expects dimension {ch.dim_in}, got {rho.dim}")
    m = sum(k @ rho.matrix @ k.conj().T for k in ch.kraus)
    m = 0.5 * (m + m.conj().T)
    f = None
    if rho.factor is not None:
        f = np.hstack([k @ rho.factor for k in ch.kraus])
    return DensityMatrix(m, ch.output_space, factor=f)


def identity_channel(dim: int) -> QuantumChannel:
    return QuantumChannel((np.eye(dim),))


def unitary_channel(u) -> QuantumChannel:
    return QuantumChannel((np.asarray(u),))


def depolarizing_channel(dim: int, p: float) -> QuantumChannel:
    """rho -> (1 - p) rho + p I / dim, via the generalised Pauli (Weyl) basis."""
    if not 0.0 <= p <= 1.0:
        raise ValueError("p must lie in [0, 1]")
    omega = np.exp(2j * math.pi / dim)
    shift = np.roll(np.eye(dim), 1, axis=0)
    clock = np.diag(omega ** np.arange(dim))
    ks = []
    for a in range(dim):
        for b in range(dim):
            w = np.linalg.matrix_power(shift, a) @ np.linalg.matrix_power(clock, b)
            c = 1 - p + p / dim**2 if (a, b) == (0, 0) else p / dim**2
            ks.append(math.sqrt(c) * w)
    return QuantumChannel(tuple(ks))


def fully_depolarizing(dim: int) -> QuantumChannel:
    """rho -> I / dim with Kraus operators |i><j| / sqrt(dim)."""
    ks = []
    for i in range(dim):
        for j in range(dim):
            k = np.zeros((dim, dim))
            k[i, j] = 1 / math.sqrt(dim)
            ks.append(k)
    return QuantumChannel(tuple(ks))


# ---------------------------------------------------------------------------
# Sampling
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class SampleConfig:
    dim: int = 2
    env_dim: int = 2
    count: int = 1000
    seed: int = 0

    def __post_init__(self):
        if self.dim < 2 or self.env_dim < 1 or self.count < 1 or self.seed < 0:
            raise ValueError("dim >= 2, env_dim >= 1, count >= 1 and seed >= 0 required")


def _rng(cfg: SampleConfig, index: int | None = None, stream: int = 0) -> np.random.Generator:
    key = [cfg.seed, stream] if index is None else [cfg.seed, stream, index]
    return np.random.default_rng(np.random.SeedSequence(key))


def _ginibre(rng, rows, cols):
    return (rng.standard_normal((rows, cols)) + 1j * rng.standard_normal((rows, cols))) / math.sqrt(2)


def random_density(cfg: SampleConfig, rng: np.random.Generator | None = None,
                   rank: int | None = None) -> DensityMatrix:
    """Hilbert-Schmidt distributed state (ancilla of size ``rank``, default ``dim``)."""
    rng = rng if rng is not None else _rng(cfg)
    g = _ginibre(rng, cfg.dim, rank or cfg.dim)
    return DensityMatrix.from_factor(g)


def haar_isometry(rng: np.random.Generator, rows: int, cols: int) -> np.ndarray:
    """Uniformly random isometry (QR of a Ginibre matrix with phase correction)."""
    q, r = np.linalg.qr(_ginibre(rng, rows, cols))
    d = np.diag(r)
    return q * (d / np.abs(d))


def channel_from_isometry(v: np.ndarray, dim_out: int, env_dim: int) -> QuantumChannel:
    """Trace out the environment of an isometry into system (x) environment."""
    blocks = v.reshape(dim_out, env_dim, v.shape[1])
    return QuantumChannel(tuple(blocks[:, e, :] for e in range(env_dim)))


def random_channel(cfg: SampleConfig, rng: np.random.Generator | None = None) -> QuantumChannel:
    """Channel induced by a Haar isometry dim -> dim * env_dim."""
    rng = rng if rng is not None else _rng(cfg, stream=1)
    v = haar_isometry(rng, cfg.dim * cfg.env_dim, cfg.dim)
    return channel_from_isometry(v, cfg.dim, cfg.env_dim)


# ---------------------------------------------------------------------------
# Axiom checks
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class SampleMargins:
    index: int
    dim: int
    overlap_before: float
    overlap_after: float
    monotonicity_margin: float  # overlap_after - overlap_before, should be >= -tol
    factorization_error: float  # relative
    identity_error: float
    range_ok: bool


@dataclass(frozen=True)
class AxiomReport:
    samples: tuple = field(repr=False)
    worst_monotonicity: float
    worst_factorization: float
    worst_identity: float
    range_violations: int

    @property
    def monotonicity_violations(self) -> int:
        return sum(s.monotonicity_margin < -MONOTONICITY_TOL for s in self.samples)

    @property
    def passed(self) -> bool:
        return (self.monotonicity_violations == 0 and self.worst_factorization < FACTORIZATION_TOL
                and self.worst_identity <= IDENTITY_TOL and self.range_violations == 0)

    def summary(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        return (f"{status} samples={len(self.samples)} a3_violations={self.monotonicity_violations}"
                f" worst_a3_margin={self.worst_monotonicity:.3e}"
                f" worst_a2_error={self.worst_factorization:.3e}"
                f" worst_a1_error={self.worst_identity:.3e} range_violations={self.range_violations}")


def _sample(cfg: SampleConfig, index: int) -> SampleMargins:
    rng = _rng(cfg, index, stream=2)
    ranks = rng.integers(1, cfg.dim + 1, size=4)
    rho = random_density(cfg, rng, int(ranks[0]))
    sigma = random_density(cfg, rng, int(ranks[1]))
    ch = random_channel(cfg, rng)
    before = overlap(rho, sigma)
    after = overlap(apply_channel(ch, rho), apply_channel(ch, sigma))

    other = SampleConfig(max(2, cfg.env_dim), cfg.env_dim, cfg.count, cfg.seed)
    tau = random_density(other, rng, int(ranks[2]) if ranks[2] <= other.dim else None)
    tau2 = random_density(other, rng, int(ranks[3]) if ranks[3] <= other.dim else None)
    joint = overlap(tensor(rho, tau), tensor(sigma, tau2))
    product = before * overlap(tau, tau2)
    fact = abs(joint - product) / max(product, 1e-300)

    ident = max(abs(overlap(rho, rho) - 1.0), abs(overlap(sigma, sigma) - 1.0))
    in_range = all(0.0 <= v <= 1.0 for v in (before, after, joint))
    return SampleMargins(index, cfg.dim, before, after, after - before, fact, ident, in_range)


def check_axioms(cfg: SampleConfig, workers: int = 1) -> AxiomReport:
    """Evaluate ``cfg.count`` random (state pair, channel) samples.

    Sample ``i`` draws from its own seed stream, so the report does not depend
    on ``workers`` or on completion order.
    """
    if workers > 1:
        from concurrent.futures import ThreadPoolExecutor

        with ThreadPoolExecutor(workers) as pool:
            samples = list(pool.map(lambda i: _sample(cfg, i), range(cfg.count)))
    else:
        samples = [_sample(cfg, i) for i in range(cfg.count)]
    samples.sort(key=lambda s: s.index)
    return AxiomReport(
        tuple(samples),
        min(s.monotonicity_margin for s in samples),
        max(s.factorization_error for s in samples),
        max(s.identity_error for s in samples),
        sum(not s.range_ok for s in samples),
    )


# ---------------------------------------------------------------------------
# Cloning
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class CloningReport:
    input_overlap: float  # (rho|rho')
    with_food: float  # (rho (x) w | rho' (x) w)
    output_overlap: float  # (T(rho (x) w) | T(rho' (x) w))
    deficit: float  # max trace distance of outputs from rho (x) rho (x) sigma
    exact: bool
    squared_bound: float | None  # (rho|rho')^2 (sigma|sigma') when exact
    monotone: bool
    dichotomy: bool | None  # exact cloning => overlap in {0, 1}


def measure_and_prepare(basis: np.ndarray, food_dim: int = 1) -> QuantumChannel:
    """Cloner that measures in the orthonormal columns of ``basis`` and prepares two copies.

    Input: system (x) food.  Output: system (x) system (x) food (food untouched).
    """
    d = basis.shape[0]
    ks = []
    for k in range(d):
        v = basis[:, k]
        copy = np.kron(v, v)[:, None] @ v.conj()[None, :]
        ks.append(np.kron(copy, np.eye(food_dim)))
    return QuantumChannel(tuple(ks), SpaceSpec((d, d, food_dim)), SpaceSpec((d, food_dim)))


def clone_deficit(rho: DensityMatrix, out: DensityMatrix) -> float:
    """Trace distance between ``out`` and rho (x) rho (x) (its own residual marginal)."""
    residual = partial_trace(out, [2])
    target = tensor(rho, rho, residual)
    return trace_distance(out, target)


def cloning_chain(rho, rho_prime, cloner: QuantumChannel, food) -> CloningReport:
    """Evaluate each link of the overlap chain for a would-be self-replication."""
    rho, rho_prime, food = as_density(rho), as_density(rho_prime), as_density(food)
    d = rho.dim
    if cloner.dim_in != d * food.dim:
        raise ValueError("cloner input must be system (x) food")
    out_dims = cloner.output_space.factor_dims
    if len(out_dims) != 3 or out_dims[0] != d or out_dims[1] != d:
        raise ValueError("cloner output must be system (x) system (x) residual")
    l0 = overlap(rho, rho_prime)
    l1 = overlap(tensor(rho, food), tensor(rho_prime, food))
    out = apply_channel(cloner, tensor(rho, food))
    out_p = apply_channel(cloner, tensor(rho_prime, food))
    l2 = overlap(out, out_p)
    deficit = max(clone_deficit(rho, out), clone_deficit(rho_prime, out_p))
    exact = deficit < EXACT_TOL
    squared = dichotomy = None
    if exact:
        s, s_p = partial_trace(out, [2]), partial_trace(out_p, [2])
        squared = l0 * l0 * overlap(s, s_p)
        dichotomy = l0 < EXACT_TOL or l0 > 1.0 - EXACT_TOL
    monotone = l2 >= l0 - MONOTONICITY_TOL and abs(l1 - l0) < FACTORIZATION_TOL
    return CloningReport(l0, l1, l2, deficit, exact, squared, monotone, dichotomy)


def fibonacci_directions(n: int) -> np.ndarray:
    """Roughly uniform unit vectors on the sphere, shape (n, 3)."""
    k = np.arange(n) + 0.5
    z = 1 - 2 * k / n
    phi = math.pi * (1 + math.sqrt(5)) * k
    r = np.sqrt(1 - z * z)
    return np.stack([r * np.cos(phi), r * np.sin(phi), z], axis=1)


def bloch_basis(n) -> np.ndarray:
    """Orthonormal qubit basis whose first vector points along Bloch vector ``n``."""
    theta = math.acos(max(-1.0, min(1.0, n[2])))
    phi = math.atan2(n[1], n[0])
    up = np.array([math.cos(theta / 2), np.exp(1j * phi) * math.sin(theta / 2)])
    down = np.array([-np.exp(-1j * phi) * math.sin(theta / 2), math.cos(theta / 2)])
    return np.stack([up, down], axis=1)


def best_measure_and_prepare(rho, rho_prime, directions: int = 1000) -> tuple[float, np.ndarray]:
    """Smallest cloning deficit over measure-and-prepare qubit cloners on a direction grid."""
    food = DensityMatrix(np.eye(1))
    best, best_n = math.inf, None
    for n in fibonacci_directions(directions):
        report = cloning_chain(rho, rho_prime, measure_and_prepare(bloch_basis(n)), food)
        if report.deficit < best:
            best, best_n = report.deficit, n
    return best, best_n


# ---------------------------------------------------------------------------
# Recovery
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class RecoveryLink:
    before: float  # (rho|rho')
    after_noise: float  # (T_n rho|T_n rho')
    after_recovery: float  # (T_r T_n rho|T_r T_n rho')
    recovered: bool  # T_r T_n restores both states
    monotone: bool
    rigidity: bool | None  # exact recovery => noise preserved the overlap


@dataclass(frozen=True)
class RecoveryReport:
    links: tuple

    @property
    def passed(self) -> bool:
        return all(l.monotone and l.rigidity is not False for l in self.links)

    @property
    def any_recovered(self) -> bool:
        return any(l.recovered for l in self.links)


def recovery_chain(noise: QuantumChannel, recovery: QuantumChannel, pairs: Sequence) -> RecoveryReport:
    if recovery.dim_in != noise.dim_out:
        raise ValueError("recovery input must match the noise output")
    if recovery.dim_out != noise.dim_in:
        raise ValueError("recovery must map back to the original space")
    links = []
    for rho, rho_p in pairs:
        rho, rho_p = as_density(rho), as_density(rho_p)
        n1, n2 = apply_channel(noise, rho), apply_channel(noise, rho_p)
        r1, r2 = apply_channel(recovery, n1), apply_channel(recovery, n2)
        o0, o1 = overlap(rho, rho_p), overlap(n1, n2)
        o2 = overlap(DensityMatrix(r1.matrix, rho.space, r1.factor), DensityMatrix(r2.matrix, rho.space, r2.factor))
        recovered = (trace_distance(r1.matrix, rho.matrix) < EXACT_TOL
                     and trace_distance(r2.matrix, rho_p.matrix) < EXACT_TOL)
        monotone = o1 >= o0 - MONOTONICITY_TOL and o2 >= o1 - MONOTONICITY_TOL
        rigidity = abs(o1 - o0) <= EXACT_TOL if recovered else None
        links.append(RecoveryLink(o0, o1, o2, recovered, monotone, rigidity))
    return RecoveryReport(tuple(links))


@dataclass(frozen=True)
class ReplicatedRecovery:
    input_overlap: float  # (rho|rho')
    upper: float  # (rho|rho') (kappa|kappa')
    output_overlap: float  # overlap of the recovered outputs
    lower: float  # (rho|rho')^2 (sigma|sigma')
    exact: bool  # output is rho (x) kappa for both inputs
    holds: bool


def replicated_recovery_chain(noise: QuantumChannel, recovery: QuantumChannel, rho, rho_prime,
                              sigma, sigma_prime) -> ReplicatedRecovery:
    """Recovery acting on two copies plus residual: T_r T_n(rho (x) rho (x) sigma) = rho (x) kappa."""
    rho, rho_p = as_density(rho), as_density(rho_prime)
    sigma, sigma_p = as_density(sigma), as_density(sigma_prime)
    d = rho.dim
    x, x_p = tensor(rho, rho, sigma), tensor(rho_p, rho_p, sigma_p)
    y = apply_channel(recovery, apply_channel(noise, x))
    y_p = apply_channel(recovery, apply_channel(noise, x_p))
    rest = y.dim // d
    space = SpaceSpec((d, rest))
    y = DensityMatrix(y.matrix, space, y.factor)
    y_p = DensityMatrix(y_p.matrix, space, y_p.factor)
    kappa, kappa_p = partial_trace(y, [1]), partial_trace(y_p, [1])
    exact = (trace_distance(y, tensor(rho, kappa)) < EXACT_TOL
             and trace_distance(y_p, tensor(rho_p, kappa_p)) < EXACT_TOL)
    o = overlap(rho, rho_p)
    upper = o * overlap(kappa, kappa_p)
    out = overlap(y, y_p)
    lower = o * o * overlap(sigma, sigma_p)
    holds = o >= upper - MONOTONICITY_TOL and out >= lower - MONOTONICITY_TOL
    if exact:
        holds = holds and abs(out - upper) <= FACTORIZATION_TOL
    return ReplicatedRecovery(o, upper, out, lower, exact, holds)
