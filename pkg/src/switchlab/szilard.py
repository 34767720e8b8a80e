"""Single-spin Szilard engine with a faulty measurement.

Engine Hamiltonian: H(f) = (E0 / 2) (f^2 I - f tau3), with control |f| <= 1.
Work and heat follow dW = Tr(rho dH), dQ = Tr(d rho H): positive values are
supplied *to* the spin.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import minimize_scalar

from . import _kernels
from .quantum import SIGMA1, DensityMatrix, binary_entropy, embed, tensor
from .switch import SwitchParams, SwitchState

LN2 = math.log(2.0)


@dataclass(frozen=True)
class EngineConfig:
    E0: float
    eps: float = 0.0
    T: float = 1.0
    ramp_steps: int = 10_000
    ramp: str = "geometric"
    f_min: float = 1e-3

    def __post_init__(self):
        if self.E0 < 0:
            raise ValueError("E0 must be non-negative")
        if not 0.0 <= self.eps <= 0.5:
            raise ValueError("eps must lie in [0, 1/2]")
        if self.T <= 0:
            raise ValueError("temperature must be positive")
        if self.ramp_steps < 2:
            raise ValueError("ramp_steps must be at least 2")
        if self.ramp not in ("geometric", "linear"):
            raise ValueError(f"unknown ramp {self.ramp!r}")


@dataclass(frozen=True)
class CycleLedger:
    """Energy bookkeeping of one cycle.

    ``work_in`` is supplied by the control during the quench, ``work_out`` is
    extracted during the slow ramp, ``heat`` is the net heat taken from the bath.
    """

    work_in: float
    work_out: float
    heat: float
    internal_energy_change: float

    @property
    def net_work(self) -> float:
        """Extracted minus supplied work."""
        return self.work_out - self.work_in

    @property
    def closure_error(self) -> float:
        return abs(self.internal_energy_change - (self.work_in - self.work_out + self.heat))


def engine_levels(E0: float, f) -> np.ndarray:
    """Energies of (|up>, |down>) along a control grid, shape (len(f), 2)."""
    f = np.asarray(f, dtype=float)
    return 0.5 * E0 * np.stack([f * f - f, f * f + f], axis=-1)


def engine_hamiltonian(E0: float, f: float) -> np.ndarray:
    return np.diag(engine_levels(E0, [f])[0]).astype(complex)


def cycle_work_ideal(E0: float, T: float) -> float:
    """T [ln 2 - ln(1 + exp(-E0 / T))]."""
    if E0 < 0 or T <= 0:
        raise ValueError("need E0 >= 0 and T > 0")
    return T * (LN2 - math.log1p(math.exp(-E0 / T)))


def cycle_work_faulty(E0: float, eps: float, T: float) -> float:
    return cycle_work_ideal(E0, T) - eps * E0


@dataclass(frozen=True)
class OptimalWork:
    E0_star: float  # math.inf when eps == 0
    W_star: float


def optimal_work(eps: float, T: float) -> OptimalWork:
    """Best quench height and the resulting work T [ln 2 - S(eps)].

    At eps = 0 the optimum is approached only as E0 -> infinity; ``E0_star``
    is then ``math.inf``.
    """
    if not 0.0 <= eps <= 0.5:
        raise ValueError("eps must lie in [0, 1/2]")
    if T <= 0:
        raise ValueError("temperature must be positive")
    w = T * (LN2 - binary_entropy(eps))
    if eps == 0.0:
        return OptimalWork(math.inf, T * LN2)
    return OptimalWork(T * math.log((1.0 - eps) / eps), max(w, 0.0))


def golden_section_max(fn, lo: float, hi: float, tol: float = 1e-12, max_iter: int = 500):
    """Maximiser of a unimodal function on [lo, hi] by golden-section search."""
    inv = (math.sqrt(5.0) - 1.0) / 2.0
    a, b = lo, hi
    c, d = b - inv * (b - a), a + inv * (b - a)
    fc, fd = fn(c), fn(d)
    for _ in range(max_iter):
        if b - a <= tol * max(1.0, abs(a) + abs(b)):
            break
        if fc >= fd:
            b, d, fd = d, c, fc
            c = b - inv * (b - a)
            fc = fn(c)
        else:
            a, c, fc = c, d, fd
            d = a + inv * (b - a)
            fd = fn(d)
    x = 0.5 * (a + b)
    return x, fn(x)


def maximize_faulty_work(eps: float, T: float, tol: float = 1e-12) -> OptimalWork:
    """Numerical maximisation of the faulty-measurement work over E0 (golden section)."""
    if not 0.0 < eps <= 0.5:
        raise ValueError("eps must lie in (0, 1/2]")
    upper = T * (math.log(1.0 / eps) + 10.0)
    e_star, w_star = golden_section_max(lambda e: cycle_work_faulty(e, eps, T), 0.0, upper, tol)
    return OptimalWork(e_star, w_star)


def efficiency(eps: float, T: float, theta: float) -> float:
    """Extracted work over switch cost: (T/theta)(ln 2 - S(eps)) / (-ln eps)."""
    if not 0.0 <= eps <= 0.5:
        raise ValueError("eps must lie in [0, 1/2]")
    if eps == 0.0 or eps == 0.5:
        return 0.0
    return (T / theta) * (LN2 - binary_entropy(eps)) / -math.log(eps)


def max_efficiency(T: float = 1.0, theta: float = 1.0) -> tuple[float, float]:
    """(eps_bar, eta_bar) maximising the efficiency on (0, 1/2)."""
    res = minimize_scalar(lambda e: -efficiency(e, T, theta), bounds=(1e-9, 0.5 - 1e-9),
                          method="bounded", options={"xatol": 1e-12})
    return float(res.x), -float(res.fun)


def ramp_grid(cfg: EngineConfig, start: float) -> np.ndarray:
    """Control values from ``start`` (= +-1) to 0 using ``cfg.ramp_steps`` steps."""
    k = cfg.ramp_steps
    if cfg.ramp == "linear":
        return np.linspace(start, 0.0, k + 1)
    mags = np.geomspace(1.0, cfg.f_min, k)
    return np.append(start * mags, 0.0)


def simulate_branch(cfg: EngineConfig, correct: bool, outcome: int = 1) -> CycleLedger:
    """One measurement branch of the cycle.

    i)   f = 0, spin in I/2 (energy 0).
    ii)  measurement gives ``outcome``; the state is |outcome> if ``correct``
         else |-outcome>.  H = 0, so no energy changes.
    iii) quench f: 0 -> outcome.  Work equals the energy of the occupied level.
    iv)  thermalise at fixed f, then ramp f back to 0 through Gibbs states.
    """
    if outcome not in (1, -1):
        raise ValueError("outcome must be +1 or -1")
    occupied = 0 if (outcome == 1) == correct else 1
    top = engine_levels(cfg.E0, [outcome])[0]
    work_in = float(top[occupied])
    energy = work_in

    grid = ramp_grid(cfg, float(outcome))
    levels = engine_levels(cfg.E0, grid)
    w_ramp, q_ramp, e_start, e_end = _kernels.ramp_work(np.ascontiguousarray(levels), float(cfg.T))
    heat = (e_start - energy) + q_ramp
    # back at f = 0 the Gibbs state is I/2 with zero energy, matching step i
    return CycleLedger(work_in, -float(w_ramp), float(heat), float(e_end))


def simulate_cycle(cfg: EngineConfig) -> CycleLedger:
    """Branch-averaged ledger: weight 1 - eps on the correct branch, eps on the wrong one."""
    good = simulate_branch(cfg, True)
    bad = simulate_branch(cfg, False)
    w = cfg.eps
    return CycleLedger(
        (1 - w) * good.work_in + w * bad.work_in,
        (1 - w) * good.work_out + w * bad.work_out,
        (1 - w) * good.heat + w * bad.heat,
        (1 - w) * good.internal_energy_change + w * bad.internal_energy_change,
    )


def sample_cycles(cfg: EngineConfig, n: int, seed: int = 0) -> CycleLedger:
    """Monte Carlo average over ``n`` cycles with random outcomes and faults."""
    rng = np.random.default_rng(seed)
    outcomes = rng.choice([1, -1], size=n)
    faults = rng.random(n) < cfg.eps
    cache = {}
    totals = np.zeros(4)
    for s, bad in zip(outcomes, faults):
        key = (int(s), bool(bad))
        if key not in cache:
            led = simulate_branch(cfg, not bad, int(s))
            cache[key] = np.array([led.work_in, led.work_out, led.heat, led.internal_energy_change])
        totals += cache[key]
    return CycleLedger(*(totals / n))


# ---------------------------------------------------------------------------
# Measurement through the switch
# ---------------------------------------------------------------------------


def cnot_measurement(engine_spin: DensityMatrix, switch: SwitchState, p: SwitchParams) -> DensityMatrix:
    """Engine spin controls a flip of the switch spin.

    "Up" leaves the switch untouched; "down" conjugates the switch by sigma1.
    The engine spin must be diagonal in the tau3 basis.
    """
    if engine_spin.dim != 2:
        raise ValueError("engine spin must be a qubit")
    if abs(engine_spin.matrix[0, 1]) > 1e-12:
        raise ValueError("engine spin must be diagonal in the tau3 basis")
    up = np.diag([1.0, 0.0]).astype(complex)
    down = np.diag([0.0, 1.0]).astype(complex)
    flip = embed(SIGMA1, 0, p.space)
    u = np.kron(up, np.eye(p.space.dim)) + np.kron(down, flip)
    joint = tensor(engine_spin, switch.rho)
    return joint.conjugate_by(u)

