"""switchlab: numerical laboratory for a spin-oscillator switch, its open dynamics,
a faulty-measurement Szilard engine and the overlap inequalities behind them."""

__version__ = "0.1.0"

from .quantum import (  # noqa: E402
    DensityMatrix,
    SpaceSpec,
    StateVector,
    TruncationError,
    binary_entropy,
    coherent_state,
    overlap,
    partial_trace,
    tensor,
    trace_distance,
    von_neumann_entropy,
)
from .switch import SwitchParams, SwitchState, biased_gibbs, overlap_analytic, overlap_numeric  # noqa: E402
from .dynamics import BathSpec, LindbladGenerator, build_generator, estimate_lifetime, evolve  # noqa: E402
from .szilard import CycleLedger, EngineConfig, max_efficiency, optimal_work, simulate_cycle  # noqa: E402
from .bounds import Ensemble, computation_cost, encode_work, holevo_bound, max_lifetime  # noqa: E402
from .channels import QuantumChannel, SampleConfig, apply_channel, check_axioms  # noqa: E402

__all__ = [
    "BathSpec", "CycleLedger", "DensityMatrix", "EngineConfig", "Ensemble", "LindbladGenerator",
    "QuantumChannel", "SampleConfig", "SpaceSpec", "StateVector", "SwitchParams", "SwitchState",
    "TruncationError", "apply_channel", "binary_entropy", "biased_gibbs", "build_generator",
    "check_axioms", "coherent_state", "computation_cost", "encode_work", "estimate_lifetime",
    "evolve", "holevo_bound", "max_efficiency", "max_lifetime", "optimal_work", "overlap",
    "overlap_analytic", "overlap_numeric", "partial_trace", "simulate_cycle", "tensor",
    "trace_distance", "von_neumann_entropy",
]
