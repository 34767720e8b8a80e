"""Compare the numba and numpy kernels on realistic inputs.

Usage: python3 benchmarks/bench_kernels.py [--repeat 5]

For every kernel and size the script checks that both backends agree and
prints the best-of-``repeat`` wall time of each.
"""

import argparse
import timeit

import numpy as np

from switchlab import _kernels
from switchlab.dynamics import BathSpec, build_generator
from switchlab.switch import SwitchParams
from switchlab.szilard import EngineConfig, engine_levels, ramp_grid


def davies_inputs(D, T):
    g = build_generator(SwitchParams(D, T=T), BathSpec(gamma_1=0.01), include_spin_flip=True)
    largest = max(g.blocks, key=lambda b: b[0].size)
    rows, cols, _ = largest
    return g, (rows, cols, g.energies, g.couplings, g.rates, g.labels, g.decay)


def cases():
    for D, T in ((0.6, 0.1), (1.0, 0.1), (1.4, 0.1)):
        g, block_args = davies_inputs(D, T)
        label = f"D={D} dim={g.dim}"
        yield "decay_matrix", label, (g.couplings, g.rates, g.labels)
        yield "davies_block", f"{label} block={block_args[0].size}", block_args
    for steps in (10_000, 100_000):
        cfg = EngineConfig(5.0, ramp_steps=steps)
        levels = np.ascontiguousarray(engine_levels(cfg.E0, ramp_grid(cfg, 1.0)))
        yield "ramp_work", f"steps={steps}", (levels, 1.0)


def max_diff(a, b):
    if isinstance(a, tuple):
        return max(abs(x - y) for x, y in zip(a, b))
    return float(np.max(np.abs(a - b)))


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args()

    print(f"{'kernel':<14}{'case':<30}{'numba [ms]':>12}{'numpy [ms]':>12}{'speedup':>9}{'max diff':>11}")
    for name, label, inputs in cases():
        jit, ref = _kernels.KERNELS[name]
        jit(*inputs)  # compile outside the timing
        diff = max_diff(jit(*inputs), ref(*inputs))
        t_jit = min(timeit.repeat(lambda: jit(*inputs), number=1, repeat=args.repeat))
        t_np = min(timeit.repeat(lambda: ref(*inputs), number=1, repeat=args.repeat))
        print(f"{name:<14}{label:<30}{1e3 * t_jit:12.3f}{1e3 * t_np:12.3f}{t_np / t_jit:9.1f}x{diff:11.1e}")
        if diff > 1e-9:
            raise SystemExit(f"{name}: backends disagree by {diff:.3e}")


if __name__ == "__main__":
    main()
