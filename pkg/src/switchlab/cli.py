"""Command-line front end: parameter sweeps written as CSV plus a gnuplot script.

Exit status: 0 success, 1 a property check failed, 2 usage error (unknown
flag, missing subcommand), 3 invalid parameter or range, 4 output not
writable, 5 configuration file error.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import io
import json
import math
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

from . import __version__

EXIT_OK = 0
EXIT_PROPERTY = 1
EXIT_USAGE = 2
EXIT_RANGE = 3
EXIT_OUTPUT = 4
EXIT_CONFIG = 5

OUTPUT_ENV = "SWITCHLAB_OUTPUT_DIR"


class CliError(Exception):
    def __init__(self, message: str, status: int):
        super().__init__(message)
        self.status = status


class ConfigError(CliError):
    def __init__(self, message: str):
        super().__init__(message, EXIT_CONFIG)


class RangeError(CliError):
    def __init__(self, message: str):
        super().__init__(message, EXIT_RANGE)


# ---------------------------------------------------------------------------
# Parameter types
# ---------------------------------------------------------------------------


def parse_grid(text: str) -> list[float]:
    """``start:stop:step`` (inclusive), a comma list, or a single number."""
    text = str(text).strip()
    try:
        if ":" in text:
            parts = [float(x) for x in text.split(":")]
            if len(parts) != 3:
                raise RangeError(f"grid {text!r} must be start:stop:step")
            start, stop, step = parts
            if step <= 0 or stop < start:
                raise RangeError(f"grid {text!r} needs step > 0 and stop >= start")
            n = int(math.floor((stop - start) / step + 1e-9)) + 1
            return [round(start + i * step, 12) for i in range(n)]
        return [float(x) for x in text.split(",") if x.strip()]
    except ValueError as exc:
        raise RangeError(f"cannot parse grid {text!r}: {exc}") from None


def _float(text) -> float:
    try:
        return float(text)
    except ValueError:
        raise RangeError(f"not a number: {text!r}") from None


def _int(text) -> int:
    try:
        return int(str(text), 0)
    except ValueError:
        raise RangeError(f"not an integer: {text!r}") from None


@dataclass(frozen=True)
class Param:
    name: str
    default: str
    kind: str  # "grid", "float" or "int"
    help: str

    def convert(self, raw):
        return {"grid": parse_grid, "float": _float, "int": _int}[self.kind](raw)


SUBCOMMANDS: dict[str, tuple[str, list[Param]]] = {
    "switch-overlap": ("pointer-state overlap eps against D and temperature", [
        Param("D", "0.5:2:0.5", "grid", "displacement grid"),
        Param("kT_over_hw", "0", "grid", "k_B T / (hbar omega0) grid"),
    ]),
    "switch-lifetime": ("Kramers lifetime of the encoded bit", [
        Param("D", "0.6:1.4:0.2", "grid", "displacement grid"),
        Param("kT_over_hw", "0.1", "float", "k_B T / (hbar omega0)"),
        Param("gamma_o", "1", "float", "oscillator damping rate"),
        Param("gamma_1", "0.01", "float", "bare spin-flip rate"),
    ]),
    "szilard-sweep": ("optimal Szilard work and efficiency against eps", [
        Param("eps_grid", "0.01:0.49:0.01", "grid", "measurement error grid"),
        Param("kT", "1", "float", "bath temperature"),
        Param("theta", "1", "float", "noise temperature of the switch"),
    ]),
    "bounds": ("encoding work, lifetime and computation cost", [
        Param("eps_grid", "0.01,0.06,0.1,0.25,0.49", "grid", "error grid"),
        Param("N_grid", "1e2,1e10,1e20", "grid", "computation length grid"),
        Param("theta", "1", "float", "noise temperature"),
        Param("kT", "1", "float", "bath temperature for the Landauer reference"),
    ]),
    "channel-props": ("randomised overlap-axiom checks", [
        Param("dim", "2", "int", "system dimension"),
        Param("env_dim", "2", "int", "environment dimension of the random channels"),
        Param("count", "1000", "int", "number of samples"),
    ]),
    "holevo": ("Holevo quantity of a noisy equator ensemble", [
        Param("eps_grid", "0:0.5:0.05", "grid", "noise grid"),
        Param("n_states", "2", "int", "number of equator states"),
    ]),
    "double-well": ("entropy bookkeeping of the symmetric double well", [
        Param("kT", "100", "float", "temperature"),
        Param("splitting", "1", "float", "tunnel splitting"),
    ]),
}


@dataclass
class RunConfig:
    subcommand: str
    params: dict
    out_dir: Path
    seed: int = 0
    jobs: int = 1
    raw: dict = field(default_factory=dict)

    def digest(self) -> str:
        blob = json.dumps({"subcommand": self.subcommand, "params": self.raw, "seed": self.seed},
                          sort_keys=True)
        return hashlib.sha256(blob.encode()).hexdigest()


def _norm_key(key: str) -> str:
    return key.strip().lstrip("-").replace("-", "_")


def load_config(path) -> dict[str, str]:
    """Flat ``key = value`` file; ``#`` starts a comment.  Keys are not validated here."""
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc.strerror}") from None
    out = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        stripped = line.split("#", 1)[0].strip()
        if not stripped:
            continue
        if "=" not in stripped:
            raise ConfigError(f"{path}:{lineno}: expected key = value, got {line.strip()!r}")
        key, value = (s.strip() for s in stripped.split("=", 1))
        if not key or not value:
            raise ConfigError(f"{path}:{lineno}: empty key or value")
        out[_norm_key(key)] = value
    return out


def resolve(subcommand: str, flags: dict, config_path, out, seed, jobs) -> RunConfig:
    """Defaults, then the config file, then explicit flags."""
    spec = {p.name: p for p in SUBCOMMANDS[subcommand][1]}
    raw = {name: p.default for name, p in spec.items()}
    extra = {}
    if config_path:
        for key, value in load_config(config_path).items():
            if key in spec:
                raw[key] = value
            elif key in ("seed", "jobs", "out"):
                extra[key] = value
            else:
                raise ConfigError(f"unknown key {key!r} for {subcommand}")
    raw.update({k: v for k, v in flags.items() if v is not None})
    params = {name: spec[name].convert(value) for name, value in raw.items()}
    seed = seed if seed is not None else _int(extra.get("seed", "0"))
    jobs = jobs if jobs is not None else _int(extra.get("jobs", "1"))
    if seed < 0 or jobs < 1:
        raise RangeError("seed must be >= 0 and jobs >= 1")
    out_dir = Path(out or extra.get("out") or os.environ.get(OUTPUT_ENV) or ".")
    cfg = RunConfig(subcommand, params, out_dir, seed, jobs, raw)
    validate(cfg)
    return cfg


def _require(cond: bool, message: str):
    if not cond:
        raise RangeError(message)


def validate(cfg: RunConfig):
    """Check every parameter against the preconditions of the target computation."""
    p = cfg.params
    name = cfg.subcommand
    if name in ("switch-overlap", "switch-lifetime"):
        _require(len(p["D"]) > 0 and all(d >= 0 for d in p["D"]), "D must be >= 0")
    if name == "switch-overlap":
        _require(len(p["kT_over_hw"]) > 0 and all(t >= 0 for t in p["kT_over_hw"]),
                 "kT-over-hw must be >= 0")
    if name == "switch-lifetime":
        _require(p["kT_over_hw"] > 0, "lifetimes need kT-over-hw > 0")
        _require(p["gamma_o"] > 0 and p["gamma_1"] > 0, "rates must be positive")
    if name == "szilard-sweep":
        _require(len(p["eps_grid"]) > 0 and all(0 < e < 0.5 for e in p["eps_grid"]),
                 "eps grid must lie in (0, 1/2)")
    if name == "bounds":
        _require(len(p["eps_grid"]) > 0 and all(0 < e < 0.5 for e in p["eps_grid"]),
                 "eps grid must lie in (0, 1/2)")
        _require(len(p["N_grid"]) > 0 and all(n >= 2 for n in p["N_grid"]), "N must be >= 2")
    if name in ("szilard-sweep", "bounds"):
        _require(p["kT"] > 0 and p["theta"] > 0, "kT and theta must be positive")
    if name == "channel-props":
        _require(2 <= p["dim"] <= 16, "dim must lie in [2, 16]")
        _require(p["env_dim"] >= 1 and p["count"] >= 1, "env-dim and count must be positive")
    if name == "holevo":
        _require(len(p["eps_grid"]) > 0 and all(0 <= e <= 0.5 for e in p["eps_grid"]),
                 "eps grid must lie in [0, 1/2]")
        _require(p["n_states"] >= 1, "n-states must be positive")
    if name == "double-well":
        _require(p["kT"] > 0 and p["splitting"] > 0, "kT and splitting must be positive")
        _require(p["kT"] / p["splitting"] >= 100, "double well needs kT >= 100 * splitting")


# ---------------------------------------------------------------------------
# Computations, one row per grid point
# ---------------------------------------------------------------------------


def _pmap(fn, items, jobs):
    if jobs <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(jobs) as pool:
        return list(pool.map(fn, items))  # map keeps grid order


def _overlap_rows(cfg):
    from .switch import SwitchParams, barrier_energy, noise_temperature, overlap_analytic, overlap_numeric

    grid = [(d, t) for d in cfg.params["D"] for t in cfg.params["kT_over_hw"]]

    def row(point):
        d, t = point
        p = SwitchParams(d, 1.0, t)
        theta = noise_temperature(p)
        return [d, t, theta, barrier_energy(p) / theta, overlap_analytic(p), overlap_numeric(p)]

    header = ["D", "kT_over_hw", "theta_over_hw", "W_over_theta", "eps", "eps_numeric"]
    return header, _pmap(row, grid, cfg.jobs), None


def _lifetime_rows(cfg):
    from .dynamics import BathSpec, estimate_lifetime
    from .switch import SwitchParams, barrier_energy, noise_temperature, overlap_analytic

    t = cfg.params["kT_over_hw"]
    bath = BathSpec(cfg.params["gamma_o"], cfg.params["gamma_1"])

    def row(d):
        p = SwitchParams(d, 1.0, t)
        est = estimate_lifetime(p, bath)
        eps = overlap_analytic(p)
        return [d, barrier_energy(p) / noise_temperature(p), est.tau, est.tau0, est.ratio, eps,
                est.ratio * eps, est.fit_error, int(est.flagged)]

    header = ["D", "W_over_theta", "tau", "tau0", "tau_over_tau0", "eps", "tau_eps_over_tau0",
              "fit_error", "flagged"]
    return header, _pmap(row, cfg.params["D"], cfg.jobs), None


def _szilard_rows(cfg):
    from .szilard import efficiency, optimal_work

    kt, theta = cfg.params["kT"], cfg.params["theta"]

    def row(eps):
        opt = optimal_work(eps, kt)
        return [eps, opt.E0_star / kt, opt.W_star / kt, efficiency(eps, kt, theta) * theta / kt]

    rows = _pmap(row, cfg.params["eps_grid"], cfg.jobs)
    best = max(range(len(rows)), key=lambda i: rows[i][3])
    for i, r in enumerate(rows):
        r.append(int(i == best))
    header = ["eps", "E0_star_over_kT", "W_star_over_kT", "eta_times_theta_over_kT", "is_max"]
    return header, rows, f"max eta*theta/kT = {rows[best][3]:.6g} at eps = {rows[best][0]:.6g}"


def _bounds_rows(cfg):
    from .bounds import computation_cost, encode_work, max_lifetime

    theta, kt = cfg.params["theta"], cfg.params["kT"]
    rows = []
    for eps in cfg.params["eps_grid"]:
        for n in cfg.params["N_grid"]:
            cost = computation_cost(n, theta, kt)
            rows.append([eps, encode_work(eps, theta) / theta, max_lifetime(eps, 1.0), n,
                         cost.value / theta, cost.ratio])
    header = ["eps", "W_over_theta", "tau_over_tau0", "N", "cost_over_theta", "landauer_ratio"]
    return header, rows, None


def _channel_rows(cfg):
    from .channels import SampleConfig, check_axioms

    sc = SampleConfig(cfg.params["dim"], cfg.params["env_dim"], cfg.params["count"], cfg.seed)
    report = check_axioms(sc, workers=cfg.jobs)
    rows = [[s.index, s.overlap_before, s.overlap_after, s.monotonicity_margin,
             s.factorization_error, s.identity_error, int(s.range_ok)] for s in report.samples]
    header = ["index", "overlap_before", "overlap_after", "a3_margin", "a2_error", "a1_error",
              "range_ok"]
    return header, rows, report.summary()


def _holevo_rows(cfg):
    from .bounds import LN2, equator_ensemble, holevo_bound, noisy_holevo_bound
    from .quantum import binary_entropy

    ens = equator_ensemble(cfg.params["n_states"])
    base = holevo_bound(ens)
    rows = []
    for eps in cfg.params["eps_grid"]:
        r = noisy_holevo_bound(ens, eps)
        s = binary_entropy(eps)
        rows.append([eps, base, r.value, r.entropy_minus_noise, r.bound, s, r.bound + s - LN2])
    header = ["eps", "holevo_noiseless", "holevo_noisy", "entropy_minus_noise", "bound_ln2_minus_S",
              "S_eps", "complement_residual"]
    return header, rows, None


def _double_well_rows(cfg):
    from .bounds import double_well_demo

    kt, split = cfg.params["kT"], cfg.params["splitting"]
    r = double_well_demo(kt, split)
    header = ["kT", "splitting", "entropy", "decomposition_mismatch", "free_energy_excess_over_kT",
              "extractable_work_over_kT", "gibbs_entropy_deficit"]
    rows = [[kt, split, r.entropy, r.decomposition_mismatch, r.free_energy_excess / kt,
             r.extractable_work / kt, r.gibbs_entropy_deficit]]
    return header, rows, None


RUNNERS = {
    "switch-overlap": _overlap_rows,
    "switch-lifetime": _lifetime_rows,
    "szilard-sweep": _szilard_rows,
    "bounds": _bounds_rows,
    "channel-props": _channel_rows,
    "holevo": _holevo_rows,
    "double-well": _double_well_rows,
}

PLOT_COLUMNS = {
    "switch-overlap": ("W_over_theta", "eps", "set logscale y"),
    "switch-lifetime": ("W_over_theta", "tau_over_tau0", "set logscale y"),
    "szilard-sweep": ("eps", "eta_times_theta_over_kT", ""),
    "bounds": ("eps", "W_over_theta", ""),
    "channel-props": ("overlap_before", "overlap_after", ""),
    "holevo": ("eps", "holevo_noisy", ""),
    "double-well": ("kT", "entropy", ""),
}


# ---------------------------------------------------------------------------
# Output
# ---------------------------------------------------------------------------


def _fmt(v) -> str:
    if isinstance(v, (int, bool)) and not isinstance(v, float):
        return str(int(v))
    v = float(v)
    if math.isinf(v):
        return "inf" if v > 0 else "-inf"
    if math.isnan(v):
        return "nan"
    return "%.12g" % v


def render_csv(cfg: RunConfig, header, rows) -> str:
    buf = io.StringIO()
    buf.write(f"# switchlab {__version__}\n")
    buf.write(f"# subcommand {cfg.subcommand}\n")
    buf.write(f"# config_sha256 {cfg.digest()}\n")
    buf.write(f"# seed {cfg.seed}\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for r in rows:
        w.writerow([_fmt(v) for v in r])
    return buf.getvalue()


def render_plot(cfg: RunConfig, header, csv_name: str) -> str:
    xname, yname, extra = PLOT_COLUMNS[cfg.subcommand]
    xi, yi = header.index(xname) + 1, header.index(yname) + 1
    lines = [
        f"# gnuplot script for {csv_name}; run: gnuplot -p {cfg.subcommand}.gp",
        "set datafile separator ','",
        "set datafile commentschars '#'",
        "set key autotitle columnhead",
        f"set xlabel '{xname}'",
        f"set ylabel '{yname}'",
    ]
    if extra:
        lines.append(extra)
    lines.append(f"plot '{csv_name}' using {xi}:{yi} with linespoints")
    return "\n".join(lines) + "\n"


def write_outputs(cfg: RunConfig, header, rows) -> Path:
    csv_path = cfg.out_dir / f"{cfg.subcommand}.csv"
    try:
        cfg.out_dir.mkdir(parents=True, exist_ok=True)
        csv_path.write_text(render_csv(cfg, header, rows))
        (cfg.out_dir / f"{cfg.subcommand}.gp").write_text(render_plot(cfg, header, csv_path.name))
    except OSError as exc:
        raise CliError(f"cannot write to {cfg.out_dir}: {exc.strerror or exc}", EXIT_OUTPUT) from None
    return csv_path


# ---------------------------------------------------------------------------
# Entry point
# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="switchlab", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"switchlab {__version__}")
    sub = parser.add_subparsers(dest="subcommand", metavar="SUBCOMMAND")
    for name, (help_text, params) in SUBCOMMANDS.items():
        sp = sub.add_parser(name, help=help_text, description=help_text)
        for p in params:
            sp.add_argument("--" + p.name.replace("_", "-"), dest=p.name, default=None,
                            help=f"{p.help} (default {p.default})")
        sp.add_argument("--config", help="key = value file; flags override it")
        sp.add_argument("--out", help=f"output directory (default ${OUTPUT_ENV} or .)")
        sp.add_argument("--seed", type=int, default=None, help="random seed (default 0)")
        sp.add_argument("--jobs", type=int, default=None, help="worker threads (default 1)")
    return parser


def run(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    if not argv:
        parser.print_usage(sys.stderr)
        return EXIT_USAGE
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    if args.subcommand is None:
        parser.print_usage(sys.stderr)
        return EXIT_USAGE
    names = [p.name for p in SUBCOMMANDS[args.subcommand][1]]
    flags = {n: getattr(args, n) for n in names}
    try:
        cfg = resolve(args.subcommand, flags, args.config, args.out, args.seed, args.jobs)
        header, rows, summary = RUNNERS[cfg.subcommand](cfg)
        path = write_outputs(cfg, header, rows)
    except CliError as exc:
        print(f"switchlab: error: {exc}", file=sys.stderr)
        return exc.status
    except ValueError as exc:
        print(f"switchlab: error: {exc}", file=sys.stderr)
        return EXIT_RANGE
    print(f"wrote {path} ({len(rows)} rows)")
    if summary:
        print(summary)
        if summary.startswith("FAIL"):
            return EXIT_PROPERTY
    return EXIT_OK


def main():
    sys.exit(run())


if __name__ == "__main__":
    main()
