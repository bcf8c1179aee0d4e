"""Command line front end.

Every subcommand writes one CSV file whose '#' header carries the complete
effective configuration; passing that file back with ``--config`` reruns it.

Exit codes: 0 success, 1 usage error, 2 numerical failure, 3 oracle check failed.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import sys
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import yaml

from . import __version__, analytic, montecarlo, oracle, sweep
from .errors import NumericalError
from .io import read_header, write_table
from .units import Dimension, PhysicalScale, alpha_from_kappa, to_natural

EXIT_OK, EXIT_USAGE, EXIT_NUMERICAL, EXIT_ORACLE = 0, 1, 2, 3


@dataclass
class RunConfig:
    command: str = "density"
    x0: float = -8.0
    v: float = 2.0
    a: float = 0.0
    alphas: list[float] = field(default_factory=lambda: [1.0])
    kappas: list[float] | None = None
    t_max: float = 200.0
    tol: float = 1e-6
    dt: float = 0.05
    bracket: list[float] | None = None
    alpha_tol: float = 1e-3
    velocities: list[float] = field(default_factory=lambda: list(sweep.DEFAULT_VELOCITIES))
    seed: int = 7
    n_events: int = 100_000
    sampler: str = "inverse"
    dxs: list[float] = field(default_factory=lambda: list(oracle.DEFAULT_DXS))
    t_end: float = 20.0
    l1_tol: float = oracle.L1_TOLERANCE
    hbar: float = 1.0
    mass: float = 1.0
    eta: float = 1.0
    output: str | None = None

    @property
    def scale(self) -> PhysicalScale:
        return PhysicalScale(self.hbar, self.mass, self.eta)

    def natural(self, name: str, dim: Dimension) -> float:
        return to_natural(self.scale, getattr(self, name), dim)

    def natural_alphas(self) -> list[float]:
        if self.kappas is not None:
            return [alpha_from_kappa(self.scale, k) for k in self.kappas]
        return [float(a) for a in self.alphas]

    def packet(self) -> analytic.GaussianPacket:
        return analytic.GaussianPacket(self.natural("x0", Dimension.LENGTH), self.natural("v", Dimension.VELOCITY))

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)


# optimize studies the packet resting on the detector
COMMAND_DEFAULTS = {
    "optimize": {"x0": 0.0, "v": 0.0},
    "scan": {"x0": 0.0, "v": 0.0, "alphas": list(np.round(np.linspace(0.1, 6.0, 60), 10))},
    "density": {"alphas": [0.5, 1.0, 2.0]},
}


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _floats(text: str) -> list[float]:
    try:
        return [float(x) for x in text.replace(",", " ").split()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected a comma separated list of numbers, got {text!r}")


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False, argument_default=argparse.SUPPRESS)
    common.add_argument("--config", help="YAML file, or an output CSV whose header is reused")
    common.add_argument("-o", "--output", help="output CSV path")
    common.add_argument("--x0", type=float, help="initial packet centre")
    common.add_argument("--v", type=float, help="initial packet velocity")
    common.add_argument("--a", type=float, help="detector position")
    common.add_argument("--alphas", type=_floats, help="dimensionless couplings alpha = m eta kappa / hbar")
    common.add_argument("--alpha", dest="alphas", type=lambda s: [float(s)])
    common.add_argument("--kappas", type=_floats, help="couplings in physical units (overrides --alphas)")
    common.add_argument("--t-max", dest="t_max", type=float)
    common.add_argument("--tol", type=float)
    common.add_argument("--dt", type=float, help="output sampling step")
    common.add_argument("--seed", type=int)
    common.add_argument("--hbar", type=float)
    common.add_argument("--mass", type=float)
    common.add_argument("--eta", type=float)

    parser = _Parser(prog="eeqt-arrival", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def add(name, help):
        return sub.add_parser(name, parents=[common], argument_default=argparse.SUPPRESS, help=help)

    add("density", "p(t), P(t) and the Wigner baseline")
    add("scan", "efficiency versus alpha")
    p = add("optimize", "optimal coupling by golden section")
    p.add_argument("--bracket", type=_floats)
    p.add_argument("--alpha-tol", dest="alpha_tol", type=float)
    p = add("sweep-velocity", "optimal coupling versus velocity")
    p.add_argument("--velocities", type=_floats)
    p.add_argument("--bracket", type=_floats)
    p.add_argument("--alpha-tol", dest="alpha_tol", type=float)
    p = add("simulate", "sample detection events")
    p.add_argument("-n", "--n-events", dest="n_events", type=int)
    p.add_argument("--sampler", choices=["inverse", "thinning"])
    p.add_argument("--dx", dest="dxs", type=lambda s: [float(s)], help="line spacing for the thinning sampler")
    p = add("oracle-check", "analytic vs grid vs line model")
    p.add_argument("--dxs", type=_floats)
    p.add_argument("--t-end", dest="t_end", type=float)
    p.add_argument("--l1-tol", dest="l1_tol", type=float)
    return parser


def _load_config_file(path: str) -> dict:
    text = Path(path).read_text()
    if text.startswith("#"):
        header = read_header(path)
        if "config" not in header:
            raise UsageError(f"{path} has no '# config:' header line")
        return json.loads(header["config"])
    data = yaml.safe_load(text) or {}
    if not isinstance(data, dict):
        raise UsageError(f"{path}: expected a mapping at top level")
    return data


def resolve_config(args: argparse.Namespace) -> RunConfig:
    flags = vars(args).copy()
    command = flags.pop("command")
    merged: dict = {"command": command, **COMMAND_DEFAULTS.get(command, {})}
    config_path = flags.pop("config", None)
    if config_path:
        from_file = _load_config_file(config_path)
        from_file.pop("command", None)
        merged.update(from_file)
    merged.update(flags)
    known = {f.name for f in dataclasses.fields(RunConfig)}
    unknown = set(merged) - known
    if unknown:
        raise UsageError(f"unknown configuration keys: {', '.join(sorted(unknown))}")
    cfg = RunConfig(**merged)
    if cfg.output is None:
        cfg.output = f"{command}.csv"
    _validate(cfg)
    return cfg


def _validate(cfg: RunConfig):
    try:
        cfg.scale
        alphas = cfg.natural_alphas()
    except ValueError as exc:
        raise UsageError(str(exc))
    if not alphas or any(a < 0 for a in alphas):
        raise UsageError("couplings must be non-negative")
    if cfg.t_max <= 0 or cfg.tol <= 0 or cfg.dt <= 0:
        raise UsageError("t_max, tol and dt must be positive")
    if cfg.n_events <= 0:
        raise UsageError("n_events must be positive")
    if cfg.bracket is not None and len(cfg.bracket) != 2:
        raise UsageError("bracket takes two numbers")


def _header(cfg: RunConfig, **results) -> dict:
    return {"program": "eeqt-arrival", "version": __version__, "command": cfg.command,
            "config": cfg.to_dict(), **results}


def _resample(times, values, dt):
    grid = np.arange(0.0, times[-1] + 0.5 * dt, dt)
    grid = grid[grid <= times[-1] + 1e-12]
    return grid, np.interp(grid, times, values)


def cmd_density(cfg: RunConfig) -> int:
    packet = cfg.packet()
    a = cfg.natural("a", Dimension.LENGTH)
    t_max = cfg.natural("t_max", Dimension.TIME)
    dt = cfg.natural("dt", Dimension.TIME)
    alphas = cfg.natural_alphas()
    names, columns, results = ["t"], [], {}
    grid = None
    for alpha in alphas:
        dist = analytic.cumulative_and_efficiency(packet, analytic.DetectorSpec(a, alpha), t_max, cfg.tol)
        grid, p = _resample(dist.times, dist.density, dt)
        _, P = _resample(dist.times, dist.cumulative, dt)
        suffix = "" if len(alphas) == 1 else f"[alpha={alpha:g}]"
        names += [f"p{suffix}", f"P{suffix}"]
        columns += [p, P]
        results[f"efficiency{suffix}"] = dist.efficiency
        results[f"tail_error{suffix}"] = dist.tail_error
        results[f"low_confidence{suffix}"] = dist.low_confidence
    names.append("wigner")
    columns.append(analytic.wigner_density(packet, a, grid))
    write_table(cfg.output, names, [grid, *columns], _header(cfg, **results))
    for key, value in results.items():
        if key.startswith("efficiency"):
            print(f"{key}: {value:.12g}")
    return EXIT_OK


def cmd_scan(cfg: RunConfig) -> int:
    scan = sweep.efficiency_curve(cfg.packet(), cfg.natural_alphas(), cfg.natural("a", Dimension.LENGTH),
                                  cfg.natural("t_max", Dimension.TIME), cfg.tol)
    write_table(cfg.output, ["alpha", "efficiency", "low_confidence"],
                [scan.alphas, scan.efficiencies, scan.low_confidence.astype(int)],
                _header(cfg, argmax_alpha=scan.argmax[0], argmax_efficiency=scan.argmax[1],
                        boundary=scan.boundary, slope_sign_changes=scan.slope_sign_changes))
    print(f"argmax alpha={scan.argmax[0]:.6g} efficiency={scan.argmax[1]:.12g}")
    return EXIT_OK


def cmd_optimize(cfg: RunConfig) -> int:
    alpha_star, p_star = sweep.optimize_alpha(cfg.packet(), cfg.bracket or (0.5, 3.0), cfg.alpha_tol,
                                              a=cfg.natural("a", Dimension.LENGTH),
                                              t_max=cfg.natural("t_max", Dimension.TIME), eff_tol=cfg.tol)
    write_table(cfg.output, ["alpha_star", "p_star"], [[alpha_star], [p_star]], _header(cfg))
    print(f"alpha_star={alpha_star:.12g} p_star={p_star:.12g}")
    return EXIT_OK


def cmd_sweep_velocity(cfg: RunConfig) -> int:
    rows = sweep.velocity_sweep(cfg.velocities, cfg.bracket, cfg.alpha_tol,
                                x0=cfg.natural("x0", Dimension.LENGTH), a=cfg.natural("a", Dimension.LENGTH),
                                t_max=cfg.natural("t_max", Dimension.TIME))
    slope, intercept, r2 = sweep.top_half_trend(rows)
    write_table(cfg.output, ["v", "alpha_star", "p_star"],
                [[r.v for r in rows], [r.alpha_star for r in rows], [r.p_star for r in rows]],
                _header(cfg, top_half_slope=slope, top_half_intercept=intercept, top_half_r2=r2))
    for r in rows:
        print(f"v={r.v:g} alpha_star={r.alpha_star:.6g} p_star={r.p_star:.6g}")
    print(f"top-half linear fit: slope={slope:.6g} intercept={intercept:.6g} R^2={r2:.6f}")
    return EXIT_OK


def cmd_simulate(cfg: RunConfig) -> int:
    packet = cfg.packet()
    a = cfg.natural("a", Dimension.LENGTH)
    alpha = cfg.natural_alphas()[0]
    det = analytic.DetectorSpec(a, alpha)
    t_max = cfg.natural("t_max", Dimension.TIME)
    dist = analytic.cumulative_and_efficiency(packet, det, t_max, cfg.tol)
    cdf = montecarlo.TabulatedCDF(dist)
    if cfg.sampler == "inverse":
        ens = montecarlo.sample_events(dist, cfg.n_events, cfg.seed)
        reference = cdf.normalized
    else:
        from . import engine

        dx = cfg.dxs[0]
        lo, hi = oracle.line_box(packet, det, t_max, dx)
        model = engine.discretized_line_model(engine.line_grid(lo, hi, dx), packet, det)
        ens = montecarlo.sample_events_thinning(model, cfg.n_events, cfg.seed, t_max)
        P_end = cdf(t_max)
        reference = lambda t: cdf(np.minimum(t, t_max)) / P_end  # noqa: E731
    ks = montecarlo.ks_test(ens, reference)
    sigma = montecarlo.binomial_sigma(dist.efficiency, cfg.n_events)
    ens.write_csv(cfg.output, _header(cfg, efficiency=dist.efficiency, detected_fraction=ens.detected_fraction,
                                      binomial_sigma=sigma, ks_statistic=float(ks.statistic),
                                      ks_pvalue=float(ks.pvalue)))
    print(f"detected_fraction={ens.detected_fraction:.6g} efficiency={dist.efficiency:.6g} "
          f"KS={ks.statistic:.4g} p={ks.pvalue:.4g}")
    return EXIT_OK


def cmd_oracle_check(cfg: RunConfig) -> int:
    packet = cfg.packet()
    a = cfg.natural("a", Dimension.LENGTH)
    t_end = cfg.natural("t_end", Dimension.TIME)
    rows = []
    ok = True
    for alpha in cfg.natural_alphas():
        tri = oracle.triangle(alpha, packet, a, t_end, tuple(cfg.dxs))
        for name, value in tri.pairwise().items():
            passed = value <= cfg.l1_tol
            ok &= passed
            rows.append((alpha, f"L1 {name} dx={tri.finest:g}", value, cfg.l1_tol, passed))
        for which in ("grid", "line"):
            errs = tri.refinement(which)
            passed = tri.monotone(which)
            ok &= passed
            text = " > ".join(f"{e:.3e}" for _, e in errs)
            rows.append((alpha, f"refinement {which}: {text}", errs[-1][1], float("nan"), passed))
        valid = all(tri.grid_valid.values())
        ok &= valid
        rows.append((alpha, "grid boundary leakage", float(not valid), 0.0, valid))
    for alpha, name, value, threshold, passed in rows:
        print(f"{'PASS' if passed else 'FAIL'}  alpha={alpha:g}  {name}  value={value:.3e}")
    write_table(cfg.output, ["alpha", "check", "value", "threshold", "status"],
                [[r[0] for r in rows], [r[1] for r in rows], [r[2] for r in rows], [r[3] for r in rows],
                 ["PASS" if r[4] else "FAIL" for r in rows]],
                _header(cfg, overall="PASS" if ok else "FAIL"))
    return EXIT_OK if ok else EXIT_ORACLE


COMMANDS = {
    "density": cmd_density,
    "scan": cmd_scan,
    "optimize": cmd_optimize,
    "sweep-velocity": cmd_sweep_velocity,
    "simulate": cmd_simulate,
    "oracle-check": cmd_oracle_check,
}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = resolve_config(args)
        return COMMANDS[cfg.command](cfg)
    except UsageError as exc:
        print(f"eeqt-arrival: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except NumericalError as exc:
        print(f"eeqt-arrival: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except (TypeError, ValueError) as exc:
        print(f"eeqt-arrival: invalid configuration: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
