"""Command-line entry point.

Exit codes: 0 success, 1 failed order law or invariant, 2 invalid configuration,
3 numerical rejection (non-contractive step, no convergence, blow-up).
"""

from __future__ import annotations

import argparse
import os
import sys
from pathlib import Path

from . import analysis, fieldio, scheme
from .config import RunConfig
from .errors import BlowUp, ConfigError, NoConvergence, NonContractive, StepRejected
from .midpoint import FixedPointConfig
from .torus import GridSpec

EXIT_OK, EXIT_FAIL, EXIT_CONFIG, EXIT_NUMERIC = 0, 1, 2, 3
NUMERIC_ERRORS = (StepRejected, NonContractive, NoConvergence, BlowUp)


def _threads(cfg: RunConfig) -> int:
    if cfg.threads is not None:
        return cfg.threads
    env = os.environ.get("VORTEX_THREADS")
    if env:
        try:
            value = int(env)
        except ValueError:
            raise ConfigError("VORTEX_THREADS", f"expected an integer, got {env!r}") from None
        if value < 1:
            raise ConfigError("VORTEX_THREADS", "must be >= 1")
        return value
    return os.cpu_count() or 1


def _fixed_point(cfg: RunConfig) -> FixedPointConfig:
    return FixedPointConfig(cfg.fp_tol, cfg.max_iter)


def experiment(cfg: RunConfig, law: str) -> analysis.ExperimentSpec:
    return analysis.ExperimentSpec(
        law=law, initial=cfg.initial, sigma=cfg.sigma, tau_list=tuple(cfg.tau_list),
        t_final=cfg.t_final, n=cfg.n, fixed_point=_fixed_point(cfg), dt_ref=cfg.dt_ref,
        slope_tol=cfg.slope_tol, workers=_threads(cfg))


def cmd_run(cfg: RunConfig) -> int:
    grid = GridSpec(cfg.n)
    omega0 = cfg.initial.generate(grid)
    scfg = scheme.SchemeConfig(tau=cfg.tau, t_final=cfg.t_final, grid=grid,
                               fixed_point=_fixed_point(cfg), recenter=cfg.recenter,
                               norm_indices=tuple(cfg.norm_indices))
    out = Path(cfg.output_dir)
    result = scheme.run(omega0, scfg, snapshot_every=cfg.snapshot_every)
    fieldio.atomic_write(out / "monitors.csv", scheme.monitors_csv(result.trajectory))
    for index, omega in result.snapshots:
        fieldio.write_field(out / "snapshots" / f"step_{index:06d}.txt", omega)
    report = analysis.stability_monitor_report(result.trajectory)
    print(f"run: {result.final.step_index} steps to t={result.final.time:.6g}; "
          f"max H^s growth {max(report['ratios'].values()):.4f}")
    return EXIT_OK


def _emit(report: analysis.OrderReport, out: Path, stem: str) -> int:
    fieldio.atomic_write(out / f"{stem}.json", report.to_json())
    fieldio.atomic_write(out / f"{stem}.csv", report.to_csv())
    slope = "n/a" if report.slope is None else f"{report.slope:.4f}"
    verdict = "PASS" if report.passed else "FAIL"
    flags = f" [{'; '.join(report.flags)}]" if report.flags else ""
    print(f"{report.law}: slope {slope} (target {report.target_order}) {verdict}{flags}")
    return EXIT_OK if report.passed else EXIT_FAIL


def cmd_converge(cfg: RunConfig) -> int:
    report = analysis.global_error_sweep(experiment(cfg, "global"))
    return _emit(report, Path(cfg.output_dir), "global_report")


def cmd_local_error(cfg: RunConfig, law: str) -> int:
    name = {"freeze": "local_freeze", "midpoint": "local_midpoint"}[law]
    report = analysis.run_sweep(experiment(cfg, name))
    return _emit(report, Path(cfg.output_dir), f"{name}_report")


def cmd_invariants(cfg: RunConfig) -> int:
    omega0 = cfg.initial.generate(GridSpec(cfg.n))
    checks = analysis.structural_invariants(omega0, cfg.tau, _fixed_point(cfg), seed=cfg.initial.seed)
    print(f"{'invariant':<20} {'value':>12} {'tol':>10}  result")
    for c in checks:
        print(f"{c.name:<20} {c.value:>12.3e} {c.tol:>10.1e}  {'pass' if c.passed else 'FAIL'}")
    return EXIT_OK if all(c.passed for c in checks) else EXIT_FAIL


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="vortex", description=__doc__.splitlines()[0])
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", type=Path, help="YAML configuration file")
    common.add_argument("--tau", type=float)
    common.add_argument("--n", type=int)
    common.add_argument("--seed", type=int)
    common.add_argument("--threads", type=int)
    common.add_argument("--output", dest="output_dir")
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("run", parents=[common], help="run the scheme and write monitors")
    sub.add_parser("converge", parents=[common], help="global error sweep")
    local = sub.add_parser("local-error", parents=[common], help="local error sweep")
    local.add_argument("--law", choices=("freeze", "midpoint"), required=True)
    sub.add_parser("invariants", parents=[common], help="structural invariant suite")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = RunConfig.load(args.config) if args.config else RunConfig()
        cfg = cfg.override(tau=args.tau, n=args.n, seed=args.seed, threads=args.threads,
                           output_dir=args.output_dir)
        if args.command == "run":
            return cmd_run(cfg)
        if args.command == "converge":
            return cmd_converge(cfg)
        if args.command == "local-error":
            return cmd_local_error(cfg, args.law)
        return cmd_invariants(cfg)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except NUMERIC_ERRORS as exc:
        print(f"numerical rejection: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
