"""Command line entry point: ``delay-lorenz analyze|simulate|sweep``.

Exit codes: 0 success, 2 invalid input or parameters, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import contextlib
import json
import math
import sys
from typing import Any, Optional, Sequence, TextIO

import numpy as np

from . import __version__
from .dde import IntegrationError, Trajectory, integrate, integrate_ode
from .diagnostics import BehaviorReport, classify_trajectory, sweep_amplitude
from .model import PRESETS, DelayVariant, SystemParams, ValidityReport, validate_params
from .spectral import HopfReport, hopf_report

EXIT_OK = 0
EXIT_INVALID = 2
EXIT_NUMERIC = 3

DEFAULT_HISTORY = "0.01,0.02,0.03"


def num(value: Optional[float]) -> Optional[float]:
    """Round to 9 significant digits; non-finite values become null."""
    if value is None:
        return None
    value = float(value)
    if not math.isfinite(value):
        return None
    return float(f"{value:.9g}")


def fmt(value: float) -> str:
    return f"{float(value):.9g}"


def analysis_document(validity: ValidityReport, report: HopfReport) -> dict[str, Any]:
    flags = [
        {
            "code": "side_condition_failed",
            "detail": f"{name} fails although the origin is the unique equilibrium "
            "and the tau=0 Routh-Hurwitz test passes",
        }
        for name in validity.inconsistencies
    ]
    flags += [{"code": f.code, "detail": f.detail} for f in report.flags]
    rh = report.rh_tau0
    p = report.params
    return {
        "variant": report.variant.value,
        "params": {"a": num(p.a), "b": num(p.b), "c": num(p.c), "d": num(p.d)},
        "validity": {
            "valid": validity.valid,
            "checks": [
                {"name": c.name, "group": c.group, "margin": num(c.margin), "passed": c.passed}
                for c in validity.checks
            ],
            "inconsistencies": list(validity.inconsistencies),
        },
        "quasi_polynomial": {
            "p": [num(v) for v in report.qp.p],
            "q": [num(v) for v in report.qp.q],
        },
        "routh_hurwitz": {
            "coefficients": [num(rh.a2), num(rh.a1), num(rh.a0)],
            "margins": [num(m) for m in rh.margins],
            "stable": rh.stable,
        },
        "omega_cubic": [num(v) for v in report.cubic.coeffs],
        "crossings": [
            {
                "u0": num(c.u0),
                "omega0": num(c.omega0),
                "f_prime_u0": num(c.f_prime_u0),
                "direction": c.direction.value,
                "spacing": num(c.spacing),
                "tau_ladder": [num(t) for t in c.tau_ladder],
            }
            for c in report.crossings
        ],
        "tau0": num(report.tau0),
        "flags": flags,
        "warnings": list(report.warnings),
        "note": report.note,
    }


def behavior_document(
    variant: DelayVariant, tau: float, traj: Trajectory, rep: BehaviorReport
) -> dict[str, Any]:
    return {
        "variant": variant.value,
        "tau": num(tau),
        "dt": num(traj.dt),
        "samples": len(traj),
        "verdict": rep.verdict.value,
        "growth_rate": num(rep.growth_rate),
        "period": num(rep.period),
        "early_amplitude": num(rep.early_amplitude),
        "late_amplitude": num(rep.late_amplitude),
        "aborted": traj.aborted,
        "abort_time": num(rep.abort_time),
        "note": rep.note,
    }


def write_trajectory_csv(traj: Trajectory, stream: TextIO) -> None:
    stream.write("t,x,y,z\n")
    for t, (x, y, z) in zip(traj.times, traj.states):
        stream.write(f"{t:.9g},{x:.9g},{y:.9g},{z:.9g}\n")


def _dump(doc: dict, stream: TextIO) -> None:
    stream.write(json.dumps(doc, indent=2, ensure_ascii=False, allow_nan=False))
    stream.write("\n")


class _UsageError(Exception):
    pass


def _system(args) -> tuple[DelayVariant, SystemParams]:
    variant, base = None, None
    if args.preset:
        variant, base = PRESETS[args.preset]
    if args.variant:
        variant = DelayVariant.parse(args.variant)
    if variant is None:
        raise _UsageError("--variant is required (the chosen preset does not fix one)")
    values = {}
    for name in "abcd":
        given = getattr(args, name)
        if given is None:
            if base is None:
                raise _UsageError(f"--{name} is required without --preset")
            given = getattr(base, name)
        values[name] = given
    try:
        return variant, SystemParams(**values)
    except ValueError as exc:
        raise _UsageError(str(exc)) from None


def _history(text: str) -> tuple[float, float, float]:
    try:
        values = tuple(float(v) for v in text.split(","))
    except ValueError:
        raise _UsageError(f"--history must be three comma-separated numbers, got {text!r}")
    if len(values) != 3 or not all(math.isfinite(v) for v in values):
        raise _UsageError(f"--history must be three finite numbers, got {text!r}")
    return values


def cmd_analyze(args, out: TextIO) -> int:
    variant, params = _system(args)
    validity = validate_params(variant, params)
    report = hopf_report(variant, params, args.k_max)
    _dump(analysis_document(validity, report), out)
    return EXIT_OK if validity.valid else EXIT_INVALID


def _simulate(variant, params, tau, history, t_end, dt):
    if tau == 0:
        return integrate_ode(params, history, t_end, 1e-3 if dt is None else dt)
    return integrate(variant, params, tau, history, t_end, dt)


def cmd_simulate(args, out: TextIO) -> int:
    variant, params = _system(args)
    history = _history(args.history)
    if args.tau < 0:
        raise _UsageError("--tau must be non-negative")
    try:
        traj = _simulate(variant, params, args.tau, history, args.t_end, args.dt)
        rep = classify_trajectory(traj, args.settle, component=args.component)
    except (IntegrationError, ValueError) as exc:
        raise _UsageError(str(exc)) from None
    with open(args.out, "w", newline="\n", encoding="utf-8") as fh:
        write_trajectory_csv(traj, fh)
    _dump(behavior_document(variant, args.tau, traj, rep), out)
    return EXIT_NUMERIC if traj.aborted else EXIT_OK


def cmd_sweep(args, out: TextIO) -> int:
    variant, params = _system(args)
    history = _history(args.history)
    if not args.tau_min < args.tau_max:
        raise _UsageError("--tau-min must be smaller than --tau-max")
    if args.steps < 2:
        raise _UsageError("--steps must be at least 2")
    grid = np.linspace(args.tau_min, args.tau_max, args.steps)
    if grid[0] < 0:
        raise _UsageError("delays must be non-negative")
    points = sweep_amplitude(
        variant, params, grid, history, args.t_end, args.dt,
        settle_fraction=args.settle, component=args.component,
    )
    lines = ["tau,amplitude,verdict,growth_rate"]
    for p in points:
        verdict = p.verdict.value if p.verdict is not None else "Failed"
        lines.append(f"{fmt(p.tau)},{fmt(p.amplitude)},{verdict},{fmt(p.growth_rate)}")
    text = "\n".join(lines) + "\n"
    if args.out:
        with open(args.out, "w", newline="\n", encoding="utf-8") as fh:
            fh.write(text)
    else:
        out.write(text)
    return EXIT_NUMERIC if all(p.verdict is None for p in points) else EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--preset", choices=sorted(PRESETS))
    common.add_argument("--variant", choices=["A", "B", "C"], type=str.upper)
    for name in "abcd":
        common.add_argument(f"--{name}", type=float)
    common.add_argument("--no-banner", action="store_true", help="suppress the version banner")

    sim = argparse.ArgumentParser(add_help=False)
    sim.add_argument("--history", default=DEFAULT_HISTORY, help="constant history x,y,z")
    sim.add_argument("--t-end", type=float, default=100.0)
    sim.add_argument("--dt", type=float, default=None, help="default min(tau/50, 1e-3)")
    sim.add_argument("--settle", type=float, default=0.3)
    sim.add_argument("--component", choices=list("xyz"), default="x")

    parser = argparse.ArgumentParser(prog="delay-lorenz", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("analyze", parents=[common], help="stability and Hopf analysis")
    p.add_argument("--k-max", type=int, default=3)
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("simulate", parents=[common, sim], help="integrate and classify")
    p.add_argument("--tau", type=float, required=True)
    p.add_argument("--out", required=True, help="CSV trajectory file")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("sweep", parents=[common, sim], help="amplitude over a delay grid")
    p.add_argument("--tau-min", type=float, required=True)
    p.add_argument("--tau-max", type=float, required=True)
    p.add_argument("--steps", type=int, required=True)
    p.add_argument("--out", default=None, help="CSV file (default: standard output)")
    p.set_defaults(func=cmd_sweep)
    return parser


def main(argv: Optional[Sequence[str]] = None, out: TextIO = None, err: TextIO = None) -> int:
    out = sys.stdout if out is None else out
    err = sys.stderr if err is None else err
    parser = build_parser()
    try:
        with contextlib.redirect_stderr(err), contextlib.redirect_stdout(out):
            args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    if getattr(args, "k_max", 0) < 0:
        parser.print_usage(err)
        err.write("error: --k-max must be non-negative\n")
        return EXIT_INVALID
    if not args.no_banner:
        err.write(f"delay-lorenz {__version__}\n")
    try:
        return args.func(args, out)
    except _UsageError as exc:
        err.write(f"error: {exc}\n")
        return EXIT_INVALID


if __name__ == "__main__":
    sys.exit(main())
