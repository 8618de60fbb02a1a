"""Command-line driver: analyses over scenario files, reports and CSVs.

Exit codes: 0 success, 2 invalid configuration, 3 numerical failure
(non-convergence or timeout), 4 mathematical precondition not met.
"""

from __future__ import annotations

import argparse
import os
import sys

from .analysis import classify, compare_models, monotonicity_sweep, propagation_probe
from .errors import ConditionNotMetError, InvalidConfigError, NumericalError
from .grids import Scenario
from .ode import OdeParams, averaged_params, final_size, simulate_sir
from .pde import run_to_extinction
from .scenario_io import (
    fmt,
    make_report,
    parse_scenario,
    render_report,
    scenario_hash,
    write_comparison_csv,
    write_field_csv,
    write_ode_csv,
    write_sweep_csv,
    write_trace_csv,
)
from .spectral import critical_diffusivity, threshold_eigenpair

EXIT_OK = 0
EXIT_INVALID_CONFIG = 2
EXIT_NUMERICAL = 3
EXIT_CONDITION_NOT_MET = 4

_SCENARIO_COMMANDS = ("eigen", "simulate", "ode", "threshold", "dstar", "compare", "sweep", "probe")


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="epithreshold",
        description="Threshold analysis and simulation of the spatial SIR model.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p, scales=False, dstar=False):
        p.add_argument("--scenario", required=True, help="scenario TOML file")
        p.add_argument("--out", help="directory for the report and CSV outputs")
        p.add_argument("--dt", type=float, help="time step override")
        p.add_argument("--tmax", type=float, help="time horizon override")
        p.add_argument("--grid-n", type=int, help="cells-per-axis override")
        p.add_argument("--tol", type=float, help="classification tolerance around zero")
        if scales:
            p.add_argument("--scales", help="comma-separated I0 scale factors")
        if dstar:
            p.add_argument("--d-lo", type=float, default=1e-2, help="initial lower bracket")
            p.add_argument("--d-hi", type=float, default=1e2, help="initial upper bracket")

    add_common(sub.add_parser("eigen", help="principal eigenpair of the threshold operator"))
    add_common(sub.add_parser("simulate", help="integrate the PDE to extinction"))
    add_common(sub.add_parser("ode", help="integrate the averaged temporal model"))
    add_common(sub.add_parser("threshold", help="classify propagation vs fade-off"))
    add_common(sub.add_parser("dstar", help="critical infectious diffusivity"), dstar=True)
    add_common(sub.add_parser("compare", help="diffusive vs averaged final sizes"), scales=True)
    add_common(sub.add_parser("probe", help="susceptible loss under shrinking seeds"), scales=True)
    sweep = sub.add_parser("sweep", help="eigenvalue along a parameter axis")
    add_common(sweep)
    sweep.add_argument(
        "--axis",
        required=True,
        choices=("d_I", "mu_shift", "alpha_scale", "s0_scale"),
        help="parameter axis to sweep",
    )
    sweep.add_argument("--samples", required=True, help="comma-separated sample values")

    fs = sub.add_parser("final-size", help="final size of the temporal SIR model")
    fs.add_argument("--alpha", type=float, required=True)
    fs.add_argument("--mu", type=float, required=True)
    fs.add_argument("--s0", type=float, required=True)
    fs.add_argument("--i0", type=float, required=True)
    fs.add_argument("--out", help="directory for the report")
    return parser


def _parse_csv_floats(text: str, flag: str) -> tuple[float, ...]:
    try:
        values = tuple(float(v) for v in text.split(",") if v.strip())
    except ValueError as exc:
        raise InvalidConfigError(f"{flag} must be a comma-separated float list: {exc}") from exc
    if not values:
        raise InvalidConfigError(f"{flag} must contain at least one value")
    return values


def _out_path(out_dir: str, name: str) -> str:
    return os.path.join(out_dir, name)


def _emit(report: dict, out_dir: str | None) -> None:
    text = render_report(report)
    sys.stdout.write(text)
    if out_dir:
        with open(_out_path(out_dir, "report.json"), "w", encoding="utf-8") as fh:
            fh.write(text)


def _load_scenario(args) -> Scenario:
    scenario = parse_scenario(args.scenario, cells=args.grid_n)
    return scenario


def _run_command(args) -> int:
    out = getattr(args, "out", None)
    if out:
        os.makedirs(out, exist_ok=True)

    if args.command == "final-size":
        value = final_size(OdeParams(alpha=args.alpha, mu=args.mu), args.s0, args.i0)
        sys.stdout.write(fmt(value) + "\n")
        if out:
            report = make_report(s_infinity_averaged=value, timings={})
            with open(_out_path(out, "report.json"), "w", encoding="utf-8") as fh:
                fh.write(render_report(report))
        return EXIT_OK

    scenario = _load_scenario(args)
    sc_hash = scenario_hash(scenario)
    dt = args.dt if args.dt is not None else scenario.default_dt()
    t_max = args.tmax if args.tmax is not None else scenario.numerics.t_max

    if args.command == "eigen":
        result = threshold_eigenpair(scenario)
        field_paths = []
        if out:
            phi_path = _out_path(out, "phi.csv")
            write_field_csv(phi_path, result.phi)
            field_paths.append(phi_path)
        report = make_report(
            scenario_hash=sc_hash,
            lambda1=result.eigenvalue,
            field_paths=field_paths,
            timings={"eigen_iterations": result.iterations},
        )
        _emit(report, out)
        return EXIT_OK

    if args.command == "simulate":
        result = run_to_extinction(scenario, dt=dt, t_max=t_max)
        trace_path = None
        field_paths = []
        if out:
            trace_path = _out_path(out, "trace.csv")
            write_trace_csv(trace_path, result.trace)
            for name, f in (("s_final.csv", result.final_state.s), ("i_final.csv", result.final_state.i)):
                p = _out_path(out, name)
                write_field_csv(p, f)
                field_paths.append(p)
        report = make_report(
            scenario_hash=sc_hash,
            s_infinity=result.s_infinity,
            trace_path=trace_path,
            field_paths=field_paths,
            timings={"pde_steps": result.steps},
        )
        _emit(report, out)
        if result.termination == "t_max":
            sys.stderr.write("simulation reached t_max before extinction\n")
            return EXIT_NUMERICAL
        return EXIT_OK

    if args.command == "ode":
        params, s0_bar, i0_bar = averaged_params(scenario)
        run = simulate_sir(params, s0_bar, i0_bar, dt=args.dt, t_max=t_max)
        trace_path = None
        if out:
            trace_path = _out_path(out, "trajectory.csv")
            write_ode_csv(trace_path, run)
        report = make_report(
            scenario_hash=sc_hash,
            s_infinity_averaged=run.s_infinity,
            trace_path=trace_path,
            timings={"ode_steps": len(run.times) - 1},
        )
        _emit(report, out)
        return EXIT_OK

    if args.command == "threshold":
        result = classify(scenario, tol=args.tol)
        report = make_report(
            scenario_hash=sc_hash,
            lambda1=result.lambda1,
            classification=result.classification,
            averaged_r0=result.averaged_r0,
            averaged_classification=result.averaged_classification,
            timings={},
        )
        _emit(report, out)
        return EXIT_OK

    if args.command == "dstar":
        d_star = critical_diffusivity(scenario, d_lo=args.d_lo, d_hi=args.d_hi)
        result = classify(scenario)
        report = make_report(
            scenario_hash=sc_hash,
            lambda1=result.lambda1,
            classification=result.classification,
            averaged_r0=result.averaged_r0,
            averaged_classification=result.averaged_classification,
            d_star=d_star,
            timings={},
        )
        _emit(report, out)
        return EXIT_OK

    if args.command in ("compare", "probe"):
        scales = _parse_csv_floats(args.scales, "--scales") if args.scales else None
        func = compare_models if args.command == "compare" else propagation_probe
        kwargs = {"dt": dt, "t_max": t_max}
        if scales is not None:
            kwargs["scales"] = scales
        result = func(scenario, **kwargs)
        rows_path = None
        if out:
            rows_path = _out_path(out, f"{args.command}_rows.csv")
            write_comparison_csv(rows_path, result)
        last = result.rows[-1]
        report = make_report(
            scenario_hash=sc_hash,
            lambda1=result.lambda1,
            classification=result.classification,
            s_infinity=last.s_infinity_pde,
            s_infinity_averaged=last.s_infinity_averaged,
            epsilon_empirical=result.epsilon_empirical,
            field_paths=[rows_path] if rows_path else [],
            timings={"pde_runs": len(result.rows)},
        )
        _emit(report, out)
        timed_out = any(r.termination == "t_max" for r in result.rows)
        if timed_out:
            sys.stderr.write("at least one probe run reached t_max before extinction\n")
            return EXIT_NUMERICAL
        return EXIT_OK

    if args.command == "sweep":
        samples = _parse_csv_floats(args.samples, "--samples")
        result = monotonicity_sweep(scenario, args.axis, samples)
        field_paths = []
        if out:
            sweep_path = _out_path(out, "sweep.csv")
            write_sweep_csv(sweep_path, result)
            field_paths.append(sweep_path)
        report = make_report(
            scenario_hash=sc_hash,
            field_paths=field_paths,
            timings={"eigen_solves": len(result.values)},
        )
        _emit(report, out)
        if not result.monotone_ok:
            sys.stderr.write(
                f"monotonicity violated on axis {result.axis} at {result.violations}\n"
            )
            return EXIT_NUMERICAL
        return EXIT_OK

    raise InvalidConfigError(f"unknown command {args.command!r}")


def run_cli(argv: list[str] | None = None) -> int:
    """Parse arguments and execute one subcommand; returns the exit code."""
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        return _run_command(args)
    except InvalidConfigError as exc:
        sys.stderr.write(f"error: {exc}\n")
        return EXIT_INVALID_CONFIG
    except ConditionNotMetError as exc:
        sys.stderr.write(f"condition not met: {exc}\n")
        return EXIT_CONDITION_NOT_MET
    except NumericalError as exc:
        sys.stderr.write(f"numerical failure: {exc}\n")
        return EXIT_NUMERICAL


def main() -> None:
    sys.exit(run_cli())


if __name__ == "__main__":
    main()
