"""``offspread`` command line: run, sweep, analyze, calibrate, fit-s0.

Exit status: 0 success, 1 configuration or data error, 2 I/O error,
3 an emitted trajectory failed the post-hoc invariant checks.
"""

from __future__ import annotations

import argparse
import sys
from dataclasses import replace
from pathlib import Path
from typing import Optional, Sequence

from . import __version__
from .calibration import CorpusError, estimate_alpha, fit_s0, ingest_path, ingest_sample
from .dynamics import DEFAULT_HORIZON, trajectory_violations
from .experiments import (
    _num,
    _write_csv,
    run_scenario,
    sweep,
    sweep_svg,
    trajectory_svg,
    write_series_csv,
    write_sweep_csv,
    write_trajectory_csv,
)
from .scenario import PRESETS, Scenario, ScenarioError, load_preset, load_scenario
from .stability import analyze_stability
from .svg import write_svg
from .thresholds import threshold_report

EXIT_OK, EXIT_CONFIG, EXIT_IO, EXIT_INVARIANT = 0, 1, 2, 3


class InvariantViolation(RuntimeError):
    pass


def _scenario(args, required: bool = True) -> Scenario:
    if args.scenario and args.preset:
        raise ScenarioError("give either --scenario or --preset, not both")
    if args.scenario:
        return load_scenario(args.scenario)
    if args.preset:
        return load_preset(args.preset)
    if required:
        raise ScenarioError("a scenario is required: pass --scenario PATH or --preset NAME")
    return Scenario(name="defaults")


def _out_dir(args) -> Path:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _csv_name(scn: Scenario, suffix: str = "") -> str:
    if scn.out:
        stem = Path(scn.out).stem
    else:
        stem = scn.name
    return f"{stem}{suffix}.csv"


def _check(trajs) -> None:
    for traj in trajs:
        problems = trajectory_violations(traj)
        if problems:
            raise InvariantViolation("; ".join(problems[:5]))


def cmd_run(args) -> int:
    scn = _scenario(args)
    if args.horizon is not None:
        scn = replace(scn, horizon=args.horizon)
    traj = run_scenario(scn)
    _check([traj])
    out = _out_dir(args)
    path = out / _csv_name(scn)
    write_trajectory_csv(traj, path)
    print(f"wrote {path} ({traj.n_steps + 1} states)")
    if args.svg or scn.svg:
        svg = write_svg(path.with_suffix(".svg"), trajectory_svg(traj, title=scn.name))
        print(f"wrote {svg}")
    return EXIT_OK


def cmd_sweep(args) -> int:
    scn = _scenario(args)
    if scn.sweep is None:
        raise ScenarioError("scenario has no [sweep] section", source=args.scenario or f"preset:{args.preset}")
    if args.horizon is not None:
        scn = replace(scn, horizon=args.horizon)
    result = sweep(scn)
    _check(result.trajectories)
    out = _out_dir(args)
    path = out / _csv_name(scn)
    write_sweep_csv(result, path)
    print(f"wrote {path} ({len(result.rows)} grid points)")
    if scn.sweep.series:
        spath = out / _csv_name(scn, "_series")
        write_series_csv(result, spath)
        print(f"wrote {spath}")
    if args.svg or scn.svg:
        svg = write_svg(path.with_suffix(".svg"), sweep_svg(result, series=scn.sweep.series, title=scn.name))
        print(f"wrote {svg}")
    return EXIT_OK


def cmd_analyze(args) -> int:
    scn = _scenario(args, required=False)
    params = scn.params
    state = scn.initial_state()
    th = threshold_report(state, params)
    report = analyze_stability(params, u=state.U + state.O + state.Q)

    def undefined(x):
        return "undefined" if x is None else repr(float(x))

    lines = [
        f"scenario: {scn.name}",
        f"model: {params.kind.value}",
        f"z_state: {undefined(th.z_state)}",
        f"z_global: {undefined(th.z_global)}",
        f"lambda_critical: {undefined(th.lambda_critical)}",
        f"predicts_decline: {str(th.predicts_decline).lower()}",
        f"decline_guaranteed: {str(th.decline_guaranteed).lower()}",
    ]
    rows = []
    for pt in report.points:
        label = pt.equilibrium.label
        lines.append(f"equilibrium.{label}: {', '.join(_num(v) for v in pt.equilibrium.values)}")
        lines.append(f"verdict.{label}: {pt.verdict}")
        lines.append(f"jury_applicable.{label}: {str(pt.jury_applicable).lower()}")
        if pt.ngm_spectral_radius is not None:
            lines.append(f"ngm_spectral_radius.{label}: {pt.ngm_spectral_radius!r}")
        for i, z in enumerate(pt.numeric_eigenvalues):
            analytic = pt.analytic_eigenvalues[i] if pt.analytic_eigenvalues else None
            rows.append([label, "full", str(i), _num(z.real), _num(z.imag), _num(analytic)])
        for i, z in enumerate(pt.reduced_numeric_eigenvalues):
            rows.append([label, "reduced", str(i), _num(z.real), _num(z.imag), ""])
    lines.extend(f"note: {n}" for n in report.notes)
    print("\n".join(lines))
    if args.out:
        path = _out_dir(args) / f"{scn.name}_eigenvalues.csv"
        _write_csv(("equilibrium", "jacobian", "index", "real", "imag", "analytic"), rows, path)
        print(f"wrote {path}")
    return EXIT_OK


def cmd_calibrate(args) -> int:
    stats = ingest_path(args.path) if args.path else ingest_sample()
    for key, value in stats.as_dict().items():
        print(f"{key}: {value}")
    for err in stats.errors[:20]:
        print(f"warning: {err}", file=sys.stderr)
    alpha = estimate_alpha(stats)
    print(f"alpha: {alpha!r}")
    if args.out:
        path = _out_dir(args) / "calibration.csv"
        rows = [[k, str(v)] for k, v in stats.as_dict().items()] + [["alpha", repr(alpha)]]
        _write_csv(("key", "value"), rows, path)
        print(f"wrote {path}")
    return EXIT_OK


def cmd_fit_s0(args) -> int:
    params = _scenario(args, required=False).params
    fit = fit_s0(params, target=args.target, horizon=args.horizon or DEFAULT_HORIZON)
    print(f"s0_frac: {fit.s0_frac!r}")
    print(f"prediction: {fit.best_prediction!r}")
    print(f"target: {fit.target!r}")
    if args.out:
        path = _out_dir(args) / "fit_s0.csv"
        _write_csv(("s0_frac", "retweets_per_tweet"), [[_num(s), _num(p)] for s, p in zip(fit.grid, fit.predictions)], path)
        print(f"wrote {path}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="offspread", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, out_default: Optional[str] = "."):
        p.add_argument("--scenario", metavar="PATH", help="scenario file")
        p.add_argument("--preset", choices=PRESETS, help="bundled scenario")
        p.add_argument("--out", metavar="DIR", default=out_default, help="output directory")
        p.add_argument("--horizon", type=int, metavar="N", help="override the scenario horizon")

    p = sub.add_parser("run", help="simulate one scenario and write its trajectory CSV")
    common(p)
    p.add_argument("--svg", action="store_true", help="also write an SVG chart")
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("sweep", help="run the scenario's [sweep] grid")
    common(p)
    p.add_argument("--svg", action="store_true", help="also write an SVG chart")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("analyze", help="thresholds, equilibria and eigenvalues")
    common(p, out_default=None)
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("calibrate", help="corpus aggregates and the alpha estimate")
    p.add_argument("path", nargs="?", help="corpus CSV (default: bundled sample)")
    p.add_argument("--out", metavar="DIR", default=None)
    p.set_defaults(func=cmd_calibrate)

    p = sub.add_parser("fit-s0", help="grid-fit the initial stifler fraction")
    common(p, out_default=None)
    p.add_argument("--target", type=float, default=1.0, help="retweets per original tweet (default 1)")
    p.set_defaults(func=cmd_fit_s0)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    if getattr(args, "horizon", None) is not None and args.horizon < 1:
        print("error: --horizon must be >= 1", file=sys.stderr)
        return EXIT_CONFIG
    try:
        return args.func(args)
    except InvariantViolation as exc:
        print(f"invariant violation: {exc}", file=sys.stderr)
        return EXIT_INVARIANT
    except (ScenarioError, CorpusError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
