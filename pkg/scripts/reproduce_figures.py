"""Run every bundled preset and write its CSV and SVG outputs.

    python scripts/reproduce_figures.py [outdir]

Also prints a one-line summary per preset, and for the sweeps compares the
headline metric against the cumulative-inflow alternative.
"""

import sys
from pathlib import Path

from offspread.experiments import (
    new_offenders_per_seed,
    run_scenario,
    sweep,
    sweep_svg,
    trajectory_svg,
    write_series_csv,
    write_sweep_csv,
    write_trajectory_csv,
)
from offspread.scenario import PRESETS, load_preset
from offspread.svg import write_svg


def reproduce(name: str, out: Path) -> None:
    scn = load_preset(name)
    if scn.sweep is None:
        traj = run_scenario(scn)
        with open(out / f"{name}.csv", "w", newline="") as fh:
            write_trajectory_csv(traj, fh)
        write_svg(out / f"{name}.svg", trajectory_svg(traj, title=name))
        f = traj.final
        print(f"{name}: {traj.n_steps} steps, S/N={f.S / scn.params.N:.5f}, O+Q={f.O + f.Q:.4f}")
        return
    result = sweep(scn)
    with open(out / f"{name}.csv", "w", newline="") as fh:
        write_sweep_csv(result, fh)
    if scn.sweep.series:
        with open(out / f"{name}_series.csv", "w", newline="") as fh:
            write_series_csv(result, fh)
    write_svg(out / f"{name}.svg", sweep_svg(result, series=scn.sweep.series, title=name))
    print(f"{name}: {result.param} over {len(result.rows)} points")
    for row, traj in zip(result.rows, result.trajectories):
        print(f"  {row.value:5.2f}  retweets/tweet={row.retweets_per_tweet:.6f}  "
              f"inflow/seed={new_offenders_per_seed(traj):.6f}  extinct@{row.extinction_time}")


def main(argv=None) -> int:
    argv = sys.argv[1:] if argv is None else argv
    out = Path(argv[0] if argv else "figures")
    out.mkdir(parents=True, exist_ok=True)
    for name in PRESETS:
        reproduce(name, out)
    return 0


if __name__ == "__main__":
    sys.exit(main())
