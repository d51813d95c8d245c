"""Retweet metrics, scenario runs and parameter sweeps with CSV/SVG output."""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Optional

import numpy as np

from .dynamics import StopRule, Trajectory, g1, g2, offender_inflow, simulate
from .scenario import Scenario
from .svg import line_chart
from .thresholds import z_state

EXTINCTION_THRESHOLD = 0.5
# Stop rule for metric runs: the offender tail below 1e-9 users is negligible,
# whereas stopping at 0.5 users truncates a one-seed cascade after ~2 steps.
METRIC_STOP = StopRule(threshold=1e-9, compartments="O")

TRAJECTORY_COLUMNS = ("t", "U", "O", "Q", "S", "G1", "G2", "inflow", "z_state")
SWEEP_COLUMNS = ("value", "retweets_per_tweet", "extinction_time", "peak_O", "peak_Q")


def _seed(traj: Trajectory) -> float:
    o0 = float(traj.O[0])
    if o0 <= 0:
        raise ValueError("retweet metrics need a trajectory seeded with O0 > 0")
    return o0


def retweets_per_tweet(traj: Trajectory) -> float:
    """Offender-steps after the seed step, per seed offender: ``sum_{t>=1} O_t / O_0``.

    Each step an offender spends in the offender class it re-broadcasts the
    message once; the seed's own broadcast at ``t = 0`` is the original tweet.
    """
    o0 = _seed(traj)
    return math.fsum(traj.O[1:].tolist()) / o0


def new_offenders_per_seed(traj: Trajectory) -> float:
    """Cumulative offender inflow per seed offender, ``sum_t (1 - alpha)(1 - G1) U_t / O_0``."""
    o0 = _seed(traj)
    return math.fsum(traj.offender_inflow_series.tolist()) / o0


def extinction_time(traj: Trajectory, threshold: float = EXTINCTION_THRESHOLD) -> int:
    """First ``t >= 1`` with ``O_t < threshold``; the last step if never reached."""
    below = np.nonzero(traj.O[1:] < threshold)[0]
    if below.size:
        return int(below[0]) + 1
    return traj.n_steps


def _num(x: Optional[float]) -> str:
    return "" if x is None else repr(float(x))


def run_scenario(scenario: Scenario, horizon: Optional[int] = None) -> Trajectory:
    return simulate(scenario.initial_state(), scenario.params, horizon or scenario.horizon, scenario.stop)


def trajectory_rows(traj: Trajectory) -> list[list[str]]:
    rows = []
    for st in traj.states:
        rows.append([
            str(st.t), _num(st.U), _num(st.O), _num(st.Q), _num(st.S),
            _num(g1(st, traj.params)), _num(g2(st, traj.params)),
            _num(offender_inflow(st, traj.params)), _num(z_state(st, traj.params)),
        ])
    return rows


def _write_csv(header, rows, dest) -> None:
    if isinstance(dest, (str, Path)):
        with open(dest, "w", newline="", encoding="utf-8") as fh:
            _write_csv(header, rows, fh)
        return
    writer = csv.writer(dest, lineterminator="\n")
    writer.writerow(header)
    writer.writerows(rows)


def write_trajectory_csv(traj: Trajectory, dest) -> None:
    _write_csv(TRAJECTORY_COLUMNS, trajectory_rows(traj), dest)


def trajectory_svg(traj: Trajectory, title: str = "") -> str:
    t = traj.t.tolist()
    series = [("U", t, traj.U.tolist()), ("O", t, traj.O.tolist())]
    if traj.params.is_quarantine:
        series.append(("Q", t, traj.Q.tolist()))
    series.append(("S", t, traj.S.tolist()))
    return line_chart(series, title=title, x_label="t (steps)", y_label="users")


@dataclass(frozen=True)
class SweepRow:
    value: float
    retweets_per_tweet: float
    extinction_time: int
    peak_O: float
    peak_Q: float


@dataclass(frozen=True)
class SweepResult:
    param: str
    rows: tuple[SweepRow, ...]
    trajectories: tuple[Trajectory, ...]

    @property
    def values(self) -> list[float]:
        return [r.value for r in self.rows]

    @property
    def metric(self) -> list[float]:
        return [r.retweets_per_tweet for r in self.rows]


def sweep_point(scenario: Scenario, value: float) -> tuple[SweepRow, Trajectory]:
    traj = run_scenario(scenario)
    row = SweepRow(
        value=value,
        retweets_per_tweet=retweets_per_tweet(traj),
        extinction_time=extinction_time(traj),
        peak_O=float(traj.O.max()),
        peak_Q=float(traj.Q.max()),
    )
    return row, traj


def sweep(scenario: Scenario) -> SweepResult:
    """One simulation per grid value; rows come back in grid order."""
    if scenario.sweep is None:
        raise ValueError("scenario has no [sweep] section")
    spec = scenario.sweep
    points = [sweep_point(scenario.with_value(spec.param, v), v) for v in spec.values]
    return SweepResult(spec.param, tuple(p[0] for p in points), tuple(p[1] for p in points))


def sweep_rows(result: SweepResult) -> list[list[str]]:
    return [
        [_num(r.value), _num(r.retweets_per_tweet), str(r.extinction_time), _num(r.peak_O), _num(r.peak_Q)]
        for r in result.rows
    ]


def write_sweep_csv(result: SweepResult, dest) -> None:
    _write_csv(SWEEP_COLUMNS, sweep_rows(result), dest)


def write_series_csv(result: SweepResult, dest) -> None:
    """Long format ``value, t, O, Q``: the offender curve of every grid point."""
    rows = []
    for r, traj in zip(result.rows, result.trajectories):
        for t, (o, q) in enumerate(zip(traj.O.tolist(), traj.Q.tolist())):
            rows.append([_num(r.value), str(t), _num(o), _num(q)])
    _write_csv(("value", "t", "O", "Q"), rows, dest)


def sweep_svg(result: SweepResult, series: bool = False, title: str = "") -> str:
    if series:
        lines = []
        for r, traj in zip(result.rows, result.trajectories):
            lines.append((f"{result.param}={r.value:g}", traj.t.tolist(), traj.O.tolist()))
        return line_chart(lines, title=title, x_label="t (steps)", y_label="offenders", log_y=True)
    return line_chart(
        [("retweets per tweet", result.values, result.metric)],
        title=title, x_label=result.param, y_label="retweets per original tweet",
    )


def csv_text(writer, obj) -> str:
    buf = io.StringIO()
    writer(obj, buf)
    return buf.getvalue()
