"""State, parameters and one-step update maps for the offender/stifler model.

Two models share the same state layout ``(U, O, Q, S)``:

* ``BASIC``: Uninformed -> Offender/Stifler, Offender -> Stifler. ``Q`` is
  always zero and ``lam``/``mu`` are ignored.
* ``QUARANTINE``: offenders may additionally be moved to a quarantine class
  (probability ``1 - lam`` per step), from which they leave to the stifler
  class with probability ``1 - mu`` per step.

Compartments are real-valued (mean-field); nothing is rounded. A population
below the stop threshold is only treated as extinct by :class:`StopRule`.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import Optional

import numpy as np

CONSERVATION_RTOL = 1e-9
DEFAULT_N = 1e7
DEFAULT_K = 10.0
DEFAULT_ALPHA = 0.999
DEFAULT_S0_FRAC = 0.07
DEFAULT_O0 = 1.0
DEFAULT_HORIZON = 10_000


class ModelKind(str, enum.Enum):
    BASIC = "basic"
    QUARANTINE = "quarantine"


def _finite(name: str, value: float) -> float:
    value = float(value)
    if not math.isfinite(value):
        raise ValueError(f"{name} must be finite, got {value!r}")
    return value


@dataclass(frozen=True)
class ModelParams:
    """Constants of the dynamics.

    ``lam`` is the probability an offender is *not* quarantined in a step and
    ``mu`` the probability a quarantined user stays quarantined.
    """

    N: float = DEFAULT_N
    k: float = DEFAULT_K
    alpha: float = DEFAULT_ALPHA
    lam: float = 1.0
    mu: float = 1.0
    kind: ModelKind = ModelKind.BASIC

    def __post_init__(self):
        for name in ("N", "k", "alpha", "lam", "mu"):
            object.__setattr__(self, name, _finite(name, getattr(self, name)))
        object.__setattr__(self, "kind", ModelKind(self.kind))
        if self.N < 1:
            raise ValueError(f"N must be >= 1, got {self.N}")
        if self.k <= 0:
            raise ValueError(f"k must be > 0, got {self.k}")
        for name in ("alpha", "lam", "mu"):
            v = getattr(self, name)
            if not 0.0 <= v <= 1.0:
                raise ValueError(f"{name} must lie in [0, 1], got {v}")

    @property
    def is_quarantine(self) -> bool:
        return self.kind is ModelKind.QUARANTINE


@dataclass(frozen=True)
class StateVector:
    U: float
    O: float
    Q: float = 0.0
    S: float = 0.0
    t: int = 0

    def __post_init__(self):
        for name in ("U", "O", "Q", "S"):
            v = _finite(name, getattr(self, name))
            if v < 0:
                raise ValueError(f"compartment {name} must be >= 0, got {v}")
            object.__setattr__(self, name, v)
        if int(self.t) != self.t or self.t < 0:
            raise ValueError(f"t must be a non-negative integer, got {self.t!r}")
        object.__setattr__(self, "t", int(self.t))

    @property
    def total(self) -> float:
        return self.U + self.O + self.Q + self.S

    def as_tuple(self) -> tuple[float, float, float, float]:
        return (self.U, self.O, self.Q, self.S)


def conservation_error(state: StateVector, params: ModelParams) -> float:
    """Relative deviation of ``U + O + Q + S`` from ``N``."""
    return abs(state.total - params.N) / params.N


def check_state(state: StateVector, params: ModelParams, rtol: float = CONSERVATION_RTOL) -> None:
    if conservation_error(state, params) > rtol:
        raise ValueError(
            f"state at t={state.t} sums to {state.total!r}, expected N={params.N!r} (rtol {rtol})"
        )
    if not params.is_quarantine and state.Q != 0:
        raise ValueError("basic model requires Q = 0")


def g1(state: StateVector, params: ModelParams) -> float:
    """Probability an uninformed user does not see the message this step."""
    return math.exp(-params.k * state.O / params.N)


def g2(state: StateVector, params: ModelParams) -> float:
    """Probability an offender does not meet a stifler this step."""
    return math.exp(-params.k * state.S / params.N)


def offender_inflow(state: StateVector, params: ModelParams) -> float:
    """New offenders produced in one step, ``(1 - alpha)(1 - G1) U``."""
    return (1.0 - params.alpha) * (-math.expm1(-params.k * state.O / params.N) * state.U)


# Scalar kernels. Both step_* functions and simulate() go through these, so a
# trajectory is reproduced bit-for-bit by re-applying the step map.

def _basic_update(u, o, s, n, k, alpha):
    g_see = math.exp(-k * o / n)
    g_stifle = math.exp(-k * s / n)
    # 1 - G via expm1 stays accurate when k O / N is tiny.
    seen = -math.expm1(-k * o / n) * u
    stifled = -math.expm1(-k * s / n) * o
    inflow = (1.0 - alpha) * seen
    return (
        u * g_see,
        inflow + g_stifle * o,
        s + alpha * seen + stifled,
        g_see,
        g_stifle,
        inflow,
    )


def _quarantine_update(u, o, q, s, n, k, alpha, lam, mu):
    g_see = math.exp(-k * o / n)
    g_stifle = math.exp(-k * s / n)
    seen = -math.expm1(-k * o / n) * u
    stifled = -math.expm1(-k * s / n) * o
    inflow = (1.0 - alpha) * seen
    return (
        u * g_see,
        inflow + lam * g_stifle * o,
        (1.0 - lam) * g_stifle * o + mu * q,
        s + alpha * seen + stifled + (1.0 - mu) * q,
        g_see,
        g_stifle,
        inflow,
    )


def step_basic(state: StateVector, params: ModelParams) -> StateVector:
    if params.is_quarantine:
        raise ValueError("step_basic called with quarantine-model params")
    if state.Q != 0:
        raise ValueError("basic model requires Q = 0")
    u, o, s, *_ = _basic_update(state.U, state.O, state.S, params.N, params.k, params.alpha)
    return StateVector(u, o, 0.0, s, state.t + 1)


def step_quarantine(state: StateVector, params: ModelParams) -> StateVector:
    u, o, q, s, *_ = _quarantine_update(
        state.U, state.O, state.Q, state.S,
        params.N, params.k, params.alpha, params.lam, params.mu,
    )
    return StateVector(u, o, q, s, state.t + 1)


def step(state: StateVector, params: ModelParams) -> StateVector:
    """Apply the update map selected by ``params.kind``."""
    if params.is_quarantine:
        return step_quarantine(state, params)
    return step_basic(state, params)


@dataclass(frozen=True)
class StopRule:
    """Stop once the watched compartments sum below ``threshold`` users.

    ``compartments`` is ``"OQ"`` (offenders plus quarantined, the default) or
    ``"O"`` (offenders only). The rule is checked after every transition, so a
    simulation always makes at least one step.
    """

    threshold: float = 0.5
    compartments: str = "OQ"

    def __post_init__(self):
        if self.compartments not in ("O", "OQ"):
            raise ValueError(f"compartments must be 'O' or 'OQ', got {self.compartments!r}")
        if not self.threshold >= 0:
            raise ValueError("threshold must be >= 0")

    def fired(self, o: float, q: float) -> bool:
        level = o if self.compartments == "O" else o + q
        return level < self.threshold


@dataclass(frozen=True)
class Trajectory:
    """Iterated states plus the per-transition contact probabilities.

    The compartment arrays have one entry per state; ``g1_series``,
    ``g2_series`` and ``offender_inflow_series`` have one entry per transition
    (evaluated at the state the transition starts from).
    """

    params: ModelParams
    U: np.ndarray
    O: np.ndarray
    Q: np.ndarray
    S: np.ndarray
    g1_series: np.ndarray
    g2_series: np.ndarray
    offender_inflow_series: np.ndarray
    stopped_early: bool = field(default=False)

    def __len__(self):
        return len(self.U)

    @property
    def n_steps(self) -> int:
        return len(self.U) - 1

    @property
    def t(self) -> np.ndarray:
        return np.arange(len(self.U))

    @cached_property
    def states(self) -> tuple[StateVector, ...]:
        return tuple(
            StateVector(u, o, q, s, i)
            for i, (u, o, q, s) in enumerate(zip(self.U.tolist(), self.O.tolist(), self.Q.tolist(), self.S.tolist()))
        )

    @property
    def final(self) -> StateVector:
        i = self.n_steps
        return StateVector(float(self.U[i]), float(self.O[i]), float(self.Q[i]), float(self.S[i]), i)


def _frozen(values: list[float]) -> np.ndarray:
    arr = np.asarray(values, dtype=np.float64)
    arr.flags.writeable = False
    return arr


def simulate(
    initial: StateVector,
    params: ModelParams,
    horizon: int = DEFAULT_HORIZON,
    stop: Optional[StopRule] = StopRule(),
) -> Trajectory:
    """Iterate the model from ``initial`` for at most ``horizon`` steps.

    Pass ``stop=None`` to always run the full horizon.
    """
    if int(horizon) != horizon or horizon < 1:
        raise ValueError(f"horizon must be an integer >= 1, got {horizon!r}")
    check_state(initial, params)

    n, k, alpha, lam, mu = params.N, params.k, params.alpha, params.lam, params.mu
    u, o, q, s = initial.as_tuple()
    us, os_, qs, ss = [u], [o], [q], [s]
    g1s, g2s, inflows = [], [], []
    quarantine = params.is_quarantine
    stopped = False
    for _ in range(int(horizon)):
        if quarantine:
            u, o, q, s, ga, gb, inflow = _quarantine_update(u, o, q, s, n, k, alpha, lam, mu)
        else:
            u, o, s, ga, gb, inflow = _basic_update(u, o, s, n, k, alpha)
        us.append(u)
        os_.append(o)
        qs.append(q)
        ss.append(s)
        g1s.append(ga)
        g2s.append(gb)
        inflows.append(inflow)
        if stop is not None and stop.fired(o, q):
            stopped = True
            break
    return Trajectory(
        params=params,
        U=_frozen(us), O=_frozen(os_), Q=_frozen(qs), S=_frozen(ss),
        g1_series=_frozen(g1s), g2_series=_frozen(g2s),
        offender_inflow_series=_frozen(inflows),
        stopped_early=stopped,
    )


def trajectory_violations(traj: Trajectory, rtol: float = CONSERVATION_RTOL) -> list[str]:
    """Post-hoc check of conservation, non-negativity and U/S monotonicity."""
    problems = []
    n = traj.params.N
    total = traj.U + traj.O + traj.Q + traj.S
    drift = np.abs(total - n) / n
    if drift.max() > rtol:
        problems.append(f"conservation drift {drift.max():.3e} exceeds {rtol:.1e} at t={int(drift.argmax())}")
    for name in ("U", "O", "Q", "S"):
        col = getattr(traj, name)
        if (col < 0).any():
            problems.append(f"{name} negative at t={int(np.argmax(col < 0))}")
    if (np.diff(traj.U) > 0).any():
        problems.append("U increased")
    if (np.diff(traj.S) < 0).any():
        problems.append("S decreased")
    if not traj.params.is_quarantine and (traj.Q != 0).any():
        problems.append("basic model trajectory has Q != 0")
    return problems


def default_initial(
    params: ModelParams,
    s0_frac: float = DEFAULT_S0_FRAC,
    o0: float = DEFAULT_O0,
    q0: float = 0.0,
) -> StateVector:
    """``O0`` seed offenders, ``S0 = s0_frac * N`` stiflers, the rest uninformed.

    ``S0`` is capped at ``N - O0 - Q0`` so that ``s0_frac = 1`` stays valid.
    """
    if not 0.0 <= s0_frac <= 1.0:
        raise ValueError(f"s0_frac must lie in [0, 1], got {s0_frac}")
    if not params.is_quarantine and q0 != 0:
        raise ValueError("basic model requires Q0 = 0")
    n = params.N
    if o0 < 0 or q0 < 0 or o0 + q0 > n:
        raise ValueError("O0 and Q0 must be non-negative with O0 + Q0 <= N")
    s0 = min(s0_frac * n, n - o0 - q0)
    u0 = max(n - s0 - o0 - q0, 0.0)
    return StateVector(u0, o0, q0, s0, 0)


def initial_from_fractions(params: ModelParams, fractions) -> StateVector:
    """Build a state from ``(U, O, Q, S)`` population fractions summing to 1."""
    fr = tuple(float(x) for x in fractions)
    if len(fr) != 4:
        raise ValueError("expected four fractions (U, O, Q, S)")
    if any(x < 0 for x in fr):
        raise ValueError("fractions must be non-negative")
    if abs(math.fsum(fr) - 1.0) > 1e-12:
        raise ValueError(f"fractions must sum to 1, got {math.fsum(fr)!r}")
    if not params.is_quarantine and fr[2] != 0:
        raise ValueError("basic model requires Q fraction = 0")
    n = params.N
    u, o, q, s = (x * n for x in fr)
    return StateVector(u, o, q, s, 0)

