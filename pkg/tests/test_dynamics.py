import math

import numpy as np
import pytest
from hypothesis import assume, given, strategies as st

from offspread.dynamics import (
    ModelKind,
    ModelParams,
    StateVector,
    StopRule,
    conservation_error,
    default_initial,
    g1,
    g2,
    initial_from_fractions,
    offender_inflow,
    simulate,
    step,
    step_basic,
    trajectory_violations,
)

from .conftest import model_and_state, params, states

# Reference values computed with mpmath at 50 significant digits.
G1_N1000_O100 = 0.36787944117144233
BASIC_STEP = (331.09149705429809, 100.56890850294570, 568.33959444275621)
QUAR_STEP = (331.0914970542981, 50.568908502945702, 50.0, 568.3395944427562)


def test_g1_oracle():
    p = ModelParams(N=1000, k=10, alpha=0.999)
    assert g1(StateVector(900, 100, 0, 0), p) == pytest.approx(G1_N1000_O100, rel=1e-15)
    assert g2(StateVector(900, 100, 0, 0), p) == 1.0


def test_basic_step_oracle():
    p = ModelParams(N=1000, k=10, alpha=0.999)
    nxt = step(StateVector(900, 100, 0, 0), p)
    assert (nxt.U, nxt.O, nxt.S) == pytest.approx(BASIC_STEP, rel=1e-14)
    assert nxt.Q == 0.0 and nxt.t == 1


def test_quarantine_step_oracle():
    p = ModelParams(N=1000, k=10, alpha=0.999, lam=0.5, mu=0.99, kind="quarantine")
    nxt = step(StateVector(900, 100, 0, 0), p)
    assert nxt.as_tuple() == pytest.approx(QUAR_STEP, rel=1e-14)


def test_alpha_one_has_no_inflow():
    p = ModelParams(N=100, k=3, alpha=1.0)
    st0 = StateVector(50, 30, 0, 20)
    assert offender_inflow(st0, p) == 0.0
    assert step(st0, p).O < st0.O


def test_no_offenders_is_fixed():
    p = ModelParams(N=10, k=2, alpha=0.3)
    st0 = StateVector(7, 0, 0, 3)
    assert step(st0, p).as_tuple() == st0.as_tuple()


@pytest.mark.parametrize(
    "kwargs",
    [dict(N=0.5), dict(k=0), dict(k=-1), dict(alpha=1.5), dict(lam=-0.1), dict(mu=2), dict(N=math.nan), dict(k=math.inf)],
)
def test_params_validation(kwargs):
    with pytest.raises(ValueError):
        ModelParams(**kwargs)


def test_state_validation():
    with pytest.raises(ValueError):
        StateVector(-1, 0, 0, 0)
    with pytest.raises(ValueError):
        StateVector(math.nan, 0, 0, 0)
    with pytest.raises(ValueError):
        StateVector(1, 0, 0, 0, t=-1)


def test_basic_rejects_quarantined_mass():
    with pytest.raises(ValueError):
        step_basic(StateVector(1, 1, 1, 1), ModelParams(N=4))
    with pytest.raises(ValueError):
        simulate(StateVector(1, 1, 1, 1), ModelParams(N=4))


def test_simulate_rejects_off_simplex_and_bad_horizon():
    p = ModelParams(N=100)
    with pytest.raises(ValueError):
        simulate(StateVector(10, 10, 0, 10), p)
    with pytest.raises(ValueError):
        simulate(StateVector(90, 10, 0, 0), p, horizon=0)


def test_horizon_one_gives_two_states():
    p = ModelParams()
    traj = simulate(default_initial(p), p, horizon=1)
    assert len(traj.states) == 2 and traj.n_steps == 1


def test_stop_rule_checked_after_transition():
    p = ModelParams(N=100, k=1, alpha=0.5)
    traj = simulate(StateVector(99.9, 0.1, 0, 0), p, stop=StopRule(0.5))
    assert traj.n_steps == 1 and traj.stopped_early


def test_stop_rule_watches_quarantine_by_default():
    p = ModelParams(kind="quarantine", lam=0.0, mu=0.99)
    init = default_initial(p, 0.07, 1000)
    both = simulate(init, p)
    only_o = simulate(init, p, stop=StopRule(0.5, "O"))
    assert only_o.n_steps < both.n_steps
    assert both.final.O + both.final.Q < 0.5


def test_stop_rule_validation():
    with pytest.raises(ValueError):
        StopRule(compartments="U")
    with pytest.raises(ValueError):
        StopRule(threshold=-1)


def test_trajectory_arrays_are_read_only():
    p = ModelParams()
    traj = simulate(default_initial(p), p, horizon=5, stop=None)
    with pytest.raises(ValueError):
        traj.O[0] = 3.0
    assert traj.n_steps == 5 and not traj.stopped_early


def test_default_initial_caps_stiflers():
    p = ModelParams(N=100)
    init = default_initial(p, 1.0, 1.0)
    assert init.S == 99.0 and init.U == 0.0


def test_initial_from_fractions():
    p = ModelParams(N=10, kind="quarantine")
    assert initial_from_fractions(p, (0.5, 0.2, 0.1, 0.2)).as_tuple() == pytest.approx((5, 2, 1, 2))
    with pytest.raises(ValueError):
        initial_from_fractions(p, (0.5, 0.2, 0.1, 0.1))
    with pytest.raises(ValueError):
        initial_from_fractions(ModelParams(N=10), (0.5, 0.2, 0.1, 0.2))


@given(model_and_state())
def test_step_conserves_population(pair):
    p, s = pair
    assert conservation_error(step(s, p), p) <= 1e-12


@given(model_and_state())
def test_step_keeps_compartments_nonnegative_and_monotone(pair):
    p, s = pair
    nxt = step(s, p)
    assert min(nxt.as_tuple()) >= 0.0
    assert nxt.U <= s.U
    assert nxt.S >= s.S


@given(model_and_state())
def test_uninformed_strictly_decrease(pair):
    p, s = pair
    # exp(-x) only rounds below 1 once x exceeds half an ulp of 1.
    assume(s.U > 0 and p.k * s.O / p.N > 1e-15)
    assert step(s, p).U < s.U


@given(st.data())
def test_quarantine_reduces_to_basic_at_lambda_one(data):
    pb = data.draw(params(ModelKind.BASIC))
    s = data.draw(states(pb))
    pq = ModelParams(N=pb.N, k=pb.k, alpha=pb.alpha, lam=1.0, mu=data.draw(st.floats(0, 1)), kind="quarantine")
    assert step(s, pq).as_tuple() == step(s, pb).as_tuple()


@given(model_and_state(), st.integers(1, 200))
def test_simulate_matches_repeated_steps(pair, horizon):
    p, s = pair
    traj = simulate(s, p, horizon, stop=None)
    cur = s
    for i in range(horizon):
        cur = step(cur, p)
    assert traj.final.as_tuple() == cur.as_tuple()
    assert not trajectory_violations(traj)


@given(model_and_state())
def test_series_are_consistent_with_states(pair):
    p, s = pair
    traj = simulate(s, p, 20, stop=None)
    for i, st0 in enumerate(traj.states[:-1]):
        assert traj.g1_series[i] == g1(st0, p)
        assert traj.g2_series[i] == g2(st0, p)
        assert traj.offender_inflow_series[i] == offender_inflow(st0, p)
    assert np.all(np.diff(traj.t) == 1)
