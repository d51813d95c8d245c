import math

import pytest
from hypothesis import assume, given, strategies as st

from offspread.dynamics import ModelKind, ModelParams, StateVector, step
from offspread.thresholds import (
    lambda_critical,
    threshold_report,
    z_basic,
    z_global,
    z_quarantine,
    z_state,
)

from .conftest import model_and_state, params, states

N = 1e7
Z_BASIC_OFE = 0.018473832945366645  # U = 0.93N - 1, O = 1, S = 0.07N
Z_QUAR_OFE = 0.012371835959104761  # U = 0.93N, S = 0.07N, lam = 0.5


def test_z_basic_oracle(ref_params):
    s = StateVector(0.93 * N - 1, 1, 0, 0.07 * N)
    assert z_basic(s, ref_params) == pytest.approx(Z_BASIC_OFE, rel=1e-13)


def test_z_quarantine_oracle(ref_quarantine):
    s = StateVector(0.93 * N, 0, 0, 0.07 * N)
    assert z_quarantine(s, ref_quarantine) == pytest.approx(Z_QUAR_OFE, rel=1e-13)


def test_z_undefined_without_stiflers(ref_params):
    s = StateVector(N - 1, 1, 0, 0)
    assert z_basic(s, ref_params) is None
    assert z_quarantine(s, ModelParams(kind="quarantine", lam=1.0)) is None
    assert z_quarantine(s, ModelParams(kind="quarantine", lam=0.5)) is not None


def test_z_global_and_lambda_critical():
    p = ModelParams(kind="quarantine", lam=0.5)
    assert z_global(p) == pytest.approx(0.02, rel=1e-12)
    assert z_global(ModelParams(kind="quarantine", lam=1.0)) is None
    assert lambda_critical(ModelParams()) == 0.99
    assert lambda_critical(ModelParams(alpha=0.5)) is None
    assert lambda_critical(ModelParams(alpha=1.0)) == 1.0


def test_report_reference_defaults():
    p = ModelParams(kind="quarantine", lam=0.99, mu=0.99)
    rep = threshold_report(StateVector(0.93 * N - 1, 1, 0, 0.07 * N), p)
    assert rep.lambda_critical == 0.99
    assert rep.decline_guaranteed and rep.predicts_decline


def test_report_infeasible_quarantine():
    p = ModelParams(alpha=0.5, kind="quarantine", lam=0.2)
    rep = threshold_report(StateVector(N / 2, N / 2, 0, 0), p)
    assert rep.lambda_critical is None and not rep.decline_guaranteed


def test_report_basic_model_has_no_global_bound(ref_params):
    rep = threshold_report(StateVector(N - 1, 1, 0, 0), ref_params)
    assert rep.z_global is None and rep.z_state is None
    assert not rep.predicts_decline and not rep.decline_guaranteed


@given(model_and_state(ModelKind.QUARANTINE))
def test_z_quarantine_never_exceeds_z_basic(pair):
    p, s = pair
    zb, zq = z_basic(s, p), z_quarantine(s, p)
    assume(zb is not None)
    assert zq <= zb * (1 + 1e-12)


@given(st.data())
def test_z_quarantine_at_lambda_one_is_z_basic(data):
    pb = data.draw(params(ModelKind.BASIC))
    s = data.draw(states(pb))
    pq = ModelParams(N=pb.N, k=pb.k, alpha=pb.alpha, lam=1.0, kind="quarantine")
    assert z_quarantine(s, pq) == z_basic(s, pb)


@given(model_and_state())
def test_threshold_below_one_implies_decline(pair):
    p, s = pair
    z = z_state(s, p)
    assume(z is not None and z < 1)
    # The guaranteed drop must be resolvable in floating point.
    lam = p.lam if p.is_quarantine else 1.0
    drop = (1 - z) * ((1 - lam) - lam * math.expm1(-p.k * s.S / p.N))
    assume(drop > 1e-12 and s.O > 1e-300)
    assert step(s, p).O < s.O


@given(st.data())
def test_global_bound_implies_decline(data):
    p0 = data.draw(params(ModelKind.QUARANTINE))
    # Draw k(1 - alpha) below 1 directly so the bound is feasible.
    c = data.draw(st.floats(0.0, min(1.0 - 1e-6, p0.k)))
    p0 = ModelParams(N=p0.N, k=p0.k, alpha=min(1.0, max(0.0, 1.0 - c / p0.k)), lam=p0.lam, mu=p0.mu, kind="quarantine")
    lam_star = lambda_critical(p0)
    assume(lam_star is not None)
    # At lam = lam_star the margin can shrink below rounding (and vanishes when lam_star = 1).
    assume(lam_star > 1e-9)
    lam = data.draw(st.floats(0.0, lam_star - 1e-9))
    p = ModelParams(N=p0.N, k=p0.k, alpha=p0.alpha, lam=lam, mu=p0.mu, kind="quarantine")
    s = data.draw(states(p))
    assume(s.O / p.N > 1e-12)
    assert threshold_report(s, p).decline_guaranteed
    assert step(s, p).O < s.O


@given(st.floats(0, 1), st.floats(0, 1), st.floats(0, 1))
def test_decline_at_critical_lambda(u, o, s):
    p = ModelParams(kind="quarantine", lam=0.99, mu=0.5)
    tot = u + o + s
    assume(tot > 0 and o / tot > 1e-9)
    st0 = StateVector(N * (u / tot), N * (o / tot), 0.0, N * (s / tot))
    assert step(st0, p).O < st0.O
