import math

import numpy as np
import pytest
from hypothesis import HealthCheck, settings, strategies as st

from offspread.dynamics import ModelKind, ModelParams, StateVector

settings.register_profile("default", max_examples=200, deadline=None, suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")

unit = st.floats(0.0, 1.0, allow_nan=False)


@st.composite
def params(draw, kind=None):
    kind = kind or draw(st.sampled_from([ModelKind.BASIC, ModelKind.QUARANTINE]))
    n = draw(st.floats(1.0, 1e9))
    k = draw(st.floats(0.01, 50.0))
    alpha = draw(unit)
    if kind is ModelKind.BASIC:
        return ModelParams(N=n, k=k, alpha=alpha)
    return ModelParams(N=n, k=k, alpha=alpha, lam=draw(unit), mu=draw(unit), kind=kind)


@st.composite
def states(draw, p):
    """A state on the simplex U + O + Q + S = N (Q = 0 for the basic model)."""
    names = ("U", "O", "Q", "S") if p.is_quarantine else ("U", "O", "S")
    w = [draw(st.floats(0.0, 1.0, allow_subnormal=False)) for _ in names]
    if sum(w) == 0:
        w[0] = 1.0
    tot = math.fsum(w)
    vals = dict(zip(names, (p.N * (x / tot) for x in w)))
    return StateVector(vals["U"], vals["O"], vals.get("Q", 0.0), vals["S"])


@st.composite
def model_and_state(draw, kind=None):
    p = draw(params(kind))
    return p, draw(states(p))


def random_pair(rng: np.random.Generator, kind: ModelKind | None = None):
    """Numpy counterpart of ``model_and_state`` for the bulk acceptance loops."""
    if kind is None:
        kind = ModelKind.QUARANTINE if rng.random() < 0.5 else ModelKind.BASIC
    n = float(10 ** rng.uniform(0, 9))
    k = float(rng.uniform(0.01, 50))
    alpha = float(rng.random())
    if kind is ModelKind.BASIC:
        p = ModelParams(N=n, k=k, alpha=alpha)
        w = rng.dirichlet(np.ones(3))
        return p, StateVector(n * w[0], n * w[1], 0.0, n * w[2])
    p = ModelParams(N=n, k=k, alpha=alpha, lam=float(rng.random()), mu=float(rng.random()), kind=kind)
    w = rng.dirichlet(np.ones(4))
    return p, StateVector(*(n * w).tolist())


@pytest.fixture
def ref_params():
    return ModelParams()


@pytest.fixture
def ref_quarantine():
    return ModelParams(kind=ModelKind.QUARANTINE, lam=0.5, mu=0.99)


ACCEPTANCE_RESULTS: dict[int, tuple[bool, str]] = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for num in sorted(ACCEPTANCE_RESULTS):
        ok, detail = ACCEPTANCE_RESULTS[num]
        terminalreporter.write_line(f"criterion {num:2d}: {'PASS' if ok else 'FAIL'}  {detail}")
