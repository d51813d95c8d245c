"""Threshold quantities guaranteeing that the offender class shrinks next step.

Undefined values (a zero denominator) are returned as ``None`` rather than
``inf`` so callers can tell a vacuous threshold from a large one.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

from .dynamics import ModelParams, StateVector


def z_basic(state: StateVector, params: ModelParams) -> Optional[float]:
    """``k (1 - alpha) U / (N (1 - G2))``; ``None`` while there are no stiflers."""
    denom = -math.expm1(-params.k * state.S / params.N)
    if denom == 0.0:
        return None
    return params.k * (1.0 - params.alpha) * state.U / (params.N * denom)


def z_quarantine(state: StateVector, params: ModelParams) -> Optional[float]:
    """``k (1 - alpha) U / (N (1 - lam G2))``; equals :func:`z_basic` at ``lam = 1``."""
    # 1 - lam G2 written as (1 - lam) + lam (1 - G2) so lam = 1 matches z_basic exactly.
    denom = (1.0 - params.lam) + params.lam * -math.expm1(-params.k * state.S / params.N)
    if denom == 0.0:
        return None
    return params.k * (1.0 - params.alpha) * state.U / (params.N * denom)


def z_state(state: StateVector, params: ModelParams) -> Optional[float]:
    if params.is_quarantine:
        return z_quarantine(state, params)
    return z_basic(state, params)


def z_global(params: ModelParams) -> Optional[float]:
    """State-independent bound ``k (1 - alpha) / (1 - lam)``; ``None`` at ``lam = 1``."""
    if params.lam == 1.0:
        return None
    return params.k * (1.0 - params.alpha) / (1.0 - params.lam)


def lambda_critical(params: ModelParams) -> Optional[float]:
    """Largest ``lam`` for which offenders decline from any state.

    ``None`` when ``k (1 - alpha) >= 1``: no quarantine level is guaranteed to work.
    """
    spread = params.k * (1.0 - params.alpha)
    if spread >= 1.0:
        return None
    return 1.0 - spread


@dataclass(frozen=True)
class ThresholdReport:
    z_state: Optional[float]
    z_global: Optional[float]
    lambda_critical: Optional[float]
    predicts_decline: bool
    decline_guaranteed: bool


def threshold_report(state: StateVector, params: ModelParams) -> ThresholdReport:
    z = z_state(state, params)
    zg = z_global(params) if params.is_quarantine else None
    lam_star = lambda_critical(params)
    # The basic model behaves like lam = 1, which is never <= lam_star unless alpha = 1.
    lam = params.lam if params.is_quarantine else 1.0
    return ThresholdReport(
        z_state=z,
        z_global=zg,
        lambda_critical=lam_star,
        predicts_decline=z is not None and z < 1.0,
        decline_guaranteed=lam_star is not None and lam <= lam_star,
    )
