"""Discrete-time mean-field model of offensive-message spread, with an optional quarantine class."""

from .dynamics import ModelKind, ModelParams, StateVector, StopRule, Trajectory, simulate, step
from .thresholds import lambda_critical, threshold_report, z_global, z_state

__all__ = [
    "ModelKind",
    "ModelParams",
    "StateVector",
    "StopRule",
    "Trajectory",
    "simulate",
    "step",
    "lambda_critical",
    "threshold_report",
    "z_global",
    "z_state",
]

__version__ = "0.1.0"
