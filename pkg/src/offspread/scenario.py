"""Scenario files: flat ``key = value`` lines with an optional ``[sweep]`` section.

Example::

    name = fig3
    model = quarantine
    alpha = 0.999
    k = 10
    lambda = 0.5
    mu = 0.99
    S0_frac = 0.07
    O0_frac = 0.6

    [sweep]
    param = quarantine_fraction
    grid = 0:1:0.1

``#`` starts a comment. Errors carry the offending line number.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from importlib import resources
from pathlib import Path
from typing import Optional

from .dynamics import (
    DEFAULT_ALPHA,
    DEFAULT_HORIZON,
    DEFAULT_K,
    DEFAULT_N,
    DEFAULT_O0,
    DEFAULT_S0_FRAC,
    ModelKind,
    ModelParams,
    StateVector,
    StopRule,
    default_initial,
    initial_from_fractions,
)

PRESETS = ("fig2", "fig3", "fig4", "fig5")
SWEEP_PARAMS = ("lambda", "mu", "alpha", "k", "S0_frac", "quarantine_fraction")


class ScenarioError(ValueError):
    def __init__(self, message: str, line: Optional[int] = None, source: str = "<scenario>"):
        self.line = line
        self.source = source
        where = f"{source}:{line}: " if line is not None else f"{source}: "
        super().__init__(where + message)


@dataclass(frozen=True)
class InitialSpec:
    """How to build the t = 0 state.

    Either explicit ``fractions`` of ``(U, O, Q, S)``, or ``S0_frac`` stiflers
    plus ``O0``/``Q0`` users (absolute, or as ``*_frac`` of N) with the rest
    uninformed.
    """

    s0_frac: float = DEFAULT_S0_FRAC
    o0: float = DEFAULT_O0
    q0: float = 0.0
    o0_frac: Optional[float] = None
    q0_frac: Optional[float] = None
    fractions: Optional[tuple[float, float, float, float]] = None

    def build(self, params: ModelParams) -> StateVector:
        if self.fractions is not None:
            return initial_from_fractions(params, self.fractions)
        o = self.o0_frac * params.N if self.o0_frac is not None else self.o0
        q = self.q0_frac * params.N if self.q0_frac is not None else self.q0
        return default_initial(params, self.s0_frac, o, q)


@dataclass(frozen=True)
class SweepSpec:
    param: str
    values: tuple[float, ...]
    series: bool = False


@dataclass(frozen=True)
class Scenario:
    name: str = "scenario"
    params: ModelParams = field(default_factory=ModelParams)
    initial: InitialSpec = field(default_factory=InitialSpec)
    horizon: int = DEFAULT_HORIZON
    stop: Optional[StopRule] = field(default_factory=StopRule)
    sweep: Optional[SweepSpec] = None
    out: Optional[str] = None
    svg: bool = False

    def initial_state(self) -> StateVector:
        return self.initial.build(self.params)

    def with_value(self, param: str, value: float) -> "Scenario":
        """Copy of this scenario with one swept parameter set to ``value``."""
        if param == "S0_frac":
            if self.initial.fractions is not None:
                raise ScenarioError("cannot sweep S0_frac when 'initial' fractions are given")
            return replace(self, initial=replace(self.initial, s0_frac=value))
        mapping = {"lambda": "lam", "mu": "mu", "alpha": "alpha", "k": "k"}
        if param == "quarantine_fraction":
            return replace(self, params=replace(self.params, lam=1.0 - value))
        if param not in mapping:
            raise ScenarioError(f"unknown sweep parameter {param!r}; expected one of {', '.join(SWEEP_PARAMS)}")
        return replace(self, params=replace(self.params, **{mapping[param]: value}))


def _parse_float(text: str, key: str, line: int, source: str) -> float:
    try:
        v = float(text)
    except ValueError:
        raise ScenarioError(f"{key}: expected a number, got {text!r}", line, source) from None
    if not math.isfinite(v):
        raise ScenarioError(f"{key}: value must be finite", line, source)
    return v


def _parse_bool(text: str, key: str, line: int, source: str) -> bool:
    low = text.lower()
    if low in ("true", "yes", "1", "on"):
        return True
    if low in ("false", "no", "0", "off"):
        return False
    raise ScenarioError(f"{key}: expected true/false, got {text!r}", line, source)


def parse_grid(text: str, line: Optional[int] = None, source: str = "<scenario>") -> tuple[float, ...]:
    """``start:stop:step`` (inclusive) or a comma-separated list."""
    text = text.strip()
    if ":" in text:
        parts = text.split(":")
        if len(parts) != 3:
            raise ScenarioError("grid range must be start:stop:step", line, source)
        start, stop, stride = (_parse_float(p.strip(), "grid", line, source) for p in parts)
        if stride <= 0 or stop < start:
            raise ScenarioError("grid range needs step > 0 and stop >= start", line, source)
        count = int(round((stop - start) / stride)) + 1
        values = tuple(round(start + i * stride, 12) for i in range(count))
    else:
        values = tuple(_parse_float(p.strip(), "grid", line, source) for p in text.split(",") if p.strip())
    if not values:
        raise ScenarioError("sweep grid is empty", line, source)
    if any(b <= a for a, b in zip(values, values[1:])):
        raise ScenarioError("sweep grid must be strictly increasing", line, source)
    return values


_TOP_KEYS = {
    "name", "model", "N", "k", "alpha", "lambda", "mu",
    "S0_frac", "O0", "Q0", "O0_frac", "Q0_frac", "initial",
    "horizon", "stop_threshold", "stop_on", "out", "svg",
}
_SWEEP_KEYS = {"param", "grid", "series"}


def parse_scenario(text: str, source: str = "<scenario>") -> Scenario:
    top: dict[str, tuple[str, int]] = {}
    sweep: dict[str, tuple[str, int]] = {}
    section = top
    sweep_line = None
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if line.startswith("["):
            if line != "[sweep]":
                raise ScenarioError(f"unknown section {line!r}", lineno, source)
            if sweep_line is not None:
                raise ScenarioError("duplicate [sweep] section", lineno, source)
            section, sweep_line = sweep, lineno
            continue
        if "=" not in line:
            raise ScenarioError(f"expected 'key = value', got {line!r}", lineno, source)
        key, value = (p.strip() for p in line.split("=", 1))
        allowed = _TOP_KEYS if section is top else _SWEEP_KEYS
        if key not in allowed:
            raise ScenarioError(f"unknown key {key!r}", lineno, source)
        if key in section:
            raise ScenarioError(f"duplicate key {key!r} (first on line {section[key][1]})", lineno, source)
        section[key] = (value, lineno)

    def num(key, default):
        if key not in top:
            return default
        v, ln = top[key]
        return _parse_float(v, key, ln, source)

    def line_of(key):
        return top[key][1] if key in top else None

    model_text, model_line = top.get("model", ("basic", None))
    try:
        kind = ModelKind(model_text.lower())
    except ValueError:
        raise ScenarioError(f"model must be 'basic' or 'quarantine', got {model_text!r}", model_line, source) from None
    if kind is ModelKind.BASIC:
        for key in ("lambda", "mu", "Q0", "Q0_frac"):
            if key in top:
                raise ScenarioError(f"{key} is only meaningful for the quarantine model", top[key][1], source)
    values = dict(
        N=num("N", DEFAULT_N), k=num("k", DEFAULT_K), alpha=num("alpha", DEFAULT_ALPHA),
        lam=num("lambda", 1.0), mu=num("mu", 1.0),
    )
    try:
        params = ModelParams(**values, kind=kind)
    except ValueError as exc:
        field_name = str(exc).split()[0]
        key = {"lam": "lambda"}.get(field_name, field_name)
        raise ScenarioError(str(exc), line_of(key), source) from None

    if "initial" in top:
        v, ln = top["initial"]
        clash = [k for k in ("S0_frac", "O0", "Q0", "O0_frac", "Q0_frac") if k in top]
        if clash:
            raise ScenarioError(f"'initial' cannot be combined with {clash[0]}", ln, source)
        fr = tuple(_parse_float(p.strip(), "initial", ln, source) for p in v.split(","))
        if len(fr) != 4:
            raise ScenarioError("initial must list four fractions U, O, Q, S", ln, source)
        initial = InitialSpec(fractions=fr)
    else:
        for a, b in (("O0", "O0_frac"), ("Q0", "Q0_frac")):
            if a in top and b in top:
                raise ScenarioError(f"give either {a} or {b}, not both", top[b][1], source)
        initial = InitialSpec(
            s0_frac=num("S0_frac", DEFAULT_S0_FRAC),
            o0=num("O0", DEFAULT_O0), q0=num("Q0", 0.0),
            o0_frac=num("O0_frac", None), q0_frac=num("Q0_frac", None),
        )
    try:
        initial.build(params)
    except ValueError as exc:
        keys = ("initial", "S0_frac", "O0", "O0_frac", "Q0", "Q0_frac")
        ln = min((line_of(k) for k in keys if k in top), default=None)
        raise ScenarioError(f"invalid initial state: {exc}", ln, source) from None

    horizon = DEFAULT_HORIZON
    if "horizon" in top:
        v, ln = top["horizon"]
        try:
            horizon = int(v)
        except ValueError:
            raise ScenarioError(f"horizon: expected an integer, got {v!r}", ln, source) from None
        if horizon < 1:
            raise ScenarioError("horizon must be >= 1", ln, source)

    stop_on = top.get("stop_on", ("OQ", None))
    try:
        stop = StopRule(threshold=num("stop_threshold", 0.5), compartments=stop_on[0])
    except ValueError as exc:
        raise ScenarioError(str(exc), stop_on[1] or line_of("stop_threshold"), source) from None

    svg = _parse_bool(top["svg"][0], "svg", top["svg"][1], source) if "svg" in top else False

    sweep_spec = None
    if sweep_line is not None:
        if "param" not in sweep or "grid" not in sweep:
            raise ScenarioError("[sweep] needs both 'param' and 'grid'", sweep_line, source)
        pname, pline = sweep["param"]
        if pname not in SWEEP_PARAMS:
            raise ScenarioError(
                f"unknown sweep parameter {pname!r}; expected one of {', '.join(SWEEP_PARAMS)}", pline, source
            )
        if pname in ("lambda", "mu", "quarantine_fraction") and kind is ModelKind.BASIC:
            raise ScenarioError(f"sweeping {pname} requires model = quarantine", pline, source)
        gtext, gline = sweep["grid"]
        values = parse_grid(gtext, gline, source)
        series = _parse_bool(sweep["series"][0], "series", sweep["series"][1], source) if "series" in sweep else False
        sweep_spec = SweepSpec(pname, values, series)
        base = Scenario(params=params, initial=initial)
        for val in values:
            try:
                base.with_value(pname, val).initial_state()
            except ValueError as exc:
                raise ScenarioError(f"grid value {val!r}: {exc}", gline, source) from None

    return Scenario(
        name=top.get("name", ("scenario", None))[0],
        params=params,
        initial=initial,
        horizon=horizon,
        stop=stop,
        sweep=sweep_spec,
        out=top["out"][0] if "out" in top else None,
        svg=svg,
    )


def load_scenario(path) -> Scenario:
    path = Path(path)
    return parse_scenario(path.read_text(encoding="utf-8"), source=str(path))


def preset_text(name: str) -> str:
    if name not in PRESETS:
        raise ScenarioError(f"unknown preset {name!r}; expected one of {', '.join(PRESETS)}")
    return resources.files("offspread").joinpath("presets").joinpath(f"{name}.scn").read_text(encoding="utf-8")


def load_preset(name: str) -> Scenario:
    return parse_scenario(preset_text(name), source=f"preset:{name}")
