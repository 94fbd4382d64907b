"""Scenario files: YAML in, validated :class:`ScenarioConfig` out.

Every problem is reported as a :class:`~bbdfs.errors.ConfigError` naming
the dotted field it came from.  See the README for the full schema.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import yaml

from .errors import BBDFSError, ConfigError
from .model import (BathSpec, KINDS, RegisterLayout, Scenario, chain_couplings,
                    random_bath_fields)
from .pulses import QubitClock, as_fraction, storage_clocks

SCHEDULE_MODES = ("storage", "none", "custom")
STATE_LABELS = {
    "0": (1, 0), "1": (0, 1),
    "+": (1 / math.sqrt(2), 1 / math.sqrt(2)), "-": (1 / math.sqrt(2), -1 / math.sqrt(2)),
    "+i": (1 / math.sqrt(2), 1j / math.sqrt(2)), "-i": (1 / math.sqrt(2), -1j / math.sqrt(2)),
}
GATES = ("x", "z", "cnot")
SWEEP_AXES = ("dt", "g", "gx", "gy", "gz", "J", "Jx", "Jy", "Jz")

_TOP = {"seed", "time", "layout", "couplings", "bath", "system", "schedule", "initial",
        "gate", "thresholds", "sweep"}


@dataclass(frozen=True)
class GateSpec:
    kind: str = "x"
    block: int = 0
    control: int = 0
    target: int = 1
    angle: float = math.pi / 2
    divisions: int = 4096
    script: str | None = None


@dataclass(frozen=True)
class ScenarioConfig:
    """Everything a CLI command needs, already validated."""

    scenario: Scenario
    dt: float
    horizon: float
    schedule_mode: str = "storage"
    clocks: tuple = ()
    sample_every: int = 1
    initial: tuple = ("0",)
    bath_state: str = "mixed"
    reference: str = "initial"
    seed: int = 0
    field_scale: float = 0.0
    gate: GateSpec = field(default_factory=GateSpec)
    thresholds: dict = field(default_factory=dict)
    sweep_axis: str | None = None
    sweep_values: tuple = ()
    raw: dict = field(default_factory=dict, compare=False, repr=False)

    def schedule_clocks(self) -> tuple[QubitClock, ...]:
        if self.schedule_mode == "storage":
            return storage_clocks(self.scenario.layout)
        if self.schedule_mode == "custom":
            return self.clocks
        return ()

    def with_seed(self, seed: int) -> "ScenarioConfig":
        raw = dict(self.raw)
        raw["seed"] = seed
        return from_dict(raw)


def load(path) -> ScenarioConfig:
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise ConfigError(f"cannot read {path}: {exc.strerror}") from exc
    return loads(text)


def loads(text: str) -> ScenarioConfig:
    try:
        doc = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        mark = getattr(exc, "problem_mark", None)
        where = f" at line {mark.line + 1}, column {mark.column + 1}" if mark else ""
        raise ConfigError(f"YAML syntax error{where}: {getattr(exc, 'problem', exc)}") from exc
    if doc is None:
        doc = {}
    if not isinstance(doc, dict):
        raise ConfigError("top level must be a mapping")
    return from_dict(doc)


# --- field helpers --------------------------------------------------------------

def _section(doc, name):
    v = doc.get(name, {})
    if v is None:
        return {}
    if not isinstance(v, dict):
        raise ConfigError("must be a mapping", name)
    return v


def _unknown(sec, allowed, where):
    for k in sec:
        if k not in allowed:
            raise ConfigError(f"unknown key {k!r}", f"{where}.{k}" if where else k)


def _num(v, where, *, positive=False, nonneg=False):
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        raise ConfigError(f"expected a number, got {v!r}", where)
    v = float(v)
    if not math.isfinite(v):
        raise ConfigError("must be finite", where)
    if positive and v <= 0:
        raise ConfigError("must be positive", where)
    if nonneg and v < 0:
        raise ConfigError("must be nonnegative", where)
    return v


def _int(v, where, minimum=None):
    if isinstance(v, bool) or not isinstance(v, int):
        raise ConfigError(f"expected an integer, got {v!r}", where)
    if minimum is not None and v < minimum:
        raise ConfigError(f"must be at least {minimum}", where)
    return v


def _triple(v, where):
    if isinstance(v, (int, float)) and not isinstance(v, bool):
        return (float(v),) * 3
    if not isinstance(v, (list, tuple)) or len(v) != 3:
        raise ConfigError("expected a number or a list of three numbers", where)
    return tuple(_num(x, f"{where}[{i}]") for i, x in enumerate(v))


def _layout(sec) -> RegisterLayout:
    _unknown(sec, {"blocks", "kinds", "start", "bare"}, "layout")
    try:
        if sec.get("bare", False):
            if "blocks" in sec or "kinds" in sec:
                raise ConfigError("a bare layout takes no blocks or kinds", "layout.bare")
            return RegisterLayout.bare_qubit()
        if "kinds" in sec:
            kinds = sec["kinds"]
            if isinstance(kinds, str):
                kinds = list(kinds)
            if not isinstance(kinds, list):
                raise ConfigError("expected a list such as [A, B, C]", "layout.kinds")
            if "blocks" in sec and sec["blocks"] != len(kinds):
                raise ConfigError("does not match the number of kinds", "layout.blocks")
            return RegisterLayout(tuple(str(k) for k in kinds))
        count = _int(sec.get("blocks", 1), "layout.blocks", 1)
        start = str(sec.get("start", "A"))
        if start not in KINDS:
            raise ConfigError(f"unknown block kind {start!r}", "layout.start")
        return RegisterLayout.periodic(count, start)
    except ConfigError:
        raise
    except BBDFSError as exc:
        raise ConfigError(str(exc), "layout.kinds") from exc


def _pair(v, where):
    if isinstance(v, str) and "-" in v:
        v = v.split("-")
    if not isinstance(v, (list, tuple)) or len(v) != 2:
        raise ConfigError("expected a qubit pair such as [2, 3] or '2-3'", where)
    try:
        return tuple(int(q) for q in v)
    except (TypeError, ValueError) as exc:
        raise ConfigError("qubit indices must be integers", where) from exc


def _clocks(sec, n_system):
    items = sec.get("clocks")
    if not isinstance(items, list) or not items:
        raise ConfigError("custom mode needs a nonempty list of clocks", "schedule.clocks")
    out = []
    for i, c in enumerate(items):
        where = f"schedule.clocks[{i}]"
        if not isinstance(c, dict):
            raise ConfigError("expected a mapping with qubit, period, offset, axis", where)
        _unknown(c, {"qubit", "period", "offset", "axis"}, where)
        q = _int(c.get("qubit"), f"{where}.qubit", 1)
        if q > n_system:
            raise ConfigError(f"qubit {q} is outside the system register", f"{where}.qubit")
        try:
            out.append(QubitClock(q, as_fraction(c.get("period", 1), "period"),
                                  as_fraction(c.get("offset", 0), "offset"), str(c.get("axis", "z"))))
        except BBDFSError as exc:
            raise ConfigError(str(exc), where) from exc
    return tuple(out)


def from_dict(doc: dict) -> ScenarioConfig:
    _unknown(doc, _TOP, "")
    seed = _int(doc.get("seed", 0), "seed", 0)

    time = _section(doc, "time")
    _unknown(time, {"dt", "horizon", "sample_every"}, "time")
    dt = _num(time.get("dt", 0.1), "time.dt", positive=True)
    horizon = _num(time.get("horizon", 0.0), "time.horizon", nonneg=True)
    sample_every = _int(time.get("sample_every", 1), "time.sample_every", 1)

    layout = _layout(_section(doc, "layout"))

    cpl = _section(doc, "couplings")
    _unknown(cpl, {"J", "overrides"}, "couplings")
    J = _triple(cpl.get("J", 0.0), "couplings.J")
    overrides = {}
    for i, o in enumerate(cpl.get("overrides") or []):
        where = f"couplings.overrides[{i}]"
        if not isinstance(o, dict) or "pair" not in o or "J" not in o:
            raise ConfigError("expected a mapping with pair and J", where)
        overrides[_pair(o["pair"], f"{where}.pair")] = _triple(o["J"], f"{where}.J")
    try:
        couplings = chain_couplings(layout, J, overrides)
    except BBDFSError as exc:
        raise ConfigError(str(exc), "couplings.overrides") from exc

    bsec = _section(doc, "bath")
    _unknown(bsec, {"spins_per_block", "g", "collective", "shared", "field_scale", "fields"}, "bath")
    spb = _int(bsec.get("spins_per_block", 1), "bath.spins_per_block", 0)
    g = _triple(bsec.get("g", 0.0), "bath.g")
    collective = bsec.get("collective", True)
    if collective is not True:
        raise ConfigError("only collective system-bath coupling is supported", "bath.collective")
    shared = bool(bsec.get("shared", False))
    n_bath = spb if shared else spb * len(layout.blocks)
    scale = _num(bsec.get("field_scale", 0.0), "bath.field_scale", nonneg=True)
    if "fields" in bsec:
        raw_fields = bsec["fields"]
        if not isinstance(raw_fields, list) or len(raw_fields) > n_bath:
            raise ConfigError(f"expected at most {n_bath} field triples", "bath.fields")
        fields = tuple(_triple(f, f"bath.fields[{i}]") for i, f in enumerate(raw_fields))
    elif scale > 0 and n_bath:
        fields = random_bath_fields(n_bath, scale, seed)
    else:
        fields = ()
    bath = BathSpec(spb, g, True, fields, shared)

    sys_sec = _section(doc, "system")
    _unknown(sys_sec, {"epsilon"}, "system")
    eps = _num(sys_sec.get("epsilon", 0.0), "system.epsilon")

    try:
        scenario = Scenario(layout, couplings, bath, eps)
    except BBDFSError as exc:
        raise ConfigError(str(exc), "bath") from exc
    if scenario.n_sites > 12:
        raise ConfigError(f"{scenario.n_sites} sites exceed the dense limit of 12", "layout.blocks")

    sch = _section(doc, "schedule")
    _unknown(sch, {"mode", "clocks"}, "schedule")
    mode = str(sch.get("mode", "storage"))
    if mode not in SCHEDULE_MODES:
        raise ConfigError(f"must be one of {', '.join(SCHEDULE_MODES)}", "schedule.mode")
    if mode == "storage" and layout.bare:
        mode = "none"
    clocks = _clocks(sch, layout.n_system) if mode == "custom" else ()

    ini = _section(doc, "initial")
    _unknown(ini, {"state", "bath", "reference"}, "initial")
    state = ini.get("state", "0")
    states = state if isinstance(state, list) else [state]
    states = [str(s) for s in states]
    for i, s in enumerate(states):
        if s not in STATE_LABELS:
            raise ConfigError(f"unknown state label {s!r} (use {', '.join(STATE_LABELS)})",
                              f"initial.state[{i}]" if isinstance(state, list) else "initial.state")
    units = max(1, len(layout.blocks))
    if len(states) > units:
        raise ConfigError(f"at most {units} state labels", "initial.state")
    bath_state = str(ini.get("bath", "mixed"))
    if bath_state not in ("mixed", "zero"):
        raise ConfigError("must be 'mixed' or 'zero'", "initial.bath")
    reference = str(ini.get("reference", "initial"))
    if reference not in ("initial", "averaged"):
        raise ConfigError("must be 'initial' or 'averaged'", "initial.reference")

    gsec = _section(doc, "gate")
    _unknown(gsec, {"kind", "block", "control", "target", "angle", "divisions", "script"}, "gate")
    gate = GateSpec()
    if gsec:
        kind = str(gsec.get("kind", "x"))
        if kind not in GATES:
            raise ConfigError(f"must be one of {', '.join(GATES)}", "gate.kind")
        nblk = len(layout.blocks)

        def blk(name, default):
            b = _int(gsec.get(name, default), f"gate.{name}", 0)
            if b >= nblk:
                raise ConfigError(f"block {b} does not exist (layout has {nblk})", f"gate.{name}")
            return b

        gate = GateSpec(kind, blk("block", 0), blk("control", 0), blk("target", min(1, nblk - 1)),
                        _num(gsec.get("angle", math.pi / 2), "gate.angle"),
                        _int(gsec.get("divisions", 4096), "gate.divisions", 1),
                        gsec.get("script"))
        if layout.bare:
            raise ConfigError("gates need an encoded layout", "gate")

    th = _section(doc, "thresholds")
    thresholds = {}
    for k, v in th.items():
        thresholds[k] = _num(v, f"thresholds.{k}")

    sw = _section(doc, "sweep")
    _unknown(sw, {"axis", "values"}, "sweep")
    axis = sw.get("axis")
    values = ()
    if axis is not None:
        axis = str(axis)
        if axis not in SWEEP_AXES:
            raise ConfigError(f"must be one of {', '.join(SWEEP_AXES)}", "sweep.axis")
        vals = sw.get("values")
        if not isinstance(vals, list):
            raise ConfigError("expected a list of numbers", "sweep.values")
        values = tuple(_num(v, f"sweep.values[{i}]") for i, v in enumerate(vals))

    return ScenarioConfig(scenario, dt, horizon, mode, clocks, sample_every, tuple(states),
                          bath_state, reference, seed, scale, gate, thresholds, axis, values,
                          raw=dict(doc))


def apply_sweep_value(cfg: ScenarioConfig, axis: str, value: float) -> ScenarioConfig:
    """Copy of ``cfg`` with one swept parameter set to ``value``."""
    if axis == "dt":
        if value <= 0:
            raise ConfigError("dt values must be positive", "sweep.values")
        return replace(cfg, dt=float(value))
    sc = cfg.scenario
    if axis.startswith("g"):
        g = list(sc.bath.couplings)
        if axis == "g":
            g = [float(value)] * 3
        else:
            g["xyz".index(axis[1])] = float(value)
        return replace(cfg, scenario=sc.replace(bath=replace(sc.bath, couplings=tuple(g))))
    couplings = []
    for c in sc.couplings:
        J = list(c.J)
        if axis == "J":
            J = [float(value)] * 3
        else:
            J["xyz".index(axis[1])] = float(value)
        couplings.append(replace(c, J=tuple(J)))
    return replace(cfg, scenario=sc.replace(couplings=tuple(couplings)))


__all__ = ["ScenarioConfig", "GateSpec", "load", "loads", "from_dict", "apply_sweep_value",
           "STATE_LABELS", "GATES", "SWEEP_AXES"]
