"""Ideal bang-bang pulses and nonsynchronous per-qubit pulse clocks.

Every time in this module is an exact :class:`fractions.Fraction` in units
of the base interval ``dt``; floats only appear once a schedule is handed to
the evolution engine.  A tick of a clock on qubit ``q`` with axis ``a`` is
the instantaneous pulse ``exp(-i pi/2 sigma_q^a) = -i sigma_q^a``.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass
from fractions import Fraction
from functools import reduce

from .errors import AmbiguousFrameError, InvalidOperandError, LayoutError, ScheduleError
from .model import AXIS, RegisterLayout
from .pauli import PauliString, mul

_PULSE_LABELS = {"U", "R"}


def as_fraction(value, what="time") -> Fraction:
    """Exact rational from an int, Fraction, ``"p/q"`` string or exact float."""
    if isinstance(value, bool):
        raise ScheduleError(f"{what} must be a number")
    if isinstance(value, (int, Fraction)):
        return Fraction(value)
    if isinstance(value, str):
        try:
            return Fraction(value.strip())
        except ValueError as exc:
            raise ScheduleError(f"{what} {value!r} is not a rational number") from exc
    if isinstance(value, float):
        if not math.isfinite(value):
            raise ScheduleError(f"{what} must be finite")
        f = Fraction(value).limit_denominator(1 << 20)
        if abs(float(f) - value) > 1e-12 * max(1.0, abs(value)):
            raise ScheduleError(f"{what} {value!r} is not a simple rational multiple of dt")
        return f
    raise ScheduleError(f"{what} must be rational, got {type(value).__name__}")


@dataclass(frozen=True)
class PulseOp:
    """Instantaneous pulse: a phase-tracked Pauli string on the full register."""

    targets: tuple[int, ...]
    action: PauliString
    label: str = "custom"

    def axes(self) -> tuple[str, ...]:
        return tuple(self.action.letters[q - 1] for q in self.targets)


def tick(n_sites: int, qubit: int, axis: str) -> PauliString:
    """``-i sigma^axis`` on one qubit."""
    return PauliString.from_sites(n_sites, {qubit: axis.upper()}, phase=3)


def standard_pulse(name: str, block_kind: str, qubits: tuple[int, int], n_sites: int) -> PulseOp:
    """The ``U_alpha`` (collective) or ``R_alpha`` (second qubit only) pulse of a block.

    >>> str(standard_pulse("Uz", "A", (1, 2), 2).action)
    '- Z1 Z2'
    """
    if len(name) != 2 or name[0] not in _PULSE_LABELS or name[1].upper() not in "XYZ":
        raise InvalidOperandError(f"unknown pulse {name!r}")
    axis = name[1].upper()
    if AXIS.get(block_kind) != axis:
        raise InvalidOperandError(f"pulse {name} does not belong to a {block_kind} block")
    q1, q2 = qubits
    targets = (q1, q2) if name[0] == "U" else (q2,)
    action = reduce(mul, (tick(n_sites, q, axis) for q in targets))
    return PulseOp(targets, action, name[0] + axis.lower())


@dataclass(frozen=True)
class QubitClock:
    """Periodic pulse train on one qubit: ticks at ``offset + k * period``."""

    qubit: int
    period: Fraction
    offset: Fraction = Fraction(0)
    axis: str = "Z"

    def __post_init__(self):
        period = as_fraction(self.period, "period")
        offset = as_fraction(self.offset, "offset")
        if period <= 0:
            raise ScheduleError("clock period must be positive")
        if not 0 <= offset < period:
            raise ScheduleError("clock offset must lie in [0, period)")
        if self.axis.upper() not in ("X", "Y", "Z"):
            raise ScheduleError(f"bad pulse axis {self.axis!r}")
        object.__setattr__(self, "period", period)
        object.__setattr__(self, "offset", offset)
        object.__setattr__(self, "axis", self.axis.upper())

    def ticks(self, horizon: Fraction) -> list[Fraction]:
        out = []
        t = self.offset
        while t < horizon:
            out.append(t)
            t += self.period
        return out


def _lcm_fractions(values) -> Fraction:
    den = reduce(math.lcm, (v.denominator for v in values), 1)
    num = reduce(math.lcm, (int(v * den) for v in values), 1)
    return Fraction(num, den)


def common_period(clocks) -> Fraction:
    """Least time after which every clock's frame repeats (two ticks per clock).

    Without clocks the frame never changes and the base interval is returned.
    """
    if not clocks:
        return Fraction(1)
    return _lcm_fractions([2 * c.period for c in clocks])


@dataclass(frozen=True)
class Schedule:
    """Time-ordered pulse events on ``[0, horizon)`` generated by clocks."""

    horizon: Fraction
    events: tuple[tuple[Fraction, PulseOp], ...]
    clocks: tuple[QubitClock, ...]
    period: Fraction
    n_sites: int

    @property
    def times(self) -> tuple[Fraction, ...]:
        return tuple(t for t, _ in self.events)

    def one_period(self) -> "Schedule":
        """The same clocks restricted to a single common period."""
        if self.horizon == self.period:
            return self
        return generate_schedule(self.clocks, self.period, self.n_sites)


def generate_schedule(clocks, horizon, n_sites: int) -> Schedule:
    """Merge every tick of every clock on ``[0, horizon)`` into events.

    Ticks at the same instant become one :class:`PulseOp` (the product of
    the single-qubit pulses, taken in clock order).
    """
    horizon = as_fraction(horizon, "horizon")
    if horizon < 0:
        raise ScheduleError("horizon must be nonnegative")
    clocks = tuple(clocks)
    for c in clocks:
        if not 1 <= c.qubit <= n_sites:
            raise ScheduleError(f"clock qubit {c.qubit} outside the register")
    at: dict[Fraction, list[QubitClock]] = {}
    for c in clocks:
        for t in c.ticks(horizon):
            at.setdefault(t, []).append(c)
    events = []
    for t in sorted(at):
        ticking = at[t]
        action = reduce(mul, (tick(n_sites, c.qubit, c.axis) for c in ticking))
        targets = tuple(sorted({c.qubit for c in ticking}))
        events.append((t, PulseOp(targets, action)))
    return Schedule(horizon, tuple(events), clocks, common_period(clocks), n_sites)


def frame_before(s: Schedule, t) -> PauliString:
    """Ordered product of every pulse at times strictly before ``t``.

    The latest pulse multiplies from the left.  Times beyond the horizon are
    folded back using the common period.
    """
    t = as_fraction(t)
    n = s.n_sites
    if t > s.horizon and s.clocks:
        base = s.one_period()
        k, r = divmod(t, s.period)
        full = frame_before(base, s.period) if k else PauliString.identity(n)
        whole = PauliString.identity(n)
        for _ in range(int(k) % 4):
            whole = mul(full, whole)
        return mul(frame_before(base, r), whole)
    frame = PauliString.identity(n)
    for time, op in s.events:
        if time >= t:
            break
        frame = mul(op.action, frame)
    return frame


def toggling_frame(s: Schedule, t) -> PauliString:
    """Frame operator on the open interval containing ``t``."""
    t = as_fraction(t)
    if not 0 <= t <= s.horizon:
        raise ScheduleError(f"time {t} outside [0, {s.horizon}]")
    if t in set(s.times):
        raise AmbiguousFrameError(f"time {t} coincides with a pulse")
    return frame_before(s, t)


def frame_sign(frame: PauliString, p: PauliString) -> int:
    """Sign picked up by ``p`` under ``frame^dagger p frame``."""
    return 1 if frame.commutes(p) else -1


def period_segments(s: Schedule):
    """``(start, end, frame)`` for the free-evolution segments of one period."""
    base = s.one_period()
    cuts = sorted({Fraction(0), *base.times, base.period})
    out = []
    frame = PauliString.identity(s.n_sites)
    events = dict(base.events)
    for a, b in zip(cuts, cuts[1:]):
        if a in events:
            frame = mul(events[a].action, frame)
        out.append((a, b, frame))
    return out


# --- standard programs --------------------------------------------------------

def storage_clocks(layout: RegisterLayout, kinds=None) -> tuple[QubitClock, ...]:
    """Default memory program: first qubit every 2 dt, second every dt from dt/2.

    ``kinds`` overrides the pulse axis per block (used while a block is
    temporarily re-encoded).
    """
    if layout.bare:
        return ()
    kinds = tuple(kinds) if kinds is not None else layout.block_kinds
    if len(kinds) != len(layout.blocks):
        raise LayoutError("one kind per block is required")
    clocks = []
    for kind, (q1, q2) in zip(kinds, layout.blocks):
        axis = AXIS[kind]
        clocks.append(QubitClock(q1, Fraction(2), Fraction(0), axis))
        clocks.append(QubitClock(q2, Fraction(1), Fraction(1, 2), axis))
    return tuple(clocks)


def synchronous_clocks(layout: RegisterLayout, block: int, kinds=None) -> tuple[QubitClock, ...]:
    """Storage program except ``block``, whose two qubits tick together every dt/2."""
    kinds = tuple(kinds) if kinds is not None else layout.block_kinds
    q1, q2 = layout.blocks[block]
    axis = AXIS[kinds[block]]
    out = [c for c in storage_clocks(layout, kinds) if c.qubit not in (q1, q2)]
    out += [QubitClock(q1, Fraction(1, 2), Fraction(0), axis),
            QubitClock(q2, Fraction(1, 2), Fraction(0), axis)]
    return tuple(sorted(out, key=lambda c: c.qubit))


def schedule_to_csv(s: Schedule) -> str:
    """``time,qubits,axis`` rows; multi-qubit events list qubits and axes space-separated."""
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["time", "qubits", "axis"])
    for t, op in s.events:
        w.writerow([str(t), " ".join(map(str, op.targets)), " ".join(a.lower() for a in op.axes())])
    return buf.getvalue()
