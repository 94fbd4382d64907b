"""First-order average Hamiltonians of pulsed evolution.

Two routes are provided.  :func:`group_average` is the symmetrisation
``(1/|G|) sum_k g_k^dagger H g_k`` over an explicit pulse set.
:func:`schedule_average` follows an arbitrary nonsynchronous schedule and
weights each toggling-frame conjugate by the exact rational length of the
segment it applies to.  Both decide cancellation by exact arithmetic.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

from .errors import InvalidOperandError, ScheduleError
from .model import AXIS, Scenario, build_total
from .pauli import PauliString, PauliSum
from .pulses import Schedule, frame_sign, generate_schedule, period_segments, storage_clocks


@dataclass(frozen=True)
class DecouplingReport:
    """Outcome of averaging ``input`` over one common period.

    ``weights`` maps each input term to its exact average sign; terms with
    weight zero are listed in ``cancelled`` with their original coefficient.
    """

    input: PauliSum
    surviving: PauliSum
    cancelled: PauliSum
    period: Fraction
    weights: dict = field(default_factory=dict, compare=False)
    expected: PauliSum | None = field(default=None, compare=False)

    @property
    def satisfied(self) -> bool:
        """True when ``surviving`` equals ``expected`` term by term (or nothing was expected)."""
        return self.expected is None or self.surviving == self.expected

    def to_text(self) -> str:
        from .pauli import format_sum

        lines = [f"period: {self.period}", f"sites: {self.input.n}",
                 f"surviving ({len(self.surviving)} terms):"]
        lines += format_sum(self.surviving, header=False).splitlines()
        lines.append(f"cancelled ({len(self.cancelled)} terms):")
        lines += format_sum(self.cancelled, header=False).splitlines()
        if self.expected is not None:
            lines.append(f"expected cancellations hold: {'yes' if self.satisfied else 'no'}")
            if not self.satisfied:
                extra = self.surviving - self.expected
                lines.append("mismatch:")
                lines += format_sum(extra, header=False).splitlines()
        return "\n".join(lines) + "\n"


def _weighted(h: PauliSum, weights: dict[str, Fraction]) -> tuple[PauliSum, PauliSum]:
    surviving, cancelled = [], []
    for p, c in h:
        w = weights[p.letters]
        if w == 0:
            cancelled.append((p.letters, c))
        else:
            surviving.append((p.letters, c * float(w)))
    return PauliSum(h.n, surviving), PauliSum(h.n, cancelled)


def group_average(ops, h: PauliSum) -> PauliSum:
    """Symmetrise ``h`` over the pulse set ``ops``."""
    ops = list(ops)
    if not ops:
        raise InvalidOperandError("group_average needs at least one operation")
    for g in ops:
        if g.n != h.n:
            raise InvalidOperandError(f"length mismatch: {g.n} vs {h.n}")
    weights = {
        p.letters: Fraction(sum(frame_sign(g, p) for g in ops), len(ops)) for p, _ in h
    }
    return _weighted(h, weights)[0]


def schedule_weights(s: Schedule, h: PauliSum) -> dict[str, Fraction]:
    """Exact time-averaged conjugation sign of every term of ``h`` over one period."""
    if s.period is None or s.period <= 0:
        raise ScheduleError("schedule has no finite common period")
    if s.n_sites != h.n:
        raise InvalidOperandError(f"length mismatch: {s.n_sites} vs {h.n}")
    segs = period_segments(s)
    out = {}
    for p, _ in h:
        acc = sum((frame_sign(f, p) * (b - a) for a, b, f in segs), Fraction(0))
        out[p.letters] = acc / s.period
    return out


def schedule_average(s: Schedule, h: PauliSum) -> DecouplingReport:
    weights = schedule_weights(s, h)
    surviving, cancelled = _weighted(h, weights)
    return DecouplingReport(h, surviving, cancelled, s.period, weights)


def expected_storage_hamiltonian(scenario: Scenario, kinds=None) -> PauliSum:
    """What the storage program should leave of ``build_total(scenario)``.

    Built directly from the scenario: per block the intra-pair exchange and
    the bath coupling along the block's own axis, the bath fields, and the
    Zeeman term where it lies along the axis.  Nothing couples two blocks.
    """
    n = scenario.n_sites
    layout = scenario.layout
    kinds = tuple(kinds) if kinds is not None else layout.block_kinds
    terms = []
    for k, h in enumerate(scenario.bath.bath_fields):
        site = scenario.n_system + 1 + k
        for a, v in zip("XYZ", h):
            terms.append((PauliString.from_sites(n, {site: a}).letters, v))
    for b, (kind, blk) in enumerate(zip(kinds, layout.blocks)):
        axis = AXIS.get(kind)
        if axis is None:
            continue
        ax = "XYZ".index(axis)
        c = scenario.coupling(blk)
        if c is not None:
            terms.append((PauliString.from_sites(n, {blk[0]: axis, blk[1]: axis}).letters, c.J[ax]))
        g = scenario.bath.couplings[ax]
        for q in blk:
            for site in scenario.bath_sites(b):
                terms.append((PauliString.from_sites(n, {q: axis, site: axis}).letters, g))
            if axis == "Z":
                terms.append((PauliString.from_sites(n, {q: "Z"}).letters, scenario.epsilon))
    return PauliSum(n, terms)


def storage_report(scenario: Scenario, kinds=None) -> DecouplingReport:
    """Average the full Hamiltonian over the storage program and check the result."""
    clocks = storage_clocks(scenario.layout, kinds)
    s = generate_schedule(clocks, 0, scenario.n_sites)
    rep = schedule_average(s, build_total(scenario))
    return DecouplingReport(rep.input, rep.surviving, rep.cancelled, rep.period, rep.weights,
                            expected_storage_hamiltonian(scenario, kinds))


def cross_block_terms(h: PauliSum, scenario: Scenario) -> PauliSum:
    """Terms of ``h`` whose system support touches more than one block."""
    layout = scenario.layout

    def crosses(p: PauliString) -> bool:
        blocks = {layout.block_of(q) for q in p.support() if q <= scenario.n_system}
        return len(blocks) > 1

    return h.restrict(crosses)
