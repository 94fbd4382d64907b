"""Hamiltonians of a one-dimensional register of encoded pairs.

The register is a chain of physical qubits grouped into two-qubit blocks
whose kinds cycle ``A, B, C`` (the ``AABBCC...`` layout).  Each block sees
its own small spin bath (or one shared bath), coupled collectively:
both qubits of a block couple to the same bath operators ``b_alpha``.

Site numbering used throughout: system qubits ``1..n_system`` first, then
bath spins.  All energies are dimensionless with hbar = 1.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import LayoutError, UnsupportedConfigurationError
from .pauli import PauliSum

KINDS = ("A", "B", "C")
#: storage pulse axis of each block kind
AXIS = {"A": "Z", "B": "X", "C": "Y"}
BARE = "Q"


@dataclass(frozen=True)
class ExchangeCoupling:
    """``J_x XX + J_y YY + J_z ZZ`` between two neighbouring qubits."""

    pair: tuple[int, int]
    J: tuple[float, float, float]

    def __post_init__(self):
        i, j = (int(q) for q in self.pair)
        if abs(i - j) != 1:
            raise LayoutError(f"exchange pair {self.pair} is not nearest-neighbour")
        if len(self.J) != 3:
            raise LayoutError("J must have three components")
        object.__setattr__(self, "pair", (min(i, j), max(i, j)))
        object.__setattr__(self, "J", tuple(float(v) for v in self.J))


@dataclass(frozen=True)
class BathSpec:
    """Spin bath attached to every block.

    ``couplings`` are the per-axis strengths ``g_alpha``; the bath operator
    is ``b_alpha = g_alpha * sum_k sigma^alpha_k`` over the block's bath
    spins.  ``bath_fields`` holds one local field triple per bath spin in
    site order; missing entries mean zero field.
    """

    spins_per_block: int = 1
    couplings: tuple[float, float, float] = (0.0, 0.0, 0.0)
    collective: bool = True
    bath_fields: tuple[tuple[float, float, float], ...] = ()
    shared: bool = False

    def __post_init__(self):
        if self.spins_per_block < 0:
            raise LayoutError("spins_per_block must be nonnegative")
        object.__setattr__(self, "couplings", tuple(float(g) for g in self.couplings))
        object.__setattr__(
            self, "bath_fields", tuple(tuple(float(v) for v in h) for h in self.bath_fields)
        )


@dataclass(frozen=True)
class RegisterLayout:
    """Blocks of two physical qubits with kinds following the A, B, C cycle.

    ``blocks`` lists the (first, second) physical qubit of each block; by
    default blocks are packed from qubit 1.  A *bare* layout has a single
    unencoded qubit and no blocks in the coding sense.
    """

    block_kinds: tuple[str, ...]
    blocks: tuple[tuple[int, ...], ...] = ()
    bare: bool = False

    def __post_init__(self):
        kinds = tuple(self.block_kinds)
        object.__setattr__(self, "block_kinds", kinds)
        if self.bare:
            if kinds != (BARE,):
                raise LayoutError("a bare layout has exactly one unencoded qubit")
            object.__setattr__(self, "blocks", ((1,),))
            return
        if not kinds:
            raise LayoutError("layout needs at least one block")
        for k in kinds:
            if k not in KINDS:
                raise LayoutError(f"unknown block kind {k!r}")
        start = KINDS.index(kinds[0])
        for pos, k in enumerate(kinds):
            if k != KINDS[(start + pos) % 3]:
                raise LayoutError(f"block kinds must cycle A, B, C; got {''.join(kinds)}")
        blocks = self.blocks or tuple((2 * b + 1, 2 * b + 2) for b in range(len(kinds)))
        blocks = tuple(tuple(int(q) for q in blk) for blk in blocks)
        if len(blocks) != len(kinds):
            raise LayoutError("one qubit pair is needed per block")
        used = set()
        for blk in blocks:
            if len(blk) != 2 or blk[1] != blk[0] + 1 or blk[0] < 1:
                raise LayoutError(f"block {blk} must be two adjacent qubits (q, q+1)")
            if used & set(blk):
                raise LayoutError(f"block {blk} overlaps another block")
            used |= set(blk)
        if list(blocks) != sorted(blocks):
            raise LayoutError("blocks must be listed in chain order")
        object.__setattr__(self, "blocks", blocks)

    @classmethod
    def periodic(cls, logical_count: int, start: str = "A") -> "RegisterLayout":
        s = KINDS.index(start)
        return cls(tuple(KINDS[(s + b) % 3] for b in range(logical_count)))

    @classmethod
    def bare_qubit(cls) -> "RegisterLayout":
        return cls((BARE,), bare=True)

    @property
    def logical_count(self) -> int:
        return 0 if self.bare else len(self.block_kinds)

    @property
    def n_system(self) -> int:
        return max(q for blk in self.blocks for q in blk)

    def block_of(self, qubit: int) -> int | None:
        for b, blk in enumerate(self.blocks):
            if qubit in blk:
                return b
        return None


def chain_couplings(layout: RegisterLayout, J, overrides=None) -> tuple[ExchangeCoupling, ...]:
    """Uniform nearest-neighbour exchange along the used part of the chain.

    ``overrides`` maps a pair ``(i, i+1)`` to its own ``J`` triple.
    """
    overrides = {tuple(sorted(k)): v for k, v in (overrides or {}).items()}
    used = sorted(q for blk in layout.blocks for q in blk)
    pairs = [(q, q + 1) for q in used if q + 1 in used]
    for p in overrides:
        if p not in pairs:
            raise LayoutError(f"override pair {p} is not a coupled nearest-neighbour pair")
    return tuple(ExchangeCoupling(p, overrides.get(p, J)) for p in pairs)


@dataclass(frozen=True)
class Scenario:
    """Register, couplings and bath: everything needed to write down ``H``."""

    layout: RegisterLayout
    couplings: tuple[ExchangeCoupling, ...] = ()
    bath: BathSpec = field(default_factory=BathSpec)
    epsilon: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "couplings", tuple(self.couplings))
        n = self.layout.n_system
        seen = set()
        for c in self.couplings:
            if c.pair[1] > n:
                raise LayoutError(f"coupling {c.pair} refers to a qubit beyond {n}")
            if c.pair in seen:
                raise LayoutError(f"coupling {c.pair} given twice")
            seen.add(c.pair)
        if not self.bath.collective:
            raise UnsupportedConfigurationError("only collective baths are supported")
        if len(self.bath.bath_fields) > self.n_bath:
            raise LayoutError("more bath fields than bath spins")

    @property
    def n_system(self) -> int:
        return self.layout.n_system

    @property
    def n_bath(self) -> int:
        spb = self.bath.spins_per_block
        return spb if self.bath.shared else spb * len(self.layout.blocks)

    @property
    def n_sites(self) -> int:
        return self.n_system + self.n_bath

    def bath_sites(self, block: int) -> tuple[int, ...]:
        spb = self.bath.spins_per_block
        first = self.n_system + 1 + (0 if self.bath.shared else block * spb)
        return tuple(range(first, first + spb))

    def coupling(self, pair) -> ExchangeCoupling | None:
        pair = tuple(sorted(pair))
        for c in self.couplings:
            if c.pair == pair:
                return c
        return None

    def replace(self, **changes) -> "Scenario":
        from dataclasses import replace

        return replace(self, **changes)


def build_interaction(c: ExchangeCoupling, n_sites: int) -> PauliSum:
    i, j = c.pair
    return PauliSum(n_sites, [(_letters(n_sites, {i: a, j: a}), J) for a, J in zip("XYZ", c.J)])


def build_system_bath(qubits, bath_sites, bath: BathSpec, n_sites: int) -> PauliSum:
    """``sum_alpha sum_i sigma_i^alpha (x) b_alpha`` for one block."""
    if not bath.collective:
        raise UnsupportedConfigurationError("only collective baths are supported")
    terms = []
    for a, g in zip("XYZ", bath.couplings):
        for q in qubits:
            for k in bath_sites:
                terms.append((_letters(n_sites, {q: a, k: a}), g))
    return PauliSum(n_sites, terms)


def build_bath(scenario: Scenario) -> PauliSum:
    """Local fields ``h_k . sigma_k`` on the bath spins."""
    n = scenario.n_sites
    terms = []
    for k, h in enumerate(scenario.bath.bath_fields):
        site = scenario.n_system + 1 + k
        for a, v in zip("XYZ", h):
            terms.append((_letters(n, {site: a}), v))
    return PauliSum(n, terms)


def build_system(scenario: Scenario) -> PauliSum:
    """Optional Zeeman splitting ``epsilon * sigma^z`` on every used qubit."""
    n = scenario.n_sites
    qubits = [q for blk in scenario.layout.blocks for q in blk]
    return PauliSum(n, [(_letters(n, {q: "Z"}), scenario.epsilon) for q in qubits])


def build_total(scenario: Scenario) -> PauliSum:
    n = scenario.n_sites
    parts = [build_system(scenario), build_bath(scenario)]
    for b, blk in enumerate(scenario.layout.blocks):
        parts.append(build_system_bath(blk, scenario.bath_sites(b), scenario.bath, n))
    parts.extend(build_interaction(c, n) for c in scenario.couplings)
    return PauliSum.total(n, parts)


def random_bath_fields(n_spins: int, scale: float, seed: int) -> tuple[tuple[float, float, float], ...]:
    """Seeded Gaussian local fields, one triple per bath spin."""
    rng = np.random.default_rng(seed)
    return tuple(tuple(float(v) for v in row) for row in rng.normal(0.0, scale, size=(n_spins, 3)))


def _letters(n, sites):
    chars = ["I"] * n
    for s, a in sites.items():
        chars[s - 1] = a
    return "".join(chars)
