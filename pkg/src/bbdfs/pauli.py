"""Exact symbolic algebra of multi-site Pauli operators.

A :class:`PauliString` is a tensor product of single-site Paulis times an
exact phase ``i**k``.  A :class:`PauliSum` is a finite linear combination of
phase-free strings with complex coefficients.  Sites are numbered from 1 in
the public API; site 1 is the most significant Kronecker factor.

Text form of a sum, one term per line::

    # sites: 3
    (0.5+0.0j) Z1 Z2
    (1.0-2.0j) X3
    (0.25+0.0j) I
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from functools import cached_property
from typing import Iterable, Iterator, Mapping

import numpy as np

from . import kernels
from .errors import CapacityError, InvalidOperandError

MAX_SITES = 12

LETTERS = "IXYZ"
_PHASES = (1, 1j, -1, -1j)

# (a, b) -> (quarter turns, letter) with a * b = i**turns * letter
_MUL = {}
for _a in LETTERS:
    _MUL[("I", _a)] = (0, _a)
    _MUL[(_a, "I")] = (0, _a)
    _MUL[(_a, _a)] = (0, "I")
for _a, _b, _c in (("X", "Y", "Z"), ("Y", "Z", "X"), ("Z", "X", "Y")):
    _MUL[(_a, _b)] = (1, _c)
    _MUL[(_b, _a)] = (3, _c)


@dataclass(frozen=True)
class PauliString:
    """Tensor product of single-site Paulis with an exact phase.

    Parameters
    ----------
    letters : str
        One of ``I, X, Y, Z`` per site.
    phase : int
        Number of quarter turns; the operator carries the factor ``i**phase``.
    """

    letters: str
    phase: int = 0

    def __post_init__(self):
        if not isinstance(self.letters, str) or any(c not in LETTERS for c in self.letters):
            raise InvalidOperandError(f"bad Pauli letters {self.letters!r}")
        object.__setattr__(self, "phase", int(self.phase) % 4)

    @classmethod
    def identity(cls, n: int) -> "PauliString":
        return cls("I" * n)

    @classmethod
    def from_sites(cls, n: int, sites: Mapping[int, str], phase: int = 0) -> "PauliString":
        """Build a string from a ``{site: letter}`` map (1-based sites)."""
        chars = ["I"] * n
        for site, letter in sites.items():
            if not 1 <= site <= n:
                raise InvalidOperandError(f"site {site} outside 1..{n}")
            chars[site - 1] = letter
        return cls("".join(chars), phase)

    @property
    def n(self) -> int:
        return len(self.letters)

    @property
    def factor(self) -> complex:
        return _PHASES[self.phase]

    @cached_property
    def xmask(self) -> int:
        return sum(1 << (self.n - 1 - k) for k, c in enumerate(self.letters) if c in "XY")

    @cached_property
    def zmask(self) -> int:
        return sum(1 << (self.n - 1 - k) for k, c in enumerate(self.letters) if c in "ZY")

    @property
    def weight(self) -> int:
        return sum(c != "I" for c in self.letters)

    def support(self) -> tuple[int, ...]:
        return tuple(k + 1 for k, c in enumerate(self.letters) if c != "I")

    def unsigned(self) -> "PauliString":
        return PauliString(self.letters)

    def dagger(self) -> "PauliString":
        return PauliString(self.letters, -self.phase)

    def commutes(self, other: "PauliString") -> bool:
        _check_len(self, other)
        clashes = sum(
            a != "I" and b != "I" and a != b for a, b in zip(self.letters, other.letters)
        )
        return clashes % 2 == 0

    def __mul__(self, other):
        if isinstance(other, PauliString):
            return mul(self, other)
        return NotImplemented

    def __str__(self):
        sign = ("+", "+i", "-", "-i")[self.phase]
        body = " ".join(f"{c}{k + 1}" for k, c in enumerate(self.letters) if c != "I")
        return f"{sign} {body or 'I'}"

    def dense(self) -> np.ndarray:
        return dense(PauliSum.from_string(self), self.n)


def _order_key(letters: str):
    return [(k, c) for k, c in enumerate(letters) if c != "I"]


def _check_len(p, q):
    if p.n != q.n:
        raise InvalidOperandError(f"length mismatch: {p.n} vs {q.n}")


def mul(p: PauliString, q: PauliString) -> PauliString:
    """Product ``p * q`` with exact phase tracking."""
    _check_len(p, q)
    turns = p.phase + q.phase
    out = []
    for a, b in zip(p.letters, q.letters):
        t, c = _MUL[(a, b)]
        turns += t
        out.append(c)
    return PauliString("".join(out), turns)


class PauliSum:
    """Linear combination of phase-free Pauli strings.

    Instances are immutable.  Keys are letter strings; coefficients that are
    exactly zero are dropped on construction, so equal operators always
    compare equal term by term.
    """

    __slots__ = ("_n", "_terms")

    def __init__(self, n: int, terms: Mapping[str, complex] | Iterable[tuple[str, complex]] = ()):
        self._n = int(n)
        acc: dict[str, complex] = {}
        items = terms.items() if isinstance(terms, Mapping) else terms
        for letters, coeff in items:
            if len(letters) != self._n:
                raise InvalidOperandError(f"term {letters!r} does not have {self._n} sites")
            PauliString(letters)  # validates
            acc[letters] = acc.get(letters, 0j) + complex(coeff)
        self._terms = {k: v for k, v in acc.items() if v != 0}

    @classmethod
    def zero(cls, n: int) -> "PauliSum":
        return cls(n)

    @classmethod
    def from_string(cls, p: PauliString, coeff: complex = 1.0) -> "PauliSum":
        return cls(p.n, [(p.letters, coeff * p.factor)])

    @classmethod
    def term(cls, n: int, sites: Mapping[int, str], coeff: complex = 1.0) -> "PauliSum":
        return cls.from_string(PauliString.from_sites(n, sites), coeff)

    @classmethod
    def total(cls, n: int, parts: Iterable["PauliSum"]) -> "PauliSum":
        acc = []
        for part in parts:
            if part.n != n:
                raise InvalidOperandError(f"length mismatch: {part.n} vs {n}")
            acc.extend(part._terms.items())
        return cls(n, acc)

    @property
    def n(self) -> int:
        return self._n

    @property
    def terms(self) -> dict[str, complex]:
        return dict(self._terms)

    def strings(self) -> list[PauliString]:
        return [PauliString(k) for k in sorted(self._terms, key=_order_key)]

    def coefficient(self, letters: str) -> complex:
        return self._terms.get(letters, 0j)

    def __iter__(self) -> Iterator[tuple[PauliString, complex]]:
        for k in sorted(self._terms, key=_order_key):
            yield PauliString(k), self._terms[k]

    def __len__(self):
        return len(self._terms)

    def __bool__(self):
        return bool(self._terms)

    def __eq__(self, other):
        if not isinstance(other, PauliSum):
            return NotImplemented
        return self._n == other._n and self._terms == other._terms

    def __hash__(self):
        return hash((self._n, frozenset(self._terms.items())))

    def __add__(self, other):
        if not isinstance(other, PauliSum):
            return NotImplemented
        _check_len(self, other)
        return PauliSum(self._n, list(self._terms.items()) + list(other._terms.items()))

    def __neg__(self):
        return self.scale(-1)

    def __sub__(self, other):
        if not isinstance(other, PauliSum):
            return NotImplemented
        return self + (-other)

    def scale(self, a: complex) -> "PauliSum":
        return PauliSum(self._n, [(k, a * v) for k, v in self._terms.items()])

    def __mul__(self, a):
        if isinstance(a, PauliSum):
            _check_len(self, a)
            acc = []
            for ka, ca in self._terms.items():
                for kb, cb in a._terms.items():
                    r = mul(PauliString(ka), PauliString(kb))
                    acc.append((r.letters, ca * cb * r.factor))
            return PauliSum(self._n, acc)
        if isinstance(a, (int, float, complex, np.number)):
            return self.scale(a)
        return NotImplemented

    def __rmul__(self, a):
        if isinstance(a, (int, float, complex, np.number)):
            return self.scale(a)
        return NotImplemented

    def is_hermitian(self) -> bool:
        return all(v.imag == 0 for v in self._terms.values())

    def restrict(self, predicate) -> "PauliSum":
        """Keep only the terms whose :class:`PauliString` satisfies ``predicate``."""
        return PauliSum(self._n, [(k, v) for k, v in self._terms.items() if predicate(PauliString(k))])

    def __repr__(self):
        return f"PauliSum(n={self._n}, terms={len(self._terms)})"

    def __str__(self):
        return format_sum(self, header=False)


def conjugate(g: PauliString, h: PauliSum) -> PauliSum:
    """Return ``g^dagger h g``; each term keeps or flips its sign."""
    if g.n != h.n:
        raise InvalidOperandError(f"length mismatch: {g.n} vs {h.n}")
    return PauliSum(h.n, [
        (k, v if g.commutes(PauliString(k)) else -v) for k, v in h._terms.items()
    ])


def dense(h: PauliSum | PauliString, n: int | None = None, max_sites: int = MAX_SITES) -> np.ndarray:
    """Dense ``2**n x 2**n`` matrix of a Pauli sum (site 1 most significant)."""
    if isinstance(h, PauliString):
        h = PauliSum.from_string(h)
    n = h.n if n is None else n
    if n != h.n:
        raise InvalidOperandError(f"sum has {h.n} sites, asked for {n}")
    if n > max_sites:
        raise CapacityError(f"{n} sites exceeds the maximum of {max_sites}")
    strings = [(PauliString(k), v) for k, v in h._terms.items()]
    xs = np.array([p.xmask for p, _ in strings], dtype=np.uint64)
    zs = np.array([p.zmask for p, _ in strings], dtype=np.uint64)
    cs = np.array([v * 1j ** p.letters.count("Y") for p, v in strings], dtype=np.complex128)
    return kernels.pauli_dense(xs, zs, cs, n)


def apply(p: PauliString, states: np.ndarray) -> np.ndarray:
    """Apply a Pauli string to a vector or to the columns of a 2-D array."""
    arr = np.asarray(states, dtype=np.complex128)
    if arr.shape[0] != 1 << p.n:
        raise InvalidOperandError(f"state dimension {arr.shape[0]} does not match {p.n} sites")
    coeff = p.factor * 1j ** p.letters.count("Y")
    if arr.ndim == 1:
        return kernels.apply_pauli(p.xmask, p.zmask, coeff, arr[:, None])[:, 0]
    return kernels.apply_pauli(p.xmask, p.zmask, coeff, arr)


# ---- text form -------------------------------------------------------------

_TOKEN = re.compile(r"^([IXYZ])(\d+)$")


def _fmt_coeff(c: complex) -> str:
    im = c.imag
    sign = "-" if math.copysign(1.0, im) < 0 else "+"
    return f"({c.real!r}{sign}{abs(im)!r}j)"


def format_sum(h: PauliSum, header: bool = True) -> str:
    lines = [f"# sites: {h.n}"] if header else []
    for p, c in h:
        body = " ".join(f"{ch}{k + 1}" for k, ch in enumerate(p.letters) if ch != "I")
        lines.append(f"{_fmt_coeff(c)} {body or 'I'}")
    return "\n".join(lines) + ("\n" if lines else "")


def parse_sum(text: str, n: int | None = None) -> PauliSum:
    """Parse the text form produced by :func:`format_sum`.

    The site count comes from ``n`` or from a ``# sites:`` header line.
    """
    rows = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.strip()
        if not line:
            continue
        if line.startswith("#"):
            m = re.match(r"#\s*sites:\s*(\d+)", line)
            if m:
                if n is not None and int(m.group(1)) != n:
                    raise InvalidOperandError(f"line {lineno}: header says {m.group(1)} sites, expected {n}")
                n = int(m.group(1))
            continue
        if not line.startswith("("):
            raise InvalidOperandError(f"line {lineno}: expected '(coefficient)' first")
        close = line.index(")")
        try:
            coeff = complex(line[: close + 1])
        except ValueError as exc:
            raise InvalidOperandError(f"line {lineno}: bad coefficient") from exc
        sites = {}
        for tok in line[close + 1:].split():
            if tok == "I":
                continue
            m = _TOKEN.match(tok)
            if not m:
                raise InvalidOperandError(f"line {lineno}: bad token {tok!r}")
            site = int(m.group(2))
            if site in sites:
                raise InvalidOperandError(f"line {lineno}: site {site} repeated")
            sites[site] = m.group(1)
        rows.append((lineno, sites, coeff))
    if n is None:
        raise InvalidOperandError("site count unknown: pass n or include '# sites:'")
    terms = []
    for lineno, sites, coeff in rows:
        if sites and max(sites) > n:
            raise InvalidOperandError(f"line {lineno}: site {max(sites)} beyond {n}")
        terms.append((PauliString.from_sites(n, sites).letters, coeff))
    return PauliSum(n, terms)
