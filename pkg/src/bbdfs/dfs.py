"""Two-qubit decoherence-free codes and encoded gates built from them.

Each block kind protects against collective noise along one axis:

====  =====  ===================  ===================
kind  axis   ``|0>_L``            ``|1>_L``
====  =====  ===================  ===================
A     z      ``|0 1>``            ``|1 0>``
B     x      ``|+ ->``            ``|- +>``
C     y      ``|+i -i>``          ``|-i +i>``
====  =====  ===================  ===================

With ``Zbar = (sigma_1^a - sigma_2^a) / 2`` every kind satisfies
``Zbar |0>_L = +|0>_L``.  Logical X comes from free evolution under the
always-on exchange, logical Z from instantaneous single-qubit rotations,
and the encoded CNOT from the Ising part of the coupling between the two
facing qubits of neighbouring blocks.

A :class:`GatePlan` is a list of steps: instantaneous single-qubit gates
or a stretch of free evolution under a (possibly reclocked) pulse program.
Evolution steps always span whole common periods, so every plan starts and
ends in the storage frame.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DegenerateCouplingError, InvalidOperandError, LayoutError
from .evolution import Generator, Propagator
from .model import AXIS, KINDS, Scenario, build_total
from .pauli import PauliString, PauliSum, dense
from .pulses import (QubitClock, common_period, generate_schedule, standard_pulse,
                     storage_clocks, synchronous_clocks)
from . import kernels

_S2 = 1 / math.sqrt(2)
_PAULI = {
    "X": np.array([[0, 1], [1, 0]], dtype=complex),
    "Y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "Z": np.array([[1, 0], [0, -1]], dtype=complex),
}
# single-qubit maps from each kind's eigenbasis to the z basis
_TO_A = {
    "A": np.eye(2, dtype=complex),
    "B": _S2 * np.array([[1, 1], [1, -1]], dtype=complex),
    "C": _S2 * np.array([[1, -1j], [1, 1j]], dtype=complex),
}
_LOGICAL = {
    "I": np.eye(2, dtype=complex), "X": _PAULI["X"], "Z": _PAULI["Z"],
}
CNOT = np.array([[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0]], dtype=complex)


def _kind_basis(kind):
    up = _TO_A[kind].conj().T  # columns: +1 / -1 eigenvectors of the kind's axis
    plus, minus = up[:, 0], up[:, 1]
    return np.kron(plus, minus), np.kron(minus, plus)


def x_coupling_sum(kind: str, J) -> float:
    """Exchange strength that drives logical X for a kind (the two transverse axes)."""
    jx, jy, jz = J
    return {"A": jx + jy, "B": jy + jz, "C": jx + jz}[kind]


@dataclass(frozen=True)
class LogicalCode:
    """An encoded qubit on physical qubits ``block`` of an ``n_sites`` register."""

    kind: str
    block: tuple[int, int]
    n_sites: int
    J: tuple[float, float, float] = (0.0, 0.0, 0.0)

    def __post_init__(self):
        if self.kind not in KINDS:
            raise InvalidOperandError(f"unknown code kind {self.kind!r}")
        q1, q2 = self.block
        if q2 != q1 + 1 or q2 > self.n_sites:
            raise LayoutError(f"block {self.block} is not a pair of adjacent register qubits")

    @property
    def axis(self) -> str:
        return AXIS[self.kind]

    @property
    def basis(self) -> tuple[np.ndarray, np.ndarray]:
        """Two-qubit basis vectors ``(|0>_L, |1>_L)`` of the block."""
        return _kind_basis(self.kind)

    @property
    def pulse_set(self):
        a = self.axis.lower()
        return (standard_pulse("U" + a, self.kind, self.block, self.n_sites),
                standard_pulse("R" + a, self.kind, self.block, self.n_sites))

    @property
    def logical_x(self) -> PauliSum:
        return logical_operators(self)[0]

    @property
    def logical_z(self) -> PauliSum:
        return logical_operators(self)[1]

    def noise_operator(self) -> PauliSum:
        """``sigma_1^a + sigma_2^a`` along the kind's axis."""
        q1, q2 = self.block
        n = self.n_sites
        return PauliSum.term(n, {q1: self.axis}) + PauliSum.term(n, {q2: self.axis})


def codes_for(scenario: Scenario, kinds=None) -> list[LogicalCode]:
    layout = scenario.layout
    kinds = tuple(kinds) if kinds is not None else layout.block_kinds
    out = []
    for kind, blk in zip(kinds, layout.blocks):
        c = scenario.coupling(blk)
        out.append(LogicalCode(kind, blk, scenario.n_sites, c.J if c else (0.0, 0.0, 0.0)))
    return out


def logical_operators(code: LogicalCode) -> tuple[PauliSum, PauliSum]:
    """``(Xbar, Zbar)`` as Pauli sums on the full register."""
    q1, q2 = code.block
    n = code.n_sites
    axis = code.axis
    others = [a for a in "XYZ" if a != axis]
    s = x_coupling_sum(code.kind, code.J)
    if s == 0:
        raise DegenerateCouplingError(f"kind {code.kind}: exchange gives no logical X (sum is 0)")
    x = PauliSum(n, [
        (PauliString.from_sites(n, {q1: a, q2: a}).letters, code.J["XYZ".index(a)] / s)
        for a in others
    ])
    z = PauliSum(n, [
        (PauliString.from_sites(n, {q1: axis}).letters, 0.5),
        (PauliString.from_sites(n, {q2: axis}).letters, -0.5),
    ])
    return x, z


# --- states -------------------------------------------------------------------

def _embed(n_system: int, local: dict[tuple[int, int], np.ndarray]) -> np.ndarray:
    """Product state: ``local`` block vectors, ``|0>`` on every other qubit."""
    zero = np.array([1, 0], dtype=complex)
    out = np.ones(1, dtype=complex)
    q = 1
    starts = {blk[0]: (blk, v) for blk, v in local.items()}
    while q <= n_system:
        if q in starts:
            blk, v = starts[q]
            out = np.kron(out, v)
            q = blk[1] + 1
        else:
            out = np.kron(out, zero)
            q += 1
    return out


def encode(code: LogicalCode, bit, n_system: int | None = None) -> np.ndarray:
    """Encoded basis state (``bit`` 0 or 1) or logical amplitudes ``(a, b)``.

    Returns a vector over the first ``n_system`` qubits (default: up to the
    block) with every other system qubit in ``|0>``.
    """
    n_system = code.block[1] if n_system is None else n_system
    v0, v1 = code.basis
    if np.ndim(bit) == 0:
        if bit not in (0, 1):
            raise InvalidOperandError("bit must be 0 or 1")
        v = v1 if bit else v0
    else:
        a, b = bit
        v = a * v0 + b * v1
    return _embed(n_system, {code.block: v})


def encode_register(codes, logical_states, n_system: int) -> np.ndarray:
    """Product of per-block logical states (bits or amplitude pairs)."""
    local = {}
    for code, st in zip(codes, logical_states):
        v0, v1 = code.basis
        if np.ndim(st) == 0:
            local[code.block] = v1 if st else v0
        else:
            local[code.block] = st[0] * v0 + st[1] * v1
    return _embed(n_system, local)


def logical_basis(codes, n_system: int) -> np.ndarray:
    """Columns: encoded register basis states, first block most significant."""
    L = len(codes)
    cols = []
    for j in range(1 << L):
        bits = [(j >> (L - 1 - b)) & 1 for b in range(L)]
        cols.append(encode_register(codes, bits, n_system))
    return np.array(cols).T


def code_projector(codes, n_system: int) -> np.ndarray:
    b = logical_basis(codes, n_system)
    return b @ b.conj().T


# --- plans --------------------------------------------------------------------

def _rot(axis: str, angle: float) -> np.ndarray:
    """``exp(i angle sigma^axis)``."""
    return math.cos(angle) * np.eye(2) + 1j * math.sin(angle) * _PAULI[axis]


@dataclass(frozen=True)
class LocalGate:
    qubit: int
    matrix: np.ndarray = field(compare=False)
    label: str = ""


@dataclass(frozen=True)
class PulseStep:
    """Instantaneous single-qubit gates applied together."""

    gates: tuple[LocalGate, ...]
    label: str = ""


@dataclass(frozen=True)
class EvolveStep:
    """Free evolution for ``duration`` under the storage program of ``kinds``.

    ``sync_block`` (if set) is reclocked so both its qubits tick together
    every ``dt/2``.
    """

    kinds: tuple[str, ...]
    duration: float
    sync_block: int | None = None
    label: str = ""

    def clocks(self, layout) -> tuple[QubitClock, ...]:
        if self.sync_block is None:
            return storage_clocks(layout, self.kinds)
        return synchronous_clocks(layout, self.sync_block, self.kinds)


@dataclass(frozen=True)
class GatePlan:
    """Ordered steps realising ``ideal`` on the logical qubits ``blocks``."""

    name: str
    blocks: tuple[int, ...]
    steps: tuple
    ideal: np.ndarray = field(compare=False)
    kinds_before: tuple[str, ...] = ()
    kinds_after: tuple[str, ...] = ()

    @property
    def total_time(self) -> float:
        return sum(s.duration for s in self.steps if isinstance(s, EvolveStep))

    def storage_clocks_after(self, layout):
        return storage_clocks(layout, self.kinds_after)

    def then(self, other: "GatePlan", name=None, ideal=None) -> "GatePlan":
        if other.kinds_before != self.kinds_after:
            raise InvalidOperandError("plans do not chain: pulse sets differ")
        return GatePlan(name or f"{self.name};{other.name}", tuple(sorted(set(self.blocks) | set(other.blocks))),
                        self.steps + other.steps, self.ideal if ideal is None else ideal,
                        self.kinds_before, other.kinds_after)

    # serialisation as a plain JSON script
    def to_script(self) -> str:
        def cm(m):
            return [[[float(v.real), float(v.imag)] for v in row] for row in np.asarray(m)]

        steps = []
        for s in self.steps:
            if isinstance(s, PulseStep):
                steps.append({"op": "pulses", "label": s.label, "gates": [
                    {"qubit": g.qubit, "label": g.label, "matrix": cm(g.matrix)} for g in s.gates]})
            else:
                steps.append({"op": "evolve", "label": s.label, "kinds": list(s.kinds),
                              "duration": s.duration, "sync_block": s.sync_block})
        doc = {"name": self.name, "blocks": list(self.blocks), "kinds_before": list(self.kinds_before),
               "kinds_after": list(self.kinds_after), "ideal": cm(self.ideal), "steps": steps}
        return json.dumps(doc, indent=1)

    @classmethod
    def from_script(cls, text: str) -> "GatePlan":
        doc = json.loads(text)

        def mc(rows):
            return np.array([[complex(re, im) for re, im in row] for row in rows])

        steps = []
        for s in doc["steps"]:
            if s["op"] == "pulses":
                steps.append(PulseStep(tuple(LocalGate(g["qubit"], mc(g["matrix"]), g.get("label", ""))
                                             for g in s["gates"]), s.get("label", "")))
            elif s["op"] == "evolve":
                steps.append(EvolveStep(tuple(s["kinds"]), float(s["duration"]), s.get("sync_block"),
                                        s.get("label", "")))
            else:
                raise InvalidOperandError(f"unknown plan step {s['op']!r}")
        return cls(doc["name"], tuple(doc["blocks"]), tuple(steps), mc(doc["ideal"]),
                   tuple(doc["kinds_before"]), tuple(doc["kinds_after"]))


def _kinds(scenario, kinds):
    return tuple(kinds) if kinds is not None else scenario.layout.block_kinds


def plan_logical_x(scenario: Scenario, block: int, theta: float, kinds=None) -> GatePlan:
    """``exp(-i theta Xbar)`` by free exchange with the block ticking synchronously.

    Synchronous collective pulses average away the block's bath coupling
    transverse to its axis but leave its exchange untouched; on the code the
    exchange acts as ``const + s * Xbar``, so evolving for ``theta / s``
    rotates the logical qubit.
    """
    kinds = _kinds(scenario, kinds)
    blk = scenario.layout.blocks[block]
    c = scenario.coupling(blk)
    s = x_coupling_sum(kinds[block], c.J if c else (0.0, 0.0, 0.0))
    ideal = _rot("X", -theta)
    if theta == 0:
        return GatePlan("x", (block,), (), ideal, kinds, kinds)
    if s == 0:
        raise DegenerateCouplingError(f"block {block}: no exchange to drive logical X")
    t = (theta / s) % (2 * math.pi / abs(s))
    steps = (EvolveStep(kinds, t, block, f"x({theta:g}) on block {block}"),) if t > 0 else ()
    return GatePlan("x", (block,), steps, ideal, kinds, kinds)


def plan_logical_z(scenario: Scenario, block: int, phi: float, kinds=None) -> GatePlan:
    """``exp(i phi Zbar)`` as two instantaneous rotations about the block's axis."""
    kinds = _kinds(scenario, kinds)
    q1, q2 = scenario.layout.blocks[block]
    axis = AXIS[kinds[block]]
    ideal = _rot("Z", phi)
    if phi == 0:
        return GatePlan("z", (block,), (), ideal, kinds, kinds)
    step = PulseStep((LocalGate(q1, _rot(axis, phi / 2), f"r{axis.lower()}"),
                      LocalGate(q2, _rot(axis, -phi / 2), f"r{axis.lower()}")),
                     f"z({phi:g}) on block {block}")
    return GatePlan("z", (block,), (step,), ideal, kinds, kinds)


def recode_block(scenario: Scenario, block: int, to_kind: str = "A", kinds=None) -> GatePlan:
    """Change a block's code (and pulse set) by a local basis change on both qubits.

    ``encode(kind, b)`` maps exactly onto ``encode(to_kind, b)``.
    """
    kinds = _kinds(scenario, kinds)
    src = kinds[block]
    if to_kind not in KINDS:
        raise InvalidOperandError(f"unknown code kind {to_kind!r}")
    after = kinds[:block] + (to_kind,) + kinds[block + 1:]
    if src == to_kind:
        return GatePlan("recode", (block,), (), np.eye(2, dtype=complex), kinds, after)
    u = _TO_A[to_kind].conj().T @ _TO_A[src]
    q1, q2 = scenario.layout.blocks[block]
    step = PulseStep((LocalGate(q1, u, f"{src}->{to_kind}"), LocalGate(q2, u, f"{src}->{to_kind}")),
                     f"recode block {block} {src}->{to_kind}")
    return GatePlan("recode", (block,), (step,), np.eye(2, dtype=complex), kinds, after)


def plan_hadamard(scenario: Scenario, block: int, kinds=None) -> GatePlan:
    """Logical Hadamard as ``Z(-pi/4) X(pi/4) Z(-pi/4)`` (equal to ``H`` up to phase)."""
    z = plan_logical_z(scenario, block, -math.pi / 4, kinds)
    x = plan_logical_x(scenario, block, math.pi / 4, kinds)
    hd = _S2 * np.array([[1, 1], [1, -1]], dtype=complex)
    return z.then(x).then(z, name="h", ideal=hd)


def _cnot_kind(kinds, left, right, control, target):
    outer = {kinds[b] for b in (left - 1, right + 1) if 0 <= b < len(kinds)}
    for k in ("A", kinds[target], kinds[control], *KINDS):
        if k not in outer:
            return k
    raise LayoutError("no code kind separates the gate pair from its neighbours")


def plan_cnot(scenario: Scenario, control: int, target: int, kinds=None) -> GatePlan:
    """Encoded CNOT between neighbouring blocks.

    Both blocks are brought to one code kind ``K`` (A unless a neighbour
    outside the pair already uses A).  The storage program of two
    same-kind neighbours leaves only the Ising term ``J_K s s`` on the
    facing qubits, which equals ``-J_K Zbar Zbar`` on the codes.  Evolving
    to Ising angle pi/4 and adding ``Zbar`` rotations of ``-pi/4`` on both
    blocks gives CZ; logical Hadamards on the target (done in its own code)
    turn it into CNOT.
    """
    kinds = _kinds(scenario, kinds)
    layout = scenario.layout
    if abs(control - target) != 1:
        raise LayoutError(f"blocks {control} and {target} are not neighbours")
    left, right = sorted((control, target))
    k = _cnot_kind(kinds, left, right, control, target)
    facing = (layout.blocks[left][1], layout.blocks[right][0])
    c = scenario.coupling(facing)
    jk = c.J["XYZ".index(AXIS[k])] if c else 0.0
    if jk == 0:
        raise DegenerateCouplingError(f"no {AXIS[k]}{AXIS[k]} coupling between qubits {facing}")

    plan = plan_hadamard(scenario, target, kinds)
    plan = plan.then(recode_block(scenario, target, k, plan.kinds_after))
    plan = plan.then(recode_block(scenario, control, k, plan.kinds_after))
    t_ising = (math.pi / 4 / jk) % (math.pi / abs(jk))
    ising = GatePlan("ising", (left, right), (EvolveStep(plan.kinds_after, t_ising, None,
                                                         f"ising pi/4 on qubits {facing}"),),
                     np.eye(4), plan.kinds_after, plan.kinds_after)
    plan = plan.then(ising)
    plan = plan.then(plan_logical_z(scenario, control, -math.pi / 4, plan.kinds_after))
    plan = plan.then(plan_logical_z(scenario, target, -math.pi / 4, plan.kinds_after))
    plan = plan.then(recode_block(scenario, control, kinds[control], plan.kinds_after))
    plan = plan.then(recode_block(scenario, target, kinds[target], plan.kinds_after))
    plan = plan.then(plan_hadamard(scenario, target, kinds))
    if control < target:
        ideal = CNOT
    else:
        ideal = np.kron(np.eye(2), np.diag([1, 0])) + np.kron(_PAULI["X"], np.diag([0, 1]))
    return GatePlan("cnot", (left, right), plan.steps, ideal.astype(complex), kinds, kinds)


# --- execution -----------------------------------------------------------------

def apply_local(states: np.ndarray, qubit: int, u: np.ndarray, n_sites: int) -> np.ndarray:
    bit = n_sites - qubit
    return kernels.apply_1q(np.asarray(u, dtype=np.complex128), bit, states)


def evolve_step_schedule(step: EvolveStep, layout, n_sites: int, dt: float):
    """Schedule and rescaled base interval for an evolution step.

    The step covers ``ceil(duration / (T_c dt))`` whole common periods; the
    base interval is shrunk so that they add up to ``duration`` exactly.
    """
    clocks = step.clocks(layout)
    tc = common_period(clocks)
    periods = max(1, math.ceil(step.duration / (float(tc) * dt) - 1e-9))
    local_dt = step.duration / (periods * float(tc))
    return generate_schedule(clocks, periods * tc, n_sites), periods, local_dt


def execute_plan(plan: GatePlan, scenario: Scenario, dt: float, states: np.ndarray,
                 gen: Generator | None = None) -> np.ndarray:
    """Apply every step of ``plan`` to column states of the full register."""
    n = scenario.n_sites
    gen = gen or Generator(build_total(scenario))
    for step in plan.steps:
        if isinstance(step, PulseStep):
            for g in step.gates:
                states = apply_local(states, g.qubit, g.matrix, n)
        elif step.duration > 0:
            sched, periods, local_dt = evolve_step_schedule(step, scenario.layout, n, dt)
            prop = Propagator(gen, sched, local_dt)
            states = prop.advance(states, 0, periods * sched.period)
    return states


def reduced_qubits(states: np.ndarray, qubits, n_sites: int) -> np.ndarray:
    """Equal-weight mixture of column states reduced to ``qubits`` (1-based)."""
    m = states.shape[1]
    keep = [q - 1 for q in qubits]
    rest = [k for k in range(n_sites) if k not in keep]
    t = states.T.reshape((m,) + (2,) * n_sites)
    t = np.transpose(t, [0] + [k + 1 for k in keep] + [k + 1 for k in rest])
    mat = t.reshape(m, 1 << len(keep), -1).transpose(1, 0, 2).reshape(1 << len(keep), -1)
    return mat @ mat.conj().T / m


@dataclass
class GateCheck:
    """Result of simulating a plan on the register."""

    fidelity: float
    leakage: float
    bystanders: dict[int, float]
    total_time: float
    dt: float
    populations: np.ndarray = field(default=None, repr=False)
    ideal: np.ndarray = field(default=None, repr=False)


_PROBES = {
    "0": (1, 0), "1": (0, 1), "+": (_S2, _S2), "+i": (_S2, 1j * _S2),
}


def gate_check(scenario: Scenario, plan: GatePlan, dt: float, bath: str = "mixed") -> GateCheck:
    """Logical process fidelity of ``plan`` against its ideal, plus bystander fidelities.

    The logical channel (bath traced out) is compared with ``ideal`` on the
    plan's blocks and identity elsewhere via ``sum_m |Tr(U^dagger K_m)|^2 / d^2``.
    Each bystander block is probed in {0, 1, +, +i} with the others in
    ``|0>_L``; the worst reduced-state fidelity is reported.
    """
    layout = scenario.layout
    n, ns, nb = scenario.n_sites, scenario.n_system, scenario.n_bath
    codes = codes_for(scenario, plan.kinds_before)
    L = len(codes)
    basis = logical_basis(codes, ns)
    db = 1 << nb
    dl = 1 << L
    bath_cols = np.eye(db, dtype=complex) if bath == "mixed" else np.eye(db, dtype=complex)[:, :1]
    nbr = bath_cols.shape[1]
    states = np.kron(basis, bath_cols)
    final = execute_plan(plan, scenario, dt, states)

    blocks = sorted(plan.blocks)
    ideal = np.eye(1, dtype=complex)
    b = 0
    while b < L:
        if b == blocks[0]:
            ideal = np.kron(ideal, plan.ideal)
            b += len(blocks)
        else:
            ideal = np.kron(ideal, np.eye(2))
            b += 1
    out_codes = codes_for(scenario, plan.kinds_after)
    proj = np.kron(logical_basis(out_codes, ns), np.eye(db, dtype=complex))
    amps = (proj.conj().T @ final).reshape(dl, db, dl, nbr)
    tr = np.einsum("kj,kxjy->xy", ideal.conj(), amps)
    fid = float(np.sum(np.abs(tr) ** 2) / (dl**2 * nbr))
    leak = float(1 - np.sum(np.abs(amps) ** 2) / (dl * nbr))
    pops = np.sum(np.abs(amps) ** 2, axis=(1, 3)) / nbr

    bystanders = {}
    for c in range(L):
        if c in plan.blocks:
            continue
        worst = 1.0
        for probe in _PROBES.values():
            coeff = np.ones(1, dtype=complex)
            for b in range(L):
                coeff = np.kron(coeff, np.array(probe if b == c else (1, 0), dtype=complex))
            cols = final.reshape(final.shape[0], dl, nbr)
            psi = np.einsum("j,djy->dy", coeff, cols)
            rho = reduced_qubits(psi, layout.blocks[c], n)
            v0, v1 = out_codes[c].basis
            phi = probe[0] * v0 + probe[1] * v1
            worst = min(worst, float(np.real(np.vdot(phi, rho @ phi))))
        bystanders[c] = worst
    return GateCheck(fid, leak, bystanders, plan.total_time, dt, pops, ideal)


def dense_logical(op: PauliSum, code: LogicalCode) -> np.ndarray:
    """2x2 matrix of ``op`` between the code's basis states."""
    basis = np.array([encode(code, 0, code.n_sites), encode(code, 1, code.n_sites)]).T
    return basis.conj().T @ dense(op) @ basis
