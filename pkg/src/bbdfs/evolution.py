"""Exact piecewise-constant evolution interleaved with instantaneous pulses.

Free evolution uses the spectral decomposition of the dense Hamiltonian, so
every segment propagator is exact to round-off.  States are carried as a
2-D array of columns, one per initial bath basis state: a maximally mixed
bath is represented by enumerating its computational basis with equal
weights, which keeps runs deterministic.

All diagnostics are reported in the toggling frame: the accumulated pulse
product is undone before a sample is compared with its reference.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .averaging import schedule_average
from .errors import InvalidOperandError, NonHermitianError, ScheduleError
from .pauli import MAX_SITES, PauliSum, apply, dense
from .pulses import Schedule, as_fraction, frame_before, generate_schedule

HERMITIAN_TOL = 1e-10


def expm_hermitian(h: np.ndarray, t: float) -> np.ndarray:
    """``exp(-i h t)`` for Hermitian ``h`` by eigendecomposition."""
    h = np.asarray(h, dtype=np.complex128)
    if h.ndim != 2 or h.shape[0] != h.shape[1]:
        raise InvalidOperandError("expected a square matrix")
    if h.size and np.max(np.abs(h - h.conj().T)) > HERMITIAN_TOL:
        raise NonHermitianError("generator is not Hermitian")
    e, v = np.linalg.eigh(h)
    return (v * np.exp(-1j * e * t)) @ v.conj().T


def fidelity(a, b) -> float:
    """``|<a|b>|^2`` for states, ``|Tr(a^dagger b)|^2 / d^2`` for operators."""
    a = np.asarray(a, dtype=np.complex128)
    b = np.asarray(b, dtype=np.complex128)
    if a.shape != b.shape:
        raise InvalidOperandError(f"dimension mismatch: {a.shape} vs {b.shape}")
    if a.ndim == 1:
        return float(abs(np.vdot(a, b)) ** 2)
    d = a.shape[0]
    return float(abs(np.trace(a.conj().T @ b)) ** 2 / d**2)


def trace_distance(a: np.ndarray, b: np.ndarray) -> float:
    """Trace norm of ``a - b`` divided by the dimension."""
    return float(np.linalg.svd(a - b, compute_uv=False).sum() / a.shape[0])


class Generator:
    """Dense Hamiltonian with a cached eigendecomposition."""

    def __init__(self, h, max_sites: int = MAX_SITES):
        if isinstance(h, PauliSum):
            self.n_sites = h.n
            h = dense(h, max_sites=max_sites)
        else:
            h = np.asarray(h, dtype=np.complex128)
            self.n_sites = int(round(math.log2(h.shape[0])))
        if np.max(np.abs(h - h.conj().T), initial=0.0) > HERMITIAN_TOL:
            raise NonHermitianError("Hamiltonian is not Hermitian")
        self.matrix = h
        self.energies, self.vectors = np.linalg.eigh(h)
        self._cache: dict[float, np.ndarray] = {}

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    def free(self, t: float) -> np.ndarray:
        u = self._cache.get(t)
        if u is None:
            v = self.vectors
            u = (v * np.exp(-1j * self.energies * t)) @ v.conj().T
            if len(self._cache) < 64:
                self._cache[t] = u
        return u


class Propagator:
    """Evolution of column states under a generator and a periodic schedule.

    Times are rationals in units of ``dt``.  Pulses at times ``t`` with
    ``t0 <= t < t1`` are applied by :meth:`advance`.
    """

    def __init__(self, gen: Generator, schedule: Schedule | None, dt: float):
        self.gen = gen
        self.dt = float(dt)
        self.schedule = schedule
        if schedule is not None and schedule.n_sites != gen.n_sites:
            raise InvalidOperandError("schedule and Hamiltonian have different site counts")
        if schedule is not None and schedule.clocks:
            base = schedule.one_period()
            self.period = base.period
            self._base = base.events
        else:
            self.period = None
            self._base = ()
        self._period_u = None

    def _events(self, a: Fraction, b: Fraction):
        if self.period is None:
            return []
        T = self.period
        out = []
        k = math.floor(a / T)
        while k * T < b:
            for t, op in self._base:
                tt = k * T + t
                if a <= tt < b:
                    out.append((tt, op))
            k += 1
        return out

    def _walk(self, states, a: Fraction, b: Fraction):
        t = a
        for tt, op in self._events(a, b):
            if tt > t:
                states = self.gen.free(float(tt - t) * self.dt) @ states
            states = apply(op.action, states)
            t = tt
        if b > t:
            states = self.gen.free(float(b - t) * self.dt) @ states
        return states

    def period_unitary(self) -> np.ndarray:
        """Lab-frame propagator over one common period, pulses included."""
        if self.period is None:
            raise ScheduleError("schedule has no pulses and hence no period")
        if self._period_u is None:
            self._period_u = self._walk(np.eye(self.gen.dim, dtype=np.complex128),
                                        Fraction(0), self.period)
        return self._period_u

    def advance(self, states, t0, t1):
        t0, t1 = as_fraction(t0), as_fraction(t1)
        if t1 < t0:
            raise ScheduleError("cannot evolve backwards")
        if self.period is not None:
            T = self.period
            boundary = math.ceil(t0 / T) * T
            m = math.floor((t1 - boundary) / T) if t1 >= boundary else 0
            if m >= 2:
                states = self._walk(states, t0, boundary)
                p = self.period_unitary()
                if m > 8:
                    states = np.linalg.matrix_power(p, m) @ states
                else:
                    for _ in range(m):
                        states = p @ states
                t0 = boundary + m * T
        return self._walk(states, t0, t1)

    def unitary(self, t) -> np.ndarray:
        return self.advance(np.eye(self.gen.dim, dtype=np.complex128), 0, t)


# --- branch bookkeeping -------------------------------------------------------

def bath_branches(system_state: np.ndarray, n_bath: int, bath: str | np.ndarray = "mixed") -> np.ndarray:
    """Columns ``psi (x) |b>`` for every bath basis state (``"mixed"``) or a single bath state."""
    psi = np.asarray(system_state, dtype=np.complex128)
    db = 1 << n_bath
    if isinstance(bath, str):
        if bath == "mixed":
            return np.kron(psi[:, None], np.eye(db, dtype=np.complex128))
        if bath == "zero":
            e0 = np.zeros(db, dtype=np.complex128)
            e0[0] = 1
            return np.kron(psi, e0)[:, None]
        raise InvalidOperandError(f"unknown bath state {bath!r}")
    return np.kron(psi, np.asarray(bath, dtype=np.complex128))[:, None]


def reduced_system(states: np.ndarray, n_bath: int) -> np.ndarray:
    """Equal-weight mixture of the branches, bath traced out."""
    dim, m = states.shape
    db = 1 << n_bath
    ds = dim // db
    blocks = states.T.reshape(m, ds, db).transpose(1, 0, 2).reshape(ds, m * db)
    return blocks @ blocks.conj().T / m


@dataclass
class Trajectory:
    """Diagnostics sampled along a run (times are physical)."""

    times: np.ndarray
    fidelity: np.ndarray
    leakage: np.ndarray
    purity: np.ndarray
    norm_deviation: np.ndarray = field(default=None, repr=False)
    final_states: np.ndarray = field(default=None, repr=False)

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["time", "fidelity", "leakage", "purity"])
        for row in zip(self.times, self.fidelity, self.leakage, self.purity):
            w.writerow([f"{v:.12g}" for v in row])
        return buf.getvalue()


def run(schedule: Schedule | None, h: PauliSum, initial, samples, *, dt: float = 1.0,
        n_bath: int = 0, reference=None, projector=None, bath="mixed",
        max_sites: int = MAX_SITES) -> Trajectory:
    """Simulate pulsed evolution and sample fidelity, leakage and purity.

    Parameters
    ----------
    schedule : Schedule or None
        Pulse program (times in units of ``dt``); ``None`` for free evolution.
    h : PauliSum
        Full system plus bath Hamiltonian.
    initial : array_like
        System state vector (``2**n_system`` amplitudes).
    samples : sequence
        Sample times in units of ``dt``.
    reference : None, array_like or callable
        ``None`` compares each branch with evolution under the averaged
        Hamiltonian of ``schedule``.  A system vector (or a callable of the
        physical time returning one) is compared with the reduced system
        state, ``<phi|rho_S|phi>``.
    projector : array_like, optional
        Projector onto the logical subspace of the system; leakage is the
        population outside it.
    """
    n = h.n
    if schedule is None:
        schedule = generate_schedule((), 0, n)
    gen = Generator(h, max_sites)
    prop = Propagator(gen, schedule, dt)
    psi0 = np.asarray(initial, dtype=np.complex128)
    if psi0.shape[0] << n_bath != gen.dim:
        raise InvalidOperandError(
            f"initial state has {psi0.shape[0]} amplitudes, register needs {gen.dim >> n_bath}")
    states = bath_branches(psi0, n_bath, bath)
    start = states
    times = sorted(as_fraction(t, "sample time") for t in samples)
    if times and times[0] < 0:
        raise ScheduleError("sample times must be nonnegative")
    if times and schedule.horizon and times[-1] > schedule.horizon:
        raise ScheduleError("sample time beyond the schedule horizon")

    h_eff = None
    if reference is None:
        h_eff = Generator(schedule_average(schedule, h).surviving, max_sites)
    proj = None if projector is None else np.asarray(projector, dtype=np.complex128)

    fid, leak, pur, norms = [], [], [], []
    t_prev = Fraction(0)
    for t in times:
        states = prop.advance(states, t_prev, t)
        t_prev = t
        frame = frame_before(schedule, t)
        tog = apply(frame.dagger(), states)
        norms.append(float(np.max(np.abs(np.linalg.norm(tog, axis=0) - 1.0))))
        rho = reduced_system(tog, n_bath)
        pur.append(float(np.real(np.trace(rho @ rho))))
        leak.append(0.0 if proj is None else float(max(0.0, 1.0 - np.real(np.trace(proj @ rho)))))
        if h_eff is not None:
            ref = h_eff.free(float(t) * prop.dt) @ start
            overlaps = np.abs(np.sum(ref.conj() * tog, axis=0)) ** 2
            fid.append(float(np.mean(overlaps)))
        else:
            phi = reference(float(t) * prop.dt) if callable(reference) else reference
            phi = np.asarray(phi, dtype=np.complex128)
            fid.append(float(np.real(np.vdot(phi, rho @ phi))))
    return Trajectory(
        times=np.array([float(t) * prop.dt for t in times]),
        fidelity=np.array(fid), leakage=np.array(leak), purity=np.array(pur),
        norm_deviation=np.array(norms), final_states=states,
    )


# --- convergence ----------------------------------------------------------------

@dataclass
class ConvergenceTable:
    dts: np.ndarray
    errors: np.ndarray
    order: float

    def ratios(self) -> np.ndarray:
        return self.errors[:-1] / self.errors[1:]


def toggled_period_power(prop: Propagator, m: int) -> np.ndarray:
    """Propagator over ``m`` common periods with the pulse frame phase removed."""
    s = prop.schedule
    frame = frame_before(s.one_period(), s.period)
    if frame.letters != "I" * frame.n:
        raise ScheduleError("pulse frame does not close over one period")
    p = prop.period_unitary() * np.conj(frame.factor)
    return np.linalg.matrix_power(p, m)


def convergence_study(h: PauliSum, clocks, dt_list, total_time: float,
                      max_sites: int = MAX_SITES) -> ConvergenceTable:
    """Distance between the pulsed evolution and ``exp(-i H_eff T)`` versus ``dt``.

    ``clocks`` are in units of ``dt`` and the same program is rescaled for
    every entry of ``dt_list``; ``total_time`` must be a whole number of
    common periods for each.
    """
    dts = np.asarray(dt_list, dtype=float)
    if len(dts) > 1 and np.any(np.diff(dts) >= 0):
        raise ScheduleError("dt_list must be strictly decreasing")
    gen = Generator(h, max_sites)
    s = generate_schedule(clocks, 0, h.n)
    if not s.clocks:
        raise ScheduleError("convergence study needs a pulsed schedule")
    u_eff = Generator(schedule_average(s, h).surviving, max_sites).free(total_time)
    errors = []
    for dt in dts:
        periods = total_time / (float(s.period) * dt)
        m = round(periods)
        if m < 1 or abs(periods - m) > 1e-9 * max(1.0, periods):
            raise ScheduleError(f"total time {total_time} is not a multiple of the period at dt={dt}")
        prop = Propagator(gen, s, dt)
        errors.append(trace_distance(toggled_period_power(prop, m), u_eff))
    errors = np.array(errors)
    if len(dts) > 1 and np.all(errors > 0):
        order = float(np.polyfit(np.log(dts), np.log(errors), 1)[0])
    else:
        order = float("nan")
    return ConvergenceTable(dts, errors, order)
