import math
from fractions import Fraction

import numpy as np
import pytest
from scipy.linalg import expm

from bbdfs.errors import CapacityError, InvalidOperandError, NonHermitianError, ScheduleError
from bbdfs.evolution import (Generator, Propagator, bath_branches, convergence_study,
                             expm_hermitian, fidelity, reduced_system, run, trace_distance)
from bbdfs.model import BathSpec, build_total
from bbdfs.pauli import PauliString, PauliSum, dense
from bbdfs.pulses import QubitClock, generate_schedule, storage_clocks

from conftest import memory_scenario, plus_state, reference_register


def random_h(n, seed=0):
    rng = np.random.default_rng(seed)
    terms = [("".join(rng.choice(list("IXYZ"), n)), float(rng.normal())) for _ in range(3 * n)]
    return PauliSum(n, terms)


def test_expm_matches_scipy():
    h = dense(random_h(3))
    np.testing.assert_allclose(expm_hermitian(h, 0.7), expm(-0.7j * h), atol=1e-12)
    with pytest.raises(NonHermitianError):
        expm_hermitian(np.array([[0, 1], [0, 0]]), 1.0)
    with pytest.raises(NonHermitianError):
        Generator(PauliSum(1, [("X", 1j)]))


def test_fidelity_and_distance():
    a = np.array([1, 0], dtype=complex)
    b = np.array([1, 1], dtype=complex) / math.sqrt(2)
    assert fidelity(a, b) == pytest.approx(0.5)
    u = expm_hermitian(np.diag([1.0, -1.0]), 0.3)
    assert fidelity(u, np.exp(0.4j) * u) == pytest.approx(1.0)
    assert trace_distance(u, u) == 0
    with pytest.raises(InvalidOperandError):
        fidelity(a, np.ones(3))


def brute_force_unitary(h, clocks, n, t_end, dt):
    """Tick-by-tick product using scipy expm, independent of the propagator."""
    H = dense(h)
    ticks = sorted({(c.offset + k * c.period, c.qubit, c.axis) for c in clocks
                    for k in range(int(t_end / c.period) + 2) if c.offset + k * c.period < t_end})
    u = np.eye(2 ** n, dtype=complex)
    now = Fraction(0)
    for t, q, a in ticks:
        if t > now:
            u = expm(-1j * H * float(t - now) * dt) @ u
            now = t
        u = PauliString.from_sites(n, {q: a}, phase=3).dense() @ u
    return expm(-1j * H * float(t_end - now) * dt) @ u


@pytest.mark.parametrize("t_end", [Fraction(7, 2), Fraction(13), Fraction(53, 2)])
def test_propagator_against_brute_force(t_end):
    h = random_h(3, seed=4)
    clocks = [QubitClock(1, 2, 0, "Z"), QubitClock(2, 1, Fraction(1, 2), "X"), QubitClock(3, Fraction(2, 3), 0, "Y")]
    s = generate_schedule(clocks, 0, 3)
    prop = Propagator(Generator(h), s, 0.05)
    np.testing.assert_allclose(prop.unitary(t_end), brute_force_unitary(h, clocks, 3, t_end, 0.05), atol=1e-11)


def test_advance_composes():
    h = random_h(3, seed=5)
    s = generate_schedule([QubitClock(1, 1, Fraction(1, 2))], 0, 3)
    prop = Propagator(Generator(h), s, 0.1)
    psi = np.eye(8, dtype=complex)[:, :2]
    once = prop.advance(psi, 0, 41)
    twice = prop.advance(prop.advance(psi, 0, Fraction(27, 4)), Fraction(27, 4), 41)
    np.testing.assert_allclose(once, twice, atol=1e-11)
    with pytest.raises(ScheduleError):
        prop.advance(psi, 2, 1)


def test_capacity():
    with pytest.raises(CapacityError):
        Generator(PauliSum(13, [("Z" * 13, 1.0)]))


def test_bath_branches_and_reduction():
    psi = np.array([0.6, 0.8j])
    br = bath_branches(psi, 2)
    assert br.shape == (8, 4)
    rho = reduced_system(br, 2)
    np.testing.assert_allclose(rho, np.outer(psi, psi.conj()), atol=1e-15)
    assert bath_branches(psi, 1, "zero").shape == (4, 1)


def test_zero_horizon_single_row():
    sc = memory_scenario()
    s = generate_schedule(storage_clocks(sc.layout), 0, sc.n_sites)
    tr = run(s, build_total(sc), plus_state(sc), [0], dt=0.1, n_bath=1, reference=plus_state(sc))
    assert len(tr.times) == 1 and tr.fidelity[0] == pytest.approx(1.0, abs=1e-15)
    assert tr.to_csv().splitlines()[0] == "time,fidelity,leakage,purity"


def test_exact_dfs_dephasing_run():
    sc = memory_scenario().replace(bath=BathSpec(1, (0, 0, 0.2)))
    s = generate_schedule(storage_clocks(sc.layout), 40, sc.n_sites)
    psi = plus_state(sc)
    tr = run(s, build_total(sc), psi, range(0, 41, 4), dt=0.1, n_bath=1, reference=psi)
    assert np.all(tr.fidelity >= 1 - 1e-9)
    assert np.all(tr.norm_deviation < 1e-12)


def test_bare_qubit_loses_purity():
    sc = memory_scenario(bare=True)
    tr = run(None, build_total(sc), plus_state(sc), range(0, 11), dt=0.5, n_bath=1,
             reference=plus_state(sc))
    assert tr.purity[0] == pytest.approx(1.0)
    assert np.all(tr.purity[1:] < 1 - 1e-6)


def test_averaged_reference_default():
    sc = reference_register(1)
    s = generate_schedule(storage_clocks(sc.layout), 16, sc.n_sites)
    psi = plus_state(sc)
    tr = run(s, build_total(sc), psi, [0, 4, 8, 16], dt=0.05, n_bath=1)
    assert tr.fidelity[0] == pytest.approx(1.0)
    assert np.all(tr.fidelity > 0.99)


def test_run_validation():
    sc = memory_scenario()
    s = generate_schedule(storage_clocks(sc.layout), 4, sc.n_sites)
    with pytest.raises(InvalidOperandError):
        run(s, build_total(sc), np.ones(2), [0], n_bath=1)
    with pytest.raises(ScheduleError):
        run(s, build_total(sc), plus_state(sc), [0, 8], n_bath=1)


@pytest.mark.parametrize("mode", ["bbdfs", "dfs", "bare"])
def test_memory_matches_oracle(pinned, mode):
    ref = pinned["memory"]
    sc = memory_scenario(bare=mode == "bare")
    clocks = storage_clocks(sc.layout) if mode == "bbdfs" else ()
    step = 4 if clocks else 1
    for dt, expect in zip(ref["dt"], ref[mode]):
        units = math.floor(40 / dt + 1e-9)
        s = generate_schedule(clocks, units, sc.n_sites)
        times = range(0, units + 1, step)
        tr = run(s, build_total(sc), plus_state(sc), times, dt=dt, n_bath=1, reference=plus_state(sc))
        assert tr.fidelity.min() == pytest.approx(expect, abs=1e-9)


def test_convergence_matches_oracle(pinned):
    ref = pinned["convergence"]
    sc = reference_register(1)
    tab = convergence_study(build_total(sc), storage_clocks(sc.layout), ref["dt"], ref["total_time"])
    np.testing.assert_allclose(tab.errors, ref["errors"], rtol=1e-8)


def test_convergence_validation():
    sc = reference_register(1)
    h, cl = build_total(sc), storage_clocks(sc.layout)
    with pytest.raises(ScheduleError):
        convergence_study(h, cl, [0.1, 0.2], 16)
    with pytest.raises(ScheduleError):
        convergence_study(h, cl, [0.3], 16)
    with pytest.raises(ScheduleError):
        convergence_study(h, (), [0.1], 16)
