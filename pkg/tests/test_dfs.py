import itertools
import math

import numpy as np
import pytest

from bbdfs.averaging import storage_report
from bbdfs.dfs import (CNOT, EvolveStep, GatePlan, LogicalCode, code_projector, codes_for,
                       dense_logical, encode, encode_register, execute_plan, gate_check,
                       logical_basis, logical_operators, plan_cnot, plan_hadamard, plan_logical_x,
                       plan_logical_z, recode_block, x_coupling_sum)
from bbdfs.errors import DegenerateCouplingError, InvalidOperandError, LayoutError
from bbdfs.model import BathSpec, ExchangeCoupling, RegisterLayout, Scenario, chain_couplings
from bbdfs.pauli import PauliSum, dense

from conftest import J_REF, reference_register

S2 = 1 / math.sqrt(2)
ket0, ket1 = np.array([1, 0]), np.array([0, 1])
plus, minus = (ket0 + ket1) * S2, (ket0 - ket1) * S2
plus_i, minus_i = (ket0 + 1j * ket1) * S2, (ket0 - 1j * ket1) * S2


def kron(*vs):
    out = np.ones(1)
    for v in vs:
        out = np.kron(out, v)
    return out


def code(kind, J=J_REF, q=1, n=2):
    return LogicalCode(kind, (q, q + 1), n, J)


def test_encode_examples():
    assert np.allclose(encode(code("A"), 0), kron(ket0, ket1))
    # B block on qubits 3, 4 of a six-qubit register, others in |0>
    b = encode(code("B", q=3, n=6), 0, 6)
    assert np.allclose(b, kron(ket0, ket0, plus, minus, ket0, ket0))
    assert np.allclose(b[[0, 4, 8, 12]], [0.5, -0.5, 0.5, -0.5])
    c = encode(code("C", q=5, n=6), 1, 6)
    assert np.allclose(c, kron(ket0, ket0, ket0, ket0, minus_i, plus_i))
    with pytest.raises(InvalidOperandError):
        encode(code("A"), 2)


@pytest.mark.parametrize("kind", "ABC")
def test_code_invariants(kind):
    c = code(kind)
    v0, v1 = c.basis
    assert abs(np.vdot(v0, v1)) < 1e-15
    assert np.isclose(np.vdot(v0, v0).real, 1.0) and np.isclose(np.vdot(v1, v1).real, 1.0)
    noise = dense(c.noise_operator())
    for v in (v0, v1):
        assert np.max(np.abs(noise @ v)) < 1e-15
    x, z = (dense(op) for op in logical_operators(c))
    basis = np.array([v0, v1]).T
    leak = np.eye(4) - basis @ basis.conj().T
    assert np.max(np.abs(leak @ x @ basis)) < 1e-14
    assert np.max(np.abs(leak @ z @ basis)) < 1e-14
    xl, zl = dense_logical(c.logical_x, c), dense_logical(c.logical_z, c)
    np.testing.assert_allclose(xl, [[0, 1], [1, 0]], atol=1e-14)
    np.testing.assert_allclose(zl, [[1, 0], [0, -1]], atol=1e-14)
    np.testing.assert_allclose(xl @ zl + zl @ xl, 0, atol=1e-14)


@pytest.mark.parametrize("kind", "ABC")
def test_exchange_on_code_is_constant_plus_x(kind):
    c = code(kind)
    h = dense_logical(PauliSum(2, [(a + a, j) for a, j in zip("XYZ", J_REF)]), c)
    axis_j = J_REF["XYZ".index(c.axis)]
    np.testing.assert_allclose(h, -axis_j * np.eye(2) + x_coupling_sum(kind, J_REF) * np.array([[0, 1], [1, 0]]),
                               atol=1e-14)


def test_logical_operator_examples():
    a = code("A", (1, 1, 0))
    x, z = logical_operators(a)
    assert x == PauliSum(2, [("XX", 0.5), ("YY", 0.5)])
    assert np.allclose(dense(x) @ a.basis[0], a.basis[1])
    # Zbar = (s1 - s2)/2 gives +1 on |0>_L = |01>
    assert np.allclose(dense(z) @ a.basis[0], a.basis[0])
    assert np.allclose(dense(z) @ a.basis[1], -a.basis[1])
    b = code("B", (0, 1, 1), q=3, n=4)
    xb = b.logical_x
    assert xb == PauliSum(4, [("IIYY", 0.5), ("IIZZ", 0.5)])
    np.testing.assert_allclose(dense(xb) @ encode(b, 0, 4), encode(b, 1, 4), atol=1e-14)


@pytest.mark.parametrize("kind, J", [("A", (1, -1, 0.5)), ("B", (0.5, 1, -1)), ("C", (1, 0.5, -1))])
def test_degenerate_couplings(kind, J):
    with pytest.raises(DegenerateCouplingError):
        logical_operators(code(kind, J))


def test_register_basis_and_projector():
    sc = reference_register(3)
    codes = codes_for(sc)
    b = logical_basis(codes, 6)
    np.testing.assert_allclose(b.conj().T @ b, np.eye(8), atol=1e-14)
    p = code_projector(codes, 6)
    np.testing.assert_allclose(p @ p, p, atol=1e-14)
    np.testing.assert_allclose(b[:, 5], encode_register(codes, [1, 0, 1], 6))


def test_layout_errors():
    with pytest.raises(LayoutError):
        LogicalCode("A", (1, 3), 4)
    with pytest.raises(InvalidOperandError):
        LogicalCode("D", (1, 2), 2)


# --- plans ----------------------------------------------------------------------

def test_x_example_single_block():
    sc = reference_register(1)
    plan = plan_logical_x(sc, 0, math.pi / 2)
    assert plan.total_time == pytest.approx((math.pi / 2) / (J_REF[0] + J_REF[1]))
    res = gate_check(sc, plan, plan.total_time / 2048)
    assert res.populations[1, 0] == pytest.approx(1.0, abs=1e-6)


def test_zero_angle_plans_are_empty():
    sc = reference_register(2)
    assert plan_logical_x(sc, 0, 0.0).steps == ()
    assert plan_logical_z(sc, 1, 0.0).steps == ()
    states = np.eye(2 ** sc.n_sites, dtype=complex)[:, :3]
    out = execute_plan(GatePlan("id", (0,), (EvolveStep(sc.layout.block_kinds, 0.0),), np.eye(2)), sc, 0.1, states)
    np.testing.assert_array_equal(out, states)


def test_x_duration_wraps_negative_angles():
    sc = reference_register(1)
    p = plan_logical_x(sc, 0, -math.pi / 2)
    assert p.total_time == pytest.approx(1.5 * math.pi / (J_REF[0] + J_REF[1]))
    with pytest.raises(DegenerateCouplingError):
        plan_logical_x(sc.replace(couplings=(ExchangeCoupling((1, 2), (1, -1, 0)),)), 0, 1.0)


@pytest.mark.parametrize("phi", [math.pi / 2, math.pi, 0.37])
def test_z_is_exact(phi):
    sc = reference_register(3)
    plan = plan_logical_z(sc, 1, phi)
    res = gate_check(sc, plan, 0.1)
    assert res.fidelity == pytest.approx(1.0, abs=1e-10)
    psi = encode_register(codes_for(sc), [0, (S2, S2), 0], 6)
    out = execute_plan(plan, sc.replace(bath=BathSpec(0)), 0.1, psi[:, None])[:, 0]
    b = plan.ideal @ np.array([S2, S2])
    np.testing.assert_allclose(out, encode_register(codes_for(sc), [0, b, 0], 6), atol=1e-14)
    # relative phase of |1> against |0> is exp(-2 i phi)
    assert np.isclose(b[1] / b[0], np.exp(-2j * phi))


def test_recode_examples_and_round_trip():
    sc = reference_register(3)
    codes = codes_for(sc)
    to_a = recode_block(sc, 1, "A")
    a_mid = codes_for(sc, to_a.kinds_after)
    for bit, pair in ((0, kron(ket0, ket1)), (1, kron(ket1, ket0))):
        psi = encode_register(codes, [0, bit, 0], 6)
        expect = kron(encode(code("A"), 0), pair, encode(code("C"), 0))
        np.testing.assert_allclose(expect, encode_register(a_mid, [0, bit, 0], 6), atol=1e-15)
        out = execute_plan(to_a, sc.replace(bath=BathSpec(0)), 0.1, psi[:, None])[:, 0]
        np.testing.assert_allclose(out, expect, atol=1e-15)
    back = recode_block(sc, 1, "B", to_a.kinds_after)
    trip = to_a.then(back)
    basis = logical_basis(codes, 6)
    bare = sc.replace(bath=BathSpec(0))
    u = basis.conj().T @ execute_plan(trip, bare, 0.1, basis)
    np.testing.assert_allclose(u, np.eye(8), atol=1e-12)
    c_to_a = recode_block(sc, 2, "A")
    psi = encode_register(codes, [0, 0, (0.6, 0.8j)], 6)
    out = execute_plan(c_to_a, bare, 0.1, psi[:, None])[:, 0]
    a_codes = codes_for(sc, c_to_a.kinds_after)
    np.testing.assert_allclose(out, encode_register(a_codes, [0, 0, (0.6, 0.8j)], 6), atol=1e-15)


def test_correction_angles_by_grid_search():
    """Only phi_c = phi_t = -pi/4 (mod pi) turn exp(i pi/4 ZZ) into CZ on the grid k pi/8."""
    zz = np.diag(np.exp(1j * math.pi / 4 * np.array([1, -1, -1, 1])))
    cz = np.diag([1, 1, 1, -1])
    found = []
    for a, b in itertools.product(range(-8, 8), repeat=2):
        za = np.diag(np.exp(1j * a * math.pi / 8 * np.array([1, -1])))
        zb = np.diag(np.exp(1j * b * math.pi / 8 * np.array([1, -1])))
        u = np.kron(za, zb) @ zz
        if abs(np.trace(cz.conj().T @ u)) ** 2 / 16 > 1 - 1e-12:
            found.append((a, b))
    assert found == [(-2, -2), (-2, 6), (6, -2), (6, 6)]
    sc = reference_register(3)
    zs = [s for s in plan_cnot(sc, 0, 1).steps if "z(-0.785398)" in getattr(s, "label", "")]
    assert len(zs) == 6  # two per Hadamard, one each for control and target


def test_controlled_phase_identity():
    w = np.exp(1j * math.pi / 4 * np.array([1, -1, -1, 1]))
    target = np.array([1, 1, np.exp(1j * math.pi / 2), np.exp(-1j * math.pi / 2)])
    d = target / w
    # a diagonal two-qubit unitary is a product of one-qubit phases iff d00 d11 = d01 d10
    assert np.isclose(d[0] * d[3], d[1] * d[2])
    za = np.array([1, d[2] / d[0]])
    zb = np.array([d[0], d[1]])
    np.testing.assert_allclose(np.kron(za, zb) * w, target, atol=1e-15)


def test_hadamard_plan_ideal():
    sc = reference_register(2)
    h = plan_hadamard(sc, 1)
    res = gate_check(sc, h, h.total_time / 2048)
    assert res.fidelity > 1 - 1e-4


@pytest.mark.parametrize("control, target", [(0, 1), (1, 0), (1, 2), (2, 1)])
def test_cnot_truth_table(register3, control, target):
    plan = plan_cnot(register3, control, target)
    res = gate_check(register3, plan, plan.total_time / 1024)
    full = np.eye(1)
    lo = min(control, target)
    for b in range(3):
        if b == lo:
            full = np.kron(full, plan.ideal)
        elif b != lo + 1:
            full = np.kron(full, np.eye(2))
    perm = np.argmax(np.abs(full), axis=0)
    assert np.all(res.populations[perm, np.arange(8)] > 1 - 1e-4)
    assert res.fidelity > 1 - 1e-4


def test_cnot_errors(register3):
    with pytest.raises(LayoutError):
        plan_cnot(register3, 0, 2)
    lay = register3.layout
    no_zz = register3.replace(couplings=chain_couplings(lay, J_REF, {(2, 3): (0.3, 0.2, 0.0)}))
    with pytest.raises(DegenerateCouplingError):
        plan_cnot(no_zz, 0, 1)


def test_cnot_avoids_neighbour_kind():
    lay = RegisterLayout(("C", "A", "B"))
    sc = Scenario(lay, chain_couplings(lay, J_REF))
    plan = plan_cnot(sc, 2, 1)
    kinds = {s.kinds for s in plan.steps if isinstance(s, EvolveStep) and s.sync_block is None}
    # block 0 is C; the pair is taken to A, which no outer neighbour uses
    assert kinds == {("C", "A", "A")}
    assert plan.ideal.shape == (4, 4)
    assert not np.allclose(plan.ideal, CNOT)


@pytest.mark.parametrize("make", [
    lambda sc: plan_logical_x(sc, 0, math.pi / 2),
    lambda sc: plan_logical_z(sc, 2, 0.3),
    lambda sc: plan_cnot(sc, 0, 1),
    lambda sc: plan_cnot(sc, 2, 1),
])
def test_gate_closure(register3, make):
    plan = make(register3)
    assert plan.kinds_after == plan.kinds_before == register3.layout.block_kinds
    before = storage_report(register3)
    after = storage_report(register3, plan.kinds_after)
    assert after == before and after.to_text() == before.to_text()


def test_script_round_trip(register3):
    plan = plan_cnot(register3, 1, 2)
    again = GatePlan.from_script(plan.to_script())
    assert again == plan
    np.testing.assert_array_equal(again.ideal, plan.ideal)
    for a, b in zip(plan.steps, again.steps):
        for ga, gb in zip(getattr(a, "gates", ()), getattr(b, "gates", ())):
            np.testing.assert_array_equal(ga.matrix, gb.matrix)
    assert again.to_script() == plan.to_script()
    with pytest.raises(InvalidOperandError):
        GatePlan.from_script('{"name": "x", "blocks": [0], "kinds_before": [], "kinds_after": [],'
                             ' "ideal": [[[1, 0]]], "steps": [{"op": "warp"}]}')


def test_chaining_requires_matching_pulse_sets(register3):
    a = recode_block(register3, 1, "A")
    with pytest.raises(InvalidOperandError):
        a.then(plan_logical_z(register3, 0, 0.1))


def test_gates_match_oracle(register3, pinned):
    for name, make in (("x_gate", lambda: plan_logical_x(register3, 0, math.pi / 2)),
                       ("cnot_gate", lambda: plan_cnot(register3, 0, 1))):
        ref = pinned[name]
        plan = make()
        assert plan.total_time == pytest.approx(ref["total_time"], rel=1e-14)
        for div, fid, by in zip(ref["divisions"], ref["fidelity"], ref["bystanders"]):
            res = gate_check(register3, plan, plan.total_time / div)
            assert res.fidelity == pytest.approx(fid, abs=1e-9)
            assert {str(k): v for k, v in res.bystanders.items()} == pytest.approx(by, abs=1e-9)
