import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from bbdfs.errors import CapacityError, InvalidOperandError
from bbdfs.pauli import (PauliString, PauliSum, apply, conjugate, dense, format_sum, mul,
                         parse_sum)

P1 = {
    "I": np.eye(2),
    "X": np.array([[0, 1], [1, 0]]),
    "Y": np.array([[0, -1j], [1j, 0]]),
    "Z": np.diag([1, -1]),
}


def kron_dense(letters, phase=0):
    out = np.eye(1)
    for c in letters:
        out = np.kron(out, P1[c])
    return (1j ** phase) * out


letters = st.integers(1, 5).flatmap(
    lambda n: st.tuples(st.text("IXYZ", min_size=n, max_size=n), st.text("IXYZ", min_size=n, max_size=n))
)


@given(letters, st.integers(0, 3), st.integers(0, 3))
@settings(max_examples=200, deadline=None)
def test_product_is_a_homomorphism(pair, ka, kb):
    a, b = PauliString(pair[0], ka), PauliString(pair[1], kb)
    np.testing.assert_allclose(mul(a, b).dense(), a.dense() @ b.dense(), atol=1e-12)


@given(letters)
@settings(max_examples=200, deadline=None)
def test_commutation_sign_law(pair):
    a, b = PauliString(pair[0]), PauliString(pair[1])
    ab, ba = mul(a, b), mul(b, a)
    assert ab.letters == ba.letters
    # ab = +ba when they commute, -ba otherwise
    assert (ab.phase - ba.phase) % 4 == (0 if a.commutes(b) else 2)


@given(st.text("IXYZ", min_size=1, max_size=6), st.integers(0, 3))
@settings(max_examples=100, deadline=None)
def test_dense_matches_kron(s, k):
    np.testing.assert_allclose(PauliString(s, k).dense(), kron_dense(s, k), atol=0)


def test_single_site_products():
    x, y, z = (PauliString(c) for c in "XYZ")
    assert mul(x, y) == PauliString("Z", 1)
    assert mul(y, x) == PauliString("Z", 3)
    assert mul(z, z) == PauliString("I")


def test_phase_wraps_and_dagger():
    p = PauliString("XY", 5)
    assert p.phase == 1
    assert mul(p, p.dagger()) == PauliString.identity(2)


def test_invalid_letters_and_length_mismatch():
    with pytest.raises(InvalidOperandError):
        PauliString("XQ")
    with pytest.raises(InvalidOperandError):
        mul(PauliString("X"), PauliString("XX"))
    with pytest.raises(InvalidOperandError):
        PauliSum(2, [("XXX", 1.0)])


def test_from_sites_and_str():
    p = PauliString.from_sites(4, {2: "X", 4: "Z"}, phase=1)
    assert p.letters == "IXIZ"
    assert str(p) == "+i X2 Z4"
    assert p.support() == (2, 4)
    with pytest.raises(InvalidOperandError):
        PauliString.from_sites(2, {3: "X"})


def test_sum_prunes_zeros_and_merges():
    h = PauliSum(2, [("ZZ", 0.5), ("ZZ", -0.5), ("XI", 1.0), ("XI", 2.0)])
    assert len(h) == 1
    assert h.coefficient("XI") == 3.0
    assert not (h - h)


def test_sum_product_matches_dense():
    a = PauliSum(2, [("XI", 1.0), ("ZZ", 0.5j)])
    b = PauliSum(2, [("YI", 2.0), ("IX", -1.0)])
    np.testing.assert_allclose(dense(a * b), dense(a) @ dense(b), atol=1e-12)
    np.testing.assert_allclose(dense(2 * a), 2 * dense(a))


def test_conjugate_matches_dense():
    g = PauliString("ZI", 3)  # -i Z1
    h = PauliSum(2, [("XX", 0.3), ("YY", 0.2), ("ZZ", 0.5), ("IX", 1.0)])
    G = g.dense()
    np.testing.assert_allclose(dense(conjugate(g, h)), G.conj().T @ dense(h) @ G, atol=1e-12)


def test_hermitian_flag():
    assert PauliSum(1, [("X", 1.0)]).is_hermitian()
    assert not PauliSum(1, [("X", 1j)]).is_hermitian()


def test_apply_vector_and_columns():
    p = PauliString("YZ", 2)
    rng = np.random.default_rng(3)
    v = rng.normal(size=4) + 1j * rng.normal(size=4)
    m = rng.normal(size=(4, 3)) + 0j
    np.testing.assert_allclose(apply(p, v), p.dense() @ v, atol=1e-12)
    np.testing.assert_allclose(apply(p, m), p.dense() @ m, atol=1e-12)
    with pytest.raises(InvalidOperandError):
        apply(p, np.ones(8))


def test_capacity_limit():
    with pytest.raises(CapacityError):
        dense(PauliSum(13, [("Z" * 13, 1.0)]))


def test_text_round_trip_is_exact():
    h = PauliSum(3, [("ZZI", 0.1 + 0.2j), ("IIX", -1 / 3), ("III", 1e-17), ("YIY", -0.0 + 2.5j)])
    text = format_sum(h)
    assert parse_sum(text) == h
    assert format_sum(parse_sum(text)) == text


def test_text_form_layout():
    h = PauliSum(2, [("ZZ", 0.5), ("II", 1.0)])
    assert format_sum(h) == "# sites: 2\n(1.0+0.0j) I\n(0.5+0.0j) Z1 Z2\n"


@pytest.mark.parametrize("text, msg", [
    ("# sites: 2\n0.5 Z1\n", "line 2"),
    ("# sites: 2\n(0.5+0j) Q1\n", "bad token"),
    ("# sites: 2\n(0.5+0j) Z1 X1\n", "repeated"),
    ("# sites: 2\n(0.5+0j) Z3\n", "beyond"),
    ("(0.5+0j) Z1\n", "site count"),
    ("# sites: 1\n(abc) Z1\n", "bad coefficient"),
])
def test_parse_errors_name_the_line(text, msg):
    with pytest.raises(InvalidOperandError, match=msg):
        parse_sum(text)


def test_worked_products():
    z, x = PauliString("Z"), PauliString("X")
    assert mul(mul(z, x), z) == PauliString("X", 2)
    assert mul(PauliString("ZZ"), PauliString("ZZ")) == PauliString("II")
    np.testing.assert_array_equal(dense(PauliSum(2, [("ZZ", 1)])), np.diag([1, -1, -1, 1]))
    np.testing.assert_array_equal(dense(PauliSum(1, [("X", 1)])), [[0, 1], [1, 0]])


def test_exchange_on_01():
    h = PauliSum(2, [("XX", 1.0), ("YY", 1.0), ("ZZ", 1.0)])
    ket01 = np.array([0, 1, 0, 0])
    np.testing.assert_allclose(dense(h) @ ket01, [0, -1, 2, 0])


def test_worked_conjugations():
    term = PauliSum(2, [("XX", 0.7)])  # X1 times a bath x operator on site 2
    assert conjugate(PauliString("ZI"), term) == -term
    h = PauliSum(2, [("XY", 0.3), ("ZZ", 1.0)])
    assert conjugate(PauliString.identity(2), h) == h
    assert conjugate(PauliString("IZ"), PauliSum(2, [("ZZ", 1.0)])) == PauliSum(2, [("ZZ", 1.0)])


def test_add_and_scale():
    x = PauliSum(1, [("X", 1.0)])
    assert not (x + (-1) * x)
    assert x.scale(2) + x == PauliSum(1, [("X", 3.0)])
    ex = 0.3 * PauliSum(2, [("XX", 1)]) + 0.2 * PauliSum(2, [("YY", 1)]) + 0.5 * PauliSum(2, [("ZZ", 1)])
    assert len(ex) == 3
