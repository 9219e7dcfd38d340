import collections
import itertools

import numpy as np
import pytest
from hypothesis import given, strategies as st

from extflag.pauli import (DimensionError, PauliString, PhaseError, commutes, multiply,
                           multiply_phased, random_pauli, weight)

labels = st.integers(min_value=1, max_value=6).flatmap(
    lambda n: st.tuples(st.text("IXYZ", min_size=n, max_size=n),
                        st.text("IXYZ", min_size=n, max_size=n))
)


@pytest.mark.parametrize("label, expected", [("IXYZ", 3), ("IIII", 0), ("XXXXX", 5)])
def test_weight(label, expected):
    assert weight(PauliString.from_label(label)) == expected


def test_letters_encode_xz_bits():
    p = PauliString.from_label("IXZY")
    assert (p.x, p.z) == (0b1010, 0b1100)
    assert p.letters == "IXZY"
    assert p.support == (1, 2, 3)


@pytest.mark.parametrize("text", ["+IXYZ", "-ZZIII", "+I"])
def test_text_round_trip(text):
    assert str(PauliString.from_label(text)) == text


def test_unsigned_label_defaults_positive():
    assert PauliString.from_label("XY").sign == 1


@pytest.mark.parametrize("bad", ["", "+", "XQ", "+-X"])
def test_bad_labels_rejected(bad):
    with pytest.raises(ValueError):
        PauliString.from_label(bad)


def test_commutes_examples():
    assert commutes(PauliString.from_label("XX"), PauliString.from_label("ZZ"))
    assert not commutes(PauliString.from_label("XI"), PauliString.from_label("ZI"))


def test_commutes_matches_16x16_matrices():
    a, b = PauliString.from_label("IXYZ"), PauliString.from_label("ZZXI")
    am, bm = a.to_matrix(), b.to_matrix()
    assert np.allclose(am @ bm, bm @ am)
    assert commutes(a, b) is True


def test_dimension_mismatch():
    with pytest.raises(DimensionError):
        commutes(PauliString.from_label("X"), PauliString.from_label("XX"))
    with pytest.raises(DimensionError):
        multiply(PauliString.from_label("X"), PauliString.from_label("XX"))


def test_multiply_examples():
    x = PauliString.from_label("X")
    assert multiply(x, x) == PauliString.from_label("+I")
    assert multiply(PauliString.from_label("XI"), PauliString.from_label("IZ")) == \
        PauliString.from_label("+XZ")
    # X.Z = -iY: phase code 3
    p, k = multiply_phased(x, PauliString.from_label("Z"))
    assert (str(p), k) == ("+Y", 3)
    assert np.allclose(x.to_matrix() @ PauliString.from_label("Z").to_matrix(),
                       1j**k * p.to_matrix())


def test_multiply_refuses_imaginary_phase():
    with pytest.raises(PhaseError):
        multiply(PauliString.from_label("X"), PauliString.from_label("Z"))


def test_multiply_phased_matches_matrices_exhaustively_on_two_qubits():
    ops = [PauliString.from_label(s + "".join(t)) for s in "+-"
           for t in itertools.product("IXYZ", repeat=2)]
    for a in ops:
        for b in ops:
            p, k = multiply_phased(a, b)
            assert np.allclose(a.to_matrix() @ b.to_matrix(), 1j**k * p.to_matrix())


@given(labels)
def test_commutes_symmetric(pair):
    a, b = (PauliString.from_label(s) for s in pair)
    assert commutes(a, b) == commutes(b, a)


@given(labels)
def test_double_product_returns_operand(pair):
    a, b = (PauliString.from_label(s) for s in pair)
    ab, k1 = multiply_phased(a, b)
    aab, k2 = multiply_phased(a, ab)
    # a.a = I, so a.(a.b) = b up to the tracked phase
    assert aab == b.unsigned()
    assert (k1 + k2) % 4 == (0 if b.sign == 1 else 2)


@given(labels)
def test_product_weight_subadditive(pair):
    a, b = (PauliString.from_label(s) for s in pair)
    p, _ = multiply_phased(a, b)
    assert weight(p) <= weight(a) + weight(b)


def test_random_pauli_deterministic():
    assert random_pauli(5, 99, 3) == random_pauli(5, 99, 3)
    assert random_pauli(5, 99, 3).sign == 1


def test_random_pauli_nonidentity_never_identity():
    assert all(random_pauli(1, 7, k, nonidentity=True).letters != "I" for k in range(500))


def test_random_pauli_letters_uniform():
    counts = collections.Counter(random_pauli(1, 2024, k).letters for k in range(40_000))
    for letter in "IXYZ":
        assert abs(counts[letter] / 40_000 - 0.25) < 0.01
    # chi-square with 3 dof; 16.27 is the 0.001 critical value
    chi2 = sum((c - 10_000) ** 2 / 10_000 for c in counts.values())
    assert chi2 < 16.27
