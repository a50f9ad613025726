import itertools

import hypothesis.strategies as st
import numpy as np
import pytest
from hypothesis import given
from hypothesis import settings

from ergocert.exception import DimensionMismatch
from ergocert.exception import DimensionTooLarge
from ergocert.exception import EmptyLabel
from ergocert.exception import InvalidSymbol
from ergocert.exception import NotHermitian
from ergocert.exception import NotPowerOfTwoDimension
from ergocert.linalg import random_hermitian
from ergocert.model.spin_chain import SpinChainParams
from ergocert.model.spin_chain import build_spin_chain
from ergocert.model.state import DensityMatrix
from ergocert.model.state import make_reference_state
from ergocert.pauli import all_strings
from ergocert.pauli import expectation
from ergocert.pauli import hierarchical_order
from ergocert.pauli import parse_pauli
from ergocert.pauli import pauli_decompose
from ergocert.pauli import pauli_matrix
from ergocert.pauli import strings_of_weight

labels = st.text(alphabet="IXYZ", min_size=1, max_size=3)


class TestParse(object):
    def test_weight(self):
        p = parse_pauli("XIZY")
        assert p.n == 4
        assert p.symbols == "XIZY"
        assert p.weight == 3

    def test_identity(self):
        p = parse_pauli("IIII")
        assert p.weight == 0
        assert p.is_identity()

    def test_lower_case(self):
        assert parse_pauli("yxzz").label == "YXZZ"

    def test_invalid_symbol(self):
        with pytest.raises(InvalidSymbol):
            parse_pauli("XA")

    @pytest.mark.parametrize("label", [" XZ", "XZ ", "X Z", "XZ\n", " "])
    def test_whitespace(self, label):
        with pytest.raises(InvalidSymbol):
            parse_pauli(label)

    def test_empty(self):
        with pytest.raises(EmptyLabel):
            parse_pauli("")


class TestMatrix(object):
    def test_single(self):
        assert np.array_equal(pauli_matrix("X"), np.array([[0, 1], [1, 0]]))

    def test_identity(self):
        assert np.array_equal(pauli_matrix("II"), np.eye(4))

    def test_zz(self):
        assert np.array_equal(pauli_matrix("ZZ"), np.diag([1, -1, -1, 1]))

    def test_site_order(self):
        # leftmost letter is the most significant factor
        assert np.array_equal(pauli_matrix("XZ"), np.kron(pauli_matrix("X"), pauli_matrix("Z")))

    def test_too_large(self):
        with pytest.raises(DimensionTooLarge):
            pauli_matrix("X" * 7)
        with pytest.raises(DimensionTooLarge):
            pauli_matrix("XXX", max_qubits=2)

    def test_read_only(self):
        with pytest.raises(ValueError):
            pauli_matrix("Y")[0, 0] = 1

    @settings(deadline=None)
    @given(labels)
    def test_involution(self, label):
        mat = pauli_matrix(label)
        d = mat.shape[0]
        assert np.allclose(mat @ mat, np.eye(d), atol=1e-12)
        assert np.allclose(mat, mat.conj().T)
        if parse_pauli(label).is_identity():
            assert np.trace(mat).real == d
        else:
            assert abs(np.trace(mat)) < 1e-12

    @pytest.mark.parametrize("n", [1, 2, 3])
    def test_orthogonality(self, n):
        strings = all_strings(n, include_identity=True)
        mats = np.array([pauli_matrix(p) for p in strings])
        gram = np.einsum("aij,bji->ab", mats, mats) / 2 ** n
        assert np.allclose(gram, np.eye(len(strings)), atol=1e-12)


class TestOrder(object):
    def test_single_qubit(self):
        order = hierarchical_order(1, 5)
        assert sorted(p.label for p in order) == ["X", "Y", "Z"]

    def test_blocks(self):
        order = hierarchical_order(2, 0)
        assert len(order) == 15
        assert all(p.weight == 1 for p in order[:6])
        assert all(p.weight == 2 for p in order[6:])

    def test_deterministic(self):
        assert hierarchical_order(3, 17) == hierarchical_order(3, 17)

    @settings(max_examples=30, deadline=None)
    @given(st.integers(min_value=1, max_value=3), st.integers(min_value=0, max_value=2 ** 32 - 1))
    def test_complete_and_sorted(self, n, seed):
        order = hierarchical_order(n, seed)
        weights = [p.weight for p in order]
        assert weights == sorted(weights)
        assert len(set(order)) == 4 ** n - 1
        assert all(not p.is_identity() for p in order)

    def test_strings_of_weight(self):
        assert len(strings_of_weight(3, 2)) == 27
        assert len(strings_of_weight(3, 0)) == 1


class TestDecompose(object):
    def test_single(self):
        dec = pauli_decompose(pauli_matrix("Z"))
        assert dict((p.label, c) for p, c in dec.terms.items()) == {"Z": 1.0}

    def test_identity(self):
        dec = pauli_decompose(np.eye(4))
        assert dec["II"] == 1.0
        assert len(dec) == 1

    def test_xxz(self):
        ham = build_spin_chain(SpinChainParams.from_preset("XXZ", 2, J1=1.0, Delta=0.5))
        dec = ham.decompose()
        assert len(dec) == 3
        assert dec["XX"] == pytest.approx(-1.0)
        assert dec["YY"] == pytest.approx(-1.0)
        assert dec["ZZ"] == pytest.approx(-0.5)
        assert "ZI" not in dec
        assert [p.label for p in sorted(dec.non_identity())] == ["XX", "YY", "ZZ"]

    @settings(max_examples=25, deadline=None)
    @given(st.integers(min_value=1, max_value=3), st.integers(min_value=0, max_value=10000))
    def test_round_trip(self, n, seed):
        mat = random_hermitian(2 ** n, seed)
        assert np.allclose(pauli_decompose(mat).matrix(), mat, atol=1e-9)

    def test_not_hermitian(self):
        with pytest.raises(NotHermitian):
            pauli_decompose(np.array([[0, 1], [0, 0]]))

    def test_not_power_of_two(self):
        with pytest.raises(NotPowerOfTwoDimension):
            pauli_decompose(np.eye(3))


class TestExpectation(object):
    def test_maximally_mixed(self):
        rho = DensityMatrix.maximally_mixed(4)
        for p in all_strings(2):
            assert expectation(rho, p) == pytest.approx(0.0, abs=1e-15)

    def test_ghz(self):
        rho = make_reference_state("GHZ", n=4)
        assert expectation(rho, "XXXX") == pytest.approx(1.0)
        assert expectation(rho, "ZIII") == pytest.approx(0.0)
        assert expectation(rho, "ZZII") == pytest.approx(1.0)

    def test_computational(self):
        rho = DensityMatrix.from_vector([1, 0])
        assert expectation(rho, "Z") == 1.0

    def test_dimension_mismatch(self):
        with pytest.raises(DimensionMismatch):
            expectation(DensityMatrix.maximally_mixed(4), "X")

    def test_in_range(self):
        for combo in itertools.product("XYZ", repeat=2):
            val = expectation(make_reference_state("W", n=2), "".join(combo))
            assert -1.0 <= val <= 1.0
