import logging
from dataclasses import replace

import hypothesis.strategies as st
import numpy as np
import pytest
from hypothesis import given
from hypothesis import settings

from ergocert.certification import Constraint
from ergocert.certification import FeasibleSetSpec
from ergocert.certification import Linear
from ergocert.certification import MinPurity
from ergocert.certification import STEP_TWO_WIDENING
from ergocert.certification import Provenance
from ergocert.certification import build_tilde_unitary
from ergocert.certification import certify
from ergocert.certification import epsilon_inflation_advice
from ergocert.certification import make_objective
from ergocert.certification import qubit_minimax_oracle
from ergocert.certification import step_one_select_state
from ergocert.certification import step_two_bound
from ergocert.ergotropy import dephase_incoherent
from ergocert.ergotropy import exact_ergotropy
from ergocert.ergotropy import extraction_value
from ergocert.exception import ConfigurationError
from ergocert.exception import DimensionMismatch
from ergocert.exception import EmptyGrid
from ergocert.exception import InfeasibleSet
from ergocert.exception import NotHermitian
from ergocert.exception import NotUnitary
from ergocert.exception import SolverAccuracyWarning
from ergocert.exception import SolverFailure
from ergocert.linalg import random_density_matrix
from ergocert.linalg import random_hermitian
from ergocert.model import HamiltonianData
from ergocert.model import SpinChainParams
from ergocert.model import build_spin_chain
from ergocert.model import make_reference_state
from ergocert.model.state import DensityMatrix
from ergocert.pauli import expectation
from ergocert.pauli import hierarchical_order
from ergocert.pauli import pauli_matrix
from ergocert.sdp import SdpSolver
from ergocert.sdp import SdpStatus

# |0> is the ground state
QUBIT_H = HamiltonianData.from_energies([-1.0, 1.0])


def _spec_of(rho, labels, epsilon=0.0):
    return FeasibleSetSpec.from_pauli_expectations(
        labels, [expectation(rho, p) for p in labels], epsilon
    )


def _complete_spec(rho, n):
    return _spec_of(rho, [p.label for p in hierarchical_order(n, 0)])


class _CappedStepOne(SdpSolver):
    def solve_min_purity(self, problem, initial=None):
        sol = super(_CappedStepOne, self).solve_min_purity(problem, initial=initial)
        return replace(sol, status=SdpStatus.MAX_ITERATIONS)


class _StalledStepTwo(SdpSolver):
    def solve_linear(self, problem):
        sol = super(_StalledStepTwo, self).solve_linear(problem)
        return replace(sol, status=SdpStatus.MAX_ITERATIONS)


class _StalledOnEqualities(SdpSolver):
    def solve_linear(self, problem):
        sol = super(_StalledOnEqualities, self).solve_linear(problem)
        if problem.equalities:
            return replace(sol, status=SdpStatus.MAX_ITERATIONS)
        return sol


class TestConstraint(object):
    def test_interval(self):
        c = Constraint(pauli_matrix("Z"), 0.3, 0.1, "Z")
        assert c.lower == pytest.approx(0.2)
        assert c.upper == pytest.approx(0.4)
        assert not c.is_exact()

    def test_negative_epsilon(self):
        with pytest.raises(ConfigurationError):
            Constraint(pauli_matrix("Z"), 0.3, -0.1)

    def test_within(self):
        wide = Constraint(pauli_matrix("Z"), 0.3, 0.1)
        narrow = Constraint(pauli_matrix("Z"), 0.32, 0.05)
        assert narrow.within(wide)
        assert not wide.within(narrow)
        assert not Constraint(pauli_matrix("X"), 0.3, 0.0).within(wide)

    def test_value(self):
        rho = DensityMatrix.from_vector([1, 0])
        assert Constraint(pauli_matrix("Z"), 0.0).value(rho) == pytest.approx(1.0)

    def test_not_hermitian(self):
        with pytest.raises(NotHermitian):
            Constraint(np.array([[0, 1], [0, 0]]), 0.0)


class TestFeasibleSetSpec(object):
    def test_from_expectations(self):
        spec = FeasibleSetSpec.from_pauli_expectations(["XX", "ZI"], [0.5, -0.2])
        assert spec.dim == 4
        assert spec.K == len(spec) == 2
        assert spec.provenance is Provenance.EXACT
        assert [c.label for c in spec.constraints] == ["XX", "ZI"]

    def test_estimated(self):
        spec = FeasibleSetSpec.from_pauli_expectations(["X", "Z"], [0.5, -0.2], [0.1, 0.0])
        assert spec.provenance is Provenance.ESTIMATED
        problem = spec.to_problem()
        assert len(problem.equalities) == 1
        assert len(problem.intervals) == 1

    def test_mixed_lengths(self):
        with pytest.raises(DimensionMismatch):
            FeasibleSetSpec.from_pauli_expectations(["X", "ZZ"], [0.0, 0.0])

    def test_count_mismatch(self):
        with pytest.raises(ConfigurationError):
            FeasibleSetSpec.from_pauli_expectations(["X", "Z"], [0.0])

    def test_no_labels(self):
        with pytest.raises(ConfigurationError):
            FeasibleSetSpec.from_pauli_expectations([], [])

    def test_wrong_dimension(self):
        with pytest.raises(DimensionMismatch):
            FeasibleSetSpec(dim=4, constraints=[Constraint(pauli_matrix("Z"), 0.0)])

    def test_prefix_and_extends(self):
        spec = FeasibleSetSpec.from_pauli_expectations(["XX", "ZI", "IZ"], [0.5, -0.2, 0.1], 0.1)
        short = spec.prefix(2)
        assert short.K == 2
        assert spec.extends(short)
        assert not short.extends(spec)
        tighter = FeasibleSetSpec.from_pauli_expectations(["XX", "ZI", "IZ"], [0.5, -0.2, 0.1], 0.05)
        assert tighter.extends(short)
        other = FeasibleSetSpec.from_pauli_expectations(["ZI", "XX"], [-0.2, 0.5], 0.1)
        assert not spec.extends(other)

    def test_inflated(self):
        spec = FeasibleSetSpec.from_pauli_expectations(["X"], [0.5])
        wide = spec.inflated(0.2)
        assert wide.constraints[0].epsilon == pytest.approx(0.2)
        assert spec.constraints[0].epsilon == 0.0

    def test_contains(self):
        rho = make_reference_state("GHZ", n=2)
        spec = _spec_of(rho, ["XX", "ZZ", "ZI"])
        assert spec.contains(rho)
        assert not spec.contains(DensityMatrix.maximally_mixed(4))


class TestStepOne(object):
    def test_unconstrained(self):
        rho = step_one_select_state(FeasibleSetSpec(dim=2))
        assert np.allclose(rho.matrix, np.eye(2) / 2, atol=1e-6)

    def test_midpoint(self):
        spec = FeasibleSetSpec.from_pauli_expectations(["X", "Z"], [0.6, 0.2])
        rho = step_one_select_state(spec)
        assert np.allclose(rho.bloch_vector(), [0.6, 0.0, 0.2], atol=1e-6)

    def test_complete_information(self):
        rho = make_reference_state("GHZ", n=2)
        assert np.allclose(step_one_select_state(_complete_spec(rho, 2)).matrix, rho.matrix, atol=1e-8)

    def test_linear(self):
        spec = FeasibleSetSpec.from_pauli_expectations(["X"], [0.0])
        rho = step_one_select_state(spec, Linear(pauli_matrix("Z")))
        assert np.allclose(rho.bloch_vector(), [0.0, 0.0, -1.0], atol=1e-4)

    def test_infeasible(self):
        spec = FeasibleSetSpec.from_pauli_expectations(["Z"], [1.5])
        with pytest.raises(InfeasibleSet):
            step_one_select_state(spec)

    def test_linear_dimension(self):
        spec = FeasibleSetSpec.from_pauli_expectations(["X"], [0.0])
        with pytest.raises(DimensionMismatch):
            step_one_select_state(spec, Linear(pauli_matrix("ZZ")))


class TestTildeUnitary(object):
    def test_passive_image(self):
        ham = HamiltonianData.from_energies([0.0, 1.0])
        rho = DensityMatrix(np.diag([0.2, 0.8]).astype(complex))
        u = build_tilde_unitary(rho, ham)
        after = u @ rho.matrix @ u.conj().T
        assert np.allclose(after, np.diag([0.8, 0.2]), atol=1e-12)

    def test_degenerate_state_logged(self, caplog):
        with caplog.at_level(logging.WARNING, logger="ergocert.ergotropy"):
            u = build_tilde_unitary(DensityMatrix.maximally_mixed(2), QUBIT_H)
        assert np.allclose(u @ u.conj().T, np.eye(2))
        assert "degenerate" in caplog.text

    def test_dimension_mismatch(self):
        with pytest.raises(DimensionMismatch):
            build_tilde_unitary(DensityMatrix.maximally_mixed(4), QUBIT_H)


class TestStepTwo(object):
    def test_singleton(self):
        rho = random_density_matrix(4, 3)
        ham = HamiltonianData.from_matrix(random_hermitian(4, 4))
        u = build_tilde_unitary(DensityMatrix.normalized(rho), ham)
        value = step_two_bound(_complete_spec(rho, 2), ham, u)
        assert value == pytest.approx(extraction_value(rho, ham, u), abs=1e-8)

    def test_identity(self):
        spec = FeasibleSetSpec.from_pauli_expectations(["XX"], [0.3])
        ham = build_spin_chain(SpinChainParams(n=2, J1=1.0, B=0.4))
        assert step_two_bound(spec, ham, np.eye(4)) == pytest.approx(0.0, abs=1e-9)

    def test_flip_on_equator(self):
        spec = FeasibleSetSpec.from_pauli_expectations(["Z"], [0.0])
        assert step_two_bound(spec, QUBIT_H, pauli_matrix("X")) == pytest.approx(0.0, abs=1e-9)

    def test_not_unitary(self):
        spec = FeasibleSetSpec.from_pauli_expectations(["Z"], [0.0])
        with pytest.raises(NotUnitary):
            step_two_bound(spec, QUBIT_H, 2 * np.eye(2))

    def test_dimension_mismatch(self):
        spec = FeasibleSetSpec.from_pauli_expectations(["ZZ"], [0.0])
        with pytest.raises(DimensionMismatch):
            step_two_bound(spec, QUBIT_H, np.eye(4))


class TestCertify(object):
    def test_complete_ghz(self):
        ham = build_spin_chain(SpinChainParams.from_preset("XXZ", 3, J1=1.0, Delta=0.5))
        rho = make_reference_state("GHZ", n=3)
        result = certify(_complete_spec(rho, 3), ham)
        assert result.bound == pytest.approx(exact_ergotropy(rho, ham).value, abs=1e-5)
        assert result.diagnostics["step2_status"] == "Optimal"

    def test_equator(self):
        spec = FeasibleSetSpec.from_pauli_expectations(["Z"], [0.0])
        result = certify(spec, HamiltonianData.from_matrix(pauli_matrix("Z")))
        assert result.bound == pytest.approx(0.0, abs=1e-9)
        assert result.raw_min <= 1e-9

    def test_energy_projectors(self):
        from ergocert.analytic import energy_projector_spec

        ham = HamiltonianData.from_energies([-1.0, -0.2, 0.3, 1.1])
        rho = DensityMatrix.normalized(random_density_matrix(4, 8))
        result = certify(energy_projector_spec(rho, ham), ham)
        assert result.bound == pytest.approx(dephase_incoherent(rho, ham).incoherent_ergotropy, abs=1e-6)

    def test_pure_qubit(self):
        rho = DensityMatrix.from_vector([1, 1])
        result = certify(_spec_of(rho, ["X", "Y", "Z"]), QUBIT_H)
        assert result.bound == pytest.approx(1.0, abs=1e-8)

    def test_clamp(self):
        spec = FeasibleSetSpec.from_pauli_expectations(["X"], [0.1], 0.2)
        result = certify(spec, QUBIT_H)
        assert result.bound == max(result.raw_min, 0.0)
        assert result.bound >= 0.0

    def test_result_fields(self):
        spec = FeasibleSetSpec.from_pauli_expectations(["X", "Z"], [0.6, 0.2])
        result = certify(spec, QUBIT_H)
        assert isinstance(result.step1_state, DensityMatrix)
        assert np.allclose(result.unitary @ result.unitary.conj().T, np.eye(2), atol=1e-10)
        with pytest.raises(ValueError):
            result.unitary[0, 0] = 0
        assert "duality_gap" in result.diagnostics
        assert result.diagnostics["tolerances"]["tol_gap"] == SdpSolver().tol_gap

    def test_linear_objective(self):
        ham = build_spin_chain(SpinChainParams(n=2, J1=1.0, B=0.7))
        rho = make_reference_state("W", n=2)
        spec = _spec_of(rho, ["XX", "YY", "ZZ", "ZI"])
        result = certify(spec, ham, objective=Linear(ham.matrix))
        assert result.bound <= exact_ergotropy(rho, ham).value + 1e-6

    @settings(max_examples=10, deadline=None)
    @given(st.integers(min_value=0, max_value=10000), st.integers(min_value=1, max_value=15))
    def test_sound(self, seed, k):
        rho = random_density_matrix(4, seed)
        ham = HamiltonianData.from_matrix(random_hermitian(4, seed + 1))
        spec = _spec_of(rho, [p.label for p in hierarchical_order(2, seed)[:k]])
        result = certify(spec, ham)
        assert 0.0 <= result.bound <= exact_ergotropy(rho, ham).value + 1e-6


class TestInfeasible(object):
    def test_out_of_spectrum(self):
        spec = FeasibleSetSpec.from_pauli_expectations(["Z"], [1.5])
        with pytest.raises(InfeasibleSet) as err:
            certify(spec, QUBIT_H)
        assert err.value.advice == pytest.approx(0.5, abs=1e-5)

    def test_outside_ball(self):
        spec = FeasibleSetSpec.from_pauli_expectations(["X", "Z"], [0.9, 0.9])
        with pytest.raises(InfeasibleSet) as err:
            certify(spec, QUBIT_H)
        assert err.value.advice == pytest.approx(0.9 - 1 / np.sqrt(2), abs=1e-3)

    def test_no_advice(self):
        spec = FeasibleSetSpec.from_pauli_expectations(["Z"], [1.5])
        with pytest.raises(InfeasibleSet) as err:
            certify(spec, QUBIT_H, advice=False)
        assert err.value.advice is None

    def test_feasible_needs_none(self):
        spec = FeasibleSetSpec.from_pauli_expectations(["Z"], [0.5])
        assert epsilon_inflation_advice(spec) == 0.0


class TestSolverTrouble(object):
    def test_step_one_capped(self):
        spec = FeasibleSetSpec.from_pauli_expectations(["X", "Z"], [0.6, 0.2], 0.05)
        with pytest.warns(SolverAccuracyWarning):
            result = certify(spec, QUBIT_H, solver=_CappedStepOne())
        assert result.bound >= 0.0

    def test_step_two_stalled(self):
        spec = FeasibleSetSpec.from_pauli_expectations(["X"], [0.6], 0.05)
        with pytest.raises(SolverFailure):
            certify(spec, QUBIT_H, solver=_StalledStepTwo())

    def test_step_two_widened(self):
        ham = HamiltonianData.from_matrix(random_hermitian(4, 21))
        rho = DensityMatrix.normalized(random_density_matrix(4, 22))
        spec = _spec_of(rho, ["XX", "ZI", "YZ", "IX", "ZZ", "XY"])
        expected = certify(spec, ham)
        with pytest.warns(SolverAccuracyWarning):
            result = certify(spec, ham, solver=_StalledOnEqualities())
        assert result.diagnostics["step2_widened_by"] == STEP_TWO_WIDENING
        assert result.raw_min <= expected.raw_min + 1e-6
        assert result.raw_min == pytest.approx(expected.raw_min, abs=1e-4)
        assert result.raw_min <= exact_ergotropy(rho, ham).value + 1e-6


class TestObjective(object):
    def test_default(self):
        assert isinstance(make_objective(None), MinPurity)
        assert isinstance(make_objective("MIN_PURITY"), MinPurity)

    def test_hamiltonian(self):
        obj = make_objective("linear", hamiltonian=QUBIT_H)
        assert np.allclose(obj.observable, QUBIT_H.matrix)

    def test_label(self):
        obj = make_objective("linear", observable="ZZ")
        assert np.allclose(obj.observable, pauli_matrix("ZZ"))

    def test_missing_hamiltonian(self):
        with pytest.raises(ConfigurationError):
            make_objective("linear")

    def test_unknown(self):
        with pytest.raises(ConfigurationError):
            make_objective("max_entropy")


class TestOracle(object):
    def test_singleton(self):
        rho = DensityMatrix.from_vector([1, 1])
        assert qubit_minimax_oracle(_spec_of(rho, ["X", "Y", "Z"]), QUBIT_H) == pytest.approx(1.0)

    def test_segment(self):
        spec = FeasibleSetSpec.from_pauli_expectations(["X", "Z"], [0.6, 0.2])
        # the midpoint of the segment is on the grid for odd resolutions
        expected = np.hypot(0.6, 0.2) - 0.2
        assert qubit_minimax_oracle(spec, QUBIT_H, resolution=2001) == pytest.approx(expected, abs=1e-12)

    def test_grid_capped(self):
        spec = FeasibleSetSpec(dim=2, constraints=[Constraint(pauli_matrix("X"), 0.0, 1.0, "X")])
        assert qubit_minimax_oracle(spec, QUBIT_H, max_points=1000) == pytest.approx(0.0, abs=1e-12)
        assert qubit_minimax_oracle(spec, QUBIT_H) == pytest.approx(0.0, abs=1e-12)

    def test_interval(self):
        spec = FeasibleSetSpec(
            dim=2,
            constraints=[
                Constraint(pauli_matrix("X"), 0.6, 0.0, "X"),
                Constraint(pauli_matrix("Z"), 0.2, 0.1, "Z"),
            ],
        )
        oracle = qubit_minimax_oracle(spec, QUBIT_H, resolution=401)
        assert oracle == pytest.approx(np.hypot(0.6, 0.3) - 0.3, abs=1e-2)
        assert certify(spec, QUBIT_H).bound <= oracle + 1e-6

    def test_bound_below_oracle(self):
        rho = DensityMatrix.normalized(random_density_matrix(2, 12))
        spec = _spec_of(rho, ["X"], 0.05)
        oracle = qubit_minimax_oracle(spec, QUBIT_H, resolution=101)
        assert certify(spec, QUBIT_H).bound <= oracle + 1e-6

    def test_empty(self):
        spec = FeasibleSetSpec.from_pauli_expectations(["X", "Z"], [0.9, 0.9])
        with pytest.raises(EmptyGrid):
            qubit_minimax_oracle(spec, QUBIT_H)

    def test_dimension(self):
        spec = FeasibleSetSpec.from_pauli_expectations(["ZZ"], [0.0])
        with pytest.raises(DimensionMismatch):
            qubit_minimax_oracle(spec, QUBIT_H)
