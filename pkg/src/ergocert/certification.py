"""
Certified lower bounds on ergotropy from partial expectation data.

The protocol has two steps. Step (i) picks a state rho~ compatible with
the data, by default the one of minimum purity, and builds its optimal
unitary U~. Step (ii) minimizes the energy U~ extracts,
tr((H - U~^dag H U~) X), over every compatible X. Whatever U~ is, that
minimum never exceeds the ergotropy of the true state, and it is clamped
at zero to give the bound.
"""
import enum
import logging
import warnings
from dataclasses import dataclass
from dataclasses import field
from dataclasses import replace
from typing import NamedTuple
from typing import Optional
from typing import Tuple

import numpy as np
import scipy.linalg

from ergocert import HERMITIAN_TOL
from ergocert import UNITARY_TOL
from ergocert.ergotropy import optimal_unitary
from ergocert.exception import ConfigurationError
from ergocert.exception import DimensionMismatch
from ergocert.exception import EmptyGrid
from ergocert.exception import InfeasibleSet
from ergocert.exception import NonNestedConstraints
from ergocert.exception import NotUnitary
from ergocert.exception import SolverAccuracyWarning
from ergocert.exception import SolverFailure
from ergocert.linalg import is_unitary
from ergocert.linalg import project_to_density
from ergocert.model.state import DensityMatrix
from ergocert.pauli import SINGLE_QUBIT
from ergocert.pauli import parse_pauli
from ergocert.pauli import pauli_matrix
from ergocert.sdp import SdpProblem
from ergocert.sdp import SdpSolver
from ergocert.sdp import SdpStatus
from ergocert.util import as_matrix
from ergocert.util import check_hermitian

logger = logging.getLogger(__name__)

# Slack allowed when comparing nested constraint intervals
NESTING_TOL = 1e-12

# Half-width added to every constraint when step two has no strict interior
STEP_TWO_WIDENING = 1e-7

# Largest grid the qubit oracle builds
ORACLE_MAX_POINTS = 10 ** 6


class Provenance(enum.Enum):
    EXACT = "Exact"
    ESTIMATED = "Estimated"


@dataclass(frozen=True, eq=False)
class Constraint:
    observable: np.ndarray
    target: float
    epsilon: float = 0.0
    label: str = ""

    def __post_init__(self):
        _obs = check_hermitian(as_matrix(self.observable), HERMITIAN_TOL)
        _obs.flags.writeable = False
        object.__setattr__(self, "observable", _obs)
        object.__setattr__(self, "target", float(self.target))
        if not self.epsilon >= 0:
            raise ConfigurationError("epsilon must be >= 0, got {}".format(self.epsilon))
        object.__setattr__(self, "epsilon", float(self.epsilon))

    @property
    def lower(self):
        return self.target - self.epsilon

    @property
    def upper(self):
        return self.target + self.epsilon

    def is_exact(self):
        return self.epsilon == 0.0

    def within(self, other):
        """True if this constraint's interval lies inside other's, same observable."""
        if self.observable.shape != other.observable.shape:
            return False
        if not np.allclose(self.observable, other.observable, atol=NESTING_TOL, rtol=0):
            return False
        return self.lower >= other.lower - NESTING_TOL and self.upper <= other.upper + NESTING_TOL

    def value(self, rho):
        return float(np.real(np.sum(self.observable * as_matrix(rho).T)))


@dataclass(frozen=True, eq=False)
class FeasibleSetSpec:
    dim: int
    constraints: Tuple[Constraint, ...] = ()
    provenance: Provenance = Provenance.EXACT

    def __post_init__(self):
        object.__setattr__(self, "constraints", tuple(self.constraints))
        for c in self.constraints:
            if c.observable.shape[0] != self.dim:
                raise DimensionMismatch(
                    "Constraint '{}' of dimension {} in a spec of dimension {}".format(
                        c.label, c.observable.shape[0], self.dim
                    )
                )

    @classmethod
    def from_pauli_expectations(cls, labels, targets, epsilons=0.0, provenance=None):
        """
        :param labels: Pauli labels or PauliStrings, all of one length
        :param targets: Expected values, one per label
        :param epsilons: One half-width for all, or one per label
        """
        strings = [parse_pauli(p) for p in labels]
        targets = list(targets)
        if len(targets) != len(strings):
            raise ConfigurationError(
                "{} labels but {} targets".format(len(strings), len(targets))
            )
        if np.ndim(epsilons) == 0:
            epsilons = [float(epsilons)] * len(strings)
        if len(epsilons) != len(strings):
            raise ConfigurationError("One epsilon per label expected")
        if not strings:
            raise ConfigurationError("Qubit count cannot be inferred from no labels")

        _n = {p.n for p in strings}
        if len(_n) != 1:
            raise DimensionMismatch("Pauli labels of mixed lengths {}".format(sorted(_n)))
        n = _n.pop()

        if provenance is None:
            provenance = Provenance.ESTIMATED if any(epsilons) else Provenance.EXACT
        return cls(
            dim=2 ** n,
            constraints=[
                Constraint(pauli_matrix(p), t, e, p.label)
                for p, t, e in zip(strings, targets, epsilons)
            ],
            provenance=provenance,
        )

    @property
    def K(self):
        return len(self.constraints)

    def __len__(self):
        return len(self.constraints)

    def prefix(self, k):
        return replace(self, constraints=self.constraints[:k])

    def extends(self, other):
        """True when other's constraints are a prefix of ours, up to tightening."""
        if other.dim != self.dim or len(other) > len(self):
            return False
        return all(a.within(b) for a, b in zip(self.constraints, other.constraints))

    def inflated(self, t):
        """Every interval widened by t on each side."""
        return replace(
            self, constraints=[replace(c, epsilon=c.epsilon + t) for c in self.constraints]
        )

    def to_problem(self, objective=None):
        """Exact constraints become equalities, the others intervals."""
        equalities = []
        intervals = []
        for c in self.constraints:
            if c.is_exact():
                equalities.append((c.observable, c.target))
            else:
                intervals.append((c.observable, c.lower, c.upper))
        return SdpProblem(
            dim=self.dim,
            objective=objective,
            equalities=equalities,
            intervals=intervals,
            unit_trace=True,
        )

    def contains(self, rho, tol=1e-9):
        for c in self.constraints:
            val = c.value(rho)
            if val < c.lower - tol or val > c.upper + tol:
                return False
        return True


@dataclass(frozen=True)
class MinPurity:
    name = "min_purity"


@dataclass(frozen=True, eq=False)
class Linear:
    observable: np.ndarray
    name = "linear"

    def __post_init__(self):
        object.__setattr__(self, "observable", check_hermitian(as_matrix(self.observable)))


def make_objective(name, hamiltonian=None, observable=None):
    """
    Step-(i) objective from configuration.

    :param name: 'min_purity' or 'linear'
    :param observable: For 'linear': 'hamiltonian', a Pauli label or a matrix
    """
    _name = str(name or "min_purity").lower()
    if _name == MinPurity.name:
        return MinPurity()
    if _name != Linear.name:
        raise ConfigurationError("Unknown step-one objective '{}'".format(name))

    if observable is None or (isinstance(observable, str) and observable == "hamiltonian"):
        if hamiltonian is None:
            raise ConfigurationError("Linear objective on the Hamiltonian needs one")
        return Linear(hamiltonian.matrix)
    if isinstance(observable, str):
        return Linear(pauli_matrix(parse_pauli(observable)))
    return Linear(observable)


@dataclass(frozen=True, eq=False)
class CertificationResult:
    raw_min: float
    bound: float
    unitary: np.ndarray
    step1_state: Optional[DensityMatrix]
    diagnostics: dict = field(default_factory=dict)


class HistoryEntry(NamedTuple):
    K: int
    bound: float
    unitary_updated: bool


@dataclass(frozen=True, eq=False)
class MonotoneSession:
    current_unitary: Optional[np.ndarray] = None
    current_bound: float = 0.0
    current_raw: float = float("-inf")
    history: Tuple[HistoryEntry, ...] = ()
    spec: Optional[FeasibleSetSpec] = None

    @property
    def last_update_K(self):
        """K at which the retained unitary was adopted, None before any call."""
        for entry in reversed(self.history):
            if entry.unitary_updated:
                return entry.K
        return None


def _solver(solver):
    return solver if solver is not None else SdpSolver()


def _step_one(spec, objective, solver):
    objective = objective or MinPurity()
    problem = spec.to_problem()

    if isinstance(objective, MinPurity):
        sol = solver.solve_min_purity(problem)
    elif isinstance(objective, Linear):
        if objective.observable.shape[0] != spec.dim:
            raise DimensionMismatch("Step-one objective of the wrong dimension")
        sol = solver.solve_linear(problem.with_objective(objective.observable))
    else:
        raise ConfigurationError("Unknown step-one objective {!r}".format(objective))

    if sol.status is SdpStatus.INFEASIBLE:
        raise InfeasibleSet("No state satisfies the {} constraints".format(spec.K))
    if sol.X is None:
        raise SolverFailure("Step one returned no state ({})".format(sol.status.value))

    if sol.status is SdpStatus.MAX_ITERATIONS:
        _msg = "Step one hit the iteration cap; proceeding with the projected state"
        logger.warning(_msg)
        warnings.warn(_msg, SolverAccuracyWarning)

    return DensityMatrix.normalized(project_to_density(sol.X)), sol


def step_one_select_state(spec, objective=None, solver=None):
    """
    Pick a state in the feasible set.

    :param spec: FeasibleSetSpec
    :param objective: MinPurity() (default) or Linear(L)
    :param solver: SdpSolver instance
    :return: DensityMatrix
    """
    return _step_one(spec, objective, _solver(solver))[0]


def build_tilde_unitary(rho_tilde, hamiltonian):
    return optimal_unitary(rho_tilde, hamiltonian, log_degeneracy=True)


def _extraction_operator(hamiltonian, unitary):
    _h = hamiltonian.matrix
    return _h - unitary.conj().T @ _h @ unitary


def _step_two(spec, hamiltonian, unitary, solver):
    if spec.dim != hamiltonian.dim:
        raise DimensionMismatch(
            "Spec of dimension {} and Hamiltonian of dimension {}".format(spec.dim, hamiltonian.dim)
        )
    unitary = as_matrix(unitary)
    if not is_unitary(unitary, UNITARY_TOL):
        raise NotUnitary("Step two needs a unitary")

    operator = _extraction_operator(hamiltonian, unitary)
    sol = solver.solve_linear(spec.to_problem(operator))
    if sol.status is SdpStatus.INFEASIBLE:
        raise InfeasibleSet("No state satisfies the {} constraints".format(spec.K))
    if sol.status is SdpStatus.MAX_ITERATIONS and spec.K:
        # no strict interior; the minimum over a wider set is still a lower bound
        _msg = "Step two stalled; retrying with every interval widened by {:.1e}".format(
            STEP_TWO_WIDENING
        )
        logger.warning(_msg)
        warnings.warn(_msg, SolverAccuracyWarning)
        sol = solver.solve_linear(spec.inflated(STEP_TWO_WIDENING).to_problem(operator))
        if sol.X is not None:
            sol.info["widened_by"] = STEP_TWO_WIDENING
    if sol.status is not SdpStatus.OPTIMAL:
        raise SolverFailure(
            "Step two did not converge ({}), no certificate".format(sol.status.value)
        )

    value = sol.objective_value
    if np.isfinite(sol.dual_bound):
        value = min(value, sol.dual_bound)
    return float(value), sol


def step_two_bound(spec, hamiltonian, unitary, solver=None):
    """
    Minimum over the feasible set of tr(H X) - tr(H U X U^dag).

    The smaller of the primal and dual objectives is reported so that an
    inexact solve can only loosen the value.

    :return: raw minimum, possibly negative
    """
    return _step_two(spec, hamiltonian, unitary, _solver(solver))[0]


def _diagnostics(solver, sol1, sol2):
    res = {"tolerances": solver.diagnostics() if hasattr(solver, "diagnostics") else {}}
    if sol1 is not None:
        res.update(
            {
                "step1_status": sol1.status.value,
                "step1_objective": sol1.objective_value,
                "step1_iterations": sol1.iterations,
            }
        )
    res.update(
        {
            "step2_status": sol2.status.value,
            "step2_primal": sol2.objective_value,
            "step2_dual": sol2.dual_bound,
            "duality_gap": sol2.duality_gap,
            "primal_residual": sol2.primal_residual,
            "step2_iterations": sol2.iterations,
            "face_dim": sol2.face_dim,
            "step2_widened_by": sol2.info.get("widened_by", 0.0),
        }
    )
    return res


def _with_advice(err, spec, solver):
    if err.advice is None:
        err.advice = epsilon_inflation_advice(spec, solver=solver)
    return err


def certify(spec, hamiltonian, objective=None, solver=None, advice=True):
    """
    Run both steps and clamp.

    :param spec: FeasibleSetSpec
    :param hamiltonian: HamiltonianData
    :param objective: Step-(i) objective, MinPurity() by default
    :param solver: SdpSolver
    :param advice: Compute the epsilon inflation advice on infeasibility
    :return: CertificationResult
    """
    solver = _solver(solver)
    try:
        rho_tilde, sol1 = _step_one(spec, objective, solver)
        unitary = build_tilde_unitary(rho_tilde, hamiltonian)
        raw, sol2 = _step_two(spec, hamiltonian, unitary, solver)
    except InfeasibleSet as err:
        if advice:
            raise _with_advice(err, spec, solver)
        raise

    unitary.flags.writeable = False
    logger.info("K={} raw={:.6g} bound={:.6g}".format(spec.K, raw, max(raw, 0.0)))
    return CertificationResult(
        raw_min=raw,
        bound=max(raw, 0.0),
        unitary=unitary,
        step1_state=rho_tilde,
        diagnostics=_diagnostics(solver, sol1, sol2),
    )


def certify_monotone(session, spec, hamiltonian, objective=None, solver=None, advice=True):
    """
    Conditional unitary update along a nested chain of constraint sets.

    The retained unitary is evaluated on the new set first; a fresh
    two-step run replaces it only when its value is strictly larger.
    The new set lies inside the previous one, so the value of the
    retained unitary is at least the previous value.

    :param session: MonotoneSession, MonotoneSession() to start
    :return: (new MonotoneSession, CertificationResult)
    """
    solver = _solver(solver)
    if session.spec is not None and not spec.extends(session.spec):
        raise NonNestedConstraints(
            "Constraint list of length {} does not extend the previous {}".format(
                spec.K, session.spec.K
            )
        )

    if session.current_unitary is None:
        result = certify(spec, hamiltonian, objective=objective, solver=solver, advice=advice)
        updated = True
        raw = result.raw_min
        unitary = result.unitary
    else:
        try:
            retained, sol_r = _step_two(spec, hamiltonian, session.current_unitary, solver)
        except InfeasibleSet as err:
            if advice:
                raise _with_advice(err, spec, solver)
            raise
        retained = max(retained, session.current_raw)
        fresh = certify(spec, hamiltonian, objective=objective, solver=solver, advice=advice)

        if fresh.raw_min > retained:
            updated = True
            raw = fresh.raw_min
            unitary = fresh.unitary
            diagnostics = fresh.diagnostics
        else:
            updated = False
            raw = retained
            unitary = session.current_unitary
            diagnostics = _diagnostics(solver, None, sol_r)
        diagnostics = dict(diagnostics, retained_raw=retained, fresh_raw=fresh.raw_min)
        result = CertificationResult(
            raw_min=raw,
            bound=max(raw, 0.0),
            unitary=unitary,
            step1_state=fresh.step1_state,
            diagnostics=diagnostics,
        )

    result.diagnostics["unitary_updated"] = updated
    logger.debug("Monotone K={} bound={:.6g} updated={}".format(spec.K, result.bound, updated))
    new_session = MonotoneSession(
        current_unitary=unitary,
        current_bound=result.bound,
        current_raw=raw,
        history=session.history + (HistoryEntry(spec.K, result.bound, updated),),
        spec=spec,
    )
    return new_session, result


def epsilon_inflation_advice(spec, solver=None, tol=1e-6):
    """
    Smallest uniform widening t >= 0 of every constraint interval for
    which a state exists, found by bisection to within tol.
    """
    solver = _solver(solver)

    def _feasible(t):
        problem = spec.inflated(t).to_problem() if t > 0 else spec.to_problem()
        return solver.check_feasible(problem).status is not SdpStatus.INFEASIBLE

    if _feasible(0.0):
        return 0.0

    # every target is reachable once the interval covers the whole spectrum
    hi = max(
        [float(np.max(np.abs(np.linalg.eigvalsh(c.observable)))) + abs(c.target) for c in spec.constraints]
        + [1.0]
    )
    lo = 0.0
    while hi - lo > tol:
        mid = (lo + hi) / 2
        if _feasible(mid):
            hi = mid
        else:
            lo = mid
    logger.info("Feasibility restored by widening every interval by {:.3e}".format(hi))
    return hi


def _qubit_ergotropy(points, h, h_norm):
    """Ergotropy at Bloch vectors r for H = h0 I + h . sigma: h . r + |h| |r|."""
    return points @ h + h_norm * np.linalg.norm(points, axis=-1)


def qubit_minimax_oracle(spec, hamiltonian, resolution=201, max_points=ORACLE_MAX_POINTS):
    """
    Minimum exact ergotropy over a grid of the feasible set of a qubit.

    The grid covers the affine subspace of Bloch vectors left free by the
    exact constraints, resolution points per free direction, intersected
    with the Bloch ball and the interval constraints.

    :param spec: FeasibleSetSpec of dimension 2
    :param hamiltonian: HamiltonianData of dimension 2
    :param resolution: Grid points per free direction
    :param max_points: Cap on the grid size; with many free directions the
        points per direction drop to the largest odd count within it
    :return: The smallest ergotropy found
    """
    if spec.dim != 2 or hamiltonian.dim != 2:
        raise DimensionMismatch("The grid oracle works on a single qubit")

    sigma = [SINGLE_QUBIT[s] for s in "XYZ"]

    def _components(mat):
        return np.array([np.real(np.trace(mat @ s)) for s in sigma]), np.real(np.trace(mat))

    rows = []
    rhs = []
    intervals = []
    for c in spec.constraints:
        # tr(O rho) = tr(O)/2 + o . r / 2
        o, tr_o = _components(c.observable)
        if c.is_exact():
            rows.append(o / 2)
            rhs.append(c.target - tr_o / 2)
        else:
            intervals.append((o / 2, c.lower - tr_o / 2, c.upper - tr_o / 2))

    if rows:
        a = np.array(rows)
        b = np.array(rhs)
        r0 = scipy.linalg.lstsq(a, b)[0]
        if np.max(np.abs(a @ r0 - b)) > 1e-9:
            raise EmptyGrid("Exact constraints are inconsistent")
        null = scipy.linalg.null_space(a, rcond=1e-10)
    else:
        r0 = np.zeros(3)
        null = np.eye(3)

    _slack = 1.0 - float(r0 @ r0)
    if _slack < -1e-9:
        raise EmptyGrid("Exact constraints leave the Bloch ball")
    radius = np.sqrt(max(_slack, 0.0))

    k = null.shape[1]
    if k == 0 or radius == 0.0:
        points = r0.reshape(1, 3)
    else:
        count = min(int(resolution), int(np.floor(max_points ** (1.0 / k) + 1e-9)))
        if count < int(resolution):
            # odd, so the centre of the free face stays on the grid
            count -= 1 - count % 2
            logger.debug("Oracle grid of {} points per direction over {} directions".format(count, k))
        axis = np.linspace(-radius, radius, count)
        mesh = np.stack(np.meshgrid(*([axis] * k), indexing="ij"), axis=-1).reshape(-1, k)
        points = r0 + mesh @ null.T

    mask = np.linalg.norm(points, axis=1) <= 1.0 + 1e-9
    for o, lo, hi in intervals:
        val = points @ o
        mask &= (val >= lo - 1e-12) & (val <= hi + 1e-12)
    points = points[mask]
    if not len(points):
        raise EmptyGrid("No grid point at resolution {} is feasible".format(resolution))

    h, _ = _components(hamiltonian.matrix)
    h = h / 2
    values = _qubit_ergotropy(points, h, float(np.linalg.norm(h)))
    return float(np.min(values))
