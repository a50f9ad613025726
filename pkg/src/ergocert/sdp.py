"""
Small dense semidefinite programs over density matrices.

A problem is posed on a complex Hermitian d x d variable X ⪰ 0 with
equalities tr(A_i X) = b_i, intervals lo_j <= tr(B_j X) <= hi_j and
optionally tr(X) = 1. Solving goes through three stages:

1. facial reduction: an exact constraint sitting at an extreme eigenvalue
   of its observable confines X to that eigenspace, X = W Z W^dag;
2. the equalities are eliminated, Z = Z_0 + sum_k y_k F_k with the F_k an
   orthonormal basis of their null space in Hermitian coordinates;
3. the remaining linear matrix inequality, written on the real symmetric
   embedding of Z, is handed to the cvxopt primal-dual interior point
   solver (Nesterov-Todd scaling); minimum purity goes to cvxopt's cone
   QP solver, the objective being ||v||^2 in orthonormal coordinates.
"""
import enum
import logging
from dataclasses import dataclass
from dataclasses import field
from dataclasses import replace
from typing import Optional
from typing import Tuple

import numpy as np
import scipy.linalg
from cvxopt import matrix as cvx_matrix
from cvxopt import solvers as cvx_solvers

from ergocert import HERMITIAN_TOL
from ergocert.exception import DimensionMismatch
from ergocert.exception import InvalidSpectrum
from ergocert.linalg import embed_complex
from ergocert.linalg import from_coordinates
from ergocert.linalg import to_coordinates
from ergocert.util import as_matrix
from ergocert.util import check_hermitian
from ergocert.util import hermitize

logger = logging.getLogger(__name__)


class SdpStatus(enum.Enum):
    OPTIMAL = "Optimal"
    INFEASIBLE = "Infeasible"
    MAX_ITERATIONS = "MaxIterations"


def _hermitian_of_dim(mat, dim):
    mat = check_hermitian(as_matrix(mat), HERMITIAN_TOL)
    if mat.shape[0] != dim:
        raise DimensionMismatch("Constraint of dimension {}, expected {}".format(mat.shape[0], dim))
    mat.flags.writeable = False
    return mat


@dataclass(frozen=True, eq=False)
class SdpProblem:
    dim: int
    objective: Optional[np.ndarray] = None
    equalities: Tuple = ()
    intervals: Tuple = ()
    unit_trace: bool = True

    def __post_init__(self):
        d = int(self.dim)
        if self.objective is not None:
            object.__setattr__(self, "objective", _hermitian_of_dim(self.objective, d))
        _eq = tuple((_hermitian_of_dim(a, d), float(b)) for a, b in self.equalities)
        _iv = []
        for b, lo, hi in self.intervals:
            if lo > hi:
                raise InvalidSpectrum("Interval lower end {} above upper end {}".format(lo, hi))
            _iv.append((_hermitian_of_dim(b, d), float(lo), float(hi)))
        object.__setattr__(self, "equalities", _eq)
        object.__setattr__(self, "intervals", tuple(_iv))

    def with_objective(self, objective):
        return replace(self, objective=objective)

    def without_objective(self):
        return replace(self, objective=None)

    def residual(self, mat):
        """Largest violation of the constraints by mat, positivity included."""
        res = [0.0]
        for a, b in self.equalities:
            res.append(abs(np.real(np.sum(a * mat.T)) - b))
        for b, lo, hi in self.intervals:
            val = np.real(np.sum(b * mat.T))
            res.append(max(0.0, lo - val, val - hi))
        if self.unit_trace:
            res.append(abs(np.trace(mat).real - 1))
        res.append(max(0.0, -float(np.linalg.eigvalsh(hermitize(mat))[0])))
        return float(max(res))


@dataclass(frozen=True, eq=False)
class SdpSolution:
    X: Optional[np.ndarray]
    objective_value: float
    primal_residual: float
    duality_gap: float
    status: SdpStatus
    dual_bound: float = float("nan")
    iterations: int = 0
    face_dim: int = 0
    free_parameters: int = 0
    info: dict = field(default_factory=dict)

    @property
    def optimal(self):
        return self.status is SdpStatus.OPTIMAL


class _Infeasible(Exception):
    pass


@dataclass
class _Reduced:
    face: np.ndarray  # W, d x m, orthonormal columns
    v0: np.ndarray
    null: np.ndarray  # N, m^2 x k
    gl: np.ndarray  # linear inequality rows, G_l y <= h_l
    hl: np.ndarray

    @property
    def m(self):
        return self.face.shape[1]

    @property
    def k(self):
        return self.null.shape[1]

    def coordinates(self, mat):
        w = self.face
        return to_coordinates(w.conj().T @ mat @ w)

    def point(self, y):
        v = self.v0 if self.k == 0 else self.v0 + self.null @ np.asarray(y, dtype=float)
        z = from_coordinates(v, self.m)
        return self.face @ z @ self.face.conj().T


def _cvx(arr):
    arr = np.asarray(arr, dtype=float)
    if arr.ndim == 1:
        arr = arr.reshape(-1, 1)
    return cvx_matrix(np.ascontiguousarray(arr))


def _call(method, *args, **kwargs):
    try:
        return method(*args, **kwargs)
    except (ValueError, ArithmeticError) as err:
        # singular KKT systems at the starting point
        logger.debug("cvxopt gave up: {}".format(err))
        return {"status": "unknown", "x": None}


class SdpSolver(object):
    """
    :param tol_gap: Absolute duality gap accepted as optimal
    :param tol_feas: Primal and dual feasibility tolerance
    :param tol_psd: Smallest eigenvalue tolerated in a returned X
    :param max_iterations: Interior point iteration cap
    :param infeasibility_residual: Certificate residual below which a stalled
        solve is declared infeasible
    :param face_tol: Distance of a target from an extreme eigenvalue that
        triggers facial reduction
    """

    def __init__(
        self,
        tol_gap=1e-7,
        tol_feas=1e-8,
        tol_psd=1e-9,
        max_iterations=200,
        infeasibility_residual=1e-6,
        face_tol=1e-9,
        show_progress=False,
    ):
        self.tol_gap = tol_gap
        self.tol_feas = tol_feas
        self.tol_psd = tol_psd
        self.max_iterations = max_iterations
        self.infeasibility_residual = infeasibility_residual
        self.face_tol = face_tol
        self.show_progress = show_progress

    @property
    def options(self):
        return {
            "show_progress": self.show_progress,
            "maxiters": self.max_iterations,
            "abstol": self.tol_gap,
            "reltol": self.tol_gap,
            "feastol": self.tol_feas,
            "refinement": 1,
        }

    def diagnostics(self):
        return {
            "tol_gap": self.tol_gap,
            "tol_feas": self.tol_feas,
            "tol_psd": self.tol_psd,
            "max_iterations": self.max_iterations,
        }

    # ------------------------------------------------------------------
    # reduction

    def _face(self, problem):
        d = problem.dim
        w = np.eye(d, dtype=complex)
        if not problem.unit_trace:
            return w

        changed = True
        while changed:
            changed = False
            items = [(a, b, b) for a, b in problem.equalities]
            items.extend(problem.intervals)
            for a, lo, hi in items:
                vals, vecs = np.linalg.eigh(hermitize(w.conj().T @ a @ w))
                _scale = max(1.0, float(np.max(np.abs(vals))))
                _tol = self.face_tol * _scale
                if lo > vals[-1] + self.tol_feas * _scale or hi < vals[0] - self.tol_feas * _scale:
                    raise _Infeasible(
                        "Target range [{}, {}] outside spectrum [{}, {}]".format(
                            lo, hi, vals[0], vals[-1]
                        )
                    )
                if lo >= vals[-1] - _tol:
                    idx = vals >= vals[-1] - 1e-8 * _scale
                elif hi <= vals[0] + _tol:
                    idx = vals <= vals[0] + 1e-8 * _scale
                else:
                    continue
                if np.count_nonzero(idx) < w.shape[1]:
                    w = w @ vecs[:, idx]
                    changed = True
                    logger.debug("Facial reduction to dimension {}".format(w.shape[1]))
        return w

    def _reduce(self, problem):
        face = self._face(problem)
        m = face.shape[1]

        rows = []
        rhs = []

        def _coords(mat):
            return to_coordinates(face.conj().T @ mat @ face)

        for a, b in problem.equalities:
            rows.append(_coords(a))
            rhs.append(b)
        if problem.unit_trace:
            rows.append(to_coordinates(np.eye(m, dtype=complex)))
            rhs.append(1.0)

        if rows:
            a_eq = np.array(rows)
            b_eq = np.array(rhs)
            v0 = scipy.linalg.lstsq(a_eq, b_eq)[0]
            _scale = max(1.0, float(np.max(np.abs(b_eq))))
            _res = float(np.max(np.abs(a_eq @ v0 - b_eq)))
            if _res > 1e-8 * _scale:
                raise _Infeasible("Inconsistent equalities, residual {:.3e}".format(_res))
            null = scipy.linalg.null_space(a_eq, rcond=1e-10)
        else:
            v0 = np.zeros(m * m)
            null = np.eye(m * m)

        gl = []
        hl = []
        for b, lo, hi in problem.intervals:
            bc = _coords(b)
            a = null.T @ bc
            const = float(bc @ v0)
            if np.linalg.norm(a) < 1e-12:
                _scale = max(1.0, abs(lo), abs(hi))
                if const < lo - self.tol_feas * _scale or const > hi + self.tol_feas * _scale:
                    raise _Infeasible("Interval constraint violated on the face")
                continue
            gl.append(a)
            hl.append(hi - const)
            gl.append(-a)
            hl.append(const - lo)

        k = null.shape[1]
        return _Reduced(
            face=face,
            v0=v0,
            null=null,
            gl=np.array(gl, dtype=float).reshape(len(gl), k),
            hl=np.array(hl, dtype=float),
        )

    def _lmi(self, red):
        m = red.m
        g_cols = []
        for j in range(red.k):
            f = from_coordinates(red.null[:, j], m)
            g_cols.append(-embed_complex(f).ravel(order="F"))
        gs = np.column_stack(g_cols)
        hs = embed_complex(from_coordinates(red.v0, m))
        return gs, hs

    # ------------------------------------------------------------------

    def _status(self, sol):
        _st = sol.get("status")
        if _st == "optimal":
            return SdpStatus.OPTIMAL
        if _st == "primal infeasible":
            return SdpStatus.INFEASIBLE
        _cert = sol.get("residual as primal infeasibility certificate")
        if _cert is not None and _cert <= self.infeasibility_residual:
            return SdpStatus.INFEASIBLE
        return SdpStatus.MAX_ITERATIONS

    def _infeasible(self, problem, reason):
        logger.debug("Infeasible problem: {}".format(reason))
        return SdpSolution(
            X=None,
            objective_value=float("nan"),
            primal_residual=float("inf"),
            duality_gap=float("nan"),
            status=SdpStatus.INFEASIBLE,
            info={"reason": str(reason)},
        )

    def _finish(self, problem, red, y, status, objective, dual_bound, gap, iterations, info):
        mat = red.point(y)
        mat = hermitize(mat)
        if problem.unit_trace:
            mat = mat / np.trace(mat).real
        mat.flags.writeable = False
        res = problem.residual(mat)
        if status is SdpStatus.OPTIMAL and res > max(self.tol_feas, self.tol_psd) * 10:
            logger.debug("Optimal status with recomputed residual {:.3e}".format(res))
        return SdpSolution(
            X=mat,
            objective_value=float(objective(mat)),
            primal_residual=res,
            duality_gap=float(gap),
            status=status,
            dual_bound=float(dual_bound),
            iterations=int(iterations),
            face_dim=red.m,
            free_parameters=red.k,
            info=info,
        )

    def _fixed_point(self, problem, red, objective):
        mat = hermitize(red.point(()))
        _min = float(np.linalg.eigvalsh(mat)[0])
        if _min < -self.tol_psd * max(1.0, red.m):
            return self._infeasible(problem, "unique point not PSD ({:.3e})".format(_min))
        for b, lo, hi in problem.intervals:
            val = np.real(np.sum(b * mat.T))
            if val < lo - self.tol_feas or val > hi + self.tol_feas:
                return self._infeasible(problem, "unique point violates an interval")
        value = objective(mat)
        return self._finish(problem, red, (), SdpStatus.OPTIMAL, objective, value, 0.0, 0, {})

    def _run_sdp(self, red, c):
        gs, hs = self._lmi(red)
        kwargs = {"Gs": [_cvx(gs)], "hs": [_cvx(hs)], "options": self.options}
        if red.gl.shape[0]:
            kwargs["Gl"] = _cvx(red.gl)
            kwargs["hl"] = _cvx(red.hl)
        return _call(cvx_solvers.sdp, _cvx(c), **kwargs)

    def _initial_y(self, red, initial):
        if initial is None or red.k == 0:
            return None
        v = red.coordinates(as_matrix(initial))
        return red.null.T @ (v - red.v0)

    def solve_linear(self, problem):
        """
        Minimize tr(C X) over the problem's feasible set.

        :param problem: SdpProblem with an objective
        :return: SdpSolution
        """
        return self._solve_linear(problem, shortcut=True)

    def _solve_linear(self, problem, shortcut):
        if problem.objective is None:
            raise ValueError("solve_linear needs an objective")

        def _objective(mat):
            return np.real(np.sum(problem.objective * mat.T))

        try:
            red = self._reduce(problem)
        except _Infeasible as err:
            return self._infeasible(problem, err)

        if red.k == 0:
            return self._fixed_point(problem, red, _objective)

        c_full = red.coordinates(problem.objective)
        const = float(c_full @ red.v0)
        c = red.null.T @ c_full

        if shortcut and np.max(np.abs(c)) < 1e-13 * max(1.0, float(np.max(np.abs(c_full)))):
            # objective constant on the feasible set
            _sol = self.solve_min_purity(problem)
            if _sol.X is None:
                return _sol
            value = float(_objective(_sol.X))
            return replace(_sol, objective_value=value, dual_bound=value, duality_gap=0.0)

        sol = self._run_sdp(red, c)
        status = self._status(sol)
        logger.debug(
            "SDP d={} face={} k={} status={} iterations={} gap={}".format(
                problem.dim, red.m, red.k, sol.get("status"), sol.get("iterations"), sol.get("gap")
            )
        )
        if status is SdpStatus.INFEASIBLE:
            return self._infeasible(problem, "interior point solver: {}".format(sol.get("status")))
        if sol.get("x") is None:
            return SdpSolution(
                X=None,
                objective_value=float("nan"),
                primal_residual=float("inf"),
                duality_gap=float("nan"),
                status=SdpStatus.MAX_ITERATIONS,
                face_dim=red.m,
                free_parameters=red.k,
            )

        y = np.array(sol["x"]).ravel()
        _dual = sol.get("dual objective")
        dual_bound = const + _dual if _dual is not None else float("nan")
        _gap = sol.get("gap")
        return self._finish(
            problem,
            red,
            y,
            status,
            _objective,
            dual_bound,
            _gap if _gap is not None else float("nan"),
            sol.get("iterations", 0),
            {"solver_status": sol.get("status")},
        )

    def check_feasible(self, problem):
        """Feasibility of a constraint set, returns an SdpSolution."""
        d = problem.dim
        return self._solve_linear(problem.with_objective(np.zeros((d, d))), shortcut=False)

    def solve_min_purity(self, problem, initial=None):
        """
        Minimize tr(X^2) over the problem's feasible set. The objective of
        the problem, if any, is ignored.

        :return: SdpSolution with objective_value = tr(X^2)
        """
        problem = problem.without_objective()

        def _purity(mat):
            return np.real(np.sum(mat * mat.T))

        try:
            red = self._reduce(problem)
        except _Infeasible as err:
            return self._infeasible(problem, err)

        if red.k == 0:
            return self._fixed_point(problem, red, _purity)

        gs, hs = self._lmi(red)
        n_l = red.gl.shape[0]
        g = np.vstack([red.gl, gs]) if n_l else gs
        h = np.concatenate([red.hl, hs.ravel(order="F")]) if n_l else hs.ravel(order="F")
        dims = {"l": n_l, "q": [], "s": [2 * red.m]}

        # ||v0 + N y||^2 with v0 orthogonal to range(N)
        p = 2.0 * np.eye(red.k)
        q = 2.0 * (red.null.T @ red.v0)
        const = float(red.v0 @ red.v0)

        kwargs = {"options": self.options}
        y0 = self._initial_y(red, initial)
        if y0 is not None:
            kwargs["initvals"] = {"x": _cvx(y0)}

        sol = _call(cvx_solvers.coneqp, _cvx(p), _cvx(q), _cvx(g), _cvx(h), dims, **kwargs)
        status = self._status(sol)
        logger.debug(
            "Purity QP d={} face={} k={} status={} iterations={}".format(
                problem.dim, red.m, red.k, sol.get("status"), sol.get("iterations")
            )
        )

        if status is not SdpStatus.OPTIMAL:
            # coneqp does not detect infeasibility, ask the SDP path
            _feas = self.check_feasible(problem)
            if _feas.status is SdpStatus.INFEASIBLE:
                return _feas
            if sol.get("x") is None:
                _val = _purity(_feas.X) if _feas.X is not None else float("nan")
                return replace(_feas, status=SdpStatus.MAX_ITERATIONS, objective_value=_val)

        y = np.array(sol["x"]).ravel()
        _dual = sol.get("dual objective")
        _gap = sol.get("gap")
        return self._finish(
            problem,
            red,
            y,
            status,
            _purity,
            const + _dual if _dual is not None else float("nan"),
            _gap if _gap is not None else float("nan"),
            sol.get("iterations", 0),
            {"solver_status": sol.get("status")},
        )


def solve_linear(problem, solver=None):
    return (solver or SdpSolver()).solve_linear(problem)


def solve_min_purity(problem, solver=None, initial=None):
    return (solver or SdpSolver()).solve_min_purity(problem, initial=initial)


__all__ = [
    "SdpProblem",
    "SdpSolution",
    "SdpSolver",
    "SdpStatus",
    "embed_complex",
    "solve_linear",
    "solve_min_purity",
]
