"""
Experiment sweeps over the number of measured observables.

Output files are CSV with ``#``-prefixed provenance lines::

    # schema=1
    # version=v0.3.0
    # config={...}
    # seeds=base:7 realizations:0-19
    K,median,q25,q75,exact,feasibility_failures,solver_failures
    1,0,0,0,1.5,0,0

Quartiles use linear interpolation between order statistics (numpy's
default ``linear`` method).
"""
import json
import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict
from dataclasses import dataclass
from dataclasses import field
from typing import List
from typing import Mapping
from typing import NamedTuple
from typing import Optional

import numpy as np

from ergocert import DEFAULT_SWEEP_QUBITS
from ergocert import SCHEMA_VERSION
from ergocert import SLOW_SWEEP_QUBITS
from ergocert.certification import FeasibleSetSpec
from ergocert.certification import MonotoneSession
from ergocert.certification import certify
from ergocert.certification import certify_monotone
from ergocert.certification import make_objective
from ergocert.ergotropy import exact_ergotropy
from ergocert.exception import ConfigurationError
from ergocert.exception import DimensionMismatch
from ergocert.exception import DimensionTooLarge
from ergocert.exception import EmptyInput
from ergocert.exception import InfeasibleSet
from ergocert.exception import SolverFailure
from ergocert.measurement import load_records
from ergocert.measurement import simulate_plan
from ergocert.measurement import spec_from_plan
from ergocert.model.spin_chain import SpinChainParams
from ergocert.model.spin_chain import build_spin_chain
from ergocert.model.state import make_reference_state
from ergocert.pauli import expectation
from ergocert.pauli import hierarchical_order
from ergocert.sdp import SdpSolver
from ergocert.util import describe_version
from ergocert.util import seed_sequence

logger = logging.getLogger(__name__)

SWEEP_COLUMNS = ("K", "median", "q25", "q75", "exact", "feasibility_failures", "solver_failures")
CERTIFY_FILE_COLUMNS = ("K", "bound", "unitary_updated", "infeasible", "advice")


@dataclass(frozen=True)
class SweepConfig:
    preset: str
    state: str
    couplings: Mapping[str, float] = field(default_factory=dict)
    n: int = DEFAULT_SWEEP_QUBITS
    realizations: int = 20
    seed: int = 0
    shots: Optional[int] = None
    delta: Optional[float] = None
    objective: str = "min_purity"
    monotone: bool = False
    beta: Optional[float] = None
    weight: float = 1.0
    workers: int = 1
    allow_slow: bool = False

    def __post_init__(self):
        if self.realizations < 1:
            raise ConfigurationError("At least one realization is needed")
        if (self.shots is None) != (self.delta is None):
            raise ConfigurationError("shots and delta go together")
        if self.shots is not None and self.shots < 1:
            raise ConfigurationError("shots must be positive")
        _limit = SLOW_SWEEP_QUBITS if self.allow_slow else DEFAULT_SWEEP_QUBITS
        if self.n > _limit:
            raise DimensionTooLarge(
                "Sweeps over {} qubits need {}".format(
                    self.n, "n <= {}".format(SLOW_SWEEP_QUBITS) if self.allow_slow else "--allow-slow"
                )
            )
        object.__setattr__(self, "couplings", dict(self.couplings))

    @classmethod
    def from_conf(cls, conf):
        """
        :param conf: Full configuration dict with 'hamiltonian', 'state',
            'sweep' and 'certification' sections
        """
        _ham = conf.get("hamiltonian", {})
        _state = conf.get("state", {})
        _sweep = conf.get("sweep", {})
        kwargs = {
            "preset": _ham.get("preset", "GENERAL"),
            "couplings": _ham.get("couplings", {}),
            "n": _ham.get("n", DEFAULT_SWEEP_QUBITS),
            "state": _state.get("kind", "GHZ"),
            "beta": _state.get("beta"),
            "weight": _state.get("weight", 1.0),
            "objective": conf.get("certification", {}).get("objective", "min_purity"),
            "allow_slow": conf.get("allow_slow", False),
        }
        for key in ["realizations", "seed", "shots", "delta", "monotone", "workers"]:
            if _sweep.get(key) is not None:
                kwargs[key] = _sweep[key]
        return cls(**kwargs)

    def params(self):
        return SpinChainParams.from_preset(self.preset, self.n, **self.couplings)

    def to_dict(self):
        return asdict(self)


class SweepRow(NamedTuple):
    K: int
    median: float
    q25: float
    q75: float
    exact: float
    feasibility_failures: int
    solver_failures: int = 0


def aggregate_median_iqr(values):
    """
    :return: (median, 25th percentile, 75th percentile), linear interpolation
    """
    values = np.asarray(list(values), dtype=float)
    if values.size == 0:
        raise EmptyInput("Nothing to aggregate")
    median, q25, q75 = np.percentile(values, [50, 25, 75])
    return float(median), float(q25), float(q75)


def _format(value):
    if value is None:
        return ""
    if isinstance(value, (bool, np.bool_)):
        return str(int(value))
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if np.isnan(value):
        return "nan"
    return "{:.12g}".format(value)


def write_csv(path, header, columns, rows, footer=()):
    with open(path, "w", encoding="utf-8", newline="") as fp:
        for line in header:
            fp.write("# {}\n".format(line))
        fp.write(",".join(columns) + "\n")
        for row in rows:
            fp.write(",".join(_format(v) for v in row) + "\n")
        for line in footer:
            fp.write("# {}\n".format(line))


def default_k_list(n):
    return list(range(1, 4 ** n))


def _check_k_list(k_list, n):
    k_list = sorted({int(k) for k in k_list})
    if not k_list:
        raise EmptyInput("No K values to sweep")
    if k_list[0] < 1 or k_list[-1] > 4 ** n - 1:
        raise ConfigurationError("K must lie in [1, {}]".format(4 ** n - 1))
    return k_list


def _realization(args):
    """
    One realization: the bound at every K, or in its place the class of
    the error (InfeasibleSet or SolverFailure) that stopped that K.
    """
    config, k_list, index, solver = args
    ham = build_spin_chain(config.params())
    rho = make_reference_state(config.state, ham, beta=config.beta, weight=config.weight)
    objective = make_objective(config.objective, hamiltonian=ham)

    order = hierarchical_order(config.n, seed_sequence(config.seed, index))[: k_list[-1]]
    if config.shots is not None:
        plan = simulate_plan(rho, order, config.shots, config.delta, seed_sequence(config.seed, index, 1))
    else:
        targets = [expectation(rho, p) for p in order]

    session = MonotoneSession()
    res = []
    for k in k_list:
        if config.shots is not None:
            spec = spec_from_plan(plan, k)
        else:
            spec = FeasibleSetSpec.from_pauli_expectations(order[:k], targets[:k])
        try:
            if config.monotone:
                session, result = certify_monotone(
                    session, spec, ham, objective=objective, solver=solver, advice=False
                )
            else:
                result = certify(spec, ham, objective=objective, solver=solver, advice=False)
        except InfeasibleSet:
            logger.info("Realization {} infeasible at K={}".format(index, k))
            res.append(InfeasibleSet)
            continue
        except SolverFailure as err:
            logger.warning("Realization {} at K={}: {}".format(index, k, err))
            res.append(SolverFailure)
            continue
        res.append(result.bound)
    return res


def run_sweep(config, k_list=None, out=None, solver=None):
    """
    Certified bound against K, aggregated over realizations.

    :param config: SweepConfig
    :param k_list: K values, all of 1 .. 4^n - 1 by default
    :param out: CSV path, nothing written when None
    :param solver: SdpSolver shared by every realization
    :return: list of SweepRow
    """
    k_list = _check_k_list(k_list or default_k_list(config.n), config.n)
    solver = solver or SdpSolver()

    ham = build_spin_chain(config.params())
    rho = make_reference_state(config.state, ham, beta=config.beta, weight=config.weight)
    exact = exact_ergotropy(rho, ham).value
    logger.info("Sweep over {} K values, exact ergotropy {:.6g}".format(len(k_list), exact))

    jobs = [(config, k_list, r, solver) for r in range(config.realizations)]
    if config.workers > 1:
        with ProcessPoolExecutor(max_workers=config.workers) as pool:
            per_realization = list(pool.map(_realization, jobs))
    else:
        per_realization = [_realization(job) for job in jobs]

    rows = []
    for idx, k in enumerate(k_list):
        outcomes = [res[idx] for res in per_realization]
        values = [v for v in outcomes if isinstance(v, float)]
        infeasible = sum(1 for v in outcomes if v is InfeasibleSet)
        stalled = sum(1 for v in outcomes if v is SolverFailure)
        if values:
            median, q25, q75 = aggregate_median_iqr(values)
        else:
            median = q25 = q75 = float("nan")
        rows.append(SweepRow(k, median, q25, q75, exact, infeasible, stalled))

    if out:
        write_csv(
            out,
            [
                "schema={}".format(SCHEMA_VERSION),
                "version={}".format(describe_version()),
                "config={}".format(json.dumps(config.to_dict(), sort_keys=True)),
                "seeds=base:{} realizations:0-{}".format(config.seed, config.realizations - 1),
                "k_list={}".format(",".join(str(k) for k in k_list)),
            ],
            SWEEP_COLUMNS,
            rows,
        )
        logger.info("Wrote {}".format(out))
    return rows


class CertifyFileRow(NamedTuple):
    K: int
    bound: float
    unitary_updated: bool
    infeasible: bool
    advice: Optional[float]


class CertifyFileSummary(NamedTuple):
    rows: List[CertifyFileRow]
    best_bound: float
    last_update_K: Optional[int]
    infeasible_count: int
    delta: float


def run_certify_file(records, hamiltonian, delta=None, monotone=True, out=None, objective=None, solver=None):
    """
    Feed growing prefixes of a record file through the protocol.

    Every prefix uses the half-widths of the whole file. An infeasible
    prefix keeps the previous bound and records the widening advice.

    :param records: Path of a record file
    :param hamiltonian: HamiltonianData matching the record length
    :param delta: Overrides the file's delta
    :param monotone: Conditional unitary updates
    :return: CertifyFileSummary
    """
    solver = solver or SdpSolver()
    plan = load_records(records, delta=delta)
    if 2 ** plan.n != hamiltonian.dim:
        raise DimensionMismatch(
            "{}-qubit records for a Hamiltonian of dimension {}".format(plan.n, hamiltonian.dim)
        )

    session = MonotoneSession()
    bound = 0.0
    last_update = None
    rows = []
    for k in range(1, plan.K + 1):
        spec = spec_from_plan(plan, k)
        try:
            if monotone:
                session, result = certify_monotone(session, spec, hamiltonian, objective=objective, solver=solver)
            else:
                result = certify(spec, hamiltonian, objective=objective, solver=solver)
        except InfeasibleSet as err:
            logger.warning("K={} infeasible, widening by {} would restore it".format(k, err.advice))
            rows.append(CertifyFileRow(k, bound, False, True, err.advice))
            continue
        updated = bool(result.diagnostics.get("unitary_updated", True))
        if updated:
            last_update = k
        bound = result.bound
        rows.append(CertifyFileRow(k, bound, updated, False, None))

    best = max(r.bound for r in rows)
    infeasible = sum(1 for r in rows if r.infeasible)
    summary = CertifyFileSummary(rows, best, last_update, infeasible, plan.delta)

    if out:
        write_csv(
            out,
            [
                "schema={}".format(SCHEMA_VERSION),
                "version={}".format(describe_version()),
                "records={} K={} delta={!r} monotone={}".format(records, plan.K, plan.delta, monotone),
            ],
            CERTIFY_FILE_COLUMNS,
            rows,
            footer=[
                "best_bound={}".format(_format(best)),
                "last_update_K={}".format(_format(last_update)),
            ],
        )
        logger.info("Wrote {}".format(out))
    return summary
