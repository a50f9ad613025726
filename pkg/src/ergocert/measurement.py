"""
Finite statistics: Hoeffding half-widths, simulated shots, coverage
experiments and measurement record files.

Record files are CSV::

    # delta=0.003
    pauli,estimate,shots
    YYYY,0.981,16384
    ...

or JSON, ``{"delta": 0.003, "records": [{"pauli": ..., "estimate": ...,
"shots": ...}, ...]}``. Order is kept and repeated strings stay separate
records.
"""
import csv
import json
import logging
import math
import os
import re
import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from dataclasses import replace
from typing import NamedTuple
from typing import Tuple

import numpy as np

from ergocert.certification import Constraint
from ergocert.certification import FeasibleSetSpec
from ergocert.certification import Provenance
from ergocert.exception import ConfigurationError
from ergocert.exception import DimensionMismatch
from ergocert.exception import EmptyExperimentWarning
from ergocert.exception import EmptyInput
from ergocert.exception import InconsistentRecordWarning
from ergocert.exception import InvalidDelta
from ergocert.exception import InvalidRecord
from ergocert.exception import InvalidSpectrum
from ergocert.exception import ParseError
from ergocert.exception import ZeroShots
from ergocert.pauli import PauliString
from ergocert.pauli import expectation
from ergocert.pauli import parse_pauli
from ergocert.pauli import pauli_matrix
from ergocert.util import as_matrix
from ergocert.util import check_hermitian
from ergocert.util import make_rng

logger = logging.getLogger(__name__)

CSV_HEADER = ("pauli", "estimate", "shots")

# Four-qubit strings in the order they were measured on a GHZ preparation
GHZ_EXPERIMENT_ORDER = (
    "YYYY", "XXXX", "ZXXY", "YZYX", "XZYZ", "ZYZX", "ZYYZ", "YYYY", "ZXXY", "XXXX",
    "YZYX", "ZYZX", "XZYZ", "ZYZY", "ZXXY", "YXZZ", "XYXX", "ZZZZ", "XZXZ", "ZYZX",
    "XXYY", "YZXY", "ZZYX", "XYXX", "YZZZ", "ZZYY", "ZZZY", "YZXY", "XZZY", "ZYYX",
    "YXXX", "ZZYY", "XYZY", "XXZZ", "XZXY", "ZYYX", "YXXZ", "YYXZ", "XZXX", "XXZZ",
    "XXXY", "YZZY", "ZYYY", "YYXZ", "YYXX", "YZZY", "YZXZ", "YXYX", "YXYX", "YZYZ",
    "ZZXZ", "ZXXZ", "XYXZ", "ZXXZ", "ZXZZ", "YZZX", "XZZX", "YZZX", "XYYZ", "XYZZ",
)

_DELTA_RE = re.compile(r"^#\s*delta\s*[=:]\s*(\S+)\s*$", re.IGNORECASE)


def hoeffding_epsilon(N, K, delta):
    """
    Half-width sqrt(2 ln(2K/delta) / N) for which K estimates of
    observables with spectrum in [-1, 1], each from N shots, are all
    within it with probability at least 1 - delta.
    """
    if not 0 < delta < 1:
        raise InvalidDelta("delta must lie in (0, 1), got {}".format(delta))
    if N < 1:
        raise ZeroShots("At least one shot is needed, got {}".format(N))
    if K < 1:
        raise EmptyInput("At least one observable is needed, got K={}".format(K))
    return math.sqrt(2 * math.log(2 * K / delta) / N)


class Rescaled(NamedTuple):
    observable: np.ndarray
    target: float
    factor: float


def rescale_observable(observable, target):
    """
    Map an observable and its value affinely so that the spectrum becomes
    [-1, 1]: O -> (2 O - (l_max + l_min) I) / (l_max - l_min).

    :return: Rescaled(observable, target, factor) with factor the
        multiplier 2 / (l_max - l_min)
    """
    obs = check_hermitian(as_matrix(observable))
    vals = np.linalg.eigvalsh(obs)
    width = float(vals[-1] - vals[0])
    if width <= 0:
        raise InvalidSpectrum("A multiple of the identity cannot be rescaled")
    shift = float(vals[-1] + vals[0])
    factor = 2.0 / width
    _obs = (2 * obs - shift * np.eye(obs.shape[0])) / width
    return Rescaled(_obs, (2 * float(target) - shift) / width, factor)


@dataclass(frozen=True)
class ShotRecord:
    pauli: PauliString
    shots: int
    estimate: float

    def __post_init__(self):
        object.__setattr__(self, "pauli", parse_pauli(self.pauli))
        if int(self.shots) != self.shots:
            raise InvalidRecord("Shot count {} is not an integer".format(self.shots))
        if self.shots < 1:
            raise ZeroShots("Record for {} has {} shots".format(self.pauli, self.shots))
        object.__setattr__(self, "shots", int(self.shots))
        if not -1.0 <= float(self.estimate) <= 1.0:
            raise InvalidRecord("Estimate {} outside [-1, 1]".format(self.estimate))
        object.__setattr__(self, "estimate", float(self.estimate))

    @property
    def plus_count(self):
        return (self.estimate + 1) * self.shots / 2

    def on_lattice(self, tol=1e-6):
        """The implied count of +1 outcomes must be an integer."""
        return abs(self.plus_count - round(self.plus_count)) <= tol / 2


@dataclass(frozen=True)
class ExperimentPlan:
    records: Tuple[ShotRecord, ...]
    delta: float

    def __post_init__(self):
        object.__setattr__(self, "records", tuple(self.records))
        if not 0 < self.delta < 1:
            raise InvalidDelta("delta must lie in (0, 1), got {}".format(self.delta))
        _n = {r.pauli.n for r in self.records}
        if len(_n) > 1:
            raise DimensionMismatch("Records on {} qubit counts".format(sorted(_n)))

    @property
    def K(self):
        return len(self.records)

    @property
    def n(self):
        if not self.records:
            raise EmptyInput("An empty plan has no qubit count")
        return self.records[0].pauli.n

    def epsilons(self, K=None):
        """Per-record half-widths, union bound over K (the plan's size by default)."""
        K = self.K if K is None else K
        return [hoeffding_epsilon(r.shots, K, self.delta) for r in self.records]

    def prefix(self, k):
        return replace(self, records=self.records[:k])


def simulate_shots(rho, pauli, N, seed):
    """
    N single-shot measurements of a Pauli string: the count of +1
    outcomes is Binomial(N, (1 + <P>)/2).
    """
    if N < 1:
        raise ZeroShots("At least one shot is needed, got {}".format(N))
    pauli = parse_pauli(pauli)
    p_plus = min(max((1 + expectation(rho, pauli)) / 2, 0.0), 1.0)
    rng = make_rng(seed)
    n_plus = int(rng.binomial(int(N), p_plus))
    return ShotRecord(pauli, int(N), 2 * n_plus / N - 1)


def simulate_plan(rho, paulis, shots, delta, seed):
    """
    One simulated experiment over a list of strings, drawn in order from a
    single generator.

    :param shots: Shots per string, one value or one per string
    """
    rng = make_rng(seed)
    if np.ndim(shots) == 0:
        shots = [int(shots)] * len(paulis)
    records = [simulate_shots(rho, p, n, rng) for p, n in zip(paulis, shots)]
    return ExperimentPlan(records, delta)


def spec_from_plan(plan, k=None, K=None):
    """
    Interval constraints from the first k records.

    :param K: Observable count of the union bound, the plan's size by
        default so that prefixes give nested sets
    """
    K = plan.K if K is None else K
    records = plan.records if k is None else plan.records[:k]
    if not records:
        raise EmptyInput("No records to build constraints from")
    return FeasibleSetSpec(
        dim=2 ** records[0].pauli.n,
        constraints=[
            Constraint(
                pauli_matrix(r.pauli),
                r.estimate,
                hoeffding_epsilon(r.shots, K, plan.delta),
                r.pauli.label,
            )
            for r in records
        ],
        provenance=Provenance.ESTIMATED,
    )


def _coverage_chunk(args):
    p_plus, shots, eps, truths, seed, indices = args
    failures = 0
    for m in indices:
        rng = make_rng(seed, m)
        est = 2 * rng.binomial(shots, p_plus) / shots - 1
        if np.any(np.abs(est - truths) > eps):
            failures += 1
    return failures


def coverage_rate(rho, plan, M, seed, workers=1):
    """
    Fraction of M simulated repetitions of the plan in which at least one
    estimate misses its true value by more than its half-width.

    Repetition m draws from the generator seeded by (seed, m).
    """
    if M <= 0:
        _msg = "Coverage over zero repetitions is reported as 0"
        logger.warning(_msg)
        warnings.warn(_msg, EmptyExperimentWarning)
        return 0.0

    truths = np.array([expectation(rho, r.pauli) for r in plan.records])
    shots = np.array([r.shots for r in plan.records], dtype=np.int64)
    eps = np.array(plan.epsilons())
    p_plus = np.clip((1 + truths) / 2, 0.0, 1.0)

    workers = max(1, int(workers or 1))
    chunks = [list(range(M))[i::workers] for i in range(workers)]
    jobs = [(p_plus, shots, eps, truths, seed, c) for c in chunks if c]
    if len(jobs) == 1:
        failures = _coverage_chunk(jobs[0])
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            failures = sum(pool.map(_coverage_chunk, jobs))

    rate = failures / M
    logger.info("Coverage: {} of {} repetitions violated, rate {:.4f}".format(failures, M, rate))
    return rate


def _warn_lattice(record, line):
    if not record.on_lattice():
        _msg = "line {}: estimate {} of {} is not a multiple of 2/{}".format(
            line, record.estimate, record.pauli, record.shots
        )
        logger.warning(_msg)
        warnings.warn(_msg, InconsistentRecordWarning)


def _record(pauli, estimate, shots, line):
    try:
        _est = float(estimate)
        _shots = float(shots)
    except (TypeError, ValueError):
        raise ParseError("cannot read estimate {!r} / shots {!r}".format(estimate, shots), line)
    try:
        rec = ShotRecord(str(pauli).strip(), _shots, _est)
    except (InvalidRecord, ZeroShots) as err:
        raise ParseError(str(err), line)
    _warn_lattice(rec, line)
    return rec


def _read_csv(fp):
    delta = None
    records = []
    header_seen = False
    line = 0
    for line, text in enumerate(fp, start=1):
        text = text.strip()
        if not text:
            continue
        if text.startswith("#"):
            _match = _DELTA_RE.match(text)
            if _match:
                try:
                    delta = float(_match.group(1))
                except ValueError:
                    raise ParseError("bad delta {!r}".format(_match.group(1)), line)
            continue

        fields = [f.strip() for f in next(csv.reader([text]))]
        if not header_seen:
            if tuple(f.lower() for f in fields) != CSV_HEADER:
                raise ParseError("expected header '{}'".format(",".join(CSV_HEADER)), line)
            header_seen = True
            continue
        if len(fields) != 3:
            raise ParseError("expected 3 fields, found {}".format(len(fields)), line)
        records.append(_record(fields[0], fields[1], fields[2], line))

    if not records:
        raise ParseError("no records", line)
    return records, delta


def _read_json(fp):
    try:
        data = json.load(fp)
    except json.JSONDecodeError as err:
        raise ParseError(err.msg, err.lineno)

    delta = None
    if isinstance(data, dict):
        delta = data.get("delta")
        data = data.get("records")
    if not isinstance(data, list) or not data:
        raise ParseError("no records", 1)

    records = []
    for idx, item in enumerate(data, start=1):
        if not isinstance(item, dict) or any(k not in item for k in CSV_HEADER):
            raise ParseError("record {} lacks one of {}".format(idx, CSV_HEADER), idx)
        records.append(_record(item["pauli"], item["estimate"], item["shots"], idx))
    return records, delta


def load_records(path, delta=None):
    """
    Read a record file.

    :param path: CSV or JSON file (by extension, .json for JSON)
    :param delta: Overrides the delta of the file header
    :return: ExperimentPlan
    """
    with open(path, "r", encoding="utf-8") as fp:
        if os.path.splitext(str(path))[1].lower() == ".json":
            records, file_delta = _read_json(fp)
        else:
            records, file_delta = _read_csv(fp)

    _n = {r.pauli.n for r in records}
    if len(_n) > 1:
        raise ParseError("Pauli strings of lengths {}".format(sorted(_n)), 0)

    delta = delta if delta is not None else file_delta
    if delta is None:
        raise ConfigurationError("No delta in {} and none given".format(path))
    logger.info("Read {} records from {}".format(len(records), path))
    return ExperimentPlan(records, float(delta))


def write_records(plan, path):
    """Write a plan in the CSV format load_records reads."""
    with open(path, "w", encoding="utf-8", newline="") as fp:
        fp.write("# delta={!r}\n".format(plan.delta))
        writer = csv.writer(fp, lineterminator="\n")
        writer.writerow(CSV_HEADER)
        for r in plan.records:
            writer.writerow([r.pauli.label, repr(r.estimate), r.shots])
