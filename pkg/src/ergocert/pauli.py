"""
Multiqubit Pauli strings.

Qubit site 1 is the leftmost letter of a label and the most significant
tensor factor, so ``"XZ"`` is ``kron(X, Z)``.
"""
import itertools
import logging
from dataclasses import dataclass
from dataclasses import field
from functools import lru_cache
from functools import reduce
from typing import Mapping

import numpy as np

from ergocert import HERMITIAN_TOL
from ergocert import MAX_QUBITS
from ergocert.exception import DimensionMismatch
from ergocert.exception import DimensionTooLarge
from ergocert.exception import EmptyLabel
from ergocert.exception import InvalidSymbol
from ergocert.exception import NotPowerOfTwoDimension
from ergocert.util import as_matrix
from ergocert.util import check_hermitian
from ergocert.util import is_power_of_two
from ergocert.util import make_rng
from ergocert.util import qubit_count

logger = logging.getLogger(__name__)

PAULI_SYMBOLS = "IXYZ"

SINGLE_QUBIT = {
    "I": np.array([[1, 0], [0, 1]], dtype=complex),
    "X": np.array([[0, 1], [1, 0]], dtype=complex),
    "Y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "Z": np.array([[1, 0], [0, -1]], dtype=complex),
}

for _m in SINGLE_QUBIT.values():
    _m.flags.writeable = False


@dataclass(frozen=True, order=True)
class PauliString:
    symbols: str

    def __post_init__(self):
        if not self.symbols:
            raise EmptyLabel("Pauli label is empty")
        _bad = [c for c in self.symbols if c not in PAULI_SYMBOLS]
        if _bad:
            raise InvalidSymbol(
                "Invalid Pauli symbol(s) {} in '{}'".format(sorted(set(_bad)), self.symbols)
            )

    @property
    def n(self):
        return len(self.symbols)

    @property
    def weight(self):
        return sum(1 for c in self.symbols if c != "I")

    @property
    def label(self):
        return self.symbols

    def is_identity(self):
        return self.weight == 0

    def __str__(self):
        return self.symbols


def parse_pauli(label):
    """
    Parse a Pauli label such as ``"XIZY"``. Lower case is accepted and
    canonicalized, whitespace is not.

    :param label: The label
    :return: A PauliString
    """
    if isinstance(label, PauliString):
        return label
    if label is None or len(label) == 0:
        raise EmptyLabel("Pauli label is empty")
    return PauliString(label.upper())


@lru_cache(maxsize=4096)
def _kron_label(label):
    mat = reduce(np.kron, [SINGLE_QUBIT[c] for c in label])
    mat.flags.writeable = False
    return mat


def pauli_matrix(p, max_qubits=MAX_QUBITS):
    """
    Dense matrix of a Pauli string.

    :param p: PauliString or label
    :param max_qubits: Largest permitted qubit count
    :return: Read-only complex array of dimension 2^n
    """
    p = parse_pauli(p)
    if p.n > max_qubits:
        raise DimensionTooLarge(
            "{} qubits exceeds the configured maximum of {}".format(p.n, max_qubits)
        )
    return _kron_label(p.symbols)


def strings_of_weight(n, weight):
    """All n-qubit strings of a given weight in lexicographic order."""
    res = []
    for sites in itertools.combinations(range(n), weight):
        for letters in itertools.product("XYZ", repeat=weight):
            _sym = ["I"] * n
            for site, letter in zip(sites, letters):
                _sym[site] = letter
            res.append(PauliString("".join(_sym)))
    return sorted(res)


def all_strings(n, include_identity=False):
    res = [PauliString("".join(s)) for s in itertools.product(PAULI_SYMBOLS, repeat=n)]
    if include_identity:
        return res
    return [p for p in res if not p.is_identity()]


def hierarchical_order(n, seed):
    """
    Body-ordered random measurement order: all weight-1 strings in random
    order, then all weight-2 strings in random order, and so on. The
    identity string is left out.

    :param n: Qubit count
    :param seed: Anything :func:`ergocert.util.make_rng` accepts
    :return: list of the 4^n - 1 non-identity PauliStrings
    """
    if n < 1:
        raise ValueError("Need at least one qubit")

    rng = make_rng(seed)
    order = []
    for weight in range(1, n + 1):
        _block = strings_of_weight(n, weight)
        _perm = rng.permutation(len(_block))
        order.extend(_block[i] for i in _perm)
    return order


@dataclass(frozen=True)
class PauliDecomposition:
    n: int
    terms: Mapping[PauliString, float] = field(default_factory=dict)

    def matrix(self):
        d = 2 ** self.n
        res = np.zeros((d, d), dtype=complex)
        for p, coef in self.terms.items():
            res = res + coef * pauli_matrix(p, max_qubits=max(self.n, MAX_QUBITS))
        return res

    def non_identity(self):
        return [p for p in self.terms if not p.is_identity()]

    def __getitem__(self, item):
        return self.terms[parse_pauli(item)]

    def __contains__(self, item):
        return parse_pauli(item) in self.terms

    def __len__(self):
        return len(self.terms)


def pauli_decompose(mat, drop_below=1e-12):
    """
    Expand a Hermitian matrix in the Pauli basis, coefficient of P being
    tr(M P) / 2^n. Coefficients with magnitude below drop_below are left out.

    :param mat: Hermitian matrix of power-of-two dimension
    :return: A PauliDecomposition
    """
    mat = as_matrix(mat)
    d = mat.shape[0]
    if not is_power_of_two(d) or d < 2:
        raise NotPowerOfTwoDimension("Dimension {} is not a power of two".format(d))
    mat = check_hermitian(mat, HERMITIAN_TOL)

    n = qubit_count(d)
    terms = {}
    for p in all_strings(n, include_identity=True):
        # tr(M P) = sum of elementwise product of M and P^T
        coef = np.sum(mat * pauli_matrix(p, max_qubits=max(n, MAX_QUBITS)).T) / d
        if abs(coef.imag) > drop_below:
            logger.debug("Imaginary Pauli coefficient {} for {}".format(coef.imag, p))
        if abs(coef.real) > drop_below:
            terms[p] = float(coef.real)

    return PauliDecomposition(n=n, terms=terms)


def expectation(rho, p):
    """
    Real expectation value tr(rho P).

    :param rho: DensityMatrix or array
    :param p: PauliString or label
    """
    _rho = as_matrix(rho)
    p = parse_pauli(p)
    if _rho.shape[0] != 2 ** p.n:
        raise DimensionMismatch(
            "State of dimension {} and {}-qubit string {}".format(_rho.shape[0], p.n, p)
        )
    val = np.sum(_rho * pauli_matrix(p, max_qubits=max(p.n, MAX_QUBITS)).T)
    if abs(val.imag) > HERMITIAN_TOL:
        logger.debug("Discarding imaginary residue {:.3e} of <{}>".format(val.imag, p))
    return float(np.clip(val.real, -1.0, 1.0))
