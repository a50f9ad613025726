import enum
import logging
from dataclasses import dataclass

import numpy as np

from ergocert import DEGENERACY_TOL
from ergocert import HERMITIAN_TOL
from ergocert import PSD_TOL
from ergocert import TRACE_TOL
from ergocert.exception import ConfigurationError
from ergocert.exception import DegenerateExtremalLevels
from ergocert.exception import DimensionMismatch
from ergocert.exception import InvalidState
from ergocert.exception import MissingHamiltonian
from ergocert.util import as_matrix
from ergocert.util import hermitian_deviation
from ergocert.util import hermitize
from ergocert.util import qubit_count

logger = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class DensityMatrix:
    matrix: np.ndarray

    def __post_init__(self):
        mat = np.array(as_matrix(self.matrix), dtype=complex)
        _dev = hermitian_deviation(mat)
        if _dev > HERMITIAN_TOL:
            raise InvalidState("Not Hermitian, deviation {:.3e}".format(_dev))
        mat = hermitize(mat)
        _tr = np.trace(mat).real
        if abs(_tr - 1) > TRACE_TOL:
            raise InvalidState("Trace is {!r}, expected 1".format(_tr))
        _min = float(np.linalg.eigvalsh(mat)[0])
        if _min < -PSD_TOL:
            raise InvalidState("Negative eigenvalue {:.3e}".format(_min))
        mat.flags.writeable = False
        object.__setattr__(self, "matrix", mat)

    @classmethod
    def from_vector(cls, psi):
        psi = np.asarray(psi, dtype=complex)
        psi = psi / np.linalg.norm(psi)
        return cls(np.outer(psi, psi.conj()))

    @classmethod
    def maximally_mixed(cls, d):
        return cls(np.eye(d, dtype=complex) / d)

    @classmethod
    def normalized(cls, mat):
        """Hermitize and renormalize the trace before validation."""
        mat = hermitize(as_matrix(mat))
        return cls(mat / np.trace(mat).real)

    @property
    def dim(self):
        return self.matrix.shape[0]

    @property
    def n_qubits(self):
        return qubit_count(self.dim)

    def purity(self):
        return float(np.real(np.sum(self.matrix * self.matrix.T)))

    def spectrum(self):
        return np.linalg.eigvalsh(self.matrix)

    def bloch_vector(self):
        """(x, y, z) of a qubit state."""
        if self.dim != 2:
            raise DimensionMismatch("Bloch vector needs a qubit, dimension is {}".format(self.dim))
        m = self.matrix
        return np.array([2 * m[0, 1].real, -2 * m[0, 1].imag, (m[0, 0] - m[1, 1]).real])


class StateKind(enum.Enum):
    GHZ = "GHZ"
    W = "W"
    PRODUCT = "PRODUCT"
    GIBBS = "GIBBS"
    EXTREMAL_SUPERPOSITION = "EXTREMAL_SUPERPOSITION"

    @classmethod
    def parse(cls, kind):
        if isinstance(kind, cls):
            return kind
        try:
            return cls[str(kind).upper().replace("-", "_")]
        except KeyError:
            raise ConfigurationError(
                "Unknown state kind '{}', expected one of {}".format(
                    kind, [k.name for k in cls]
                )
            )


def ghz_vector(n):
    psi = np.zeros(2 ** n, dtype=complex)
    psi[0] = psi[-1] = 1 / np.sqrt(2)
    return psi


def w_vector(n):
    psi = np.zeros(2 ** n, dtype=complex)
    # site 1 is the most significant bit
    for site in range(n):
        psi[1 << (n - 1 - site)] = 1 / np.sqrt(n)
    return psi


def product_vector(n):
    psi = np.zeros(2 ** n, dtype=complex)
    psi[0] = 1.0
    return psi


def gibbs_populations(energies, beta):
    """Populations proportional to exp(-beta E_j), beta of either sign."""
    _w = -beta * np.asarray(energies, dtype=float)
    _w = _w - _w.max()
    p = np.exp(_w)
    return p / p.sum()


def _check_extremal(hamiltonian):
    e = hamiltonian.energies
    _scale = max(1.0, float(np.max(np.abs(e))))
    if len(e) < 2:
        return
    if e[1] - e[0] < DEGENERACY_TOL * _scale or e[-1] - e[-2] < DEGENERACY_TOL * _scale:
        raise DegenerateExtremalLevels(
            "Lowest or highest level is degenerate: {} / {}".format(e[:2], e[-2:])
        )


def make_reference_state(kind, hamiltonian=None, n=None, beta=None, weight=1.0):
    """
    Reference true states.

    :param kind: StateKind or its name
    :param hamiltonian: HamiltonianData, required by GIBBS and
        EXTREMAL_SUPERPOSITION
    :param n: Qubit count; inferred from the Hamiltonian when absent
    :param beta: Inverse temperature of GIBBS (k_B = 1), may be negative
    :param weight: s in |E_1> + s |E_d> for EXTREMAL_SUPERPOSITION
    :return: DensityMatrix
    """
    kind = StateKind.parse(kind)

    if hamiltonian is not None:
        _n = qubit_count(hamiltonian.dim)
        if n is None:
            n = _n
        elif 2 ** n != hamiltonian.dim:
            raise DimensionMismatch(
                "{} qubits but Hamiltonian of dimension {}".format(n, hamiltonian.dim)
            )

    if kind in (StateKind.GIBBS, StateKind.EXTREMAL_SUPERPOSITION) and hamiltonian is None:
        raise MissingHamiltonian("{} needs a Hamiltonian".format(kind.name))
    if n is None:
        raise ConfigurationError("Qubit count is required for {}".format(kind.name))

    if kind is StateKind.GHZ:
        return DensityMatrix.from_vector(ghz_vector(n))
    if kind is StateKind.W:
        return DensityMatrix.from_vector(w_vector(n))
    if kind is StateKind.PRODUCT:
        return DensityMatrix.from_vector(product_vector(n))
    if kind is StateKind.GIBBS:
        if beta is None:
            raise ConfigurationError("GIBBS needs beta")
        p = gibbs_populations(hamiltonian.energies, float(beta))
        vecs = hamiltonian.eigenvectors
        return DensityMatrix.normalized((vecs * p) @ vecs.conj().T)

    _check_extremal(hamiltonian)
    psi = hamiltonian.eigenstate(0) + float(weight) * hamiltonian.eigenstate(hamiltonian.dim - 1)
    return DensityMatrix.from_vector(psi)
