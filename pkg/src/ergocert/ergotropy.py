"""
Closed-form ergotropy.

With the state spectrum r_1 >= r_2 >= ... (vectors |r_j>) and the energies
E_1 <= E_2 <= ... (vectors |E_j>), the optimal unitary is
U = sum_j |E_j><r_j| and the ergotropy is tr(rho H) - sum_j r_j E_j.
"""
import logging
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from ergocert import DEGENERACY_TOL
from ergocert import UNITARY_TOL
from ergocert.exception import DimensionMismatch
from ergocert.exception import LengthMismatch
from ergocert.exception import NotADistribution
from ergocert.exception import NotUnitary
from ergocert.linalg import degenerate_gaps
from ergocert.linalg import eigendecompose_hermitian
from ergocert.linalg import is_unitary
from ergocert.model.state import DensityMatrix
from ergocert.util import as_matrix

logger = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class ErgotropyReport:
    value: float
    optimal_unitary: np.ndarray
    passive_state: DensityMatrix
    state_spectrum: np.ndarray
    state_vectors: np.ndarray


class DephasedState(NamedTuple):
    dephased: DensityMatrix
    incoherent_ergotropy: float


def _check_dims(rho, hamiltonian):
    _d = as_matrix(rho).shape[0]
    if _d != hamiltonian.dim:
        raise DimensionMismatch(
            "State of dimension {} and Hamiltonian of dimension {}".format(_d, hamiltonian.dim)
        )


def state_spectrum(rho):
    """
    Descending eigenvalues of a state with matching eigenvectors.
    Degenerate blocks keep the order given by eigendecompose_hermitian,
    reversed.
    """
    vals, vecs = eigendecompose_hermitian(as_matrix(rho), tol=1e-9)
    return vals[::-1].copy(), vecs[:, ::-1].copy()


def optimal_unitary(rho, hamiltonian, log_degeneracy=False):
    """
    U = sum_j |E_j><r_j| for the state's descending spectrum.

    :param log_degeneracy: Log a warning when the state spectrum has
        near-degenerate levels, where the choice of U is convention bound.
    """
    _check_dims(rho, hamiltonian)
    r, vecs = state_spectrum(rho)
    if log_degeneracy:
        _gaps = degenerate_gaps(r, DEGENERACY_TOL)
        if _gaps:
            logger.warning(
                "State spectrum degenerate at positions {}; unitary follows the "
                "eigenvector convention".format(_gaps)
            )
    return hamiltonian.eigenvectors @ vecs.conj().T


def exact_ergotropy(rho, hamiltonian):
    """
    :param rho: DensityMatrix
    :param hamiltonian: HamiltonianData
    :return: ErgotropyReport
    """
    _check_dims(rho, hamiltonian)
    r, vecs = state_spectrum(rho)
    unitary = hamiltonian.eigenvectors @ vecs.conj().T
    mean = hamiltonian.mean_energy(rho)
    passive_energy_ = float(np.dot(r, hamiltonian.energies))
    value = mean - passive_energy_

    e_vecs = hamiltonian.eigenvectors
    passive = DensityMatrix.normalized((e_vecs * np.clip(r, 0.0, None)) @ e_vecs.conj().T)

    for arr in (unitary, r, vecs):
        arr.flags.writeable = False
    return ErgotropyReport(
        value=float(value),
        optimal_unitary=unitary,
        passive_state=passive,
        state_spectrum=r,
        state_vectors=vecs,
    )


def extraction_value(rho, hamiltonian, unitary, tol=UNITARY_TOL):
    """
    Energy extracted by a given unitary: tr(H rho) - tr(H U rho U^dag).
    """
    _check_dims(rho, hamiltonian)
    unitary = as_matrix(unitary)
    if unitary.shape[0] != hamiltonian.dim:
        raise DimensionMismatch("Unitary of dimension {}".format(unitary.shape[0]))
    if not is_unitary(unitary, tol):
        raise NotUnitary("Deviation from unitarity exceeds {:.1e}".format(tol))

    _rho = as_matrix(rho)
    _h = hamiltonian.matrix
    after = unitary @ _rho @ unitary.conj().T
    return float(np.real(np.trace(_h @ _rho)) - np.real(np.trace(_h @ after)))


def energy_populations(rho, hamiltonian):
    """Populations <E_i|rho|E_i> in ascending-energy order."""
    _check_dims(rho, hamiltonian)
    vecs = hamiltonian.eigenvectors
    return np.real(np.einsum("ij,ik,kj->j", vecs.conj(), as_matrix(rho), vecs))


def dephase_incoherent(rho, hamiltonian):
    """
    Dephase in the energy eigenbasis.

    :return: (dephased DensityMatrix, its ergotropy = incoherent ergotropy)
    """
    p = np.clip(energy_populations(rho, hamiltonian), 0.0, None)
    vecs = hamiltonian.eigenvectors
    dephased = DensityMatrix.normalized((vecs * p) @ vecs.conj().T)
    return DephasedState(dephased, exact_ergotropy(dephased, hamiltonian).value)


def coherent_ergotropy(rho, hamiltonian):
    total = exact_ergotropy(rho, hamiltonian).value
    return total - dephase_incoherent(rho, hamiltonian).incoherent_ergotropy


def check_distribution(p, tol=1e-9):
    p = np.asarray(p, dtype=float)
    if p.ndim != 1 or p.size == 0:
        raise NotADistribution("Expected a non-empty vector")
    if np.any(p < -tol) or abs(p.sum() - 1) > tol:
        raise NotADistribution("Not a probability vector: {}".format(p))
    return p


def majorizes(p, q, tol=1e-10):
    """
    True iff every partial sum of p sorted descending dominates the
    corresponding partial sum of q.
    """
    p = check_distribution(p)
    q = check_distribution(q)
    if p.size != q.size:
        raise LengthMismatch("Lengths {} and {}".format(p.size, q.size))
    _p = np.cumsum(np.sort(p)[::-1])
    _q = np.cumsum(np.sort(q)[::-1])
    return bool(np.all(_p >= _q - tol))


def passive_energy(p, energies):
    """sum_i p_i(desc) E_i(asc)"""
    p = np.sort(np.asarray(p, dtype=float))[::-1]
    e = np.sort(np.asarray(energies, dtype=float))
    if p.size != e.size:
        raise LengthMismatch("Lengths {} and {}".format(p.size, e.size))
    return float(np.dot(p, e))
