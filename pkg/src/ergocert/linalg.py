"""
Dense Hermitian linear algebra with reproducible conventions.

Eigenvectors returned by :func:`eigendecompose_hermitian` follow one
convention everywhere:

* eigenvalues ascending;
* inside an exactly degenerate block the basis is obtained by
  Gram-Schmidt on the columns of the block projector, taken in index
  order, so it depends only on the eigenspace;
* each vector is rotated so that its largest-magnitude component (lowest
  index on ties) is real and positive.
"""
import logging
from functools import lru_cache

import numpy as np
import scipy.linalg
from scipy.stats import unitary_group

from ergocert import HERMITIAN_TOL
from ergocert.exception import ConvergenceFailure
from ergocert.util import as_matrix
from ergocert.util import check_hermitian
from ergocert.util import make_rng

logger = logging.getLogger(__name__)

# Relative eigenvalue separation below which levels are treated as one block
BLOCK_TOL = 1e-10
# Magnitudes closer than this count as a tie in the phase convention
PHASE_TIE_TOL = 1e-12


def _fix_phase(vec):
    _abs = np.abs(vec)
    k = int(np.argmax(_abs >= _abs.max() - PHASE_TIE_TOL))
    if _abs[k] == 0:
        return vec
    return vec * (np.conj(vec[k]) / _abs[k])


def _canonical_block(vecs):
    """
    Canonical orthonormal basis of the span of vecs (d x m), independent
    of the basis LAPACK happened to return.
    """
    d, m = vecs.shape
    proj = vecs @ vecs.conj().T
    basis = []
    for k in range(d):
        v = proj[:, k].copy()
        for b in basis:
            v = v - b * np.vdot(b, v)
        _norm = np.linalg.norm(v)
        if _norm > 1e-6:
            basis.append(v / _norm)
        if len(basis) == m:
            break
    return np.column_stack(basis)


def eigendecompose_hermitian(mat, tol=HERMITIAN_TOL):
    """
    Eigen-decomposition of a Hermitian matrix.

    :param mat: Hermitian matrix (array or object with a ``matrix``)
    :param tol: Hermiticity tolerance
    :return: (ascending eigenvalues, orthonormal eigenvectors as columns)
    """
    mat = check_hermitian(mat, tol)

    try:
        vals, vecs = scipy.linalg.eigh(mat)
    except (np.linalg.LinAlgError, scipy.linalg.LinAlgError) as err:
        raise ConvergenceFailure("Eigen-decomposition did not converge: {}".format(err))

    vecs = np.asarray(vecs, dtype=complex)
    d = len(vals)
    _scale = max(1.0, float(np.max(np.abs(vals)))) if d else 1.0

    start = 0
    while start < d:
        stop = start + 1
        while stop < d and vals[stop] - vals[start] <= BLOCK_TOL * _scale:
            stop += 1
        if stop - start > 1:
            vecs[:, start:stop] = _canonical_block(vecs[:, start:stop])
            _mean = float(np.mean(vals[start:stop]))
            vals[start:stop] = _mean
        start = stop

    for j in range(d):
        vecs[:, j] = _fix_phase(vecs[:, j])

    return np.asarray(vals, dtype=float), vecs


def degenerate_gaps(values, tol):
    """Indices j where values[j+1] - values[j] is below tol."""
    _diff = np.diff(np.asarray(values))
    return [int(j) for j in np.flatnonzero(np.abs(_diff) < tol)]


def embed_complex(mat):
    """
    Real symmetric embedding [[R, -S], [S, R]] of M = R + iS.
    The embedding is PSD iff M is, with every eigenvalue doubled in
    multiplicity.
    """
    mat = check_hermitian(mat)
    _re = mat.real
    _im = mat.imag
    return np.block([[_re, -_im], [_im, _re]])


@lru_cache(maxsize=64)
def _hermitian_basis(d):
    basis = []
    for j in range(d):
        b = np.zeros((d, d), dtype=complex)
        b[j, j] = 1.0
        basis.append(b)
    _r2 = 1 / np.sqrt(2)
    for j in range(d):
        for k in range(j + 1, d):
            b = np.zeros((d, d), dtype=complex)
            b[j, k] = b[k, j] = _r2
            basis.append(b)
            b = np.zeros((d, d), dtype=complex)
            b[j, k] = -1j * _r2
            b[k, j] = 1j * _r2
            basis.append(b)
    res = np.array(basis)
    res.flags.writeable = False
    return res


def hermitian_basis(d):
    """
    Orthonormal basis of the d x d Hermitian matrices under the
    Hilbert-Schmidt inner product, as an array of shape (d*d, d, d).
    """
    return _hermitian_basis(int(d))


def to_coordinates(mat):
    """Real coordinates v with M = sum_k v_k B_k."""
    mat = as_matrix(mat)
    basis = hermitian_basis(mat.shape[0])
    # tr(M B_k) with B_k Hermitian
    return np.real(np.einsum("ij,kji->k", mat, basis))


def from_coordinates(vec, d):
    basis = hermitian_basis(d)
    return np.einsum("k,kij->ij", np.asarray(vec, dtype=float), basis)


def project_to_density(mat):
    """
    Nearest-by-clipping density matrix: negative eigenvalues are set to
    zero and the trace renormalized.
    """
    vals, vecs = eigendecompose_hermitian(mat, tol=1e-6)
    vals = np.clip(vals, 0.0, None)
    if vals.sum() <= 0:
        vals = np.ones_like(vals)
    vals = vals / vals.sum()
    return (vecs * vals) @ vecs.conj().T


def is_unitary(mat, tol):
    mat = as_matrix(mat)
    _dev = mat.conj().T @ mat - np.eye(mat.shape[0])
    return float(np.linalg.norm(_dev, 2)) <= tol


def haar_unitaries(d, size, seed):
    """size Haar-random d x d unitaries, shape (size, d, d)."""
    rng = make_rng(seed)
    res = unitary_group.rvs(d, size=size, random_state=rng)
    return np.asarray(res).reshape(size, d, d)


def random_hermitian(d, seed, scale=1.0):
    rng = make_rng(seed)
    a = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
    return scale * (a + a.conj().T) / 2


def random_density_matrix(d, seed, rank=None):
    """Random state from the Ginibre ensemble of the given rank."""
    rng = make_rng(seed)
    rank = d if rank is None else rank
    g = rng.normal(size=(d, rank)) + 1j * rng.normal(size=(d, rank))
    rho = g @ g.conj().T
    return rho / np.trace(rho).real
