"""
Open-boundary spin chains

    H = - J1 sum_i X_i X_{i+1} - J2 sum_i X_i X_{i+2} - B sum_i Z_i
        - G sum_i X_i - Jy sum_i Y_i Y_{i+1} - Delta sum_i Z_i Z_{i+1}

and the eigen-decomposed Hamiltonian container every other module uses.
"""
import logging
from dataclasses import asdict
from dataclasses import dataclass

import numpy as np

from ergocert import MAX_QUBITS
from ergocert.exception import ConfigurationError
from ergocert.exception import DimensionTooLarge
from ergocert.linalg import eigendecompose_hermitian
from ergocert.pauli import PauliString
from ergocert.pauli import pauli_decompose
from ergocert.pauli import pauli_matrix
from ergocert.util import as_matrix
from ergocert.util import check_hermitian

logger = logging.getLogger(__name__)

COUPLINGS = ("J1", "J2", "B", "G", "Jy", "Delta")

# Couplings a preset leaves free; everything else is pinned.
# XXZ additionally ties Jy to J1.
PRESETS = {
    "ANNNI": ("J1", "J2", "B"),
    "XXZ": ("J1", "Delta", "B"),
    "MFI": ("B", "G", "Delta"),
    "GENERAL": COUPLINGS,
}


@dataclass(frozen=True)
class SpinChainParams:
    n: int
    J1: float = 0.0
    J2: float = 0.0
    B: float = 0.0
    G: float = 0.0
    Jy: float = 0.0
    Delta: float = 0.0

    def __post_init__(self):
        if int(self.n) != self.n or self.n < 2:
            raise ConfigurationError("A spin chain needs n >= 2 sites, got {}".format(self.n))

    @classmethod
    def from_preset(cls, preset, n, **couplings):
        """
        Build parameters for a named model.

        :param preset: ANNNI, XXZ, MFI or GENERAL
        :param n: Number of sites
        :param couplings: Values for the couplings the preset leaves free
        """
        _name = str(preset).upper()
        try:
            free = PRESETS[_name]
        except KeyError:
            raise ConfigurationError(
                "Unknown preset '{}', expected one of {}".format(preset, sorted(PRESETS))
            )

        _extra = [k for k, v in couplings.items() if k not in free and v]
        if _extra and not (_name == "XXZ" and set(_extra) == {"Jy"}):
            raise ConfigurationError(
                "Couplings {} are pinned to zero by the {} preset".format(_extra, _name)
            )

        kwargs = {k: float(couplings.get(k, 0.0)) for k in free}
        if _name == "XXZ":
            if "Jy" in couplings and float(couplings["Jy"]) != kwargs["J1"]:
                raise ConfigurationError("XXZ requires Jy = J1")
            kwargs["Jy"] = kwargs["J1"]
        return cls(n=int(n), **kwargs)

    def couplings(self):
        res = asdict(self)
        del res["n"]
        return res

    def scaled(self, **factors):
        kwargs = self.couplings()
        for key, fac in factors.items():
            kwargs[key] = kwargs[key] * fac
        return SpinChainParams(n=self.n, **kwargs)


@dataclass(frozen=True, eq=False)
class HamiltonianData:
    matrix: np.ndarray
    energies: np.ndarray
    eigenvectors: np.ndarray

    @classmethod
    def from_matrix(cls, mat):
        mat = check_hermitian(as_matrix(mat))
        if np.max(np.abs(mat.imag), initial=0.0) == 0.0:
            mat = np.ascontiguousarray(mat.real)
        energies, vecs = eigendecompose_hermitian(mat)
        for arr in (mat, energies, vecs):
            arr.flags.writeable = False
        return cls(matrix=mat, energies=energies, eigenvectors=vecs)

    @classmethod
    def from_energies(cls, energies):
        """Diagonal Hamiltonian with the given levels on the computational basis."""
        return cls.from_matrix(np.diag(np.asarray(energies, dtype=float)))

    @property
    def dim(self):
        return self.matrix.shape[0]

    @property
    def ground_energy(self):
        return float(self.energies[0])

    @property
    def max_energy(self):
        return float(self.energies[-1])

    def eigenstate(self, j):
        return self.eigenvectors[:, j]

    def projector(self, j):
        v = self.eigenvectors[:, j]
        return np.outer(v, v.conj())

    def mean_energy(self, rho):
        return float(np.real(np.trace(self.matrix @ as_matrix(rho))))

    def decompose(self):
        return pauli_decompose(self.matrix)


def _site_string(n, letters):
    _sym = ["I"] * n
    for site, letter in letters.items():
        _sym[site] = letter
    return PauliString("".join(_sym))


def spin_chain_terms(params):
    """
    The Pauli strings and coefficients of the chain, sites 0-based with
    site 0 the leftmost factor.

    :return: list of (PauliString, coefficient) with non-zero coefficients
    """
    n = params.n
    terms = []

    def _add(coef, letters):
        if coef:
            terms.append((_site_string(n, letters), -float(coef)))

    for i in range(n - 1):
        _add(params.J1, {i: "X", i + 1: "X"})
    for i in range(n - 2):
        _add(params.J2, {i: "X", i + 2: "X"})
    for i in range(n):
        _add(params.B, {i: "Z"})
    for i in range(n):
        _add(params.G, {i: "X"})
    for i in range(n - 1):
        _add(params.Jy, {i: "Y", i + 1: "Y"})
    for i in range(n - 1):
        _add(params.Delta, {i: "Z", i + 1: "Z"})
    return terms


def build_spin_chain(params, max_qubits=MAX_QUBITS):
    """
    Assemble and diagonalize the open-boundary chain.

    :param params: SpinChainParams
    :param max_qubits: Largest permitted chain length
    :return: HamiltonianData
    """
    if params.n > max_qubits:
        raise DimensionTooLarge(
            "{} sites exceeds the configured maximum of {}".format(params.n, max_qubits)
        )

    d = 2 ** params.n
    mat = np.zeros((d, d), dtype=complex)
    for p, coef in spin_chain_terms(params):
        mat = mat + coef * pauli_matrix(p, max_qubits=max_qubits)

    logger.debug("Built {}-site chain with couplings {}".format(params.n, params.couplings()))
    return HamiltonianData.from_matrix(mat)
