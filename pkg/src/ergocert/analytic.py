"""
Closed-form bounds and the constraint sets they belong to.

Qubit convention: H = diag(e0, e1) on the computational basis, so |0>
carries energy e0, and z* = <Z> puts population (1 + z*)/2 on |0>.
"""
import logging
from dataclasses import dataclass
from typing import NamedTuple
from typing import Tuple

import numpy as np

from ergocert.certification import Constraint
from ergocert.certification import FeasibleSetSpec
from ergocert.certification import Provenance
from ergocert.certification import certify
from ergocert.certification import qubit_minimax_oracle
from ergocert.ergotropy import check_distribution
from ergocert.ergotropy import coherent_ergotropy
from ergocert.ergotropy import dephase_incoherent
from ergocert.ergotropy import energy_populations
from ergocert.ergotropy import exact_ergotropy
from ergocert.ergotropy import passive_energy
from ergocert.exception import InvalidSpectrum
from ergocert.exception import LengthMismatch
from ergocert.exception import OutsideBlochBall
from ergocert.model.spin_chain import HamiltonianData
from ergocert.model.state import DensityMatrix
from ergocert.model.state import StateKind
from ergocert.model.state import make_reference_state
from ergocert.pauli import expectation

logger = logging.getLogger(__name__)


def energy_basis_bound(p, energies):
    """
    Tight bound when only energy-basis populations are known:
    sum_i p_i e_i - sum_i p_i(desc) e_i(asc).

    :param p: Populations of the energy levels, in the order of energies
    :param energies: Level energies, ascending
    """
    p = check_distribution(p)
    energies = np.asarray(energies, dtype=float)
    if p.size != energies.size:
        raise LengthMismatch("{} populations for {} levels".format(p.size, energies.size))
    return max(float(np.dot(p, energies)) - passive_energy(p, energies), 0.0)


@dataclass(frozen=True)
class QubitXZInput:
    x_star: float
    z_star: float
    energies: Tuple[float, float] = (-1.0, 1.0)

    def __post_init__(self):
        x, z = float(self.x_star), float(self.z_star)
        if abs(x) > 1 or abs(z) > 1 or x * x + z * z > 1 + 1e-12:
            raise OutsideBlochBall("(x*, z*) = ({}, {}) is outside the Bloch ball".format(x, z))
        e0, e1 = (float(e) for e in self.energies)
        if e0 > e1:
            raise InvalidSpectrum("Energies must satisfy e0 <= e1, got {}".format(self.energies))
        object.__setattr__(self, "x_star", x)
        object.__setattr__(self, "z_star", z)
        object.__setattr__(self, "energies", (e0, e1))

    def midpoint_state(self):
        """The compatible state with <Y> = 0, least pure of the feasible segment."""
        x, z = self.x_star, self.z_star
        return DensityMatrix.normalized(
            np.array([[(1 + z) / 2, x / 2], [x / 2, (1 - z) / 2]], dtype=complex)
        )

    def hamiltonian(self):
        return HamiltonianData.from_energies(self.energies)


class QubitBound(NamedTuple):
    bound: float
    coherent_gain: float


def qubit_xz_bound(inp):
    """
    Certified ergotropy of a qubit from <X> and <Z>.

    The minimum over the compatible segment sits at its midpoint (<Y> = 0),
    giving (e1 - e0)/2 * (sqrt(x*^2 + z*^2) - z*). The gain over the
    populations-only bound is (e1 - e0)/2 * (sqrt(x*^2 + z*^2) - |z*|).
    """
    x, z = inp.x_star, inp.z_star
    e0, e1 = inp.energies
    half_gap = (e1 - e0) / 2
    radius = min(np.hypot(x, z), 1.0)
    bound = half_gap * (radius - z)
    incoherent = energy_basis_bound([(1 + z) / 2, (1 - z) / 2], (e0, e1))
    return QubitBound(float(bound), float(bound - incoherent))


def qubit_xz_spec(inp):
    return FeasibleSetSpec.from_pauli_expectations(["X", "Z"], [inp.x_star, inp.z_star])


def energy_projector_spec(populations, hamiltonian, epsilon=0.0):
    """
    Constraints fixing every energy-level population.

    :param populations: DensityMatrix (populations are read from it) or a
        probability vector in ascending-energy order
    """
    if hasattr(populations, "matrix") or np.ndim(populations) == 2:
        p = energy_populations(populations, hamiltonian)
    else:
        p = check_distribution(populations)
    if p.size != hamiltonian.dim:
        raise LengthMismatch("{} populations for {} levels".format(p.size, hamiltonian.dim))
    return FeasibleSetSpec(
        dim=hamiltonian.dim,
        constraints=[
            Constraint(hamiltonian.projector(j), p[j], epsilon, "E{}".format(j))
            for j in range(hamiltonian.dim)
        ],
        provenance=Provenance.ESTIMATED if epsilon else Provenance.EXACT,
    )


def hamiltonian_term_spec(rho, hamiltonian):
    """
    Exact expectations of the Pauli strings that make up H, which fixes
    the mean energy of the state and nothing it does not need to.
    """
    strings = hamiltonian.decompose().non_identity()
    return FeasibleSetSpec.from_pauli_expectations(
        [p.label for p in strings], [expectation(rho, p) for p in strings]
    )


class ProbeRow(NamedTuple):
    s: float
    exact: float
    incoherent: float
    coherent: float
    term_bound: float
    energy_bound: float


def probe_sweep(hamiltonian, weights, solver=None):
    """
    Bounds for the probe states |E_1> + s |E_d> as s varies: the two-step
    bound from the Hamiltonian's Pauli terms and the energy-basis bound.
    """
    rows = []
    for s in weights:
        rho = make_reference_state(StateKind.EXTREMAL_SUPERPOSITION, hamiltonian, weight=s)
        exact = exact_ergotropy(rho, hamiltonian).value
        incoherent = dephase_incoherent(rho, hamiltonian).incoherent_ergotropy
        term = certify(hamiltonian_term_spec(rho, hamiltonian), hamiltonian, solver=solver)
        rows.append(
            ProbeRow(
                s=float(s),
                exact=exact,
                incoherent=incoherent,
                coherent=coherent_ergotropy(rho, hamiltonian),
                term_bound=term.bound,
                energy_bound=energy_basis_bound(energy_populations(rho, hamiltonian), hamiltonian.energies),
            )
        )
        logger.debug("Probe s={} exact={:.6g} bound={:.6g}".format(s, exact, term.bound))
    return rows


class QubitRow(NamedTuple):
    x_star: float
    z_star: float
    analytic: float
    coherent_gain: float
    sdp: float
    oracle: float


def qubit_sweep(z_star, x_values, energies=(-1.0, 1.0), resolution=2001, solver=None):
    """Closed form, two-step SDP and grid oracle side by side over x*."""
    rows = []
    for x in x_values:
        inp = QubitXZInput(x, z_star, energies)
        res = qubit_xz_bound(inp)
        spec = qubit_xz_spec(inp)
        ham = inp.hamiltonian()
        rows.append(
            QubitRow(
                x_star=inp.x_star,
                z_star=inp.z_star,
                analytic=res.bound,
                coherent_gain=res.coherent_gain,
                sdp=certify(spec, ham, solver=solver).bound,
                oracle=qubit_minimax_oracle(spec, ham, resolution=resolution),
            )
        )
    return rows
