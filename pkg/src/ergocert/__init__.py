import logging

__version__ = "0.3.0"

logger = logging.getLogger(__name__)
logger.addHandler(logging.NullHandler())

# Numerical tolerances shared across modules
HERMITIAN_TOL = 1e-10
TRACE_TOL = 1e-10
PSD_TOL = 1e-9
UNITARY_TOL = 1e-8
DEGENERACY_TOL = 1e-8

# Qubit site 1 is the leftmost letter of a Pauli label and the most
# significant tensor factor.
MAX_QUBITS = 6
DEFAULT_SWEEP_QUBITS = 3
SLOW_SWEEP_QUBITS = 5

SCHEMA_VERSION = 1
