from ergocert.model.spin_chain import PRESETS
from ergocert.model.spin_chain import HamiltonianData
from ergocert.model.spin_chain import SpinChainParams
from ergocert.model.spin_chain import build_spin_chain
from ergocert.model.state import DensityMatrix
from ergocert.model.state import StateKind
from ergocert.model.state import make_reference_state

__all__ = [
    "PRESETS",
    "HamiltonianData",
    "SpinChainParams",
    "build_spin_chain",
    "DensityMatrix",
    "StateKind",
    "make_reference_state",
]
