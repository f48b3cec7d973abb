"""Two-qubit Zeno error prevention: simulation and closed-form analysis."""
from .analytics import delta_continuum, delta_discrete, error_budget, qubit_overhead
from .circuits import build_gates, codespace, computation_basis, decode, efficiency, encode
from .noise import DissipationSpec, DriveSpec, SpectralDensity, build_hamiltonian, discretize_bath, qubit_operator
from .zeno import ProtocolSetup, ZenoConfig, run_protocol, zeno_scaling_experiment

__version__ = "0.1.0"

__all__ = [
    "DissipationSpec",
    "DriveSpec",
    "ProtocolSetup",
    "SpectralDensity",
    "ZenoConfig",
    "build_gates",
    "build_hamiltonian",
    "codespace",
    "computation_basis",
    "decode",
    "delta_continuum",
    "delta_discrete",
    "discretize_bath",
    "efficiency",
    "encode",
    "error_budget",
    "qubit_operator",
    "qubit_overhead",
    "run_protocol",
    "zeno_scaling_experiment",
]
