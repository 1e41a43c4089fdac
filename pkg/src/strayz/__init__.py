"""Stray-coupling analysis for small superconducting-qubit lattices."""

__version__ = "0.1.0"

from .circuit import (
    CircuitSpec,
    CouplerSpec,
    CouplingGraph,
    DriveSpec,
    QubitSpec,
    load_circuit,
    preset_circuit,
    save_circuit,
)
from .errors import (
    DimensionLimitError,
    FitError,
    HybridizationError,
    MissingStateError,
    ResonanceError,
    StrayzError,
    ValidationError,
)
from .fock import (
    HamiltonianMatrix,
    build_full_hamiltonian,
    build_rwa_hamiltonian,
    sector_hamiltonian,
    truncation_report,
)
from .paulis import PauliCoefficients, pauli_decompose, pauli_from_energies

__all__ = [name for name in dir() if not name.startswith("_")]
