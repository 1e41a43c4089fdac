"""Pauli strings and the coefficient container.

Normalization: a string ``P`` enters the effective qubit Hamiltonian as
``alpha_P * P / 2**nz(P)`` where ``nz`` counts its Z factors.  For pure-Z
strings this is the familiar 1/2 per qubit weight (Z/2, ZZ/4, ZZZ/8);
the drive-activated strings carry one X and keep the same rule (ZX/2,
ZXZ/4).  Sign convention: ``sigma_z |n> = (1 - 2 n) |n>``, i.e. the
ground state is the +1 eigenstate.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import numpy as np

from . import units
from .errors import MissingStateError, ValidationError

_PAULI_1Q = {
    "I": np.eye(2),
    "X": np.array([[0.0, 1.0], [1.0, 0.0]]),
    "Y": np.array([[0.0, -1.0j], [1.0j, 0.0]]),
    "Z": np.array([[1.0, 0.0], [0.0, -1.0]]),
}


def pauli_matrix(string: str) -> np.ndarray:
    out = np.eye(1)
    for ch in string:
        try:
            out = np.kron(out, _PAULI_1Q[ch])
        except KeyError:
            raise ValidationError(f"invalid Pauli letter {ch!r} in {string!r}") from None
    return out


def normalization(string: str) -> float:
    """Divisor of the string in the effective Hamiltonian (2 per Z factor)."""
    return float(2 ** string.count("Z"))


def weight(string: str) -> int:
    return sum(ch != "I" for ch in string)


@dataclass
class PauliCoefficients:
    """Named Pauli-string strengths in angular units (rad/ns).

    The identity-string entry carries the mean energy offset; it is kept
    but never counted as a stray coupling.
    """

    n_qubits: int
    values: dict[str, float] = field(default_factory=dict)
    imag_residual: float = 0.0

    def get(self, string: str) -> float:
        return self.values.get(string, 0.0)

    def khz(self, string: str) -> float:
        return units.to_khz(self.get(string))

    def mhz(self, string: str) -> float:
        return units.to_mhz(self.get(string))

    def as_khz(self) -> dict[str, float]:
        return {k: units.to_khz(v) for k, v in sorted(self.values.items())}

    def max_stray_z(self, max_weight: int | None = None) -> float:
        """Largest |value| among multi-qubit pure-Z strings (rad/ns)."""
        best = 0.0
        for k, v in self.values.items():
            if set(k) <= {"I", "Z"} and weight(k) >= 2:
                if max_weight is None or weight(k) <= max_weight:
                    best = max(best, abs(v))
        return best


def z_strings(n_qubits: int) -> list[str]:
    """All diagonal strings (I/Z alphabet) ordered by weight then position."""
    out = ["".join(s) for s in itertools.product("IZ", repeat=n_qubits)]
    out.sort(key=lambda s: (weight(s), s))
    return out


def _z_signs(n_qubits: int) -> np.ndarray:
    """(2**n, n) matrix of (1 - 2 n_i) over computational occupations."""
    occ = np.array(list(itertools.product((0, 1), repeat=n_qubits)), dtype=np.float64)
    return 1.0 - 2.0 * occ


def _state_order(n_qubits: int) -> list[tuple[int, ...]]:
    return list(itertools.product((0, 1), repeat=n_qubits))


def pauli_from_energies(energies) -> PauliCoefficients:
    """Diagonal Pauli coefficients from the 2**N dressed computational energies.

    ``energies`` maps occupation tuples to energies (rad/ns).  The
    transform is the Walsh-Hadamard sum with the package normalization,
    e.g. for two qubits ``alpha_ZZ = E00 - E01 - E10 + E11``.
    """
    keys = list(energies.keys())
    if not keys:
        raise MissingStateError("no energies given")
    n = len(keys[0])
    order = _state_order(n)
    missing = [occ for occ in order if occ not in energies]
    if missing:
        raise MissingStateError(f"missing computational states: {missing}")
    e = np.array([float(energies[occ]) for occ in order])
    signs = _z_signs(n)
    coeffs = PauliCoefficients(n_qubits=n)
    for string in z_strings(n):
        chi = np.ones(len(order))
        for pos, ch in enumerate(string):
            if ch == "Z":
                chi = chi * signs[:, pos]
        coeffs.values[string] = float(normalization(string) / 2**n * np.dot(chi, e))
    return coeffs


def energies_from_pauli(coeffs: PauliCoefficients) -> dict[tuple[int, ...], float]:
    """Inverse of :func:`pauli_from_energies` (round-trips to 1e-12)."""
    n = coeffs.n_qubits
    signs = _z_signs(n)
    order = _state_order(n)
    out = {}
    for row, occ in enumerate(order):
        e = 0.0
        for string, alpha in coeffs.values.items():
            chi = 1.0
            for pos, ch in enumerate(string):
                if ch == "Z":
                    chi *= signs[row, pos]
                elif ch != "I":
                    raise ValidationError(f"{string!r} is not diagonal")
            e += alpha / normalization(string) * chi
        out[occ] = e
    return out


def pauli_decompose(block: np.ndarray, imag_tol: float = 1e-9) -> PauliCoefficients:
    """Full Pauli decomposition of a 2**N effective block.

    ``alpha_P = 2**nz(P) * Tr(P M) / 2**N``.  Residual imaginary parts
    above ``imag_tol`` (relative to the matrix norm) indicate a
    non-Hermitian block and raise.
    """
    dim = block.shape[0]
    n = int(round(np.log2(dim)))
    if 2**n != dim or block.shape != (dim, dim):
        raise ValidationError(f"block shape {block.shape} is not a 2**N square")
    scale = max(np.linalg.norm(block), 1e-300)
    coeffs = PauliCoefficients(n_qubits=n)
    worst = 0.0
    for letters in itertools.product("IXYZ", repeat=n):
        string = "".join(letters)
        raw = np.trace(pauli_matrix(string) @ block) / dim
        worst = max(worst, abs(raw.imag))
        coeffs.values[string] = float(raw.real) * normalization(string)
    coeffs.imag_residual = float(worst / scale * dim)
    if coeffs.imag_residual > imag_tol:
        raise ValidationError(
            f"effective block is not Hermitian: imaginary residual {coeffs.imag_residual:.3e}"
        )
    return coeffs
