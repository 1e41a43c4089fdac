"""Dense Hamiltonians on the truncated multi-mode Fock space.

Basis convention: one occupation number per mode, qubits first then
couplers, in declaration order.  The flat index is the mixed-radix
encoding with the first mode most significant, which is exactly the
ordering produced by chained Kronecker products.

Hamiltonian convention (angular units, rad/ns):

* each mode contributes ``w n + (d/2) n (n - 1)`` on the diagonal,
* every coupled pair (qubit-qubit or qubit-coupler) contributes the
  exchange term ``g (a b^+ + a^+ b)`` and, in the full (non-RWA) form,
  the counter-rotating term ``-g (a b + a^+ b^+)``.

With positive strengths this sign choice makes a coupler sitting above
two qubits *oppose* their direct coupling, so the net exchange can be
tuned through zero.  The charge-type product of two quadratures fixes
the relative sign; the overall sign is unobservable and is pinned by a
regression test against second-order perturbation theory.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable

import numpy as np

from . import units
from .circuit import CircuitSpec
from .errors import DimensionLimitError, ValidationError

HERMITICITY_TOL = 1e-12


@dataclass(frozen=True)
class HamiltonianMatrix:
    """A dense Hermitian operator with its basis bookkeeping.

    ``basis`` holds one occupation vector per row; ``global_indices``
    maps rows back to the full-space flat index when the matrix is
    restricted to a subset (e.g. one excitation sector).
    """

    matrix: np.ndarray
    dims: tuple[int, ...]
    labels: tuple[str, ...]
    basis: np.ndarray
    global_indices: np.ndarray | None = None

    @property
    def dimension(self) -> int:
        return self.matrix.shape[0]

    def hermiticity_residual(self) -> float:
        h = self.matrix
        scale = np.linalg.norm(h)
        if scale == 0.0:
            return 0.0
        return float(np.linalg.norm(h - h.conj().T) / scale)

    def index_of(self, occupations: Iterable[int]) -> int:
        """Row index of a basis occupation vector."""
        occ = np.asarray(tuple(occupations), dtype=np.int64)
        flat = int(np.dot(occ, _strides(self.dims)))
        if self.global_indices is None:
            return flat
        pos = int(np.searchsorted(self.global_indices, flat))
        if pos >= len(self.global_indices) or self.global_indices[pos] != flat:
            raise KeyError(f"occupation {tuple(occ)} not in this basis")
        return pos


def _strides(dims: tuple[int, ...]) -> np.ndarray:
    strides = np.ones(len(dims), dtype=np.int64)
    for k in range(len(dims) - 2, -1, -1):
        strides[k] = strides[k + 1] * dims[k + 1]
    return strides


def basis_occupations(dims: tuple[int, ...]) -> np.ndarray:
    """All occupation vectors in flat-index order, shape (prod(dims), n_modes)."""
    grids = np.indices(dims).reshape(len(dims), -1)
    return grids.T.astype(np.int64)


def destroy(levels: int) -> np.ndarray:
    """Truncated lowering operator."""
    return np.diag(np.sqrt(np.arange(1.0, levels)), k=1)


def embed(op: np.ndarray, mode: int, dims: tuple[int, ...]) -> np.ndarray:
    """Kron-embed a single-mode operator at position ``mode``."""
    out = np.eye(1)
    for k, d in enumerate(dims):
        out = np.kron(out, op if k == mode else np.eye(d))
    return out


def _mode_parameters(spec: CircuitSpec):
    """Angular frequency and anharmonicity per mode (couplers harmonic)."""
    w = [units.ghz(q.frequency_ghz) for q in spec.qubits]
    d = [units.mhz(q.anharmonicity_mhz) for q in spec.qubits]
    for c in spec.couplers:
        w.append(units.ghz(c.frequency_ghz))
        d.append(0.0)
    return np.asarray(w), np.asarray(d)


def coupling_edges(spec: CircuitSpec) -> list[tuple[int, int, float]]:
    """All coupled mode pairs as (index, index, g in rad/ns)."""
    edges = []
    for a, b, g in spec.graph.qubit_qubit:
        if g != 0.0:
            edges.append((spec.mode_index(a), spec.mode_index(b), units.mhz(g)))
    for q, c, g in spec.graph.qubit_coupler:
        if g != 0.0:
            edges.append((spec.mode_index(q), spec.mode_index(c), units.mhz(g)))
    return edges


def diagonal_energies(spec: CircuitSpec, occupations: np.ndarray) -> np.ndarray:
    """Bare energies ``sum_m w n + (d/2) n (n-1)`` for each occupation row."""
    w, d = _mode_parameters(spec)
    occ = occupations.astype(np.float64)
    return occ @ w + 0.5 * (occ * (occ - 1.0)) @ d


def _assemble(
    spec: CircuitSpec,
    occupations: np.ndarray,
    rwa: bool,
    drive_mode: int | None = None,
    drive_amp: float = 0.0,
    frame: float = 0.0,
) -> np.ndarray:
    """Dense matrix over the given occupation rows.

    ``frame`` subtracts that angular frequency per excitation (rotating
    frame); ``drive_mode``/``drive_amp`` add the ladder term
    ``(amp/2)(a + a^+)`` on one mode.  Hops leaving the given basis are
    dropped, which is exact for RWA sectors and implements truncation
    elsewhere.
    """
    dims = tuple(spec.mode_levels)
    n = occupations.shape[0]
    strides = _strides(dims)
    flat = occupations @ strides
    order = np.argsort(flat)
    flat_sorted = flat[order]

    def locate(target_flat: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        pos = np.searchsorted(flat_sorted, target_flat)
        pos = np.clip(pos, 0, n - 1)
        found = flat_sorted[pos] == target_flat
        return order[pos], found

    h = np.zeros((n, n))
    diag = diagonal_energies(spec, occupations)
    if frame != 0.0:
        diag = diag - frame * occupations.sum(axis=1)
    h[np.diag_indices(n)] = diag

    def add_hop(mode_a, da, mode_b, db, amp_per_row):
        occ = occupations
        new_a = occ[:, mode_a] + da
        ok = (new_a >= 0) & (new_a < dims[mode_a])
        if mode_b is not None:
            new_b = occ[:, mode_b] + db
            ok &= (new_b >= 0) & (new_b < dims[mode_b])
        rows = np.nonzero(ok)[0]
        if rows.size == 0:
            return
        shift = da * strides[mode_a] + (db * strides[mode_b] if mode_b is not None else 0)
        targets, found = locate(flat[rows] + shift)
        amps = amp_per_row[rows][found]
        rows, targets = rows[found], targets[found]
        h[targets, rows] += amps

    for i, j, g in coupling_edges(spec):
        occ = occupations.astype(np.float64)
        # exchange +g (a_i a_j^+ + a_i^+ a_j)
        add_hop(i, -1, j, +1, g * np.sqrt(occ[:, i] * (occ[:, j] + 1.0)))
        add_hop(i, +1, j, -1, g * np.sqrt((occ[:, i] + 1.0) * occ[:, j]))
        if not rwa:
            # counter-rotating -g (a_i a_j + a_i^+ a_j^+)
            add_hop(i, -1, j, -1, -g * np.sqrt(occ[:, i] * occ[:, j]))
            add_hop(i, +1, j, +1, -g * np.sqrt((occ[:, i] + 1.0) * (occ[:, j] + 1.0)))

    if drive_mode is not None and drive_amp != 0.0:
        occ = occupations.astype(np.float64)
        add_hop(drive_mode, -1, None, 0, 0.5 * drive_amp * np.sqrt(occ[:, drive_mode]))
        add_hop(drive_mode, +1, None, 0, 0.5 * drive_amp * np.sqrt(occ[:, drive_mode] + 1.0))
    return h


def _check_dimension(spec: CircuitSpec, dim: int) -> None:
    if dim > spec.dimension_limit:
        raise DimensionLimitError(
            f"Hilbert dimension {dim} exceeds limit {spec.dimension_limit}"
        )


def build_full_hamiltonian(spec: CircuitSpec) -> HamiltonianMatrix:
    """Static circuit Hamiltonian with counter-rotating terms retained."""
    dims = tuple(spec.mode_levels)
    _check_dimension(spec, spec.dimension)
    occ = basis_occupations(dims)
    return HamiltonianMatrix(
        matrix=_assemble(spec, occ, rwa=False),
        dims=dims,
        labels=spec.mode_labels,
        basis=occ,
    )


def build_rwa_hamiltonian(spec: CircuitSpec) -> HamiltonianMatrix:
    """Excitation-conserving form: commutes with the total number operator."""
    dims = tuple(spec.mode_levels)
    _check_dimension(spec, spec.dimension)
    occ = basis_occupations(dims)
    return HamiltonianMatrix(
        matrix=_assemble(spec, occ, rwa=True),
        dims=dims,
        labels=spec.mode_labels,
        basis=occ,
    )


def sector_hamiltonian(spec: CircuitSpec, total: int) -> HamiltonianMatrix:
    """RWA Hamiltonian restricted to one total-excitation sector.

    Exact (not truncated) restriction because the RWA form conserves the
    total occupation; the workhorse of every sweep.
    """
    dims = tuple(spec.mode_levels)
    _check_dimension(spec, spec.dimension)
    occ = basis_occupations(dims)
    mask = occ.sum(axis=1) == total
    sub = occ[mask]
    if sub.size == 0:
        raise ValueError(f"no basis states with total occupation {total}")
    return HamiltonianMatrix(
        matrix=_assemble(spec, sub, rwa=True),
        dims=dims,
        labels=spec.mode_labels,
        basis=sub,
        global_indices=np.nonzero(mask)[0],
    )


def total_number(H: HamiltonianMatrix) -> np.ndarray:
    """Diagonal of the total number operator on H's basis."""
    return H.basis.sum(axis=1).astype(np.float64)


def truncation_report(spec: CircuitSpec, extra_levels: int = 1, solver: str = "rwa"):
    """Shift of every computational dressed energy when all modes gain levels.

    Returns rows of (qubit occupations, energy GHz, enlarged-energy GHz,
    shift kHz); used to certify that the default truncation is converged.
    """
    from .blockdiag import computational_spectrum

    if extra_levels < 1:
        raise ValidationError("extra_levels must be >= 1")
    from dataclasses import replace

    enlarged = replace(
        spec,
        qubits=tuple(replace(q, levels=q.levels + extra_levels) for q in spec.qubits),
        couplers=tuple(replace(c, levels=c.levels + extra_levels) for c in spec.couplers),
    )
    base = computational_spectrum(spec, solver=solver)
    big = computational_spectrum(enlarged, solver=solver)
    rows = []
    for occ in sorted(base.energies):
        e0 = base.energies[occ]
        e1 = big.energies[occ]
        rows.append(
            {
                "occupations": occ,
                "energy_ghz": units.to_ghz(e0),
                "enlarged_energy_ghz": units.to_ghz(e1),
                "shift_khz": units.to_khz(e1 - e0),
            }
        )
    return rows


def dump_matrix_csv(H: HamiltonianMatrix, path) -> None:
    """Debug dump of nonzero entries as (row, col, re, im) triplets."""
    import csv

    m = H.matrix
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["row", "col", "re", "im"])
        rows, cols = np.nonzero(m)
        for r, c in zip(rows.tolist(), cols.tolist()):
            v = complex(m[r, c])
            writer.writerow([r, c, format(v.real, ".17g"), format(v.imag, ".17g")])
