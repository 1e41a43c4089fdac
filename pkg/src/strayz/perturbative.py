"""Closed-form perturbative quantities.

Everything here follows from second-order elimination of the couplers
plus third-order diagonalization of the remaining qubit network:

* dressed level energies with the coupler-induced (Lamb) shifts,
* level-dependent net exchange strengths J^{mn} between qubit pairs
  (direct part minus the shared-coupler contribution),
* two identity residuals relating the four lowest J values,
* two-body and three-body stray strengths (zeta, the per-triple scalar
  K(n), and the assembled ZZ strings),
* an independent, term-by-term evaluation of the same four ZZ/ZZZ
  strings used as an internal cross-check path.

Denominators below a configurable resonance floor raise
:class:`~strayz.errors.ResonanceError` carrying every offender, so sweep
code can mark the point divergent instead of recording huge values.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

from . import units
from .circuit import CircuitSpec
from .errors import ResonanceError, ValidationError
from .paulis import PauliCoefficients

DEFAULT_FLOOR_MHZ = 1.0


@dataclass
class EffectiveCouplingTable:
    """Dressed transitions and level-dependent exchange strengths.

    ``transitions[(q, n)]`` is the dressed n -> n+1 transition (rad/ns);
    ``j[(a, b, m, n)]`` is J^{mn}_{ab} stored with a before b in qubit
    order, looked up either way through :meth:`J` using the exchange
    symmetry J^{mn}_{ab} = J^{nm}_{ba}.
    """

    qubits: tuple[str, ...]
    transitions: dict = field(default_factory=dict)
    level_energies: dict = field(default_factory=dict)
    j: dict = field(default_factory=dict)
    beta: dict = field(default_factory=dict)
    source: str = "perturbative"
    min_overlap: float = 1.0

    def _canonical(self, a: str, b: str, m: int, n: int):
        ia, ib = self.qubits.index(a), self.qubits.index(b)
        if ia == ib:
            raise ValidationError("exchange strength needs two distinct qubits")
        if ia < ib:
            return (a, b, m, n)
        return (b, a, n, m)

    def J(self, a: str, b: str, m: int, n: int) -> float:
        return self.j.get(self._canonical(a, b, m, n), 0.0)

    def delta(self, a: str, b: str, m: int, n: int) -> float:
        return self.transitions[(a, m)] - self.transitions[(b, n)]

    def max_abs_j(self, a: str, b: str) -> float:
        return max(abs(self.J(a, b, m, n)) for m in (0, 1) for n in (0, 1))

    def pairs(self):
        return itertools.combinations(self.qubits, 2)

    def triples(self):
        return itertools.combinations(self.qubits, 3)


@dataclass
class IdentityResiduals:
    """Residuals of the two J identities for one qubit pair."""

    r1: float
    r2: float
    max_abs_j: float

    @property
    def r1_relative(self) -> float:
        return abs(self.r1) / self.max_abs_j if self.max_abs_j else 0.0

    @property
    def r2_relative(self) -> float:
        return abs(self.r2) / self.max_abs_j if self.max_abs_j else 0.0


@dataclass
class StrayCouplingBreakdown:
    """Two- and three-body stray strengths and their assembled strings."""

    qubits: tuple[str, ...]
    zeta2: dict
    zeta3: dict
    k_scalars: dict
    alpha: PauliCoefficients


# ---------------------------------------------------------------------------
# dressed frequencies and effective exchange


def coupler_detuning(spec: CircuitSpec, coupler: str, qubit: str, level: int) -> float:
    """Bare detuning of a coupler from a qubit transition (rad/ns)."""
    q = spec.qubit(qubit)
    c = spec.coupler(coupler)
    return units.ghz(c.frequency_ghz) - units.ghz(q.frequency_ghz) - level * units.mhz(
        q.anharmonicity_mhz
    )


def _check_coupler_floors(spec: CircuitSpec, levels, floor_mhz: float):
    bad = []
    for q in spec.qubits:
        for c in spec.graph.couplers_of(q.label):
            for m in levels:
                det = coupler_detuning(spec, c, q.label, m)
                if abs(units.to_mhz(det)) < floor_mhz:
                    bad.append(("coupler_detuning", c, q.label, m, units.to_mhz(det)))
    if bad:
        raise ResonanceError(
            "coupler-qubit detuning below the resonance floor: "
            + "; ".join(f"{c}-{q}(level {m}) = {v:.4f} MHz" for _, c, q, m, v in bad),
            divergences=bad,
        )


def dressed_level_energy(spec: CircuitSpec, qubit: str, n: int,
                         floor_mhz: float = DEFAULT_FLOOR_MHZ) -> float:
    """Dressed energy of level ``n`` of one qubit (rad/ns).

    Bare ladder energy plus the summed second-order repulsion from every
    attached coupler, ``- g^2 n / Delta(n - 1)``.
    """
    q = spec.qubit(qubit)
    if n < 0 or n >= q.levels:
        raise ValidationError(f"level {n} outside the retained ladder of {qubit!r}")
    w = units.ghz(q.frequency_ghz)
    d = units.mhz(q.anharmonicity_mhz)
    energy = (w + 0.5 * (n - 1) * d) * n
    if n == 0:
        return 0.0
    bad = []
    for c in spec.graph.couplers_of(qubit):
        g = units.mhz(spec.graph.qc_strength(qubit, c))
        det = coupler_detuning(spec, c, qubit, n - 1)
        if abs(units.to_mhz(det)) < floor_mhz:
            bad.append(("coupler_detuning", c, qubit, n - 1, units.to_mhz(det)))
            continue
        energy -= g * g * n / det
    if bad:
        raise ResonanceError(
            "coupler resonance while dressing "
            + ", ".join(f"{c}-{q}(level {m}) = {v:.4f} MHz" for _, c, q, m, v in bad),
            divergences=bad,
        )
    return energy


def dressed_frequencies(spec: CircuitSpec, max_level: int = 2,
                        floor_mhz: float = DEFAULT_FLOOR_MHZ) -> dict:
    """Dressed level energies in GHz, keyed by (qubit label, level)."""
    out = {}
    for q in spec.qubits:
        for n in range(min(max_level, q.levels - 1) + 1):
            out[(q.label, n)] = units.to_ghz(dressed_level_energy(spec, q.label, n, floor_mhz))
    return out


def effective_j(spec: CircuitSpec, a: str, b: str, m: int, n: int,
                floor_mhz: float = DEFAULT_FLOOR_MHZ) -> float:
    """Net exchange strength J^{mn} between two qubits, in MHz.

    Direct strength minus the shared-coupler term
    ``(g_a g_b / 2)(1/Delta_a(m) + 1/Delta_b(n))``; pairs without a
    shared coupler keep the direct strength alone.
    """
    return units.to_mhz(_effective_j(spec, a, b, m, n, floor_mhz))


def _effective_j(spec, a, b, m, n, floor_mhz):
    if a == b:
        raise ValidationError("exchange strength needs two distinct qubits")
    j = units.mhz(spec.graph.qq_strength(a, b))
    bad = []
    for c in spec.graph.shared_couplers(a, b):
        ga = units.mhz(spec.graph.qc_strength(a, c))
        gb = units.mhz(spec.graph.qc_strength(b, c))
        da = coupler_detuning(spec, c, a, m)
        db = coupler_detuning(spec, c, b, n)
        for q, lvl, det in ((a, m, da), (b, n, db)):
            if abs(units.to_mhz(det)) < floor_mhz:
                bad.append(("coupler_detuning", c, q, lvl, units.to_mhz(det)))
        if not bad:
            j -= 0.5 * ga * gb * (1.0 / da + 1.0 / db)
    if bad:
        raise ResonanceError(
            "coupler resonance in exchange strength: "
            + ", ".join(f"{c}-{q}(level {m_}) = {v:.4f} MHz" for _, c, q, m_, v in bad),
            divergences=bad,
        )
    return j


def beta_ratio(spec: CircuitSpec, a: str, b: str) -> float:
    """Detuning/anharmonicity ratio entering the second J identity.

    Defined through the shared coupler's bare detunings:
    ``(d_b / d_a) * (D_a(0)/D_b(0)) * (D_a(1)/D_b(1))``.
    """
    shared = spec.graph.shared_couplers(a, b)
    if len(shared) != 1:
        raise ValidationError(
            f"beta is defined for exactly one shared coupler, {a}-{b} has {len(shared)}"
        )
    c = shared[0]
    da = units.mhz(spec.qubit(a).anharmonicity_mhz)
    db = units.mhz(spec.qubit(b).anharmonicity_mhz)
    return (
        (db / da)
        * (coupler_detuning(spec, c, a, 0) / coupler_detuning(spec, c, b, 0))
        * (coupler_detuning(spec, c, a, 1) / coupler_detuning(spec, c, b, 1))
    )


def coupling_table(spec: CircuitSpec, floor_mhz: float = DEFAULT_FLOOR_MHZ) -> EffectiveCouplingTable:
    """Perturbative dressed transitions and J^{mn} for all qubit pairs."""
    _check_coupler_floors(spec, (0, 1), floor_mhz)
    qubits = tuple(q.label for q in spec.qubits)
    table = EffectiveCouplingTable(qubits=qubits, source="perturbative")
    for q in spec.qubits:
        top = min(2, q.levels - 1)
        energies = {
            n: dressed_level_energy(spec, q.label, n, floor_mhz) for n in range(top + 1)
        }
        for n, e in energies.items():
            table.level_energies[(q.label, n)] = e
        for n in range(top):
            table.transitions[(q.label, n)] = energies[n + 1] - energies[n]
    for a, b in table.pairs():
        for m in (0, 1):
            for n in (0, 1):
                table.j[(a, b, m, n)] = _effective_j(spec, a, b, m, n, floor_mhz)
        if len(spec.graph.shared_couplers(a, b)) == 1:
            table.beta[(a, b)] = beta_ratio(spec, a, b)
        else:
            table.beta[(a, b)] = None
    return table


# ---------------------------------------------------------------------------
# J identities


def check_j_identities(table: EffectiveCouplingTable, a: str, b: str,
                       beta: float | None = None) -> IdentityResiduals:
    """Residuals of the sum identity and the beta-weighted identity.

    Both vanish identically for table entries built from the closed-form
    J; they stay small but nonzero for numerically extracted couplings
    in the dispersive regime.
    """
    j01 = table.J(a, b, 0, 1)
    j10 = table.J(a, b, 1, 0)
    j00 = table.J(a, b, 0, 0)
    j11 = table.J(a, b, 1, 1)
    if beta is None:
        beta = table.beta.get((a, b))
        if beta is None:
            beta = table.beta.get((b, a))
            beta = None if beta is None else 1.0 / beta
    if beta is None:
        raise ValidationError(f"no beta available for pair {a}-{b} (needs one shared coupler)")
    r1 = j01 + j10 - j00 - j11
    r2 = j01 - beta * j10 - (1.0 - beta) * j00
    return IdentityResiduals(r1=r1, r2=r2, max_abs_j=table.max_abs_j(a, b))


# ---------------------------------------------------------------------------
# stray couplings


def _collect_pair_floors(table: EffectiveCouplingTable, floor: float):
    bad = []
    for a, b in itertools.permutations(table.qubits, 2):
        for m in (0, 1):
            for n in (0, 1):
                det = table.delta(a, b, m, n)
                if abs(det) < floor:
                    bad.append(("transition_detuning", a, b, m, n, units.to_mhz(det)))
    if bad:
        raise ResonanceError(
            "transition detuning below the resonance floor: "
            + "; ".join(f"{a}({m})-{b}({n}) = {v:.4f} MHz" for _, a, b, m, n, v in bad),
            divergences=bad,
        )


def zeta_two_body(table: EffectiveCouplingTable, a: str, b: str) -> float:
    """Two-body ZZ strength of one pair (rad/ns)."""
    j01 = table.J(a, b, 0, 1)
    j10 = table.J(a, b, 1, 0)
    return 2.0 * (j01**2 / table.delta(a, b, 0, 1) - j10**2 / table.delta(a, b, 1, 0))


def k_scalar(table: EffectiveCouplingTable, triple, n: int) -> float:
    """Per-triple scalar K(n): minus the sum of the three J^3/Delta^2 loops."""
    total = 0.0
    for i, j in itertools.combinations(triple, 2):
        (k,) = tuple(q for q in triple if q not in (i, j))
        total -= (
            table.J(i, j, n, n)
            * table.J(i, k, n, 1 - n)
            * table.J(j, k, n, 1 - n)
            / (table.delta(i, k, n, 1 - n) * table.delta(j, k, n, 1 - n))
        )
    return total


def zeta_three_body(table: EffectiveCouplingTable, a: str, b: str, k: str) -> float:
    """Three-body correction to the (a, b) ZZ strength from spectator k (rad/ns)."""
    t0 = (
        table.J(a, b, 0, 0)
        * table.J(a, k, 0, 0)
        * table.J(b, k, 0, 0)
        / (table.delta(a, k, 0, 0) * table.delta(b, k, 0, 0))
    )
    t1 = (
        table.J(a, b, 0, 0)
        * table.J(a, k, 0, 1)
        * table.J(b, k, 0, 1)
        / (table.delta(a, k, 0, 1) * table.delta(b, k, 0, 1))
    )
    t2 = (
        table.J(a, b, 0, 1)
        * table.J(a, k, 0, 0)
        * table.J(b, k, 1, 0)
        / (table.delta(a, k, 0, 0) * table.delta(b, k, 1, 0))
    )
    t3 = (
        table.J(a, b, 1, 0)
        * table.J(a, k, 1, 0)
        * table.J(b, k, 0, 0)
        / (table.delta(a, k, 1, 0) * table.delta(b, k, 0, 0))
    )
    return 4.0 * (t0 + t1 - t2 - t3 - k_scalar(table, (a, b, k), 1))


def _zz_string(qubits, pair) -> str:
    return "".join("Z" if q in pair else "I" for q in qubits)


def stray_breakdown(table: EffectiveCouplingTable, include_three_body: bool = True,
                    floor_mhz: float = DEFAULT_FLOOR_MHZ) -> StrayCouplingBreakdown:
    """Assemble all stray strengths from a coupling table.

    The ZZ string of a pair sums its two-body part and one spectator
    correction per triple containing the pair; each triple contributes a
    one-shot ZZZ string ``8 (K(0) + K(1))``.  With ``include_three_body``
    off only the two-body parts survive (the ZZZ strings vanish at this
    order).
    """
    _collect_pair_floors(table, units.mhz(floor_mhz))
    qubits = table.qubits
    zeta2 = {}
    zeta3 = {}
    ks = {}
    alpha = PauliCoefficients(n_qubits=len(qubits))
    for a, b in table.pairs():
        zeta2[(a, b)] = zeta_two_body(table, a, b)
        alpha.values[_zz_string(qubits, (a, b))] = zeta2[(a, b)]
    for triple in table.triples():
        for n in (0, 1):
            ks[(triple, n)] = k_scalar(table, triple, n)
        zzz = 8.0 * (ks[(triple, 0)] + ks[(triple, 1)]) if include_three_body else 0.0
        alpha.values[_zz_string(qubits, triple)] = zzz
        if include_three_body:
            for a, b in itertools.combinations(triple, 2):
                (k,) = tuple(q for q in triple if q not in (a, b))
                z3 = zeta_three_body(table, a, b, k)
                zeta3[(a, b, k)] = z3
                alpha.values[_zz_string(qubits, (a, b))] += z3
    return StrayCouplingBreakdown(qubits=qubits, zeta2=zeta2, zeta3=zeta3,
                                  k_scalars=ks, alpha=alpha)


def explicit_alphas(table: EffectiveCouplingTable,
                    floor_mhz: float = DEFAULT_FLOOR_MHZ) -> PauliCoefficients:
    """Term-by-term third-order ZZ/ZZZ strings for a three-qubit table.

    Independent evaluation path kept deliberately separate from
    :func:`stray_breakdown`; the two must agree to 1e-9 relative and the
    pair is used as a dual-route consistency check.
    """
    if len(table.qubits) != 3:
        raise ValidationError("explicit three-qubit formulas need exactly three qubits")
    _collect_pair_floors(table, units.mhz(floor_mhz))
    q1, q2, q3 = table.qubits

    def J(a, b, m, n):
        return table.J(a, b, m, n)

    def D(a, b, m, n):
        return table.delta(a, b, m, n)

    def zz_pair(a, b, c):
        # two-body part on (a, b) plus the six spectator-c terms
        out = 2.0 * J(a, b, 0, 1) ** 2 / D(a, b, 0, 1)
        out -= 2.0 * J(a, b, 1, 0) ** 2 / D(a, b, 1, 0)
        out += 4.0 * J(a, b, 0, 0) * J(b, c, 0, 0) * J(a, c, 0, 0) / (
            D(b, c, 0, 0) * D(a, c, 0, 0)
        )
        out += 4.0 * (
            J(a, b, 0, 0) * J(b, c, 0, 1) * J(a, c, 0, 1) / (D(b, c, 0, 1) * D(a, c, 0, 1))
            - J(a, c, 0, 0) * J(a, b, 0, 1) * J(b, c, 1, 0) / (D(b, c, 1, 0) * D(a, c, 0, 0))
            - J(b, c, 0, 0) * J(a, c, 1, 0) * J(a, b, 1, 0) / (D(a, c, 1, 0) * D(b, c, 0, 0))
            - J(a, c, 1, 1) * J(b, c, 0, 1) * J(a, b, 1, 0) / (D(b, c, 0, 1) * D(a, b, 1, 0))
            + J(b, c, 1, 1) * J(a, b, 0, 1) * J(a, c, 0, 1) / (D(a, b, 0, 1) * D(a, c, 0, 1))
            + J(a, b, 1, 1) * J(a, c, 1, 0) * J(b, c, 1, 0) / (D(a, c, 1, 0) * D(b, c, 1, 0))
        )
        return out

    zzz = 8.0 * (
        J(q1, q3, 0, 0) * J(q2, q3, 1, 0) * J(q1, q2, 0, 1) / (D(q2, q3, 1, 0) * D(q1, q2, 0, 1))
        - J(q1, q2, 0, 0) * J(q1, q3, 0, 1) * J(q2, q3, 0, 1) / (D(q2, q3, 0, 1) * D(q1, q3, 0, 1))
        - J(q2, q3, 0, 0) * J(q1, q2, 1, 0) * J(q1, q3, 1, 0) / (D(q1, q2, 1, 0) * D(q1, q3, 1, 0))
        + J(q1, q3, 1, 1) * J(q2, q3, 0, 1) * J(q1, q2, 1, 0) / (D(q2, q3, 0, 1) * D(q1, q2, 1, 0))
        - J(q2, q3, 1, 1) * J(q1, q2, 0, 1) * J(q1, q3, 0, 1) / (D(q1, q2, 0, 1) * D(q1, q3, 0, 1))
        - J(q1, q2, 1, 1) * J(q1, q3, 1, 0) * J(q2, q3, 1, 0) / (D(q1, q3, 1, 0) * D(q2, q3, 1, 0))
    )

    coeffs = PauliCoefficients(n_qubits=3)
    coeffs.values["ZZI"] = zz_pair(q1, q2, q3)
    coeffs.values["ZIZ"] = zz_pair(q1, q3, q2)
    coeffs.values["IZZ"] = zz_pair(q2, q3, q1)
    coeffs.values["ZZZ"] = zzz
    return coeffs
