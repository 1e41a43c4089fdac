"""Circuit topologies: qubits, couplers, coupling graph and drives.

A :class:`CircuitSpec` is an immutable, validated description of a small
lattice of weakly anharmonic qubits and harmonic couplers.  Presets carry
the canonical three-qubit circuits used throughout the package; every
preset parameter can be overridden through short sweep keys ("w2",
"wc23", "g12", "g1c12", ...) which are also what the CLI and the sweep
engine mutate.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, replace

from .errors import DimensionLimitError, ValidationError

DEFAULT_QUBIT_LEVELS = 5
DEFAULT_COUPLER_LEVELS = 3
DEFAULT_DIMENSION_LIMIT = 20_000

PRESET_NAMES = ("triangle_three_coupler", "shared_coupler", "chain_two_coupler")


@dataclass(frozen=True)
class QubitSpec:
    """A transmon-like mode: bare 0-1 frequency in GHz, anharmonicity in MHz."""

    label: str
    frequency_ghz: float
    anharmonicity_mhz: float
    levels: int = DEFAULT_QUBIT_LEVELS


@dataclass(frozen=True)
class CouplerSpec:
    """A harmonic coupler mode: frequency in GHz."""

    label: str
    frequency_ghz: float
    levels: int = DEFAULT_COUPLER_LEVELS


@dataclass(frozen=True)
class DriveSpec:
    """A microwave drive on one qubit: amplitude in MHz, frequency in GHz."""

    target: str
    amplitude_mhz: float
    frequency_ghz: float


@dataclass(frozen=True)
class CouplingGraph:
    """Undirected weighted edges, strengths in MHz.

    Pairs are stored in canonical (sorted label) order; lookups accept
    either order.
    """

    qubit_qubit: tuple[tuple[str, str, float], ...] = ()
    qubit_coupler: tuple[tuple[str, str, float], ...] = ()

    def qq_strength(self, a: str, b: str) -> float:
        key = _pair_key(a, b)
        for x, y, g in self.qubit_qubit:
            if (x, y) == key:
                return g
        return 0.0

    def qc_strength(self, qubit: str, coupler: str) -> float:
        for q, c, g in self.qubit_coupler:
            if (q, c) == (qubit, coupler):
                return g
        return 0.0

    def couplers_of(self, qubit: str) -> tuple[str, ...]:
        return tuple(c for q, c, _ in self.qubit_coupler if q == qubit)

    def shared_couplers(self, a: str, b: str) -> tuple[str, ...]:
        ca = set(self.couplers_of(a))
        return tuple(c for c in self.couplers_of(b) if c in ca)


def _pair_key(a: str, b: str) -> tuple[str, str]:
    return (a, b) if a <= b else (b, a)


def make_graph(qq_edges, qc_edges) -> CouplingGraph:
    """Build a validated graph from (a, b, g_mhz) / (qubit, coupler, g_mhz) edges.

    Both orientations of a qubit-qubit edge may be given as long as the
    strengths agree; disagreeing duplicates raise "asymmetric coupling".
    """
    seen: dict[tuple[str, str], float] = {}
    for a, b, g in qq_edges:
        if a == b:
            raise ValidationError(f"self-edge on {a!r}")
        key = _pair_key(a, b)
        if key in seen and not math.isclose(seen[key], g, rel_tol=0.0, abs_tol=0.0):
            raise ValidationError(
                f"asymmetric coupling between {key[0]!r} and {key[1]!r}: "
                f"{seen[key]} MHz vs {g} MHz"
            )
        seen[key] = g
    qc_seen: dict[tuple[str, str], float] = {}
    for q, c, g in qc_edges:
        key = (q, c)
        if key in qc_seen and qc_seen[key] != g:
            raise ValidationError(f"duplicate qubit-coupler edge {key} with conflicting strengths")
        qc_seen[key] = g
    return CouplingGraph(
        qubit_qubit=tuple((a, b, g) for (a, b), g in sorted(seen.items())),
        qubit_coupler=tuple((q, c, g) for (q, c), g in sorted(qc_seen.items())),
    )


@dataclass(frozen=True)
class CircuitSpec:
    """Validated circuit: immutable after construction, safe to share."""

    qubits: tuple[QubitSpec, ...]
    couplers: tuple[CouplerSpec, ...] = ()
    graph: CouplingGraph = CouplingGraph()
    drive: DriveSpec | None = None
    dimension_limit: int = DEFAULT_DIMENSION_LIMIT

    def __post_init__(self):
        _validate(self)

    # -- mode bookkeeping (qubits first, then couplers, declaration order) --

    @property
    def mode_labels(self) -> tuple[str, ...]:
        return tuple(q.label for q in self.qubits) + tuple(c.label for c in self.couplers)

    @property
    def mode_levels(self) -> tuple[int, ...]:
        return tuple(q.levels for q in self.qubits) + tuple(c.levels for c in self.couplers)

    @property
    def dimension(self) -> int:
        return math.prod(self.mode_levels)

    @property
    def n_qubits(self) -> int:
        return len(self.qubits)

    def qubit(self, label: str) -> QubitSpec:
        for q in self.qubits:
            if q.label == label:
                return q
        raise ValidationError(f"unknown qubit {label!r}")

    def coupler(self, label: str) -> CouplerSpec:
        for c in self.couplers:
            if c.label == label:
                return c
        raise ValidationError(f"unknown coupler {label!r}")

    def mode_index(self, label: str) -> int:
        return self.mode_labels.index(label)

    # -- serialization (JSON schema used by the CLI and the loader) --

    def to_dict(self) -> dict:
        out = {
            "qubits": [
                {
                    "label": q.label,
                    "freq_ghz": q.frequency_ghz,
                    "anharm_mhz": q.anharmonicity_mhz,
                    "levels": q.levels,
                }
                for q in self.qubits
            ],
            "couplers": [
                {"label": c.label, "freq_ghz": c.frequency_ghz, "levels": c.levels}
                for c in self.couplers
            ],
            "qq_couplings": [
                {"a": a, "b": b, "g_mhz": g} for a, b, g in self.graph.qubit_qubit
            ],
            "qc_couplings": [
                {"qubit": q, "coupler": c, "g_mhz": g}
                for q, c, g in self.graph.qubit_coupler
            ],
        }
        if self.drive is not None:
            out["drive"] = {
                "target": self.drive.target,
                "amp_mhz": self.drive.amplitude_mhz,
                "freq_ghz": self.drive.frequency_ghz,
            }
        return out

    @staticmethod
    def from_dict(data: dict) -> "CircuitSpec":
        try:
            qubits = tuple(
                QubitSpec(
                    label=str(q["label"]),
                    frequency_ghz=float(q["freq_ghz"]),
                    anharmonicity_mhz=float(q.get("anharm_mhz", 0.0)),
                    levels=int(q.get("levels", DEFAULT_QUBIT_LEVELS)),
                )
                for q in data.get("qubits", [])
            )
            couplers = tuple(
                CouplerSpec(
                    label=str(c["label"]),
                    frequency_ghz=float(c["freq_ghz"]),
                    levels=int(c.get("levels", DEFAULT_COUPLER_LEVELS)),
                )
                for c in data.get("couplers", [])
            )
            graph = make_graph(
                [(e["a"], e["b"], float(e["g_mhz"])) for e in data.get("qq_couplings", [])],
                [
                    (e["qubit"], e["coupler"], float(e["g_mhz"]))
                    for e in data.get("qc_couplings", [])
                ],
            )
            drive = None
            if data.get("drive") is not None:
                d = data["drive"]
                drive = DriveSpec(
                    target=str(d["target"]),
                    amplitude_mhz=float(d["amp_mhz"]),
                    frequency_ghz=float(d["freq_ghz"]),
                )
        except (KeyError, TypeError, ValueError) as exc:
            raise ValidationError(f"malformed circuit document: {exc}") from exc
        return CircuitSpec(qubits=qubits, couplers=couplers, graph=graph, drive=drive)

    def digest(self) -> str:
        """Short stable hash of the resolved circuit, for run metadata."""
        import hashlib

        blob = json.dumps(self.to_dict(), sort_keys=True).encode()
        return hashlib.sha256(blob).hexdigest()[:12]


def _validate(spec: CircuitSpec) -> None:
    labels = [m for m in spec.mode_labels]
    if len(set(labels)) != len(labels):
        raise ValidationError("mode labels must be unique")
    if not spec.qubits:
        raise ValidationError("circuit needs at least one qubit")
    for q in spec.qubits:
        if not (q.frequency_ghz > 0):
            raise ValidationError(f"qubit {q.label!r}: frequency must be positive")
        if q.levels < 2:
            raise ValidationError(f"qubit {q.label!r}: levels must be >= 2")
        if q.levels > 2 and not (math.isfinite(q.anharmonicity_mhz) and q.anharmonicity_mhz != 0):
            raise ValidationError(
                f"qubit {q.label!r}: a transmon with more than two retained levels "
                "needs a finite nonzero anharmonicity"
            )
    for c in spec.couplers:
        if not (c.frequency_ghz > 0):
            raise ValidationError(f"coupler {c.label!r}: frequency must be positive")
        if c.levels < 2:
            raise ValidationError(f"coupler {c.label!r}: levels must be >= 2")
    qlabels = {q.label for q in spec.qubits}
    clabels = {c.label for c in spec.couplers}
    for a, b, _ in spec.graph.qubit_qubit:
        if a not in qlabels or b not in qlabels:
            raise ValidationError(f"qubit-qubit edge ({a!r}, {b!r}) references unknown qubit")
    for q, c, _ in spec.graph.qubit_coupler:
        if q not in qlabels:
            raise ValidationError(f"qubit-coupler edge references unknown qubit {q!r}")
        if c not in clabels:
            raise ValidationError(f"qubit-coupler edge references unknown coupler {c!r}")
    if spec.drive is not None and spec.drive.target not in qlabels:
        raise ValidationError(f"drive target {spec.drive.target!r} is not a qubit")
    if spec.drive is not None and spec.drive.amplitude_mhz < 0:
        raise ValidationError("drive amplitude must be non-negative")
    if spec.dimension > spec.dimension_limit:
        raise DimensionLimitError(
            f"Hilbert dimension {spec.dimension} exceeds limit {spec.dimension_limit}"
        )


# ---------------------------------------------------------------------------
# file I/O


def load_circuit(path) -> CircuitSpec:
    """Load and validate a circuit from a JSON file."""
    try:
        with open(path, "r", encoding="utf-8") as fh:
            data = json.load(fh)
    except json.JSONDecodeError as exc:
        raise ValidationError(f"cannot parse {path}: {exc}") from exc
    if not isinstance(data, dict):
        raise ValidationError(f"{path}: top level must be an object")
    return CircuitSpec.from_dict(data)


def save_circuit(spec: CircuitSpec, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(spec.to_dict(), fh, indent=2, sort_keys=True)
        fh.write("\n")


# ---------------------------------------------------------------------------
# sweepable parameters

def _suffix(label: str, is_qubit: bool) -> str:
    s = label.lower()
    if is_qubit and s.startswith("q") and len(s) > 1:
        return s[1:]
    return s


def parameter_keys(spec: CircuitSpec) -> dict[str, str]:
    """Map of short parameter keys to human descriptions.

    Frequencies are set in GHz, everything else in MHz.
    """
    keys: dict[str, str] = {}
    for q in spec.qubits:
        s = _suffix(q.label, True)
        keys[f"w{s}"] = f"bare frequency of {q.label} [GHz]"
        keys[f"d{s}"] = f"anharmonicity of {q.label} [MHz]"
    for c in spec.couplers:
        s = _suffix(c.label, False)
        keys[f"w{s}"] = f"frequency of {c.label} [GHz]"
    for a, b, _ in spec.graph.qubit_qubit:
        keys[f"g{_suffix(a, True)}{_suffix(b, True)}"] = f"direct coupling {a}-{b} [MHz]"
    for q, c, _ in spec.graph.qubit_coupler:
        keys[f"g{_suffix(q, True)}{_suffix(c, False)}"] = f"coupling {q}-{c} [MHz]"
    keys["qubit_levels"] = "retained levels for every qubit"
    keys["coupler_levels"] = "retained levels for every coupler"
    if spec.drive is not None:
        keys["amp"] = "drive amplitude [MHz]"
        keys["wd"] = "drive frequency [GHz]"
    return keys


def apply_parameter(spec: CircuitSpec, key: str, value: float) -> CircuitSpec:
    """Return a new spec with one short-key parameter replaced."""
    key = key.strip().lower()
    for q in spec.qubits:
        s = _suffix(q.label, True)
        if key == f"w{s}":
            return _replace_qubit(spec, q.label, frequency_ghz=float(value))
        if key == f"d{s}":
            return _replace_qubit(spec, q.label, anharmonicity_mhz=float(value))
    for c in spec.couplers:
        if key == f"w{_suffix(c.label, False)}":
            return _replace_coupler(spec, c.label, frequency_ghz=float(value))
    for a, b, _ in spec.graph.qubit_qubit:
        if key == f"g{_suffix(a, True)}{_suffix(b, True)}":
            return _replace_qq(spec, a, b, float(value))
    for q, c, _ in spec.graph.qubit_coupler:
        if key == f"g{_suffix(q, True)}{_suffix(c, False)}":
            return _replace_qc(spec, q, c, float(value))
    if key == "qubit_levels":
        qubits = tuple(replace(q, levels=int(value)) for q in spec.qubits)
        return replace(spec, qubits=qubits)
    if key == "coupler_levels":
        couplers = tuple(replace(c, levels=int(value)) for c in spec.couplers)
        return replace(spec, couplers=couplers)
    if spec.drive is not None:
        if key == "amp":
            return replace(spec, drive=replace(spec.drive, amplitude_mhz=float(value)))
        if key == "wd":
            return replace(spec, drive=replace(spec.drive, frequency_ghz=float(value)))
    known = ", ".join(sorted(parameter_keys(spec)))
    raise ValidationError(f"unknown parameter key {key!r}; known keys: {known}")


def _replace_qubit(spec, label, **changes):
    qubits = tuple(replace(q, **changes) if q.label == label else q for q in spec.qubits)
    return replace(spec, qubits=qubits)


def _replace_coupler(spec, label, **changes):
    couplers = tuple(replace(c, **changes) if c.label == label else c for c in spec.couplers)
    return replace(spec, couplers=couplers)


def _replace_qq(spec, a, b, g):
    key = _pair_key(a, b)
    edges = tuple((x, y, g if (x, y) == key else old) for x, y, old in spec.graph.qubit_qubit)
    return replace(spec, graph=replace(spec.graph, qubit_qubit=edges))


def _replace_qc(spec, q, c, g):
    edges = tuple(
        (x, y, g if (x, y) == (q, c) else old) for x, y, old in spec.graph.qubit_coupler
    )
    return replace(spec, graph=replace(spec.graph, qubit_coupler=edges))


# ---------------------------------------------------------------------------
# presets
#
# The triangle is the reference all-to-all three-qubit circuit; the chain
# drops one coupler and its direct edge; the shared-coupler circuit hangs
# all three qubits off a single harmonic mode.

def _triangle_spec() -> CircuitSpec:
    qubits = (
        QubitSpec("Q1", 4.8, -330.0),
        QubitSpec("Q2", 5.0, -330.0),
        QubitSpec("Q3", 5.1, -330.0),
    )
    couplers = (
        CouplerSpec("C12", 5.8),
        CouplerSpec("C23", 6.1),
        CouplerSpec("C13", 5.7),
    )
    graph = make_graph(
        [("Q1", "Q2", 4.0), ("Q2", "Q3", 4.0), ("Q1", "Q3", 6.0)],
        [
            ("Q1", "C12", 85.0),
            ("Q2", "C12", 85.0),
            ("Q2", "C23", 102.0),
            ("Q3", "C23", 102.0),
            ("Q1", "C13", 85.0),
            ("Q3", "C13", 85.0),
        ],
    )
    return CircuitSpec(qubits=qubits, couplers=couplers, graph=graph)


def _shared_coupler_spec() -> CircuitSpec:
    qubits = (
        QubitSpec("Q1", 4.8, -330.0),
        QubitSpec("Q2", 5.0, -330.0),
        QubitSpec("Q3", 5.1, -330.0),
    )
    couplers = (CouplerSpec("C", 6.0),)
    graph = make_graph(
        [("Q1", "Q2", 4.0), ("Q2", "Q3", 4.0), ("Q1", "Q3", 6.0)],
        [("Q1", "C", 85.0), ("Q2", "C", 102.0), ("Q3", "C", 102.0)],
    )
    return CircuitSpec(qubits=qubits, couplers=couplers, graph=graph)


def _chain_spec() -> CircuitSpec:
    base = _triangle_spec()
    couplers = tuple(c for c in base.couplers if c.label != "C13")
    graph = make_graph(
        [("Q1", "Q2", 4.0), ("Q2", "Q3", 4.0), ("Q1", "Q3", 0.0)],
        [e for e in base.graph.qubit_coupler if e[1] != "C13"],
    )
    return CircuitSpec(qubits=base.qubits, couplers=couplers, graph=graph)


def preset_circuit(name: str, overrides: dict | None = None) -> CircuitSpec:
    """Return a named preset with optional short-key overrides applied last."""
    builders = {
        "triangle_three_coupler": _triangle_spec,
        "shared_coupler": _shared_coupler_spec,
        "chain_two_coupler": _chain_spec,
    }
    if name not in builders:
        raise ValidationError(f"unknown preset {name!r}; choose from {', '.join(PRESET_NAMES)}")
    spec = builders[name]()
    for key, value in (overrides or {}).items():
        spec = apply_parameter(spec, key, value)
    return spec


# Operating points where the survey maps put the spectator couplings
# J12 and J13 through zero (coupler frequencies in GHz, g12 in MHz).
HARD_DECOUPLING_SPOTS = {
    "A": {"g12": 4.0, "wc12": 6.66, "wc23": 5.299, "wc13": 6.141},
    "B": {"g12": 4.0, "wc12": 6.67, "wc23": 5.405, "wc13": 6.15},
    "C": {"g12": 4.0, "wc12": 6.68, "wc23": 5.275, "wc13": 6.154},
    "D": {"g12": 13.0, "wc12": 5.438, "wc23": 5.317, "wc13": 6.021},
    "E": {"g12": 13.0, "wc12": 5.443, "wc23": 5.472, "wc13": 6.076},
    "F": {"g12": 13.0, "wc12": 5.446, "wc23": 5.621, "wc13": 6.098},
}

# Configurations that keep a ~MHz residual J12 instead of nulling it.
SOFT_DECOUPLING_POINTS = {
    "weak": {"g12": 4.0, "wc12": 6.2},
    "strong": {"g12": 16.0, "wc12": 5.3},
}

# All survey presets fix the middle qubit here.
SURVEY_W2_GHZ = 5.0
