"""Chain models, field schedules and experiment configs.

Qubit indices are 0-based in the Python API and 1-based in config files and
reports. Energies are in units of J with hbar = 1; times are in hbar/2J.
"""
from __future__ import annotations

import json
import logging
import math
from dataclasses import dataclass, field, replace
from functools import cached_property
from importlib import resources
from pathlib import Path
from typing import Union

import numpy as np

from . import spinops

logger = logging.getLogger(__name__)

OPEN_CHAIN = "open_chain"
GENERAL_GRAPH = "general_graph"
TOPOLOGIES = (OPEN_CHAIN, GENERAL_GRAPH)
PRESETS = ("heisenberg", "xy", "xxz")


class ConfigError(ValueError):
    """Invalid experiment config; the message names the offending location."""


@dataclass(frozen=True)
class Bond:
    k: int
    i: int
    j_perp: float
    j_par: float = 0.0


@dataclass(frozen=True)
class ChainModel:
    """Qubits coupled pairwise by ``J_perp (xx + yy) + J_par zz``.

    Bonds are stored with ``k < i`` and sorted. ``topology`` is
    ``"open_chain"`` (exactly the nearest-neighbour pairs) or
    ``"general_graph"``.
    """

    n_qubits: int
    bonds: tuple[Bond, ...]
    topology: str = OPEN_CHAIN

    def __post_init__(self):
        if self.n_qubits < 1:
            raise ValueError("n_qubits must be >= 1")
        if self.topology not in TOPOLOGIES:
            raise ValueError(f"unknown topology {self.topology!r}")
        normalized = []
        seen = set()
        for b in self.bonds:
            k, i = int(b.k), int(b.i)
            if k == i:
                raise ValueError(f"bond ({k}, {i}) couples a qubit to itself")
            if not (0 <= k < self.n_qubits and 0 <= i < self.n_qubits):
                raise ValueError(f"bond ({k}, {i}) out of range for {self.n_qubits} qubits")
            k, i = min(k, i), max(k, i)
            if (k, i) in seen:
                raise ValueError(f"duplicate bond ({k}, {i})")
            seen.add((k, i))
            normalized.append(Bond(k, i, float(b.j_perp), float(b.j_par)))
        normalized.sort(key=lambda b: (b.k, b.i))
        object.__setattr__(self, "bonds", tuple(normalized))
        if self.topology == OPEN_CHAIN:
            expected = [(q, q + 1) for q in range(self.n_qubits - 1)]
            if [(b.k, b.i) for b in self.bonds] != expected:
                raise ValueError("open_chain topology requires exactly the nearest-neighbour pairs (q, q+1)")

    @classmethod
    def chain(cls, n_qubits: int, j_perp, j_par=0.0) -> "ChainModel":
        """Open nearest-neighbour chain; couplings may be scalars or per-bond sequences."""
        nb = n_qubits - 1
        jp = np.broadcast_to(np.asarray(j_perp, dtype=float), (nb,))
        jz = np.broadcast_to(np.asarray(j_par, dtype=float), (nb,))
        return cls(n_qubits, tuple(Bond(q, q + 1, jp[q], jz[q]) for q in range(nb)), OPEN_CHAIN)

    @classmethod
    def heisenberg(cls, n_qubits: int, j) -> "ChainModel":
        return cls.chain(n_qubits, j, j)

    @classmethod
    def xy(cls, n_qubits: int, j_perp) -> "ChainModel":
        return cls.chain(n_qubits, j_perp, 0.0)

    @property
    def pairs(self) -> list[tuple[int, int]]:
        return [(b.k, b.i) for b in self.bonds]

    @property
    def n_bonds(self) -> int:
        return len(self.bonds)

    @property
    def dim(self) -> int:
        return 1 << self.n_qubits

    @property
    def preset(self) -> str | None:
        """``"heisenberg"``, ``"xy"`` or ``"xxz"`` for chains, by coupling pattern."""
        if self.topology != OPEN_CHAIN or not self.bonds:
            return None
        if all(b.j_par == 0.0 for b in self.bonds):
            return "xy"
        if all(b.j_perp == b.j_par for b in self.bonds):
            return "heisenberg"
        return "xxz"

    @cached_property
    def kernel(self) -> spinops.BondKernel:
        return spinops.build_bond_kernel(
            self.n_qubits,
            self.pairs,
            [b.j_perp for b in self.bonds],
            [b.j_par for b in self.bonds],
        )

    @cached_property
    def incidence(self) -> np.ndarray:
        """``D[q, b]`` such that ``d sigma_z / dt = -D @ currents``.

        ``+1`` where ``q`` is the larger index of bond ``b``, ``-1`` where it is
        the smaller one (currents are stored as ``j_ki`` with ``k < i``).
        """
        d = np.zeros((self.n_qubits, self.n_bonds))
        for b, bond in enumerate(self.bonds):
            d[bond.i, b] = 1.0
            d[bond.k, b] = -1.0
        return d

    def bond_labels(self) -> list[str]:
        return [f"{b.k + 1}_{b.i + 1}" for b in self.bonds]


# -- field schedules ---------------------------------------------------------


@dataclass(frozen=True)
class SineSum:
    """``amplitude * sum_n sign_n sin(omega_n t)``."""

    amplitude: float
    omegas: tuple[float, ...]
    signs: tuple[float, ...]

    def __post_init__(self):
        if len(self.omegas) != len(self.signs):
            raise ValueError("omegas and signs must have equal length")
        object.__setattr__(self, "omegas", tuple(float(w) for w in self.omegas))
        object.__setattr__(self, "signs", tuple(float(s) for s in self.signs))
        object.__setattr__(self, "amplitude", float(self.amplitude))

    analytic = True

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        total = np.zeros_like(t)
        for w, s in zip(self.omegas, self.signs):
            total = total + s * np.sin(w * t)
        return self.amplitude * total


@dataclass(frozen=True)
class Constant:
    value: float

    analytic = True

    def __post_init__(self):
        object.__setattr__(self, "value", float(self.value))

    def __call__(self, t):
        return np.full_like(np.asarray(t, dtype=float), self.value)


@dataclass(frozen=True)
class Samples:
    """Uniform samples ``values[n]`` at ``t0 + n*dt`` with linear interpolation.

    Not analytic; evaluation outside the sampled window raises.
    """

    t0: float
    dt: float
    values: tuple[float, ...]

    analytic = False

    def __post_init__(self):
        if self.dt <= 0 or len(self.values) < 2:
            raise ValueError("samples need dt > 0 and at least two values")
        object.__setattr__(self, "values", tuple(float(v) for v in self.values))
        object.__setattr__(self, "t0", float(self.t0))
        object.__setattr__(self, "dt", float(self.dt))

    @property
    def t_end(self) -> float:
        return self.t0 + self.dt * (len(self.values) - 1)

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        slack = 1e-12 * max(1.0, abs(self.t_end))
        if np.any(t < self.t0 - slack) or np.any(t > self.t_end + slack):
            raise ValueError(f"t outside sampled window [{self.t0}, {self.t_end}]")
        grid = self.t0 + self.dt * np.arange(len(self.values))
        return np.interp(t, grid, np.asarray(self.values))


FieldTerm = Union[SineSum, Constant, Samples]


@dataclass(frozen=True)
class FieldSchedule:
    """Per-qubit local fields ``h_q(t)``, each a sum of terms."""

    terms: tuple[tuple[FieldTerm, ...], ...]

    def __post_init__(self):
        object.__setattr__(self, "terms", tuple(tuple(ts) for ts in self.terms))

    @classmethod
    def zeros(cls, n_qubits: int) -> "FieldSchedule":
        return cls(((),) * n_qubits)

    @property
    def n_qubits(self) -> int:
        return len(self.terms)

    @property
    def analytic(self) -> bool:
        return all(term.analytic for ts in self.terms for term in ts)

    def evaluate(self, qubit: int, t):
        if not 0 <= qubit < self.n_qubits:
            raise IndexError(f"qubit {qubit} out of range")
        total = np.zeros_like(np.asarray(t, dtype=float))
        for term in self.terms[qubit]:
            total = total + term(t)
        return total if total.ndim else float(total)

    def values(self, t: float) -> np.ndarray:
        """All fields at one time, shape ``(n_qubits,)``."""
        return np.array([self.evaluate(q, t) for q in range(self.n_qubits)], dtype=float)

    def values_on(self, times) -> np.ndarray:
        """Fields on a time array, shape ``(len(times), n_qubits)``."""
        times = np.asarray(times, dtype=float)
        return np.stack([np.asarray(self.evaluate(q, times)) for q in range(self.n_qubits)], axis=-1)

    def shifted(self, shift: "GlobalFieldShift") -> "FieldSchedule":
        return FieldSchedule(tuple(ts + (shift.term,) for ts in self.terms))


def evaluate_field(schedule: FieldSchedule, qubit: int, t):
    return schedule.evaluate(qubit, t)


@dataclass(frozen=True)
class GlobalFieldShift:
    """A term ``C(t)`` added identically to every qubit's field."""

    term: FieldTerm


# -- hamiltonian and states --------------------------------------------------


def apply_hamiltonian(model: ChainModel, fields_at_t, state: np.ndarray) -> np.ndarray:
    """``H(t)|state>`` for the chain plus local z-fields."""
    if state.shape != (model.dim,):
        raise ValueError(f"state has shape {state.shape}, model needs ({model.dim},)")
    return spinops.apply_hamiltonian_part(state, model, fields_at_t, spinops.HamiltonianPart.FULL)


def label_to_index(label: str) -> int:
    """Basis index of a bitstring whose character ``q`` is qubit ``q``."""
    if not label or any(c not in "01" for c in label):
        raise ValueError(f"basis label {label!r} must be a non-empty 0/1 string")
    return sum(1 << q for q, c in enumerate(label) if c == "1")


def index_to_label(index: int, n_qubits: int) -> str:
    return "".join("1" if (index >> q) & 1 else "0" for q in range(n_qubits))


def state_from_amplitudes(n_qubits: int, amplitudes, *, renormalize_tol: float = 1e-12) -> np.ndarray:
    """Build a state from ``(label, amplitude)`` pairs.

    Amplitudes whose norm is off by more than ``renormalize_tol`` are
    renormalized with a warning.
    """
    psi = np.zeros(1 << n_qubits, dtype=complex)
    seen = set()
    for label, amp in amplitudes:
        if len(label) != n_qubits:
            raise ValueError(f"label {label!r} has length {len(label)}, expected {n_qubits}")
        if label in seen:
            raise ValueError(f"duplicate basis label {label!r}")
        seen.add(label)
        psi[label_to_index(label)] = complex(amp)
    norm = np.linalg.norm(psi)
    if norm == 0:
        raise ValueError("initial state has zero norm")
    if abs(norm - 1.0) > renormalize_tol:
        logger.warning("initial state norm %.12g, renormalizing", norm)
        psi /= norm
    return psi


# -- experiment specs --------------------------------------------------------


@dataclass(frozen=True)
class RecordFlags:
    sigma_z: bool = True
    currents: bool = True
    kinetics: bool = True
    snapshots: bool = False


@dataclass(frozen=True)
class VLConfig:
    """Auxiliary system for the inverse (field-construction) map."""

    aux_model: ChainModel
    aux_initial_state: tuple[tuple[str, complex], ...] | None = None
    gauge_qubit: int = 0
    epsilon: float = 1e-8
    tolerance: float = 1e-3
    field_update: str = "step"

    def __post_init__(self):
        if self.aux_model.topology != OPEN_CHAIN:
            raise ValueError("the auxiliary model must be an open nearest-neighbour chain")
        if self.epsilon <= 0:
            raise ValueError("epsilon must be positive")
        if self.field_update not in ("step", "stage"):
            raise ValueError("field_update must be 'step' or 'stage'")
        if not 0 <= self.gauge_qubit < self.aux_model.n_qubits:
            raise ValueError("gauge qubit out of range")


@dataclass(frozen=True)
class ExperimentSpec:
    model: ChainModel
    schedule: FieldSchedule
    initial_state: tuple[tuple[str, complex], ...]
    t_end: float
    n_steps: int
    record: RecordFlags = field(default_factory=RecordFlags)
    vl: VLConfig | None = None

    def __post_init__(self):
        if self.n_steps < 1:
            raise ValueError("n_steps must be >= 1")
        if not self.t_end > 0:
            raise ValueError("t_end must be > 0")
        if self.schedule.n_qubits != self.model.n_qubits:
            raise ValueError("schedule and model disagree on the number of qubits")

    @property
    def dt(self) -> float:
        return self.t_end / self.n_steps

    @property
    def times(self) -> np.ndarray:
        return np.arange(self.n_steps + 1) * self.dt

    def with_grid(self, *, n_steps: int | None = None, dt: float | None = None) -> "ExperimentSpec":
        """Copy with a different step count or step size (``t_end`` is kept when only ``n_steps`` changes)."""
        if dt is not None:
            steps = n_steps if n_steps is not None else max(1, round(self.t_end / dt))
            return replace(self, n_steps=steps, t_end=steps * dt)
        if n_steps is not None:
            return replace(self, n_steps=n_steps)
        return self


def build_initial_state(spec: ExperimentSpec) -> np.ndarray:
    return state_from_amplitudes(spec.model.n_qubits, spec.initial_state)


# -- config parsing ----------------------------------------------------------


def _require(doc: dict, key: str, where: str):
    if not isinstance(doc, dict):
        raise ConfigError(f"{where}: expected an object")
    if key not in doc:
        raise ConfigError(f"{where}: missing key '{key}'")
    return doc[key]


def _check_keys(doc: dict, allowed: set, where: str) -> None:
    extra = set(doc) - allowed
    if extra:
        raise ConfigError(f"{where}: unknown keys {sorted(extra)}")


def _number(value, where: str) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(f"{where}: expected a number, got {value!r}")
    return float(value)


def _per_bond(value, nb: int, where: str) -> list[float]:
    if isinstance(value, list):
        if len(value) != nb:
            raise ConfigError(f"{where}: expected {nb} per-bond values, got {len(value)}")
        return [_number(v, f"{where}[{n}]") for n, v in enumerate(value)]
    return [_number(value, where)] * nb


def _parse_model(doc: dict, where: str) -> ChainModel:
    _check_keys(doc, {"n_qubits", "preset", "J", "J_perp", "J_par", "pairs", "topology"}, where)
    n = _require(doc, "n_qubits", where)
    if isinstance(n, bool) or not isinstance(n, int) or n < 1:
        raise ConfigError(f"{where}.n_qubits: expected an integer >= 1")
    nb = n - 1
    if "preset" in doc:
        preset = doc["preset"]
        if preset not in PRESETS:
            raise ConfigError(f"{where}.preset: unknown preset {preset!r} (choose from {PRESETS})")
        if "pairs" in doc:
            raise ConfigError(f"{where}: give either 'preset' or 'pairs', not both")
        if preset == "heisenberg":
            j = _per_bond(_require(doc, "J", where), nb, f"{where}.J")
            jp, jz = j, j
        elif preset == "xy":
            jp = _per_bond(_require(doc, "J_perp", where), nb, f"{where}.J_perp")
            jz = [0.0] * nb
        else:
            jp = _per_bond(_require(doc, "J_perp", where), nb, f"{where}.J_perp")
            jz = _per_bond(_require(doc, "J_par", where), nb, f"{where}.J_par")
        return ChainModel.chain(n, jp, jz)
    pairs = _require(doc, "pairs", where)
    topology = doc.get("topology", OPEN_CHAIN)
    if topology not in TOPOLOGIES:
        raise ConfigError(f"{where}.topology: unknown topology {topology!r}")
    bonds = []
    for n_pair, p in enumerate(pairs):
        loc = f"{where}.pairs[{n_pair}]"
        _check_keys(p, {"k", "i", "J_perp", "J_par"}, loc)
        k, i = _require(p, "k", loc), _require(p, "i", loc)
        if not all(isinstance(v, int) and not isinstance(v, bool) for v in (k, i)):
            raise ConfigError(f"{loc}: qubit indices must be integers")
        bonds.append(Bond(k - 1, i - 1, _number(_require(p, "J_perp", loc), f"{loc}.J_perp"),
                          _number(p.get("J_par", 0.0), f"{loc}.J_par")))
    try:
        return ChainModel(n, tuple(bonds), topology)
    except ValueError as exc:
        raise ConfigError(f"{where}: {exc}") from None


def _parse_term(doc: dict, where: str) -> FieldTerm:
    kind = _require(doc, "type", where)
    try:
        if kind == "sine_sum":
            _check_keys(doc, {"type", "amplitude", "omegas", "signs"}, where)
            omegas = _require(doc, "omegas", where)
            signs = doc.get("signs", [1.0] * len(omegas))
            return SineSum(_number(_require(doc, "amplitude", where), f"{where}.amplitude"),
                           tuple(_number(w, f"{where}.omegas") for w in omegas),
                           tuple(_number(s, f"{where}.signs") for s in signs))
        if kind == "constant":
            _check_keys(doc, {"type", "value"}, where)
            return Constant(_number(_require(doc, "value", where), f"{where}.value"))
        if kind == "samples":
            _check_keys(doc, {"type", "t0", "dt", "values"}, where)
            return Samples(_number(doc.get("t0", 0.0), f"{where}.t0"),
                           _number(_require(doc, "dt", where), f"{where}.dt"),
                           tuple(_number(v, f"{where}.values") for v in _require(doc, "values", where)))
    except ValueError as exc:
        if isinstance(exc, ConfigError):
            raise
        raise ConfigError(f"{where}: {exc}") from None
    raise ConfigError(f"{where}.type: unknown field term type {kind!r}")


def _parse_fields(doc: dict, n: int, where: str) -> FieldSchedule:
    if not isinstance(doc, dict):
        raise ConfigError(f"{where}: expected an object keyed by 1-based qubit index")
    terms: list[tuple] = [() for _ in range(n)]
    for key, items in doc.items():
        try:
            q = int(key)
        except ValueError:
            raise ConfigError(f"{where}: key {key!r} is not a qubit index") from None
        if not 1 <= q <= n:
            raise ConfigError(f"{where}.{key}: qubit out of range 1..{n}")
        if not isinstance(items, list):
            raise ConfigError(f"{where}.{key}: expected a list of terms")
        terms[q - 1] = tuple(_parse_term(t, f"{where}.{key}[{m}]") for m, t in enumerate(items))
    return FieldSchedule(tuple(terms))


def _parse_amplitude(value, where: str) -> complex:
    if isinstance(value, list):
        if len(value) != 2:
            raise ConfigError(f"{where}: complex amplitudes are [re, im]")
        return complex(_number(value[0], where), _number(value[1], where))
    return complex(_number(value, where))


def _parse_state(items, n: int, where: str) -> tuple[tuple[str, complex], ...]:
    if not isinstance(items, list) or not items:
        raise ConfigError(f"{where}: expected a non-empty list of {{label, amplitude}}")
    out = []
    seen = set()
    for m, item in enumerate(items):
        loc = f"{where}[{m}]"
        _check_keys(item, {"label", "amplitude"}, loc)
        label = _require(item, "label", loc)
        if not isinstance(label, str) or len(label) != n or any(c not in "01" for c in label):
            raise ConfigError(f"{loc}.label: expected a {n}-character 0/1 string, got {label!r}")
        if label in seen:
            raise ConfigError(f"{loc}.label: duplicate label {label!r}")
        seen.add(label)
        out.append((label, _parse_amplitude(_require(item, "amplitude", loc), f"{loc}.amplitude")))
    norm = math.sqrt(sum(abs(a) ** 2 for _, a in out))
    if abs(norm - 1.0) > 1e-12:
        if norm == 0:
            raise ConfigError(f"{where}: zero-norm state")
        logger.warning("%s: norm %.12g, renormalizing", where, norm)
        out = [(lab, a / norm) for lab, a in out]
    return tuple(out)


def parse_experiment(config) -> ExperimentSpec:
    """Validate a config document (JSON text or an already-loaded dict)."""
    if isinstance(config, (str, bytes)):
        try:
            doc = json.loads(config)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config is not valid JSON: {exc}") from None
    else:
        doc = config
    _check_keys(doc, {"model", "fields", "initial_state", "grid", "record", "vl", "name"}, "config")
    model = _parse_model(_require(doc, "model", "config"), "model")
    n = model.n_qubits
    schedule = _parse_fields(doc.get("fields", {}), n, "fields")
    initial = _parse_state(_require(doc, "initial_state", "config"), n, "initial_state")
    grid = _require(doc, "grid", "config")
    _check_keys(grid, {"t_end", "n_steps"}, "grid")
    t_end = _number(_require(grid, "t_end", "grid"), "grid.t_end")
    n_steps = _require(grid, "n_steps", "grid")
    if isinstance(n_steps, bool) or not isinstance(n_steps, int) or n_steps < 1:
        raise ConfigError(f"grid.n_steps: must be an integer >= 1, got {n_steps!r}")
    if not t_end > 0:
        raise ConfigError(f"grid.t_end: must be > 0, got {t_end!r}")
    rec = doc.get("record", {})
    _check_keys(rec, {"sigma_z", "currents", "kinetics", "snapshots"}, "record")
    for key, val in rec.items():
        if not isinstance(val, bool):
            raise ConfigError(f"record.{key}: expected a boolean")
    record = RecordFlags(**rec)
    vl = None
    if "vl" in doc:
        if model.topology != OPEN_CHAIN:
            raise ConfigError("vl: the reference model must be an open nearest-neighbour chain")
        v = doc["vl"]
        _check_keys(v, {"model", "initial_state", "gauge_qubit", "epsilon", "tolerance", "field_update"}, "vl")
        aux_model = _parse_model(_require(v, "model", "vl"), "vl.model")
        if aux_model.n_qubits != n:
            raise ConfigError("vl.model.n_qubits: must equal model.n_qubits")
        if aux_model.topology != OPEN_CHAIN:
            raise ConfigError("vl.model: the auxiliary model must be an open nearest-neighbour chain")
        aux_state = _parse_state(v["initial_state"], n, "vl.initial_state") if "initial_state" in v else None
        gauge = v.get("gauge_qubit", 1)
        if isinstance(gauge, bool) or not isinstance(gauge, int) or not 1 <= gauge <= n:
            raise ConfigError(f"vl.gauge_qubit: expected an integer in 1..{n}")
        try:
            vl = VLConfig(aux_model, aux_state, gauge - 1,
                          _number(v.get("epsilon", 1e-8), "vl.epsilon"),
                          _number(v.get("tolerance", 1e-3), "vl.tolerance"),
                          v.get("field_update", "step"))
        except ValueError as exc:
            raise ConfigError(f"vl: {exc}") from None
    return ExperimentSpec(model, schedule, initial, t_end, n_steps, record, vl)


def _model_doc(model: ChainModel) -> dict:
    return {
        "n_qubits": model.n_qubits,
        "topology": model.topology,
        "pairs": [{"k": b.k + 1, "i": b.i + 1, "J_perp": b.j_perp, "J_par": b.j_par} for b in model.bonds],
    }


def _term_doc(term: FieldTerm) -> dict:
    if isinstance(term, SineSum):
        return {"type": "sine_sum", "amplitude": term.amplitude, "omegas": list(term.omegas), "signs": list(term.signs)}
    if isinstance(term, Constant):
        return {"type": "constant", "value": term.value}
    return {"type": "samples", "t0": term.t0, "dt": term.dt, "values": list(term.values)}


def _state_doc(items) -> list:
    return [{"label": lab, "amplitude": [complex(a).real, complex(a).imag]} for lab, a in items]


def experiment_to_dict(spec: ExperimentSpec) -> dict:
    doc = {
        "model": _model_doc(spec.model),
        "fields": {str(q + 1): [_term_doc(t) for t in ts] for q, ts in enumerate(spec.schedule.terms) if ts},
        "initial_state": _state_doc(spec.initial_state),
        "grid": {"t_end": spec.t_end, "n_steps": spec.n_steps},
        "record": {
            "sigma_z": spec.record.sigma_z,
            "currents": spec.record.currents,
            "kinetics": spec.record.kinetics,
            "snapshots": spec.record.snapshots,
        },
    }
    if spec.vl is not None:
        v = spec.vl
        doc["vl"] = {
            "model": _model_doc(v.aux_model),
            "gauge_qubit": v.gauge_qubit + 1,
            "epsilon": v.epsilon,
            "tolerance": v.tolerance,
            "field_update": v.field_update,
        }
        if v.aux_initial_state is not None:
            doc["vl"]["initial_state"] = _state_doc(v.aux_initial_state)
    return doc


def serialize_experiment(spec: ExperimentSpec) -> str:
    """Canonical JSON text; ``parse_experiment(serialize_experiment(s)) == s``."""
    return json.dumps(experiment_to_dict(spec), indent=2, sort_keys=True)


def shipped_configs() -> list[str]:
    root = resources.files("qubit_tddft") / "configs"
    return sorted(p.name[:-5] for p in root.iterdir() if p.name.endswith(".json"))


def load_experiment(path_or_name: str | Path) -> ExperimentSpec:
    """Parse a config file, or a shipped config by name (e.g. ``"paper_fig3"``)."""
    path = Path(path_or_name)
    if path.is_file():
        text = path.read_text()
    else:
        name = str(path_or_name)
        if name in shipped_configs():
            text = (resources.files("qubit_tddft") / "configs" / f"{name}.json").read_text()
        else:
            raise ConfigError(f"config not found: {path_or_name}")
    return parse_experiment(text)
