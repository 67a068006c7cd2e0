"""Inverse construction of local fields that reproduce a reference sigma_z trajectory.

Given a reference chain (couplings, fields, initial state) and an auxiliary
chain with different couplings, the auxiliary fields are solved bond by bond
so that every auxiliary bond current has the same time derivative as the
reference one. Since the current equations only fix nearest-neighbour field
differences, one "gauge" qubit copies the reference field.

The auxiliary Schrodinger equation then depends on its own state through the
fields, and the two systems are co-propagated with RK4. Two update modes:

``"step"``
    fields solved once at the start of each step and held constant over it
    (first order in dt for the reproduction error).
``"stage"``
    fields re-solved at each RK4 stage from the stage states, making the
    coupled integration fourth order.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np

from . import spinops
from .model import (
    OPEN_CHAIN,
    ChainModel,
    FieldSchedule,
    RecordFlags,
    VLConfig,
    build_initial_state,
    state_from_amplitudes,
)
from .observables import bond_observables, local_polarizations
from .propagator import Trajectory, _Recorder, _check_norm, _rk4, propagate_state
from .spinops import HamiltonianPart

logger = logging.getLogger(__name__)

__all__ = [
    "CompatibilityReport",
    "IncompatibleInitialState",
    "VLConfig",
    "VLResult",
    "compatibility_check",
    "field_solve_relative",
    "field_solve_step",
    "vl_construct",
]


class IncompatibleInitialState(ValueError):
    """Auxiliary initial state does not reproduce the reference currents and polarizations."""


@dataclass
class CompatibilityReport:
    current_mismatch: np.ndarray
    sigma_mismatch: np.ndarray
    aux_initial_kinetics: np.ndarray
    tolerance: float
    warnings: list[str] = field(default_factory=list)

    @property
    def compatible(self) -> bool:
        worst = max(np.abs(self.current_mismatch).max(initial=0.0), np.abs(self.sigma_mismatch).max(initial=0.0))
        return bool(worst <= self.tolerance)


def compatibility_check(reference_initial: np.ndarray, aux_initial: np.ndarray, reference_model: ChainModel,
                        aux_model: ChainModel, epsilon: float = 1e-8, tolerance: float = 1e-9) -> CompatibilityReport:
    """Compare initial currents and polarizations of the two systems.

    Each system's currents use its own couplings. Bonds whose auxiliary
    kinetic expectation is below ``epsilon`` in magnitude are flagged, since
    the field solve divides by it.
    """
    if reference_initial.shape != aux_initial.shape:
        raise ValueError("reference and auxiliary states have different dimensions")
    if reference_model.pairs != aux_model.pairs:
        raise ValueError("reference and auxiliary models must couple the same pairs")
    ref_j, _ = bond_observables(reference_initial, reference_model)
    aux_j, aux_t = bond_observables(aux_initial, aux_model)
    report = CompatibilityReport(
        current_mismatch=aux_j - ref_j,
        sigma_mismatch=local_polarizations(aux_initial) - local_polarizations(reference_initial),
        aux_initial_kinetics=aux_t,
        tolerance=tolerance,
    )
    for b, label in enumerate(aux_model.bond_labels()):
        if abs(aux_t[b]) < epsilon:
            report.warnings.append(f"bond {label}: initial auxiliary <T> = {aux_t[b]:.3e} is below epsilon; "
                                   "the field there is regularized")
    return report


def _regularized_denominator(kinetic: np.ndarray, epsilon: float) -> tuple[np.ndarray, list[int]]:
    denom = 4.0 * kinetic
    small = np.abs(denom) < epsilon
    regularized = [int(b) for b in np.flatnonzero(small)]
    if regularized:
        denom = np.where(small, np.where(denom < 0, -epsilon, epsilon), denom)
    return denom, regularized


def _telescope(base: np.ndarray, diffs: np.ndarray, gauge_qubit: int, gauge_value: float) -> np.ndarray:
    """``out[q] - out[q+1] = base[q] - base[q+1] + diffs[q]`` with ``out[gauge_qubit] = gauge_value``."""
    n = base.size
    offset = np.zeros(n)
    for q in range(gauge_qubit - 1, -1, -1):
        offset[q] = offset[q + 1] + diffs[q]
    for q in range(gauge_qubit + 1, n):
        offset[q] = offset[q - 1] - diffs[q - 1]
    out = base + offset + (gauge_value - base[gauge_qubit])
    out[gauge_qubit] = gauge_value
    return out


def field_solve_step(aux_state: np.ndarray, aux_model: ChainModel, target_dj, gauge_qubit: int,
                     gauge_value: float, epsilon: float = 1e-8) -> tuple[np.ndarray, list[int]]:
    """Auxiliary fields giving the auxiliary currents the time derivatives ``target_dj``.

    On bond ``(k, k+1)`` the field term contributes ``4 <T'> (h_k - h_{k+1})``
    to ``d<j'>/dt``, the two-qubit terms contribute ``i<[H'_2q, j']>``. Each
    bond fixes one difference; the chain is telescoped from ``gauge_qubit``.

    Returns the fields and the list of bonds whose ``|4<T'>|`` fell below
    ``epsilon`` and was replaced by ``sign * epsilon``.
    """
    if aux_model.topology != OPEN_CHAIN:
        raise ValueError("field solve requires an open nearest-neighbour chain")
    internal = spinops.commutator_expectations(aux_state, aux_model, HamiltonianPart.TWO_QUBIT)
    _, kinetic = bond_observables(aux_state, aux_model)
    denom, regularized = _regularized_denominator(kinetic, epsilon)
    diffs = (np.asarray(target_dj, dtype=float) - internal) / denom  # h_k - h_{k+1}
    return _telescope(np.zeros(aux_model.n_qubits), diffs, gauge_qubit, gauge_value), regularized


def field_solve_relative(aux_state: np.ndarray, aux_model: ChainModel, reference_state: np.ndarray,
                         reference_model: ChainModel, reference_fields, gauge_qubit: int, gauge_value: float,
                         epsilon: float = 1e-8) -> tuple[np.ndarray, list[int]]:
    """Same solve as :func:`field_solve_step`, written as a correction to the reference fields.

    The target splits into ``A + 4<T>(h_k - h_{k+1})`` on the reference side,
    so each bond difference is the reference difference plus

        ((<T> - <T'>) / <T'>) (h_k - h_{k+1}) + (A - A') / (4<T'>)

    This avoids subtracting two nearly equal commutators and dividing the
    remainder by a small ``<T'>``: when the two systems coincide the
    correction vanishes identically rather than up to amplified roundoff.
    """
    if aux_model.topology != OPEN_CHAIN or reference_model.topology != OPEN_CHAIN:
        raise ValueError("field solve requires open nearest-neighbour chains")
    h = np.asarray(reference_fields, dtype=float)
    ref_internal = spinops.commutator_expectations(reference_state, reference_model, HamiltonianPart.TWO_QUBIT)
    aux_internal = spinops.commutator_expectations(aux_state, aux_model, HamiltonianPart.TWO_QUBIT)
    _, ref_kinetic = bond_observables(reference_state, reference_model)
    _, aux_kinetic = bond_observables(aux_state, aux_model)
    denom, regularized = _regularized_denominator(aux_kinetic, epsilon)
    ref_diffs = h[:-1] - h[1:]
    corrections = (4.0 * ref_kinetic - denom) / denom * ref_diffs + (ref_internal - aux_internal) / denom
    return _telescope(h, corrections, gauge_qubit, gauge_value), regularized


@dataclass
class VLResult:
    aux_fields: np.ndarray
    aux_trajectory: Trajectory
    reference_trajectory: Trajectory
    max_sigma_deviation: float
    max_current_deviation: float
    regularization_events: list[tuple[float, int]]
    tolerance: float
    field_update: str

    @property
    def success(self) -> bool:
        return bool(self.max_sigma_deviation <= self.tolerance)

    def regularization_counts(self, n_bonds: int) -> list[int]:
        counts = [0] * n_bonds
        for _, b in self.regularization_events:
            counts[b] += 1
        return counts


def vl_construct(reference_model: ChainModel, reference_schedule: FieldSchedule, reference_initial: np.ndarray,
                 config: VLConfig, t_end: float, n_steps: int, reference: Trajectory | None = None,
                 field_update: str | None = None) -> VLResult:
    """Construct auxiliary fields reproducing the reference polarizations on a uniform grid.

    The reference is co-propagated unless ``reference`` (a trajectory with
    snapshots on the same grid) is supplied, which is only possible in
    ``"step"`` mode. Target current derivatives come from the exact commutator
    on the reference state, never from finite differences.

    Raises :class:`IncompatibleInitialState` if the auxiliary initial state
    does not match the reference currents and polarizations within 1e-9.
    """
    mode = field_update or config.field_update
    if mode not in ("step", "stage"):
        raise ValueError(f"unknown field update mode {mode!r}")
    if reference_model.topology != OPEN_CHAIN:
        raise ValueError("the reference model must be an open nearest-neighbour chain")
    aux_model = config.aux_model
    if config.aux_initial_state is None:
        aux_initial = np.array(reference_initial, dtype=complex)
    else:
        aux_initial = state_from_amplitudes(aux_model.n_qubits, config.aux_initial_state)
    compat = compatibility_check(reference_initial, aux_initial, reference_model, aux_model, config.epsilon)
    for w in compat.warnings:
        logger.warning(w)
    if not compat.compatible:
        raise IncompatibleInitialState(
            f"max current mismatch {np.abs(compat.current_mismatch).max(initial=0):.3e}, "
            f"max sigma_z mismatch {np.abs(compat.sigma_mismatch).max(initial=0):.3e} exceed {compat.tolerance:g}"
        )

    dt = t_end / n_steps
    times = np.arange(n_steps + 1) * dt
    ref_fields = reference_schedule.values_on(times)
    ref_mid = reference_schedule.values_on(times[:-1] + 0.5 * dt)
    g = config.gauge_qubit
    eps = config.epsilon
    events: list[tuple[float, int]] = []

    if reference is not None:
        if mode != "step":
            raise ValueError("a precomputed reference trajectory only supports field_update='step'")
        if reference.snapshots is None or len(reference.times) != n_steps + 1:
            raise ValueError("reference trajectory needs snapshots on the same grid")
        ref_traj = reference
    else:
        ref_traj = None

    def solve(psi_aux, psi_ref, h_ref, t):
        fields, reg = field_solve_relative(psi_aux, aux_model, psi_ref, reference_model, h_ref, g, h_ref[g], eps)
        events.extend((t, b) for b in reg)
        return fields

    def f(model, h, v):
        return -1j * spinops.apply_hamiltonian_part(v, model, h, HamiltonianPart.FULL)

    aux_rec = _Recorder(aux_model, n_steps + 1, RecordFlags(), keep_snapshots=True)
    ref_rec = None if ref_traj is not None else _Recorder(reference_model, n_steps + 1, RecordFlags(), True)
    aux_fields = np.empty((n_steps + 1, aux_model.n_qubits))

    psi_ref = np.array(reference_initial, dtype=complex)
    psi_aux = aux_initial.copy()
    aux_rec(0, psi_aux)
    if ref_rec is not None:
        ref_rec(0, psi_ref)
    for m in range(n_steps):
        t = times[m]
        if ref_traj is not None:
            psi_ref = ref_traj.snapshots[m]
        h0, hm, h1 = ref_fields[m], ref_mid[m], ref_fields[m + 1]
        if mode == "step":
            hp = solve(psi_aux, psi_ref, h0, t)
            aux_fields[m] = hp
            if ref_rec is not None:
                psi_ref = _rk4(reference_model, psi_ref, dt, h0, hm, h1)
            psi_aux = _rk4(aux_model, psi_aux, dt, hp, hp, hp)
        else:
            hp1 = solve(psi_aux, psi_ref, h0, t)
            aux_fields[m] = hp1
            k1, l1 = f(reference_model, h0, psi_ref), f(aux_model, hp1, psi_aux)
            r2, a2 = psi_ref + 0.5 * dt * k1, psi_aux + 0.5 * dt * l1
            hp2 = solve(a2, r2, hm, t + 0.5 * dt)
            k2, l2 = f(reference_model, hm, r2), f(aux_model, hp2, a2)
            r3, a3 = psi_ref + 0.5 * dt * k2, psi_aux + 0.5 * dt * l2
            hp3 = solve(a3, r3, hm, t + 0.5 * dt)
            k3, l3 = f(reference_model, hm, r3), f(aux_model, hp3, a3)
            r4, a4 = psi_ref + dt * k3, psi_aux + dt * l3
            hp4 = solve(a4, r4, h1, t + dt)
            k4, l4 = f(reference_model, h1, r4), f(aux_model, hp4, a4)
            psi_ref = psi_ref + (dt / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)
            psi_aux = psi_aux + (dt / 6.0) * (l1 + 2 * l2 + 2 * l3 + l4)
        aux_rec(m + 1, psi_aux)
        _check_norm(aux_rec.norms[m + 1], m + 1, times[m + 1], dt)
        if ref_rec is not None:
            ref_rec(m + 1, psi_ref)
    if ref_traj is not None:
        psi_ref = ref_traj.snapshots[n_steps]
    aux_fields[n_steps] = solve(psi_aux, psi_ref, ref_fields[n_steps], times[n_steps])

    if ref_traj is None:
        ref_traj = ref_rec.trajectory(times, ref_fields)
    aux_traj = aux_rec.trajectory(times, aux_fields)
    if ref_traj.sigma_z is None or ref_traj.currents is None:
        ref_sigma = np.array([local_polarizations(s) for s in ref_traj.snapshots])
        ref_cur = np.array([bond_observables(s, reference_model)[0] for s in ref_traj.snapshots])
    else:
        ref_sigma, ref_cur = ref_traj.sigma_z, ref_traj.currents
    return VLResult(
        aux_fields=aux_fields,
        aux_trajectory=aux_traj,
        reference_trajectory=ref_traj,
        max_sigma_deviation=float(np.abs(aux_traj.sigma_z - ref_sigma).max()),
        max_current_deviation=float(np.abs(aux_traj.currents - ref_cur).max(initial=0.0)),
        regularization_events=events,
        tolerance=config.tolerance,
        field_update=mode,
    )


def vl_from_spec(spec, field_update: str | None = None) -> VLResult:
    """Run :func:`vl_construct` for an experiment config carrying a ``vl`` block."""
    if spec.vl is None:
        raise ValueError("experiment has no vl block")
    return vl_construct(spec.model, spec.schedule, build_initial_state(spec), spec.vl, spec.t_end, spec.n_steps,
                        field_update=field_update)


def reference_propagation(spec) -> Trajectory:
    """Reference run with snapshots, suitable as ``reference=`` for :func:`vl_construct`."""
    return propagate_state(spec.model, spec.schedule, build_initial_state(spec), spec.t_end, spec.n_steps,
                           snapshots=True)
