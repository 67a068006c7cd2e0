"""Fixed-step RK4 integration of ``i d/dt |psi> = H(t) |psi>``."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import spinops
from .model import ChainModel, ExperimentSpec, FieldSchedule, RecordFlags, build_initial_state
from .observables import bond_observables, local_polarizations

NORM_ABORT = 1e-6


class NumericalAbort(RuntimeError):
    """Propagation stopped because the norm drifted beyond tolerance."""


@dataclass
class Trajectory:
    """Observables on a uniform grid; row ``m`` belongs to ``times[m]``.

    ``currents``/``kinetics`` columns follow the model's bond order
    (``k < i``); ``field_values`` are the fields driving the evolution at
    each grid time.
    """

    times: np.ndarray
    sigma_z: np.ndarray | None
    currents: np.ndarray | None
    kinetics: np.ndarray | None
    field_values: np.ndarray
    norms: np.ndarray
    bond_labels: list[str]
    snapshots: np.ndarray | None = None
    meta: dict = field(default_factory=dict)

    @property
    def n_steps(self) -> int:
        return len(self.times) - 1

    @property
    def dt(self) -> float:
        return float(self.times[1] - self.times[0])

    @property
    def n_qubits(self) -> int:
        return self.field_values.shape[1]


def _rk4(model: ChainModel, psi: np.ndarray, dt: float, h0, hmid, h1) -> np.ndarray:
    def f(h, v):
        return -1j * spinops.apply_hamiltonian_part(v, model, h, spinops.HamiltonianPart.FULL)

    k1 = f(h0, psi)
    k2 = f(hmid, psi + 0.5 * dt * k1)
    k3 = f(hmid, psi + 0.5 * dt * k2)
    k4 = f(h1, psi + dt * k3)
    return psi + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)


def rk4_step(model: ChainModel, schedule: FieldSchedule, state: np.ndarray, t: float, dt: float) -> np.ndarray:
    """One classical RK4 step from ``t`` to ``t + dt``.

    A negative ``dt`` integrates backwards in time; ``dt == 0`` is rejected.
    """
    if dt == 0:
        raise ValueError("dt must be non-zero")
    if state.shape != (model.dim,):
        raise ValueError("state dimension does not match model")
    return _rk4(model, state, dt, schedule.values(t), schedule.values(t + 0.5 * dt), schedule.values(t + dt))


class _Recorder:
    def __init__(self, model: ChainModel, n_points: int, record, keep_snapshots: bool):
        self.model = model
        self.record = record
        nq, nb = model.n_qubits, model.n_bonds
        self.sigma = np.empty((n_points, nq)) if record.sigma_z else None
        self.cur = np.empty((n_points, nb)) if record.currents else None
        self.kin = np.empty((n_points, nb)) if record.kinetics else None
        self.norms = np.empty(n_points)
        self.snaps = np.empty((n_points, model.dim), dtype=complex) if keep_snapshots else None

    def __call__(self, m: int, psi: np.ndarray) -> None:
        self.norms[m] = np.sqrt(np.vdot(psi, psi).real)
        if self.sigma is not None:
            self.sigma[m] = local_polarizations(psi)
        if self.cur is not None or self.kin is not None:
            c, k = bond_observables(psi, self.model)
            if self.cur is not None:
                self.cur[m] = c
            if self.kin is not None:
                self.kin[m] = k
        if self.snaps is not None:
            self.snaps[m] = psi

    def trajectory(self, times, fields) -> Trajectory:
        return Trajectory(times, self.sigma, self.cur, self.kin, fields, self.norms,
                          self.model.bond_labels(), self.snaps)


def _check_norm(norm: float, m: int, t: float, dt: float) -> None:
    drift = abs(norm - 1.0)
    if not drift <= NORM_ABORT:
        raise NumericalAbort(
            f"norm drift {drift:.3e} exceeds {NORM_ABORT:g} at step {m} (t={t:.6g}) with dt={dt:.3g}; "
            f"reduce the step size (try dt <= {dt / 4:.3g})"
        )


def propagate_state(model: ChainModel, schedule: FieldSchedule, psi0: np.ndarray, t_end: float, n_steps: int,
                    record=None, snapshots: bool = False) -> Trajectory:
    """Propagate ``psi0`` over ``[0, t_end]`` in ``n_steps`` equal RK4 steps, recording every grid point."""
    record = record or RecordFlags()
    dt = t_end / n_steps
    times = np.arange(n_steps + 1) * dt
    fields = schedule.values_on(times)
    fields_mid = schedule.values_on(times[:-1] + 0.5 * dt)
    rec = _Recorder(model, n_steps + 1, record, snapshots or record.snapshots)
    psi = np.array(psi0, dtype=complex)
    rec(0, psi)
    for m in range(n_steps):
        psi = _rk4(model, psi, dt, fields[m], fields_mid[m], fields[m + 1])
        rec(m + 1, psi)
        _check_norm(rec.norms[m + 1], m + 1, times[m + 1], dt)
    traj = rec.trajectory(times, fields)
    traj.meta["final_state"] = psi
    return traj


def propagate(spec: ExperimentSpec, snapshots: bool | None = None) -> Trajectory:
    """Run the forward simulation described by ``spec``."""
    keep = spec.record.snapshots if snapshots is None else snapshots
    return propagate_state(spec.model, spec.schedule, build_initial_state(spec), spec.t_end, spec.n_steps,
                           spec.record, keep)
