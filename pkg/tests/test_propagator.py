import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from conftest import dense_expm_evolve, dense_hamiltonian, random_chain, random_state, seeds
from qubit_tddft.model import ChainModel, Constant, FieldSchedule, RecordFlags, SineSum, load_experiment
from qubit_tddft.propagator import NumericalAbort, propagate, propagate_state, rk4_step


def constant_schedule(values):
    return FieldSchedule(tuple((Constant(v),) for v in values))


@settings(max_examples=20, deadline=None)
@given(seed=seeds, n=st.integers(2, 4))
def test_static_fields_match_exact_exponential(seed, n):
    rng = np.random.default_rng(seed)
    model = random_chain(rng, n)
    h = rng.normal(size=n)
    psi0 = random_state(rng, n)
    traj = propagate_state(model, constant_schedule(h), psi0, 1.0, 2000)
    exact = dense_expm_evolve(dense_hamiltonian(model, h), psi0, 1.0)
    assert np.allclose(traj.meta["final_state"], exact, atol=1e-10)


def test_frozen_product_state():
    model = ChainModel.heisenberg(4, 1.0)
    psi0 = np.zeros(16, dtype=complex)
    psi0[0] = 1.0
    sched = FieldSchedule(tuple((SineSum(0.6, (1.0, 2.0), (1.0, -1.0)),) for _ in range(4)))
    traj = propagate_state(model, sched, psi0, 1.5, 500)
    # RK4 damps |psi| by about (E dt)^6 / 72 per step, ~1e-14 here
    assert np.abs(traj.sigma_z - 1.0).max() < 1e-10
    assert np.array_equal(traj.currents, np.zeros((501, 3)))
    assert np.array_equal(traj.kinetics, np.zeros((501, 3)))
    assert np.count_nonzero(traj.meta["final_state"]) == 1


def test_fig3_reference_basics():
    spec = load_experiment("paper_fig3")
    traj = propagate(spec)
    assert traj.sigma_z.shape == (10_001, 3)
    assert np.allclose(traj.sigma_z[0], -1 / 3)
    assert np.allclose(traj.currents[0], 0.0)
    assert np.allclose(traj.kinetics[0], 2 / 3)
    assert np.abs(traj.norms - 1.0).max() < 1e-12
    total = traj.sigma_z.sum(axis=1)
    assert np.abs(total - total[0]).max() < 1e-12
    assert traj.bond_labels == ["1_2", "2_3"]


def test_record_flags_and_snapshots():
    spec = load_experiment("paper_fig3").with_grid(n_steps=50)
    traj = propagate_state(spec.model, spec.schedule, np.eye(8)[6].astype(complex), spec.t_end, 50,
                           RecordFlags(sigma_z=True, currents=False, kinetics=False), snapshots=True)
    assert traj.currents is None and traj.kinetics is None
    assert traj.snapshots.shape == (51, 8)
    assert np.array_equal(traj.snapshots[-1], traj.meta["final_state"])


def test_rk4_step_forward_backward(rng):
    model = random_chain(rng, 3)
    sched = FieldSchedule(((SineSum(0.5, (1.0,), (1.0,)),), (), (Constant(0.2),)))
    psi = random_state(rng, 3)
    fwd = rk4_step(model, sched, psi, 0.3, 1e-3)
    back = rk4_step(model, sched, fwd, 0.3 + 1e-3, -1e-3)
    assert np.allclose(back, psi, atol=1e-13)
    with pytest.raises(ValueError):
        rk4_step(model, sched, psi, 0.0, 0.0)
    with pytest.raises(ValueError):
        rk4_step(model, sched, psi[:4], 0.0, 1e-3)


def test_rk4_error_is_fourth_order(rng):
    model = random_chain(rng, 3)
    sched = FieldSchedule(((SineSum(0.6, (1.0, 3.0), (1.0, -1.0)),), (), (SineSum(0.6, (2.0,), (1.0,)),)))
    psi0 = random_state(rng, 3)
    ref = propagate_state(model, sched, psi0, 1.5, 800).meta["final_state"]
    e1 = np.abs(propagate_state(model, sched, psi0, 1.5, 100).meta["final_state"] - ref).max()
    e2 = np.abs(propagate_state(model, sched, psi0, 1.5, 200).meta["final_state"] - ref).max()
    assert e1 / e2 > 14


def test_norm_abort_names_step_and_suggests_dt():
    model = ChainModel.heisenberg(3, 1.0)
    spec = load_experiment("paper_fig3")
    with pytest.raises(NumericalAbort, match=r"step 1 .*reduce the step size"):
        propagate_state(model, spec.schedule, np.eye(8)[6].astype(complex), 50.0, 5)


def test_trajectory_properties():
    spec = load_experiment("paper_fig3").with_grid(n_steps=100)
    traj = propagate(spec)
    assert traj.n_steps == 100
    assert traj.dt == pytest.approx(0.015)
    assert traj.n_qubits == 3
    assert traj.field_values.shape == (101, 3)
