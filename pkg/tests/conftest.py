"""Dense-matrix oracles and shared strategies.

The oracles build full ``2**n x 2**n`` matrices with Kronecker products, so
they are independent of the matrix-free kernels under test. Qubit ``q`` is
bit ``q`` of the basis index, so it sits at position ``n-1-q`` of the
Kronecker product.
"""
from functools import reduce

import numpy as np
import pytest
from hypothesis import strategies as st

from qubit_tddft.model import ChainModel

I2 = np.eye(2, dtype=complex)
PAULI = {
    "x": np.array([[0, 1], [1, 0]], dtype=complex),
    "y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "z": np.array([[1, 0], [0, -1]], dtype=complex),
}


def dense_pauli(n, qubit, axis):
    factors = [PAULI[axis] if p == qubit else I2 for p in reversed(range(n))]
    return reduce(np.kron, factors)


def dense_current(model, k, i):
    n = model.n_qubits
    jp = {(b.k, b.i): b.j_perp for b in model.bonds}[(min(k, i), max(k, i))]
    x, y = (lambda q: dense_pauli(n, q, "x")), (lambda q: dense_pauli(n, q, "y"))
    return -2.0 * jp * (x(k) @ y(i) - y(k) @ x(i))


def dense_kinetic(model, k, i):
    n = model.n_qubits
    jp = {(b.k, b.i): b.j_perp for b in model.bonds}[(min(k, i), max(k, i))]
    return jp * (dense_pauli(n, k, "x") @ dense_pauli(n, i, "x") + dense_pauli(n, k, "y") @ dense_pauli(n, i, "y"))


def dense_two_qubit(model):
    n = model.n_qubits
    h = np.zeros((1 << n, 1 << n), dtype=complex)
    for b in model.bonds:
        for axis, j in (("x", b.j_perp), ("y", b.j_perp), ("z", b.j_par)):
            h += j * dense_pauli(n, b.k, axis) @ dense_pauli(n, b.i, axis)
    return h


def dense_hamiltonian(model, fields):
    n = model.n_qubits
    h = dense_two_qubit(model)
    for q in range(n):
        h += fields[q] * dense_pauli(n, q, "z")
    return h


def dense_expm_evolve(h, psi, t):
    """``exp(-i h t) psi`` for a Hermitian matrix."""
    w, v = np.linalg.eigh(h)
    return v @ (np.exp(-1j * w * t) * (v.conj().T @ psi))


def random_state(rng, n):
    psi = rng.normal(size=1 << n) + 1j * rng.normal(size=1 << n)
    return psi / np.linalg.norm(psi)


def random_chain(rng, n):
    return ChainModel.chain(n, rng.uniform(-1.5, 1.5, n - 1), rng.uniform(-1.5, 1.5, n - 1))


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


couplings = st.floats(-2.0, 2.0, allow_nan=False)
seeds = st.integers(0, 2**32 - 1)


def pytest_terminal_summary(terminalreporter):
    import sys

    module = sys.modules.get("test_acceptance")
    results = getattr(module, "RESULTS", None)
    if results:
        terminalreporter.section("acceptance criteria")
        for number in sorted(results):
            terminalreporter.write_line(results[number])
