"""Polarizations, bond currents, two-qubit RDMs and concurrence."""
from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations

import numpy as np

from . import spinops
from .spinops import BondOperatorKind, HamiltonianPart

SIGMA_YY = np.kron(np.array([[0, -1j], [1j, 0]]), np.array([[0, -1j], [1j, 0]]))


def local_polarizations(state: np.ndarray) -> np.ndarray:
    """``<sigma_z_q>`` for every qubit."""
    n = spinops.n_qubits_of(state)
    return spinops.basis_signs(n) @ (state.real**2 + state.imag**2)


def bond_observables(state: np.ndarray, model) -> tuple[np.ndarray, np.ndarray]:
    """Bond currents ``<j_ki>`` and kinetic terms ``<T_ki>`` (bonds in model order, ``k < i``)."""
    kernel = model.kernel
    if not kernel.pairs:
        return np.zeros(0), np.zeros(0)
    gathered = state[kernel.perm]
    overlap = state.conj() * gathered
    currents = (kernel.cur * overlap).sum(axis=1).real
    kinetics = (kernel.hop_coef * overlap).sum(axis=1).real
    return currents, kinetics


def current_time_derivative(state: np.ndarray, model, fields_at_t) -> np.ndarray:
    """``d<j_ki>/dt = i<[H(t), j_ki]>`` per bond, by direct commutator evaluation."""
    return spinops.commutator_expectations(state, model, HamiltonianPart.FULL, fields_at_t)


@dataclass(frozen=True)
class TwoQubitRDM:
    """4x4 reduced density matrix of qubits ``(k, l)`` in the basis |q_k q_l> = 00, 01, 10, 11.

    ``factor`` (4 x r) satisfies ``matrix = factor @ factor^H`` when known.
    """

    pair: tuple[int, int]
    matrix: np.ndarray
    factor: np.ndarray | None = None


@dataclass(frozen=True)
class ConcurrenceSpectrum:
    lambdas: np.ndarray  # eigenvalues of rho rho~, descending
    concurrence: float


def reduced_density_2q(state: np.ndarray, k: int, l: int) -> TwoQubitRDM:
    n = spinops.n_qubits_of(state)
    if k == l:
        raise ValueError("reduced density needs two distinct qubits")
    for q in (k, l):
        if not 0 <= q < n:
            raise IndexError(f"qubit {q} out of range for {n} qubits")
    # C-order reshape puts qubit q on axis n-1-q
    tensor = state.reshape((2,) * n)
    mat = np.moveaxis(tensor, (n - 1 - k, n - 1 - l), (0, 1)).reshape(4, -1)
    return TwoQubitRDM((k, l), mat @ mat.conj().T, mat)


def _density_factor(rho: np.ndarray, clamp: float) -> np.ndarray:
    w, v = np.linalg.eigh(0.5 * (rho + rho.conj().T))
    if w.min() < -clamp:
        raise RuntimeError(f"density matrix has a negative eigenvalue {w.min():.3e}")
    return v * np.sqrt(np.clip(w, 0.0, None))


def concurrence(rdm: TwoQubitRDM | np.ndarray, clamp: float = 1e-12) -> ConcurrenceSpectrum:
    """Wootters concurrence ``max(0, l1 - l2 - l3 - l4)`` with ``l_i^2`` the eigenvalues of ``rho (sy x sy) rho* (sy x sy)``.

    With ``rho = A A^H`` the ``l_i`` are the singular values of
    ``A^T (sy x sy) A``. Working with them directly avoids square roots of
    eigenvalues near zero, which would cost half the significant digits. ``A``
    is reduced to a 4x4 triangle by a QR factorization first.
    """
    if isinstance(rdm, TwoQubitRDM) and rdm.factor is not None:
        a = rdm.factor
    else:
        rho = rdm.matrix if isinstance(rdm, TwoQubitRDM) else np.asarray(rdm, dtype=complex)
        a = _density_factor(rho, clamp)
    try:
        r = np.linalg.qr(a.conj().T, mode="r")  # a = r^H q^H
        roots = np.linalg.svd(r.conj() @ SIGMA_YY.real @ r.conj().T, compute_uv=False)
    except np.linalg.LinAlgError as exc:
        raise RuntimeError(f"linear algebra failure in concurrence: {exc}") from exc
    roots = np.sort(np.concatenate([roots, np.zeros(4 - roots.size)]))[::-1]
    return ConcurrenceSpectrum(roots**2, float(max(0.0, roots[0] - roots[1:].sum())))


def pairwise_concurrences(state: np.ndarray) -> np.ndarray:
    """Concurrence for every pair ``k < l`` in lexicographic order.

    ``state`` may also be a stack of states, shape ``(..., 2**n)``; the
    result then has shape ``(..., n(n-1)/2)``.
    """
    state = np.asarray(state, dtype=complex)
    if state.ndim == 1:
        n = spinops.n_qubits_of(state)
        return np.array([concurrence(reduced_density_2q(state, k, l)).concurrence
                         for k, l in combinations(range(n), 2)])
    return _batched_concurrences(state)


def _batched_concurrences(states: np.ndarray) -> np.ndarray:
    n = spinops.n_qubits_of(states)
    lead = states.shape[:-1]
    flat = states.reshape((-1,) + (2,) * n)
    out = np.empty((flat.shape[0], n * (n - 1) // 2))
    for col, (k, l) in enumerate(combinations(range(n), 2)):
        a = np.moveaxis(flat, (n - k, n - l), (1, 2)).reshape(flat.shape[0], 4, -1)
        r = np.linalg.qr(np.conj(np.swapaxes(a, 1, 2)), mode="r")
        m = np.conj(r) @ SIGMA_YY.real @ np.swapaxes(np.conj(r), 1, 2)
        roots = np.sort(np.linalg.svd(m, compute_uv=False), axis=1)[:, ::-1]
        out[:, col] = np.maximum(0.0, roots[:, 0] - roots[:, 1:].sum(axis=1))
    return out.reshape(lead + (out.shape[1],))


def entanglement_functional_single_excitation(sigma_z, k: int, l: int, tol: float = 1e-9) -> float:
    """Concurrence of qubits ``k, l`` from the z-polarizations alone.

    Valid on the one-flipped-qubit manifold (``sum sigma_z = N - 2``), where
    the populations are ``|a_q|^2 = (S - (N-2) sigma_q) / (2(N-2))`` and the
    concurrence is ``2 |a_k| |a_l|``, i.e.

        E_kl = prod_{m in (k,l)} [sum_{i != m} sigma_i - (N-3) sigma_m]^(1/2) / (N-2)

    The globally flipped manifold (``sum sigma_z = 2 - N``, a single qubit in
    |0>) is accepted too: flipping every qubit negates all polarizations and
    leaves every concurrence unchanged.
    """
    sz = np.asarray(sigma_z, dtype=float)
    n = sz.size
    if n < 3:
        raise ValueError("the single-excitation functional needs N >= 3")
    if k == l or not (0 <= k < n and 0 <= l < n):
        raise ValueError(f"invalid qubit pair ({k}, {l})")
    total = sz.sum()
    if abs(total + (n - 2)) <= tol:
        sz, total = -sz, -total
    elif abs(total - (n - 2)) > tol:
        raise ValueError(f"sum of sigma_z is {total!r}, not +-(N-2)={n - 2}: state is outside the single-excitation manifold")
    populations = (1.0 - sz) / 2.0
    if populations.min() < -tol or populations.max() > 1 + tol:
        raise ValueError("sigma_z values imply populations outside [0, 1]")
    brackets = [(total - sz[m]) - (n - 3) * sz[m] for m in (k, l)]
    return float(np.sqrt(max(brackets[0], 0.0) * max(brackets[1], 0.0)) / (n - 2))


def _two_excitation_amplitudes(state: np.ndarray, tol: float) -> np.ndarray:
    n = spinops.n_qubits_of(state)
    a = np.zeros((n, n), dtype=complex)
    weight = 0.0
    for i, j in combinations(range(n), 2):
        amp = state[(1 << i) | (1 << j)]
        a[i, j] = a[j, i] = amp
        weight += abs(amp) ** 2
    outside = float(np.vdot(state, state).real) - weight
    if outside > tol:
        raise ValueError(f"state has weight {outside:.3e} outside the two-excitation manifold")
    return a


def two_excitation_spectrum(state: np.ndarray, k: int, l: int, tol: float = 1e-9) -> np.ndarray:
    """Closed-form eigenvalues of ``rho_kl rho~_kl`` for a two-flipped-qubit state, descending.

    With ``a_ij`` the amplitude of the state with qubits ``i, j`` flipped,
    ``P_l = sum_{i != k,l} |a_il|^2``, ``P_k`` likewise and
    ``c = |sum_{i != k,l} a_ki a*_li|``::

        (sqrt(P_k P_l) + c)^2,  |a_kl|^2 sum_{i<j, i,j != k,l} |a_ij|^2  (twice),  (sqrt(P_k P_l) - c)^2
    """
    a = _two_excitation_amplitudes(state, tol)
    n = a.shape[0]
    others = [i for i in range(n) if i not in (k, l)]
    p_l = float(np.sum(np.abs(a[others, l]) ** 2))
    p_k = float(np.sum(np.abs(a[others, k]) ** 2))
    coherence = abs(np.sum(a[k, others] * a[l, others].conj()))
    rest = sum(abs(a[i, j]) ** 2 for i, j in combinations(others, 2))
    root = np.sqrt(p_l * p_k)
    mid = abs(a[k, l]) ** 2 * rest
    lam = np.array([(root + coherence) ** 2, mid, mid, (root - coherence) ** 2])
    return np.sort(lam)[::-1]
