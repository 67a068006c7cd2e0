"""Matrix-free Pauli kernels on computational-basis state vectors.

A state of ``n`` qubits is a complex array of length ``2**n``. Bit ``q`` of a
basis index is the occupation of qubit ``q`` (0-based), with
``sigma_z |0> = +|0>`` and ``sigma_z |1> = -|1>``.

Operators act by index permutation and sign tables; no dense matrices are
built here.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass
from functools import lru_cache

import numpy as np


class BondOperatorKind(enum.Enum):
    CURRENT = "current"
    KINETIC = "kinetic"
    XX_PLUS_YY = "xx+yy"
    ZZ = "zz"


class HamiltonianPart(enum.Enum):
    TWO_QUBIT = "two_qubit"
    LOCAL_FIELDS = "local_fields"
    FULL = "full"


def n_qubits_of(state: np.ndarray) -> int:
    dim = state.shape[-1]
    n = dim.bit_length() - 1
    if dim < 2 or (1 << n) != dim:
        raise ValueError(f"state length {dim} is not a power of two >= 2")
    return n


@lru_cache(maxsize=32)
def basis_signs(n_qubits: int) -> np.ndarray:
    """``signs[q, b]`` is the sigma_z eigenvalue (+1/-1) of qubit ``q`` in basis state ``b``."""
    idx = np.arange(1 << n_qubits)
    bits = (idx[None, :] >> np.arange(n_qubits)[:, None]) & 1
    signs = (1 - 2 * bits).astype(float)
    signs.flags.writeable = False
    return signs


def _check_qubit(qubit: int, n: int) -> None:
    if not 0 <= qubit < n:
        raise IndexError(f"qubit {qubit} out of range for {n} qubits")


def apply_pauli(state: np.ndarray, qubit: int, axis: str) -> np.ndarray:
    """Return ``sigma^axis_qubit |state>`` (qubit is 0-based)."""
    n = n_qubits_of(state)
    _check_qubit(qubit, n)
    if axis == "z":
        return basis_signs(n)[qubit] * state
    flipped = np.arange(1 << n) ^ (1 << qubit)
    if axis == "x":
        return state[flipped]
    if axis == "y":
        # sigma_y |b> = i z_q(b) |b with q flipped>, so out[c] = -i z_q(c) psi[c^q]
        return -1j * basis_signs(n)[qubit] * state[flipped]
    raise ValueError(f"unknown Pauli axis {axis!r}")


def apply_ladder(state: np.ndarray, qubit: int, sign: int) -> np.ndarray:
    """Unnormalized ``sigma^+/- = sigma^x +/- i sigma^y`` on one qubit.

    ``sigma^+`` maps |1> to 2|0>, ``sigma^-`` maps |0> to 2|1>.
    """
    if sign not in (1, -1):
        raise ValueError("sign must be +1 or -1")
    return apply_pauli(state, qubit, "x") + sign * 1j * apply_pauli(state, qubit, "y")


@dataclass(frozen=True)
class BondKernel:
    """Precomputed index/sign tables for a fixed set of coupled pairs.

    Row ``b`` of each table belongs to ``pairs[b]`` with ``k < i``.
    """

    n_qubits: int
    pairs: tuple[tuple[int, int], ...]
    j_perp: np.ndarray
    j_par: np.ndarray
    perm: np.ndarray  # (n_bonds, dim) index with both bond bits flipped
    hop: np.ndarray  # (n_bonds, dim) (xx+yy) image coefficient without J
    cur: np.ndarray  # (n_bonds, dim) current image coefficient, J included
    zz: np.ndarray  # (n_bonds, dim) z_k z_i
    zz_diag: np.ndarray  # (dim,) sum_b J_par z_k z_i
    hop_coef: np.ndarray  # (n_bonds, dim) J_perp * hop


def build_bond_kernel(n_qubits: int, pairs, j_perp, j_par) -> BondKernel:
    signs = basis_signs(n_qubits)
    dim = 1 << n_qubits
    idx = np.arange(dim)
    nb = len(pairs)
    j_perp = np.asarray(j_perp, dtype=float).reshape(nb)
    j_par = np.asarray(j_par, dtype=float).reshape(nb)
    perm = np.empty((nb, dim), dtype=np.intp)
    hop = np.empty((nb, dim))
    cur = np.empty((nb, dim), dtype=complex)
    zz = np.empty((nb, dim))
    for b, (k, i) in enumerate(pairs):
        perm[b] = idx ^ ((1 << k) | (1 << i))
        zz[b] = signs[k] * signs[i]
        # (xx+yy)|b> = (1 - z_k z_i) |b^m>, invariant under the double flip
        hop[b] = 1.0 - zz[b]
        # j_ki|c> picks up 2iJ (z_i(c) - z_k(c)) psi[c^m]
        cur[b] = 2j * j_perp[b] * (signs[i] - signs[k])
    zz_diag = j_par @ zz if nb else np.zeros(dim)
    return BondKernel(
        n_qubits=n_qubits,
        pairs=tuple(tuple(p) for p in pairs),
        j_perp=j_perp,
        j_par=j_par,
        perm=perm,
        hop=hop,
        cur=cur,
        zz=zz,
        zz_diag=zz_diag,
        hop_coef=j_perp[:, None] * hop,
    )


def _bond_row(kernel: BondKernel, pair) -> tuple[int, int]:
    """Row of ``pair`` in the kernel and the orientation sign (+1 if given as (k<i))."""
    k, i = int(pair[0]), int(pair[1])
    if k == i:
        raise ValueError(f"bond endpoints must differ, got ({k}, {i})")
    key, orient = ((k, i), 1) if k < i else ((i, k), -1)
    try:
        return kernel.pairs.index(key), orient
    except ValueError:
        raise ValueError(f"qubits {key} are not coupled in this model") from None


def apply_bond_operator(state: np.ndarray, model, pair, kind: BondOperatorKind) -> np.ndarray:
    """Apply a two-qubit bond operator of ``model`` to ``state``.

    ``pair = (k, i)`` selects the bond. For :attr:`BondOperatorKind.CURRENT`
    the result is ``j_ki |state>`` with ``j_ki = -2 J_perp (x_k y_i - y_k x_i)``,
    which is antisymmetric under ``k <-> i``. ``KINETIC`` is
    ``J_perp (x_k x_i + y_k y_i)``; the two bare kinds carry no coupling.
    """
    kernel = model.kernel
    if state.shape[-1] != 1 << kernel.n_qubits:
        raise ValueError("state dimension does not match model")
    b, orient = _bond_row(kernel, pair)
    kind = BondOperatorKind(kind)
    if kind is BondOperatorKind.ZZ:
        return kernel.zz[b] * state
    gathered = state[kernel.perm[b]]
    if kind is BondOperatorKind.XX_PLUS_YY:
        return kernel.hop[b] * gathered
    if kind is BondOperatorKind.KINETIC:
        return kernel.hop_coef[b] * gathered
    return orient * kernel.cur[b] * gathered


def bond_images(state: np.ndarray, model, kind: BondOperatorKind) -> np.ndarray:
    """Images of ``state`` under the bond operator for every bond, shape ``(n_bonds, dim)``."""
    kernel = model.kernel
    kind = BondOperatorKind(kind)
    if kind is BondOperatorKind.ZZ:
        return kernel.zz * state
    gathered = state[kernel.perm]
    if kind is BondOperatorKind.XX_PLUS_YY:
        return kernel.hop * gathered
    if kind is BondOperatorKind.KINETIC:
        return kernel.hop_coef * gathered
    return kernel.cur * gathered


def expectation(state: np.ndarray, op_image: np.ndarray) -> complex:
    """``<state|op_image>``."""
    if state.shape != op_image.shape:
        raise ValueError(f"dimension mismatch: {state.shape} vs {op_image.shape}")
    return complex(np.vdot(state, op_image))


def apply_hamiltonian_part(state: np.ndarray, model, fields, part: HamiltonianPart) -> np.ndarray:
    """Image of ``state`` under the requested part of the chain Hamiltonian."""
    kernel = model.kernel
    part = HamiltonianPart(part)
    out = np.zeros_like(state, dtype=complex)
    if part is not HamiltonianPart.LOCAL_FIELDS:
        out += kernel.zz_diag * state
        if kernel.pairs:
            out += (kernel.hop_coef * state[kernel.perm]).sum(axis=0)
    if part is not HamiltonianPart.TWO_QUBIT:
        if fields is None:
            raise ValueError(f"fields are required for part {part.value}")
        fields = np.asarray(fields, dtype=float)
        if fields.shape != (kernel.n_qubits,):
            raise ValueError(f"expected {kernel.n_qubits} field values, got {fields.shape}")
        out += (fields @ basis_signs(kernel.n_qubits)) * state
    return out


def commutator_expectation(state: np.ndarray, model, pair, part: HamiltonianPart, fields=None) -> float:
    """``i <[H_part, j_ki]>`` by direct operator application.

    Both operators are Hermitian, so ``i(<H psi|j psi> - <j psi|H psi>)``
    reduces to ``-2 Im <H psi|j psi>``.
    """
    h_img = apply_hamiltonian_part(state, model, fields, part)
    j_img = apply_bond_operator(state, model, pair, BondOperatorKind.CURRENT)
    return -2.0 * float(np.vdot(h_img, j_img).imag)


def commutator_expectations(state: np.ndarray, model, part: HamiltonianPart, fields=None) -> np.ndarray:
    """Vectorized :func:`commutator_expectation` over all bonds (``k < i`` orientation)."""
    if not model.kernel.pairs:
        return np.zeros(0)
    h_img = apply_hamiltonian_part(state, model, fields, part)
    j_imgs = bond_images(state, model, BondOperatorKind.CURRENT)
    return -2.0 * (h_img.conj() @ j_imgs.T).imag
