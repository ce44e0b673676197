"""Small dense linear-algebra helpers shared across modules.

Qubit 0 is the leftmost tensor factor; computational basis states are
binary ordered, so basis index ``i`` has qubit ``k`` in bit ``(n-1-k)``.
"""

from __future__ import annotations

import numpy as np

ID2 = np.eye(2, dtype=complex)
SIGMA_X = np.array([[0, 1], [1, 0]], dtype=complex)
SIGMA_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
SIGMA_Z = np.array([[1, 0], [0, -1]], dtype=complex)

#: sigma_0 .. sigma_3 in the usual 0=identity, 1=x, 2=y, 3=z order.
SIGMA = (ID2, SIGMA_X, SIGMA_Y, SIGMA_Z)

#: stack of the four Paulis, shape (4, 2, 2), for tensor contractions.
SIGMA_STACK = np.stack(SIGMA)


def kron_all(mats) -> np.ndarray:
    """Kronecker product of a sequence of matrices, left to right."""
    out = np.array([[1.0]], dtype=complex)
    for m in mats:
        out = np.kron(out, m)
    return out


def pauli_string_matrix(indices) -> np.ndarray:
    """Dense matrix of sigma_{i_1} x ... x sigma_{i_n} for indices in 0..3."""
    return kron_all(SIGMA[int(i)] for i in indices)


def hamming_weights(n: int) -> np.ndarray:
    """Bit counts of 0 .. 2^n - 1."""
    idx = np.arange(2**n, dtype=np.uint64)
    w = np.zeros(2**n, dtype=np.int64)
    for k in range(n):
        w += ((idx >> np.uint64(k)) & np.uint64(1)).astype(np.int64)
    return w


def pauli_power(j: int, n: int) -> np.ndarray:
    """Dense sigma_j^{tensor n} built directly from its sparsity pattern.

    sigma_3^{xn} is diagonal with (-1)^{weight}, sigma_1^{xn} is the bit-flip
    antidiagonal, and sigma_2^{xn} = i^n (-1)^{weight} on the antidiagonal.
    """
    dim = 2**n
    out = np.zeros((dim, dim), dtype=complex)
    idx = np.arange(dim)
    if j == 0:
        out[idx, idx] = 1.0
    elif j == 3:
        out[idx, idx] = (-1.0) ** hamming_weights(n)
    elif j == 1:
        out[dim - 1 - idx, idx] = 1.0
    elif j == 2:
        out[dim - 1 - idx, idx] = (1j) ** n * (-1.0) ** hamming_weights(n)
    else:
        raise ValueError(f"pauli index out of range: {j}")
    return out


def apply_one_qubit(mat: np.ndarray, op: np.ndarray, qubit: int, n: int) -> np.ndarray:
    """Left-multiply a 2^n x 2^n matrix by ``op`` acting on one qubit."""
    t = mat.reshape((2,) * n + (-1,))
    t = np.moveaxis(t, qubit, 0)
    t = np.tensordot(op, t, axes=(1, 0))
    t = np.moveaxis(t, 0, qubit)
    return t.reshape(mat.shape)


def conjugate_one_qubit(rho: np.ndarray, op: np.ndarray, qubit: int, n: int) -> np.ndarray:
    """U rho U^dagger for a single-qubit unitary ``op`` on ``qubit``."""
    left = apply_one_qubit(rho, op, qubit, n)
    return apply_one_qubit(left.conj().T, op, qubit, n).conj().T


def apply_product_unitary(rho: np.ndarray, ops, n: int) -> np.ndarray:
    """(U_1 x ... x U_n) rho (.)^dagger with one 2x2 unitary per qubit."""
    out = rho
    for k, op in enumerate(ops):
        out = conjugate_one_qubit(out, op, k, n)
    return out


def apply_product_to_vector(vec: np.ndarray, ops, n: int) -> np.ndarray:
    """(U_1 x ... x U_n) |vec> with one 2x2 matrix per qubit."""
    t = vec.reshape((2,) * n)
    for k, op in enumerate(ops):
        t = np.moveaxis(np.tensordot(op, np.moveaxis(t, k, 0), axes=(1, 0)), 0, k)
    return t.reshape(vec.shape)


def dagger(m: np.ndarray) -> np.ndarray:
    return m.conj().T


def projector(vec: np.ndarray) -> np.ndarray:
    """Rank-1 projector |vec><vec| of a (not necessarily normalised) vector."""
    v = np.asarray(vec, dtype=complex)
    v = v / np.linalg.norm(v)
    return np.outer(v, v.conj())


def hermitian_sqrt(mat: np.ndarray, clip: float = 1e-9) -> np.ndarray:
    """Matrix square root of a Hermitian PSD matrix via eigendecomposition.

    Eigenvalues in (-clip, 0) are clamped to 0; anything more negative is a
    caller bug and raises.
    """
    w, v = np.linalg.eigh(mat)
    if w.min() < -clip:
        raise ValueError(f"matrix is not PSD: min eigenvalue {w.min():.3e}")
    w = np.clip(w, 0.0, None)
    return (v * np.sqrt(w)) @ v.conj().T
