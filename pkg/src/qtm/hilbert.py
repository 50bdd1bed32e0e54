"""Multi-qubit bookkeeping: basis ordering, site embedding, partial trace.

Matrices are plain complex128 numpy arrays. Basis states are big-endian:
qubit 1 (site 0) is the most significant bit, so ``|pqr> = |p> (x) |q> (x) |r>``
has linear index ``4p + 2q + r``.
"""

from __future__ import annotations

from collections.abc import Iterable, Sequence

import numpy as np

ATOL = 1e-10

SIGMA_PLUS = np.array([[0, 0], [1, 0]], dtype=complex)
SIGMA_MINUS = SIGMA_PLUS.T.copy()
NUMBER = np.diag([0.0, 1.0]).astype(complex)
IDENTITY2 = np.eye(2, dtype=complex)


def as_matrix(a) -> np.ndarray:
    m = np.asarray(a, dtype=complex)
    if m.ndim != 2:
        raise ValueError(f"expected a 2-d matrix, got shape {m.shape}")
    return m


def dagger(a: np.ndarray) -> np.ndarray:
    return a.conj().T


def kron(a, b) -> np.ndarray:
    return np.kron(as_matrix(a), as_matrix(b))


def kron_all(ops: Iterable[np.ndarray]) -> np.ndarray:
    out = np.eye(1, dtype=complex)
    for op in ops:
        out = np.kron(out, op)
    return out


def basis_index(bits: Sequence[int]) -> int:
    """Linear index of an occupation list, qubit 1 leftmost."""
    idx = 0
    for b in bits:
        if b not in (0, 1):
            raise ValueError(f"occupations must be 0 or 1, got {list(bits)}")
        idx = 2 * idx + b
    return idx


def basis_bits(index: int, n_qubits: int) -> tuple[int, ...]:
    if not 0 <= index < 2**n_qubits:
        raise ValueError(f"index {index} out of range for {n_qubits} qubits")
    return tuple((index >> (n_qubits - 1 - k)) & 1 for k in range(n_qubits))


def basis_ket(bits: Sequence[int]) -> np.ndarray:
    v = np.zeros(2 ** len(bits), dtype=complex)
    v[basis_index(bits)] = 1.0
    return v


def occupation(index: int) -> int:
    return bin(index).count("1")


def excitation_index(site: int, n_qubits: int) -> int:
    """Index of the state with a single excitation on ``site``."""
    return 1 << (n_qubits - 1 - site)


def single_excitation_basis(n_qubits: int) -> list[int]:
    """Ground state followed by the single excitations on sites 0, 1, ..."""
    return [0] + [excitation_index(s, n_qubits) for s in range(n_qubits)]


def embed_site_operator(op2x2, site: int, n_qubits: int) -> np.ndarray:
    """``I (x) ... (x) op (x) ... (x) I`` with ``op`` at ``site``."""
    op = as_matrix(op2x2)
    if op.shape != (2, 2):
        raise ValueError(f"site operator must be 2x2, got {op.shape}")
    if not 0 <= site < n_qubits:
        raise ValueError(f"site {site} out of range for {n_qubits} qubits")
    left = np.eye(2**site, dtype=complex)
    right = np.eye(2 ** (n_qubits - site - 1), dtype=complex)
    return np.kron(np.kron(left, op), right)


def partial_trace(rho, keep: Iterable[int], n_qubits: int) -> np.ndarray:
    """Reduced density matrix on the sites in ``keep`` (returned in ascending site order)."""
    rho = as_matrix(rho)
    dim = 2**n_qubits
    if rho.shape != (dim, dim):
        raise ValueError(f"rho has shape {rho.shape}, expected {(dim, dim)}")
    keep = sorted(set(keep))
    if any(not 0 <= k < n_qubits for k in keep):
        raise ValueError(f"keep set {keep} out of range for {n_qubits} qubits")
    drop = [k for k in range(n_qubits) if k not in keep]

    t = rho.reshape((2,) * (2 * n_qubits))
    # tensor axes: row sites 0..n-1, column sites n..2n-1
    row_axes = list(range(n_qubits))
    col_axes = list(range(n_qubits, 2 * n_qubits))
    for k in drop:
        col_axes[k] = row_axes[k]
    out_axes = [row_axes[k] for k in keep] + [col_axes[k] for k in keep]
    reduced = np.einsum(t, row_axes + col_axes, out_axes)
    d = 2 ** len(keep)
    return reduced.reshape(d, d)


def restrict(op, basis: Sequence[int]) -> np.ndarray:
    """Block of ``op`` on the listed full-space basis indices."""
    op = as_matrix(op)
    idx = np.asarray(basis)
    return op[np.ix_(idx, idx)]


def lift(op, basis: Sequence[int], full_dim: int) -> np.ndarray:
    """Inverse of :func:`restrict`: zero-pad a subspace matrix into the full space."""
    op = as_matrix(op)
    out = np.zeros((full_dim, full_dim), dtype=complex)
    idx = np.asarray(basis)
    out[np.ix_(idx, idx)] = op
    return out


def is_hermitian(a: np.ndarray, atol: float = 1e-12) -> bool:
    return a.shape[0] == a.shape[1] and np.max(np.abs(a - dagger(a)), initial=0.0) < atol


def ket_to_dm(psi) -> np.ndarray:
    psi = np.asarray(psi, dtype=complex)
    return np.outer(psi, psi.conj())
