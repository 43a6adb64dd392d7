"""Dense complex linear algebra for small operators (dimension <= 8).

Everything here works on plain numpy arrays. Multi-partite operators carry
their factorization as an explicit list of subsystem dimensions whose product
must equal the matrix dimension.
"""

from __future__ import annotations

from typing import Iterable, Sequence

import numpy as np

HERMITIAN_TOL = 1e-12

SIGMA_X = np.array([[0.0, 1.0], [1.0, 0.0]], dtype=complex)
SIGMA_Y = np.array([[0.0, -1.0j], [1.0j, 0.0]], dtype=complex)
SIGMA_Z = np.array([[1.0, 0.0], [0.0, -1.0]], dtype=complex)
PAULIS = (SIGMA_X, SIGMA_Y, SIGMA_Z)


def dagger(a: np.ndarray) -> np.ndarray:
    """Conjugate transpose."""
    return a.conj().T


def is_hermitian(a: np.ndarray, tol: float = HERMITIAN_TOL) -> bool:
    """Entrywise check of a = a^dagger within tol."""
    return a.shape[0] == a.shape[1] and bool(np.max(np.abs(a - dagger(a))) <= tol)


def hermitian_part(a: np.ndarray) -> np.ndarray:
    """(a + a^dagger) / 2."""
    return (a + dagger(a)) / 2


def kron(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Kronecker product; entry (i*p+k, j*q+l) = a[i,j] * b[k,l]."""
    return np.kron(a, b)


def _check_dims(m: np.ndarray, dims: Sequence[int]) -> None:
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {m.shape}")
    if any(d < 1 for d in dims):
        raise ValueError(f"subsystem dimensions must be positive, got {list(dims)}")
    if int(np.prod(dims)) != m.shape[0]:
        raise ValueError(
            f"subsystem dimensions {list(dims)} do not factor matrix dimension {m.shape[0]}"
        )


def partial_trace(m: np.ndarray, dims: Sequence[int], keep: Iterable[int]) -> np.ndarray:
    """Trace out every subsystem not listed in keep.

    dims lists the tensor factors of m in order; keep is a set of factor
    indices. The kept factors retain their original relative order. The full
    trace is preserved: Tr(result) = Tr(m).
    """
    dims = list(dims)
    _check_dims(m, dims)
    keep = sorted(set(keep))
    if not keep:
        raise ValueError("keep must name at least one subsystem")
    if keep[0] < 0 or keep[-1] >= len(dims):
        raise ValueError(f"keep indices {keep} out of range for {len(dims)} subsystems")

    k = len(dims)
    t = m.reshape(dims + dims)
    letters = "abcdefghijklmnopqrstuvwxyz"
    row, col, out = [], [], []
    nxt = 0
    for s in range(k):
        if s in keep:
            row.append(letters[nxt])
            col.append(letters[nxt + 1])
            out.extend(letters[nxt : nxt + 2])
            nxt += 2
        else:
            row.append(letters[nxt])
            col.append(letters[nxt])
            nxt += 1
    spec = "".join(row) + "".join(col) + "->" + "".join(out[::2]) + "".join(out[1::2])
    d_keep = int(np.prod([dims[s] for s in keep]))
    return np.einsum(spec, t).reshape(d_keep, d_keep)


def hermitian_eig(h: np.ndarray, tol: float = HERMITIAN_TOL) -> tuple[np.ndarray, np.ndarray]:
    """Eigendecomposition of a Hermitian matrix.

    Returns (eigenvalues, eigenvectors) with real eigenvalues in descending
    order and matching eigenvector columns, so h = V diag(w) V^dagger.
    """
    if not is_hermitian(h, tol):
        raise ValueError("hermitian_eig requires a Hermitian matrix")
    w, v = np.linalg.eigh(h)
    return w[::-1].copy(), v[:, ::-1].copy()


def trace_norm(m: np.ndarray) -> float:
    """Sum of singular values; for Hermitian input this is sum |eigenvalue|."""
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise ValueError(f"trace_norm requires a square matrix, got shape {m.shape}")
    return float(np.sum(np.linalg.svd(m, compute_uv=False)))


def trace_distance(rho: np.ndarray, sigma: np.ndarray) -> float:
    """(1/2) ||rho - sigma||_1 for Hermitian unit-trace operators."""
    if rho.shape != sigma.shape:
        raise ValueError(f"dimension mismatch: {rho.shape} vs {sigma.shape}")
    if not (is_hermitian(rho, 1e-9) and is_hermitian(sigma, 1e-9)):
        raise ValueError("trace_distance requires Hermitian inputs")
    return 0.5 * trace_norm(rho - sigma)
