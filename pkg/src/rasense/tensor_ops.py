"""Dense third-order tensor utilities: unfolding, folding, Khatri-Rao.

Conventions are fixed once here and relied on everywhere else:

* Modes are numbered 1..3 and mode i maps tensor axis i-1 to the rows of the
  unfolding.  The remaining axes are flattened in Fortran order, so for a
  tensor of shape (I1, I2, I3) the mode-1 unfolding has shape (I1, I2*I3)
  with column index j2 + I2*j3.
* ``khatri_rao(x, y)`` is the column-wise Kronecker product with column k
  equal to ``kron(x[:, k], y[:, k])``, i.e. the x-index varies slowest.

Under these two conventions a rank-K tensor with factor matrices A (I1 x K),
B (I2 x K), C (I3 x K) unfolds as::

    T(1) = A @ khatri_rao(C, B).T
    T(2) = B @ khatri_rao(C, A).T
    T(3) = C @ khatri_rao(B, A).T

which is what the alternating least squares solver assumes.
"""

from __future__ import annotations

import numpy as np

__all__ = [
    "unfold",
    "fold",
    "khatri_rao",
    "kronecker_vec",
    "cp_reconstruct",
    "tensor_from_stacked",
    "tensor_to_stacked",
]


def unfold(tensor: np.ndarray, mode: int) -> np.ndarray:
    """Matricize a third-order tensor along ``mode`` (1, 2, or 3)."""
    tensor = np.asarray(tensor)
    if tensor.ndim != 3:
        raise ValueError(f"expected a third-order tensor, got ndim={tensor.ndim}")
    if mode not in (1, 2, 3):
        raise ValueError(f"mode must be 1, 2, or 3, got {mode}")
    axis = mode - 1
    return np.reshape(
        np.moveaxis(tensor, axis, 0), (tensor.shape[axis], -1), order="F"
    )


def fold(matrix: np.ndarray, mode: int, shape: tuple[int, int, int]) -> np.ndarray:
    """Inverse of :func:`unfold`: rebuild the (I1, I2, I3) tensor."""
    matrix = np.asarray(matrix)
    if mode not in (1, 2, 3):
        raise ValueError(f"mode must be 1, 2, or 3, got {mode}")
    if len(shape) != 3:
        raise ValueError(f"shape must have three entries, got {shape}")
    axis = mode - 1
    moved = (shape[axis],) + tuple(s for i, s in enumerate(shape) if i != axis)
    if matrix.shape != (moved[0], moved[1] * moved[2]):
        raise ValueError(
            f"matrix shape {matrix.shape} does not match mode-{mode} unfolding "
            f"of shape {tuple(shape)}"
        )
    return np.moveaxis(np.reshape(matrix, moved, order="F"), 0, axis)


def khatri_rao(x: np.ndarray, y: np.ndarray) -> np.ndarray:
    """Column-wise Kronecker product; column k is kron(x[:, k], y[:, k])."""
    x = np.asarray(x)
    y = np.asarray(y)
    if x.ndim != 2 or y.ndim != 2:
        raise ValueError("khatri_rao expects two matrices")
    if x.shape[1] != y.shape[1]:
        raise ValueError(
            f"column counts differ: {x.shape[1]} vs {y.shape[1]}"
        )
    i, k = x.shape
    j = y.shape[0]
    return (x[:, None, :] * y[None, :, :]).reshape(i * j, k)


def kronecker_vec(x: np.ndarray, y: np.ndarray) -> np.ndarray:
    """Kronecker product of two vectors, x-index varying slowest."""
    x = np.asarray(x).ravel()
    y = np.asarray(y).ravel()
    return (x[:, None] * y[None, :]).ravel()


def cp_reconstruct(a: np.ndarray, b: np.ndarray, c: np.ndarray) -> np.ndarray:
    """Rank-K tensor sum_k a_k (o) b_k (o) c_k, shape (I1, I2, I3)."""
    a = np.asarray(a)
    b = np.asarray(b)
    c = np.asarray(c)
    if not (a.ndim == b.ndim == c.ndim == 2):
        raise ValueError("factors must be matrices")
    if not (a.shape[1] == b.shape[1] == c.shape[1]):
        raise ValueError(
            f"factor column counts differ: {a.shape[1]}, {b.shape[1]}, {c.shape[1]}"
        )
    return np.einsum("ik,jk,lk->ijl", a, b, c)


def tensor_from_stacked(stacked: np.ndarray, n_antennas: int) -> np.ndarray:
    """Reshape stacked measurements (N*M x T) to a tensor (N, M, T).

    Row (m * N + n) of the stacked matrix is antenna n under rotation m, so
    the antenna index varies fastest down the rows (Fortran order).
    """
    stacked = np.asarray(stacked)
    if stacked.ndim != 2:
        raise ValueError(f"expected a matrix, got ndim={stacked.ndim}")
    nm, t = stacked.shape
    if nm % n_antennas != 0:
        raise ValueError(
            f"row count {nm} is not a multiple of n_antennas={n_antennas}"
        )
    m = nm // n_antennas
    return np.reshape(stacked, (n_antennas, m, t), order="F")


def tensor_to_stacked(tensor: np.ndarray) -> np.ndarray:
    """Inverse of :func:`tensor_from_stacked`: (N, M, T) back to (N*M, T)."""
    tensor = np.asarray(tensor)
    if tensor.ndim != 3:
        raise ValueError(f"expected a third-order tensor, got ndim={tensor.ndim}")
    n, m, t = tensor.shape
    return np.reshape(tensor, (n * m, t), order="F")
