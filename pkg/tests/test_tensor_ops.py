"""Unfolding, Khatri-Rao, and reshape conventions, checked against loops.

Everything downstream leans on the exact column ordering of the mode
unfoldings, so these tests spell the layouts out element by element rather
than trusting any library shortcut.
"""

import numpy as np
import numpy.testing as npt
import pytest

from rasense import (
    cp_reconstruct,
    fold,
    khatri_rao,
    kronecker_vec,
    tensor_from_stacked,
    tensor_to_stacked,
    unfold,
)


def _random_tensor(rng, shape):
    return rng.standard_normal(shape) + 1j * rng.standard_normal(shape)


def _unfold_by_loops(t, mode):
    """Reference unfolding: row = kept index, column index runs the other
    two modes with the earlier mode varying fastest."""
    i, j, k = t.shape
    if mode == 1:
        out = np.empty((i, j * k), dtype=t.dtype)
        for jj in range(j):
            for kk in range(k):
                out[:, jj + j * kk] = t[:, jj, kk]
    elif mode == 2:
        out = np.empty((j, i * k), dtype=t.dtype)
        for ii in range(i):
            for kk in range(k):
                out[:, ii + i * kk] = t[ii, :, kk]
    else:
        out = np.empty((k, i * j), dtype=t.dtype)
        for ii in range(i):
            for jj in range(j):
                out[:, ii + i * jj] = t[ii, jj, :]
    return out


@pytest.mark.parametrize("mode", [1, 2, 3])
def test_unfold_matches_elementwise_layout(mode):
    rng = np.random.default_rng(11)
    t = _random_tensor(rng, (4, 3, 5))
    npt.assert_array_equal(unfold(t, mode), _unfold_by_loops(t, mode))


@pytest.mark.parametrize("mode", [1, 2, 3])
def test_fold_inverts_unfold(mode):
    rng = np.random.default_rng(12)
    t = _random_tensor(rng, (2, 6, 3))
    npt.assert_array_equal(fold(unfold(t, mode), mode, t.shape), t)


@pytest.mark.parametrize("mode", [0, 4, -1])
def test_unfold_rejects_bad_mode(mode):
    with pytest.raises(ValueError):
        unfold(np.zeros((2, 2, 2)), mode)


def test_khatri_rao_columns_are_kronecker_products():
    rng = np.random.default_rng(13)
    x = _random_tensor(rng, (4, 3))
    y = _random_tensor(rng, (5, 3))
    kr = khatri_rao(x, y)
    assert kr.shape == (20, 3)
    for k in range(3):
        npt.assert_array_equal(kr[:, k], np.kron(x[:, k], y[:, k]))


def test_khatri_rao_rejects_column_mismatch():
    with pytest.raises(ValueError):
        khatri_rao(np.ones((2, 3)), np.ones((2, 4)))


def test_unfolding_identities_with_khatri_rao():
    """The three factorization identities the ALS updates rely on:
    T(1) = A kr(C, B)^T, T(2) = B kr(C, A)^T, T(3) = C kr(B, A)^T."""
    rng = np.random.default_rng(14)
    a = _random_tensor(rng, (4, 3))
    b = _random_tensor(rng, (5, 3))
    c = _random_tensor(rng, (6, 3))
    t = cp_reconstruct(a, b, c)
    npt.assert_allclose(unfold(t, 1), a @ khatri_rao(c, b).T, atol=1e-12)
    npt.assert_allclose(unfold(t, 2), b @ khatri_rao(c, a).T, atol=1e-12)
    npt.assert_allclose(unfold(t, 3), c @ khatri_rao(b, a).T, atol=1e-12)


def test_cp_reconstruct_matches_triple_loop():
    rng = np.random.default_rng(15)
    a = _random_tensor(rng, (3, 2))
    b = _random_tensor(rng, (4, 2))
    c = _random_tensor(rng, (5, 2))
    t = cp_reconstruct(a, b, c)
    ref = np.zeros((3, 4, 5), dtype=complex)
    for k in range(2):
        ref += a[:, k, None, None] * b[None, :, k, None] * c[None, None, :, k]
    npt.assert_allclose(t, ref, atol=1e-12)


def test_kronecker_vec_ordering():
    x = np.array([1.0, 2.0])
    y = np.array([10.0, 20.0, 30.0])
    npt.assert_array_equal(kronecker_vec(x, y), np.kron(x, y))


def test_tensor_from_stacked_row_convention():
    """Stacked row m*N + n (zero-based) must land at tensor[n, m, :]."""
    n_ant, m_rot, t_len = 3, 4, 2
    rng = np.random.default_rng(16)
    stacked = _random_tensor(rng, (n_ant * m_rot, t_len))
    t = tensor_from_stacked(stacked, n_ant)
    assert t.shape == (n_ant, m_rot, t_len)
    for n in range(n_ant):
        for m in range(m_rot):
            npt.assert_array_equal(t[n, m, :], stacked[m * n_ant + n, :])


def test_tensor_to_stacked_round_trip():
    rng = np.random.default_rng(17)
    t = _random_tensor(rng, (4, 5, 6))
    npt.assert_array_equal(tensor_from_stacked(tensor_to_stacked(t), 4), t)


def test_tensor_from_stacked_rejects_bad_row_count():
    with pytest.raises(ValueError):
        tensor_from_stacked(np.zeros((7, 2)), 3)
