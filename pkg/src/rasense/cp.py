"""Canonical polyadic decomposition of third-order tensors via ALS.

The solver alternates exact least-squares updates of the three factor
matrices.  Each update solves the normal equations

    ((F2^H F2) * (F1^H F1)) X^T = khatri_rao(F2, F1)^H T(i)^T

where * is the elementwise product, so the K x K Gram matrix is formed
cheaply and the only large product is the matricized-tensor times
Khatri-Rao product.  A tiny ridge proportional to the Gram trace keeps the
solve defined when factor columns become nearly collinear.

Convergence is declared when the relative reconstruction error stops
changing:  |err_prev - err| / max(err, 1e-4) < tol.  The floor keeps the
test meaningful for noise-free tensors where the error itself heads to 0.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

from .tensor_ops import cp_reconstruct, khatri_rao, unfold

__all__ = [
    "AlsReport",
    "CpDecomposition",
    "cp_als",
    "cp_als_restarted",
    "normalize_factors",
]

_ERR_FLOOR = 1e-4
_RIDGE_SCALE = 1e-12
_COND_LIMIT = 1e12
_CONGRUENCE_LIMIT = 0.98


@dataclass(frozen=True, eq=False)
class AlsReport:
    """Diagnostics from one ALS run.

    ``error_history`` holds the relative reconstruction error after every
    sweep.  ``degenerate`` flags near-collinear rank-one components (factor
    congruence above 0.98), ``ill_conditioned`` flags a final-sweep Gram
    condition number above 1e12; either warns that the factors may not be
    trustworthy even though the fit looks fine.  ``restarts_used`` counts
    extra initializations a restart wrapper spent before settling on this
    run.
    """

    n_iterations: int
    converged: bool
    relative_error: float
    error_history: np.ndarray = field(repr=False)
    degenerate: bool = False
    ill_conditioned: bool = False
    restarts_used: int = 0


@dataclass(frozen=True, eq=False)
class CpDecomposition:
    """Normalized CP factors of a third-order tensor.

    Columns of ``a`` and ``b`` have unit norm and each column of ``a`` has
    its first nonzero entry rotated real non-negative; the remaining scale
    and phase sit in ``c``.
    """

    a: np.ndarray
    b: np.ndarray
    c: np.ndarray
    report: AlsReport

    @property
    def rank(self) -> int:
        return self.a.shape[1]


def _random_factor(shape, rng: np.random.Generator, complex_valued: bool) -> np.ndarray:
    if complex_valued:
        return (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) / np.sqrt(2.0)
    return rng.standard_normal(shape)


def _spectral_factor(unfolded: np.ndarray, rank: int, rng: np.random.Generator) -> np.ndarray:
    """Leading left singular vectors, padded with random columns if needed."""
    u, _, _ = np.linalg.svd(unfolded, full_matrices=False)
    take = min(rank, u.shape[1])
    f = u[:, :take]
    if take < rank:
        pad = _random_factor((u.shape[0], rank - take), rng, np.iscomplexobj(unfolded))
        f = np.concatenate([f, pad], axis=1)
    return f


def _ls_update(unfolded: np.ndarray, f1: np.ndarray, f2: np.ndarray) -> tuple[np.ndarray, float]:
    """Solve min || T(i) - X khatri_rao(f2, f1).T ||_F for X.

    Returns the update and the Gram condition number.
    """
    gram = (f2.conj().T @ f2) * (f1.conj().T @ f1)
    k = gram.shape[0]
    ridge = _RIDGE_SCALE * np.trace(gram).real / k
    gram = gram + ridge * np.eye(k)
    p = unfolded @ np.conj(khatri_rao(f2, f1))
    x = np.linalg.solve(gram, p.T).T
    return x, float(np.linalg.cond(gram))


def cp_als(
    tensor: np.ndarray,
    rank: int,
    *,
    max_iter: int = 500,
    tol: float = 1e-8,
    rng: np.random.Generator | None = None,
    init: str | tuple[np.ndarray, np.ndarray, np.ndarray] | None = None,
) -> CpDecomposition:
    """Rank-``rank`` CP decomposition of a third-order tensor.

    Parameters
    ----------
    tensor : ndarray, shape (I1, I2, I3)
        Real or complex third-order tensor.
    rank : int
        Number of rank-one components K >= 1.
    max_iter : int
        Sweep budget; the solver stops early on convergence.
    tol : float
        Relative change threshold on the reconstruction error.
    rng : numpy.random.Generator, optional
        Source for the random initialization.  A fresh generator is drawn
        when omitted, so pass one for reproducible runs.
    init : str or tuple of three ndarrays, optional
        ``"random"`` (default) draws complex Gaussian factors from ``rng``;
        ``"spectral"`` starts from the leading left singular vectors of each
        unfolding; a tuple gives explicit starting factors
        (I1 x K, I2 x K, I3 x K).

    Returns
    -------
    CpDecomposition
        Normalized factors and an :class:`AlsReport`.
    """
    tensor = np.asarray(tensor)
    if tensor.ndim != 3:
        raise ValueError(f"expected a third-order tensor, got ndim={tensor.ndim}")
    if not np.all(np.isfinite(tensor.view(float) if np.iscomplexobj(tensor) else tensor)):
        raise ValueError("tensor contains non-finite entries")
    if rank < 1:
        raise ValueError(f"rank must be >= 1, got {rank}")
    i1, i2, i3 = tensor.shape
    max_rank = min(i2 * i3, i1 * i3, i1 * i2)
    if rank > max_rank:
        raise ValueError(
            f"rank {rank} exceeds the least-squares limit {max_rank} for shape "
            f"{tensor.shape}"
        )
    if max_iter < 1:
        raise ValueError(f"max_iter must be >= 1, got {max_iter}")

    t1 = unfold(tensor, 1)
    t2 = unfold(tensor, 2)
    t3 = unfold(tensor, 3)
    norm = np.linalg.norm(tensor)
    complex_valued = np.iscomplexobj(tensor)
    dtype = complex if complex_valued else float
    if norm == 0.0:
        # A zero tensor admits only the trivial fit; report it as degenerate
        # instead of iterating on an objective that is identically zero.
        report = AlsReport(
            n_iterations=0,
            converged=True,
            relative_error=0.0,
            error_history=np.zeros(1),
            degenerate=True,
            ill_conditioned=False,
        )
        return CpDecomposition(
            a=np.zeros((i1, rank), dtype=dtype),
            b=np.zeros((i2, rank), dtype=dtype),
            c=np.zeros((i3, rank), dtype=dtype),
            report=report,
        )

    if isinstance(init, tuple):
        a, b, c = (np.array(f, copy=True) for f in init)
        for name, f, rows in (("a", a, i1), ("b", b, i2), ("c", c, i3)):
            if f.shape != (rows, rank):
                raise ValueError(f"init factor {name} has shape {f.shape}, expected {(rows, rank)}")
    elif init in (None, "random", "spectral"):
        if rng is None:
            rng = np.random.default_rng()
        if init == "spectral":
            a = _spectral_factor(t1, rank, rng)
            b = _spectral_factor(t2, rank, rng)
            c = _spectral_factor(t3, rank, rng)
        else:
            a = _random_factor((i1, rank), rng, complex_valued)
            b = _random_factor((i2, rank), rng, complex_valued)
            c = _random_factor((i3, rank), rng, complex_valued)
    else:
        raise ValueError(f"unknown init strategy {init!r}")

    history = []
    err_prev = np.inf
    converged = False
    cond = 1.0
    n_iter = 0
    for n_iter in range(1, max_iter + 1):
        a, _ = _ls_update(t1, b, c)
        b, _ = _ls_update(t2, a, c)
        c, cond = _ls_update(t3, a, b)

        err = np.linalg.norm(tensor - cp_reconstruct(a, b, c)) / norm
        history.append(err)
        if abs(err_prev - err) / max(err, _ERR_FLOOR) < tol:
            converged = True
            break
        err_prev = err

    a, b, c = normalize_factors(a, b, c)
    report = AlsReport(
        n_iterations=n_iter,
        converged=converged,
        relative_error=float(history[-1]),
        error_history=np.asarray(history),
        degenerate=bool(_max_congruence(a, b, c) > _CONGRUENCE_LIMIT),
        ill_conditioned=bool(cond > _COND_LIMIT),
    )
    return CpDecomposition(a=a, b=b, c=c, report=report)


def cp_als_restarted(
    tensor: np.ndarray,
    rank: int,
    *,
    target_error: float | None = 1e-8,
    n_restarts: int = 2,
    rng: np.random.Generator | None = None,
    **kwargs,
) -> CpDecomposition:
    """Run :func:`cp_als` with random restarts until an attempt succeeds.

    ALS occasionally stalls in a swamp or a poor stationary point from an
    unlucky initialization; a fresh random start usually escapes.  Tries up
    to ``1 + n_restarts`` initializations drawn consecutively from ``rng``
    and stops at the first attempt that converged with relative error at or
    below ``target_error``.  Pass ``target_error=None`` when the noise floor
    is unknown; convergence alone then ends the loop.  Returns the attempt
    with the lowest relative error, its report carrying ``restarts_used``.
    """
    if rng is None:
        rng = np.random.default_rng()
    threshold = np.inf if target_error is None else target_error
    best = None
    attempts = 0
    for _ in range(1 + n_restarts):
        dec = cp_als(tensor, rank, rng=rng, **kwargs)
        attempts += 1
        if best is None or dec.report.relative_error < best.report.relative_error:
            best = dec
        if dec.report.converged and dec.report.relative_error <= threshold:
            break
    report = replace(best.report, restarts_used=attempts - 1)
    return CpDecomposition(a=best.a, b=best.b, c=best.c, report=report)


def normalize_factors(
    a: np.ndarray, b: np.ndarray, c: np.ndarray
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Push scale and phase indeterminacy into the third factor.

    Columns of ``a`` and ``b`` come out unit-norm, each column of ``a`` has
    its first nonzero entry rotated real non-negative, and ``c`` absorbs the
    norms and the rotation so the reconstructed tensor is unchanged.
    """
    a = np.array(a, copy=True)
    b = np.array(b, copy=True)
    c = np.array(c, copy=True)
    if not (a.shape[1] == b.shape[1] == c.shape[1]):
        raise ValueError("factor column counts differ")
    for k in range(a.shape[1]):
        na = np.linalg.norm(a[:, k])
        nb = np.linalg.norm(b[:, k])
        if na == 0.0 or nb == 0.0:
            raise ValueError(f"component {k} has a zero factor column")
        a[:, k] /= na
        b[:, k] /= nb
        scale = na * nb
        nz = np.flatnonzero(np.abs(a[:, k]) > 1e-12)
        if nz.size:
            pivot = a[nz[0], k]
            phase = pivot / abs(pivot)
            a[:, k] *= np.conj(phase)
            scale = scale * phase
        c[:, k] *= scale
    return a, b, c


def _max_congruence(a: np.ndarray, b: np.ndarray, c: np.ndarray) -> float:
    """Largest pairwise product of per-mode |cosine| between components."""
    k = a.shape[1]
    if k < 2:
        return 0.0
    ga = _normalized_gram(a)
    gb = _normalized_gram(b)
    gc = _normalized_gram(c)
    prod = ga * gb * gc
    off = prod[~np.eye(k, dtype=bool)]
    return float(np.max(off))


def _normalized_gram(f: np.ndarray) -> np.ndarray:
    g = np.abs(f.conj().T @ f)
    norms = np.sqrt(np.diag(g))
    return g / np.outer(norms, norms)
