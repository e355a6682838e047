"""Distances, PCA and seeded random streams."""

from dataclasses import dataclass

import numpy as np

from .errors import DegenerateData, DimensionMismatch

# above this dimensionality PCA switches from a dense eigensolver to power iteration
DENSE_PCA_MAX_DIM = 1000


def euclidean_distance(p, q):
    p = np.asarray(p, dtype=np.float64)
    q = np.asarray(q, dtype=np.float64)
    if p.shape != q.shape:
        raise DimensionMismatch(f"vectors of shapes {p.shape} and {q.shape}")
    diff = p - q
    return float(np.sqrt(np.dot(diff, diff)))


def pairwise_distances(a, b=None):
    """Dense Euclidean distance matrix between the rows of ``a`` and ``b``."""
    a = np.asarray(a, dtype=np.float64)
    b = a if b is None else np.asarray(b, dtype=np.float64)
    sq = np.einsum("ij,ij->i", a, a)[:, None] + np.einsum("ij,ij->i", b, b)[None, :] - 2.0 * a @ b.T
    np.maximum(sq, 0.0, out=sq)
    if b is a:
        np.fill_diagonal(sq, 0.0)
    return np.sqrt(sq)


@dataclass(frozen=True, eq=False)
class PcaBasis:
    """Top two principal directions of a dataset.

    Attributes
    ----------
    components : ndarray, shape (2, m)
        Orthonormal rows, each with its largest-magnitude entry positive.
    mean : ndarray, shape (m,)
    explained : ndarray, shape (2,)
        Population variance of the data along each component.
    degenerate : bool
        True when the data has zero total variance and ``components`` is arbitrary.
    """

    components: np.ndarray
    mean: np.ndarray
    explained: np.ndarray
    degenerate: bool = False


def _fix_signs(components):
    for row in components:
        if row[np.argmax(np.abs(row))] < 0:
            row *= -1.0
    return components


def _power_components(centered, k, tol=1e-9, max_iter=1000):
    n, m = centered.shape
    rng = np.random.default_rng(0)
    comps = np.zeros((k, m))
    variances = np.zeros(k)
    for c in range(k):
        v = rng.standard_normal(m)
        v -= comps[:c].T @ (comps[:c] @ v)
        v /= np.linalg.norm(v)
        for _ in range(max_iter):
            w = centered.T @ (centered @ v) / n
            w -= comps[:c].T @ (comps[:c] @ w)
            norm = float(np.linalg.norm(w))
            if norm == 0.0:
                break
            w /= norm
            converged = np.linalg.norm(w - v) <= tol
            v = w
            if converged:
                break
        comps[c] = v
        proj = centered @ v
        variances[c] = float(proj @ proj) / n
    return comps, variances


def pca_fit(data, allow_degenerate=False):
    """Fit the top-2 principal directions of ``data``.

    With ``m <= 1000`` the covariance matrix is diagonalised directly; wider
    data uses power iteration with deflation (tolerance 1e-9, at most 1000
    sweeps) so an N x M SVD is never formed.

    One-dimensional data yields a zero second component with zero variance.
    Zero total variance raises :class:`DegenerateData` unless
    ``allow_degenerate`` is set, in which case an axis-aligned basis flagged
    ``degenerate=True`` is returned.
    """
    points = np.asarray(getattr(data, "points", data), dtype=np.float64)
    n, m = points.shape
    if n < 2:
        raise DegenerateData("PCA needs at least two points")
    mean = points.mean(axis=0)
    centered = points - mean
    total = float(np.einsum("ij,ij->", centered, centered)) / n
    if total == 0.0:
        if not allow_degenerate:
            raise DegenerateData("data has zero variance")
        comps = np.zeros((2, m))
        comps[0, 0] = 1.0
        if m > 1:
            comps[1, 1] = 1.0
        return PcaBasis(comps, mean, np.zeros(2), degenerate=True)

    k = min(2, m)
    if m <= DENSE_PCA_MAX_DIM:
        cov = centered.T @ centered / n
        evals, evecs = np.linalg.eigh(cov)
        order = np.argsort(evals)[::-1][:k]
        comps = evecs[:, order].T.copy()
        variances = np.maximum(evals[order], 0.0)
    else:
        comps, variances = _power_components(centered, k)
    comps = _fix_signs(comps)
    if k < 2:
        comps = np.vstack([comps, np.zeros((1, m))])
        variances = np.append(variances, 0.0)
    return PcaBasis(comps, mean, np.asarray(variances, dtype=np.float64))


def pca_project(basis, data):
    points = np.asarray(getattr(data, "points", data), dtype=np.float64)
    if points.ndim != 2 or points.shape[1] != basis.mean.shape[0]:
        raise DimensionMismatch(
            f"basis fitted on {basis.mean.shape[0]} features, data has shape {points.shape}"
        )
    return np.ascontiguousarray((points - basis.mean) @ basis.components.T)


def seeded_rng(seed):
    """Deterministic PCG64 stream (128-bit state) for a 64-bit seed."""
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(int(seed) & 0xFFFFFFFFFFFFFFFF)))


def worker_rng(seed, worker):
    """Independent stream for worker ``worker``, derived by seed splitting."""
    ss = np.random.SeedSequence([int(seed) & 0xFFFFFFFFFFFFFFFF, int(worker)])
    return np.random.Generator(np.random.PCG64(ss))
