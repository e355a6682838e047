"""Rank-based neighbourhood preservation: Q_NX(K), R_NX(K) and the log-K AUC.

Neighbours are exact Euclidean neighbours; ties in distance are broken by
ascending point index in both spaces, so every number here is reproducible
bit for bit. The full curve costs O(n^2 log n) time and O(chunk * n) memory.
"""

import csv
from dataclasses import dataclass

import numpy as np

from . import _kernels
from .errors import DimensionMismatch, RowCountMismatch

CHUNK_ELEMENTS = 1 << 22


def _as_points(data):
    return np.ascontiguousarray(getattr(data, "points", data), dtype=np.float64)


def _chunks(n):
    size = max(1, CHUNK_ELEMENTS // max(n, 1))
    for start in range(0, n, size):
        yield start, min(n, start + size)


def _sorted_rows(points, start, stop, workers=1):
    """Neighbour order of rows ``start:stop``, self first, ties by index."""
    sq = np.empty((stop - start, points.shape[0]))
    fn = _kernels.sq_dist_rows_par if workers > 1 else _kernels.sq_dist_rows
    fn(points, start, stop, sq)
    sq[np.arange(stop - start), np.arange(start, stop)] = -1.0
    return np.argsort(sq, axis=1, kind="stable")


def knn_sets(data, k_max, workers=1):
    """Indices of the ``k_max`` nearest neighbours of every point, nearest first.

    Self is excluded. Equal distances are ordered by ascending index.
    """
    points = _as_points(data)
    n = points.shape[0]
    if not 1 <= k_max <= n - 1:
        raise ValueError(f"k_max must lie in [1, {n - 1}], got {k_max}")
    out = np.empty((n, k_max), dtype=np.int64)
    for start, stop in _chunks(n):
        out[start:stop] = _sorted_rows(points, start, stop, workers)[:, 1:k_max + 1]
    return out


def _ranks(order_rows, n, k_max):
    """Rank matrix (1 = nearest) from neighbour lists; k_max + 1 past the list."""
    rows = order_rows.shape[0]
    ranks = np.full((rows, n), k_max + 1, dtype=np.int64)
    np.put_along_axis(ranks, order_rows, np.arange(1, order_rows.shape[1] + 1)[None, :], axis=1)
    return ranks


def _overlap_histogram(hd_order, ld_order, n, k_max):
    """Count, over rows, how many j enter both K-neighbourhoods exactly at K."""
    both = np.maximum(_ranks(hd_order, n, k_max), _ranks(ld_order, n, k_max))
    return np.bincount(both.ravel(), minlength=k_max + 2)[: k_max + 1]


def qnx_curve(hd_neighbors, ld_neighbors):
    """Q_NX(K) for K = 1..k_max from two neighbour-list arrays of shape (n, k_max).

    The intersection sizes of all K are obtained in a single pass: point j
    belongs to both K-neighbourhoods of i exactly when the larger of its two
    ranks is at most K.
    """
    hd_neighbors = np.asarray(hd_neighbors)
    ld_neighbors = np.asarray(ld_neighbors)
    if hd_neighbors.shape != ld_neighbors.shape:
        raise DimensionMismatch(f"neighbour lists of shapes {hd_neighbors.shape} and {ld_neighbors.shape}")
    n, k_max = hd_neighbors.shape
    hist = np.zeros(k_max + 1, dtype=np.int64)
    for start, stop in _chunks(n):
        hist += _overlap_histogram(hd_neighbors[start:stop], ld_neighbors[start:stop], n, k_max)
    k = np.arange(1, k_max + 1)
    return np.cumsum(hist)[1:] / (n * k)


def rnx_curve(q_nx):
    """Rescale Q_NX so a random embedding scores 0 and a perfect one 1.

    ``q_nx[K - 1]`` must hold Q_NX(K) with n = len(q_nx) + 2 points, or more
    points if ``q_nx`` was truncated; pass ``n`` via :func:`rnx_from_q`.
    """
    q_nx = np.asarray(q_nx, dtype=np.float64)
    return rnx_from_q(q_nx, q_nx.shape[0] + 2)


def rnx_from_q(q_nx, n):
    q_nx = np.asarray(q_nx, dtype=np.float64)
    k = np.arange(1, q_nx.shape[0] + 1)
    if k[-1] > n - 2:
        raise ValueError(f"R_NX is defined for K <= n - 2 = {n - 2}")
    return ((n - 1) * q_nx - k) / (n - 1 - k)


def auc_log_k(r_nx):
    """Area under R_NX against log K: the 1/K-weighted mean of R_NX."""
    r_nx = np.asarray(r_nx, dtype=np.float64)
    weights = 1.0 / np.arange(1, r_nx.shape[0] + 1)
    return float(np.dot(weights, r_nx) / weights.sum())


@dataclass(frozen=True, eq=False)
class QualityCurve:
    k_values: np.ndarray
    q_nx: np.ndarray
    r_nx: np.ndarray
    auc: float

    def mean_rnx(self, k_lo, k_hi):
        """Mean of R_NX(K) over lo <= K <= hi."""
        k_lo = max(1, int(k_lo))
        k_hi = min(int(k_hi), self.k_values[-1])
        return float(self.r_nx[k_lo - 1:k_hi].mean())


def quality_curve(hd, ld, workers=1):
    """Full Q_NX, R_NX curves (K = 1..n-2) and AUC for an embedding.

    Neighbour ranks are computed chunk by chunk, so memory stays O(chunk * n).
    """
    hd = _as_points(hd)
    ld = _as_points(ld)
    n = hd.shape[0]
    if ld.shape[0] != n:
        raise RowCountMismatch(f"HD data has {n} rows, embedding has {ld.shape[0]}")
    if n < 4:
        raise ValueError("quality curves need at least 4 points")
    k_max = n - 1
    hist = np.zeros(k_max + 1, dtype=np.int64)
    for start, stop in _chunks(n):
        hd_order = _sorted_rows(hd, start, stop, workers)[:, 1:]
        ld_order = _sorted_rows(ld, start, stop, workers)[:, 1:]
        hist += _overlap_histogram(hd_order, ld_order, n, k_max)
    k = np.arange(1, n - 1)
    q = np.cumsum(hist)[1:n - 1] / (n * k)
    r = rnx_from_q(q, n)
    return QualityCurve(k, q, r, auc_log_k(r))


def write_curve(path, curve):
    """Tab-delimited K, Q_NX, R_NX rows followed by a summary line with the AUC."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, delimiter="\t", lineterminator="\n")
        writer.writerow(["K", "Q_NX", "R_NX"])
        for k, q, r in zip(curve.k_values, curve.q_nx, curve.r_nx):
            writer.writerow([int(k), f"{q:.17g}", f"{r:.17g}"])
        fh.write(f"# kind:summary\tauc:{curve.auc:.17g}\tn:{len(curve.k_values) + 2}\n")
