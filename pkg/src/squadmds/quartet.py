"""Quartet sampling, relative-distance quartet stress and its analytic gradient.

A quartet is a group of four points. At every iteration the points are
randomly partitioned into ``n // 4`` disjoint quartets and each point is moved
using only the three other members of its quartet, which keeps an iteration
O(n) in time and memory.

The functions here work on one quartet at a time with plain numpy and are
meant for inspection and testing. The optimizer uses the compiled batch
version, :func:`quartet_batch_gradients`, which evaluates the same formula.
"""

import itertools
from dataclasses import dataclass
from math import comb

import numpy as np

from . import _kernels
from .errors import TooFewPoints, TooLarge

DIST_FLOOR = _kernels.DIST_FLOOR

#: the six point pairs of a quartet, as local indices
PAIRS = tuple(zip(_kernels.PAIR_A, _kernels.PAIR_B))

#: hard size cap of the O(N^4) brute-force evaluator
FULL_STRESS_MAX_N = 64
# quartets evaluated per vectorised chunk
FULL_STRESS_CHUNK = 1 << 16


@dataclass(frozen=True)
class QuartetPartition:
    """Disjoint quartets for one iteration plus the 0-3 points left over."""

    quartets: np.ndarray
    leftover: np.ndarray

    @property
    def order(self):
        """Flat permutation: the quartets in order followed by the leftover."""
        return np.concatenate([self.quartets.ravel(), self.leftover])


def partition_into_quartets(n, rng):
    """Chunk a uniform random permutation of ``range(n)`` into quartets."""
    if n < 4:
        raise TooFewPoints(f"need at least 4 points to form a quartet, got {n}")
    perm = rng.permutation(n)
    cut = 4 * (n // 4)
    return QuartetPartition(perm[:cut].reshape(-1, 4), perm[cut:])


@dataclass(frozen=True)
class QuartetWorkspace:
    """Distances of one quartet, in :data:`PAIRS` order."""

    idx: tuple
    hd_dists: np.ndarray
    hd_sum: float
    ld_dists: np.ndarray
    ld_sum: float
    hd_rel: np.ndarray
    ld_rel: np.ndarray


def _pair_dists(points):
    d = np.array([np.sqrt(np.sum((points[a] - points[b]) ** 2)) for a, b in PAIRS])
    return np.maximum(d, DIST_FLOOR)


def quartet_distances(dataset, embedding, idx):
    """Fill a :class:`QuartetWorkspace` for the four points ``idx``.

    Every distance is floored at 1e-12 so coincident points never divide by zero.
    """
    idx = tuple(int(i) for i in idx)
    if len(set(idx)) != 4:
        raise ValueError(f"a quartet needs 4 distinct indices, got {idx}")
    hd = np.asarray(getattr(dataset, "points", dataset), dtype=np.float64)[list(idx)]
    ld = np.asarray(embedding, dtype=np.float64)[list(idx)]
    hd_dists = _pair_dists(hd)
    ld_dists = _pair_dists(ld)
    hd_sum = float(hd_dists.sum())
    ld_sum = float(ld_dists.sum())
    return QuartetWorkspace(idx, hd_dists, hd_sum, ld_dists, ld_sum,
                            hd_dists / hd_sum, ld_dists / ld_sum)


def quartet_stress(w):
    """Sum over the six pairs of the squared relative-distance residuals."""
    return float(np.sum((w.hd_rel - w.ld_rel) ** 2))


def absolute_quartet_stress(w):
    """Quartet stress on the raw distances, the term averaged by the pairwise identity."""
    return float(np.sum((w.hd_dists - w.ld_dists) ** 2))


def quartet_gradient(w, embedding):
    """Analytic gradient of :func:`quartet_stress` w.r.t. the quartet's LD points.

    For pair term (i, j) and member q the derivative is::

        2 (d_rel_ij - delta_rel_ij) / S * (direct_q - d_rel_ij * sum_{b != q} u_qb)

    where ``u_qb = (x_q - x_b) / d_qb`` and the direct part is ``u_qj`` when
    q = i, ``u_qi`` when q = j and zero otherwise. The first part pulls the
    pair itself together or apart; the second rescales the whole quartet
    through the denominator S of the relative distances.

    Returns
    -------
    ndarray, shape (4, 2)
        Rows follow ``w.idx``.
    """
    x = np.asarray(embedding, dtype=np.float64)[list(w.idx)]
    dist = np.zeros((4, 4))
    for p, (a, b) in enumerate(PAIRS):
        dist[a, b] = dist[b, a] = w.ld_dists[p]
    unit = np.zeros((4, 4, 2))
    for q in range(4):
        for b in range(4):
            if b != q:
                unit[q, b] = (x[q] - x[b]) / dist[q, b]
    grads = np.zeros((4, 2))
    for p, (i, j) in enumerate(PAIRS):
        coef = 2.0 * (w.ld_rel[p] - w.hd_rel[p]) / w.ld_sum
        for q in range(4):
            direct = np.zeros(2)
            if q == i:
                direct = unit[q, j]
            elif q == j:
                direct = unit[q, i]
            spread = w.ld_rel[p] * unit[q].sum(axis=0)
            grads[q] += coef * (direct - spread)
    return grads


def quartet_batch_gradients(points, coords, perm, workers=1):
    """Gradients of every quartet of a flat permutation, scattered to (n, 2).

    ``perm`` is read as consecutive groups of four; trailing leftover indices
    get zero rows. Returns ``(grads, stresses)`` with one stress per quartet.
    """
    points = np.ascontiguousarray(points, dtype=np.float64)
    coords = np.ascontiguousarray(coords, dtype=np.float64)
    perm = np.ascontiguousarray(perm, dtype=np.int64)
    grads = np.zeros_like(coords)
    nq = perm.shape[0] // 4
    work = np.empty((nq, 30))
    stresses = np.empty(nq)
    fn = _kernels.quartet_grads_par if workers > 1 else _kernels.quartet_grads
    fn(points, coords, perm, grads, work, stresses)
    return grads, stresses


def _distance_matrix(points):
    diff = points[:, None, :] - points[None, :, :]
    return np.maximum(np.sqrt(np.einsum("ijk,ijk->ij", diff, diff)), DIST_FLOOR)


def _full_stress(hd, ld, relative):
    """Sum over i < j < k < l of one sixth of the quartet stress, in chunks."""
    pa = np.array(_kernels.PAIR_A)
    pb = np.array(_kernels.PAIR_B)
    combos = itertools.combinations(range(hd.shape[0]), 4)
    total = 0.0
    while True:
        flat = itertools.chain.from_iterable(itertools.islice(combos, FULL_STRESS_CHUNK))
        q = np.fromiter(flat, dtype=np.int64).reshape(-1, 4)
        if not q.size:
            return total
        dh = hd[q[:, pa], q[:, pb]]
        dl = ld[q[:, pa], q[:, pb]]
        if relative:
            dh = dh / dh.sum(axis=1, keepdims=True)
            dl = dl / dl.sum(axis=1, keepdims=True)
        total += float(np.sum((dh - dl) ** 2)) / 6.0


def full_relative_stress(dataset, embedding, variant="relative", max_n=FULL_STRESS_MAX_N):
    """Average over all C(n, 4) quartets of one sixth of the quartet stress.

    ``variant="absolute"`` uses raw distances; that average equals the mean
    squared pairwise residual exactly. ``variant="relative"`` is the
    scale-free objective the optimizer descends. O(n^4), diagnostics only.
    """
    points = np.asarray(getattr(dataset, "points", dataset), dtype=np.float64)
    coords = np.asarray(embedding, dtype=np.float64)
    n = points.shape[0]
    if n > max_n:
        raise TooLarge(f"brute-force quartet stress is capped at n={max_n}, got {n}")
    if n < 4:
        raise TooFewPoints(f"need at least 4 points, got {n}")
    if variant not in ("relative", "absolute"):
        raise ValueError(f"unknown variant {variant!r}")
    hd = _distance_matrix(points)
    ld = _distance_matrix(coords)
    return _full_stress(hd, ld, variant == "relative") / comb(n, 4)
