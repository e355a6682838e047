"""Multi-scale t-SNE similarities and exact t-SNE gradients.

The gradient is the exact O(n^2) Kullback-Leibler gradient with a Student-t
kernel in the embedding. Similarities are dense by default; the sparse mode
keeps the ``3 * max(perplexity)`` nearest neighbours of every point.
"""

import warnings
from dataclasses import dataclass

import numpy as np
from scipy import sparse

from . import _kernels
from .core import RunConfig, check_embedding, validate_dataset
from .errors import ConfigError, DimensionMismatch
from .quality import knn_sets

CALIBRATION_TOL = 1e-8
CALIBRATION_MAX_ITER = 200
BLOCK_ELEMENTS = 1 << 22


class CalibrationWarning(RuntimeWarning):
    """A similarity row could not reach its perplexity and was made uniform."""


@dataclass(frozen=True, eq=False)
class SimilarityMatrix:
    """Symmetric joint similarities P (zero diagonal, grand sum 1).

    ``p`` is a dense ndarray, or a scipy CSR matrix when ``is_sparse``.
    """

    p: object
    perplexities: tuple

    @property
    def is_sparse(self):
        return sparse.issparse(self.p)

    @property
    def n(self):
        return self.p.shape[0]

    def dense(self):
        return self.p.toarray() if self.is_sparse else self.p


def _calibrate(sqd, perplexity, tol, max_iter):
    sqd = np.ascontiguousarray(sqd, dtype=np.float64)
    rows = np.empty_like(sqd)
    betas = np.empty(sqd.shape[0])
    _kernels.calibrate_rows(sqd, np.log(perplexity), tol, max_iter, rows, betas)
    failed = int(np.isnan(betas).sum())
    if failed:
        warnings.warn(f"{failed} row(s) missed perplexity {perplexity:g}; using uniform rows",
                      CalibrationWarning, stacklevel=3)
    return rows, betas


def calibrate_row(hd_dists, perplexity, tol=CALIBRATION_TOL, max_iter=CALIBRATION_MAX_ITER,
                  return_beta=False):
    """Conditional similarities of one point to the others.

    Parameters
    ----------
    hd_dists : array_like, shape (n - 1,)
        Distances from the point to every other point.
    perplexity : float
        Target ``exp(entropy)`` of the row, in ``[1, n - 1]``.
    return_beta : bool
        Also return the Gaussian precision ``beta = 1 / (2 sigma^2)`` applied
        to squared distances; NaN when calibration failed.

    A row that cannot be calibrated (for instance equal distances with a
    perplexity below ``n - 1``) falls back to uniform with a
    :class:`CalibrationWarning`.
    """
    d = np.asarray(hd_dists, dtype=np.float64)
    if not 1 <= perplexity <= d.shape[0]:
        raise ConfigError(f"perplexity must lie in [1, {d.shape[0]}], got {perplexity}")
    rows, betas = _calibrate((d * d)[None, :], perplexity, tol, max_iter)
    if return_beta:
        return rows[0], float(betas[0])
    return rows[0]


def _dense_joint(points, perplexity, workers):
    n = points.shape[0]
    p = np.empty((n, n))
    block = max(1, BLOCK_ELEMENTS // n)
    dist_fn = _kernels.sq_dist_rows_par if workers > 1 else _kernels.sq_dist_rows
    for start in range(0, n, block):
        stop = min(n, start + block)
        sq = np.empty((stop - start, n))
        dist_fn(points, start, stop, sq)
        keep = np.ones_like(sq, dtype=bool)
        keep[np.arange(stop - start), np.arange(start, stop)] = False
        rows, _ = _calibrate(sq[keep].reshape(stop - start, n - 1), perplexity,
                             CALIBRATION_TOL, CALIBRATION_MAX_ITER)
        p[start:stop][keep] = rows.ravel()
    _kernels.symmetrize_dense(p, 0.5 / n)
    return p


def _sparse_joint(points, perplexity, k):
    n = points.shape[0]
    nbrs = knn_sets(points, k)
    sq = np.sum((points[nbrs] - points[:, None, :]) ** 2, axis=2)
    rows, _ = _calibrate(sq, perplexity, CALIBRATION_TOL, CALIBRATION_MAX_ITER)
    cond = sparse.csr_matrix((rows.ravel(), nbrs.ravel(), np.arange(0, n * k + 1, k)), shape=(n, n))
    joint = (cond + cond.T).tocsr()
    joint.sum_duplicates()
    joint.sort_indices()
    return joint / joint.sum()


def multiscale_similarities(dataset, perplexities=(4.0, 50.0), sparse_knn=False, workers=1):
    """Average of symmetrised, normalised t-SNE similarity matrices, one per perplexity."""
    points = np.ascontiguousarray(getattr(dataset, "points", dataset), dtype=np.float64)
    n = points.shape[0]
    perplexities = tuple(float(p) for p in perplexities)
    if not perplexities:
        raise ConfigError("at least one perplexity is needed")
    for perp in perplexities:
        if not 1 <= perp < n - 1:
            raise ConfigError(f"perplexity {perp:g} must lie in [1, n - 1) with n = {n}")
    if sparse_knn:
        k = min(n - 1, int(np.ceil(3 * max(perplexities))))
        total = None
        for perp in perplexities:
            joint = _sparse_joint(points, perp, k)
            total = joint if total is None else total + joint
        total = (total / len(perplexities)).tocsr()
        total.sort_indices()
        return SimilarityMatrix(total, perplexities)
    total = _dense_joint(points, perplexities[0], workers)
    for perp in perplexities[1:]:
        total += _dense_joint(points, perp, workers)
    if len(perplexities) > 1:
        total /= len(perplexities)
    return SimilarityMatrix(total, perplexities)


def tsne_gradient(similarities, embedding, exaggeration=1.0, workers=1):
    """Exact gradient of KL(P || Q) with respect to the embedding.

    ``4 * sum_j (p_ij - q_ij) (1 + d_ij^2)^-1 (y_i - y_j)``, with ``q`` the
    normalised Student-t kernel. Returns an (n, 2) array.
    """
    p = similarities.p if isinstance(similarities, SimilarityMatrix) else similarities
    y = check_embedding(embedding)
    if p.shape[0] != y.shape[0]:
        raise DimensionMismatch(f"similarities for {p.shape[0]} points, embedding has {y.shape[0]}")
    out = np.empty_like(y)
    _kernels.use_workers(workers)
    if sparse.issparse(p):
        _kernels.tsne_sparse(p, y, out, exaggeration)
    else:
        _kernels.tsne_dense(np.ascontiguousarray(p), y, out, exaggeration)
    return out


def student_t_similarities(embedding):
    """Dense Q matrix of an embedding (zero diagonal, grand sum 1)."""
    y = check_embedding(embedding)
    d2 = np.sum((y[:, None, :] - y[None, :, :]) ** 2, axis=2)
    w = 1.0 / (1.0 + d2)
    np.fill_diagonal(w, 0.0)
    return w / w.sum()


def kl_divergence(similarities, embedding):
    p = similarities.dense() if isinstance(similarities, SimilarityMatrix) else similarities
    p = p.toarray() if sparse.issparse(p) else np.asarray(p)
    q = student_t_similarities(embedding)
    mask = p > 0
    return float(np.sum(p[mask] * np.log(p[mask] / q[mask])))


def run_tsne(dataset, config=None, init=None, telemetry=None, similarities=None):
    """Exact t-SNE with the same normalised Nesterov descent as the hybrid.

    This is the hybrid with its MDS arm switched off: the t-SNE gradient is
    divided by the standard deviation of its per-point norms and stepped with
    learning rate ``config.lr_tsne`` decayed over ``config.iterations``
    (default 750). Early exaggeration is off unless ``config.exaggeration``
    differs from 1.
    """
    from .hybrid import descend

    dataset = validate_dataset(dataset)
    config = (config or RunConfig(method="tsne")).resolved()
    config.check_against(dataset)
    if config.lr_tsne <= 0:
        raise ConfigError("t-SNE needs lr_tsne > 0")
    return descend(dataset, config, lr_mds=0.0, lr_tsne=config.lr_tsne, init=init,
                   telemetry=telemetry, similarities=similarities)
