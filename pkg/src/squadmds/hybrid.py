"""Blending SQuaD-MDS gradients with t-SNE gradients.

The two gradients come from unrelated cost functions, so their magnitudes
are not comparable. Each arm is divided by the standard deviation of its
per-point gradient norms, then the arms are weighted by their own decayed
learning rates (t-SNE 1.0, MDS 0.5 by default) and summed. The sum feeds a
single Nesterov update, exactly as in standalone SQuaD-MDS.
"""

from dataclasses import dataclass

import numpy as np

from . import _kernels
from .core import RunConfig, check_embedding, validate_dataset
from .errors import ConfigError, DimensionMismatch, NonFiniteUpdate
from .linalg import seeded_rng
from .optimizer import CLIP_FACTOR, LrSchedule, PermutationStream, initial_embedding, lr_at
from .tsne import SimilarityMatrix, multiscale_similarities

# iterations of early exaggeration when RunConfig.exaggeration != 1
EXAGGERATION_ITERS = 250


@dataclass(frozen=True)
class BlendConfig:
    lr_mds: float = 0.5
    lr_tsne: float = 1.0
    eps: float = 1e-12

    def __post_init__(self):
        if self.lr_mds < 0 or self.lr_tsne < 0:
            raise ConfigError("learning rates must be non-negative")
        if self.lr_mds == 0 and self.lr_tsne == 0:
            raise ConfigError("at least one learning rate must be positive")

    def schedules(self, iterations, ratio=10.0):
        """(mds, tsne) schedules sharing one decay shape."""
        return (LrSchedule.decaying(self.lr_mds, iterations, ratio),
                LrSchedule.decaying(self.lr_tsne, iterations, ratio))


def normalize_by_norm_std(grads, eps=1e-12):
    """Copy of ``grads`` divided by the population std of its row norms (floored at eps)."""
    g = np.array(grads, dtype=np.float64, order="C", copy=True)
    if g.ndim != 2 or g.shape[1] != 2:
        raise DimensionMismatch(f"expected an (n, 2) gradient, got shape {g.shape}")
    _kernels.normalize_rows(g, np.empty(g.shape[0]), eps)
    return g


def blend(g_mds, g_tsne, cfg, t, schedules=None):
    """``eta_tsne(t) * normalize(g_tsne) + eta_mds(t) * normalize(g_mds)``.

    An arm whose learning rate is zero is skipped entirely.
    """
    g_mds = np.asarray(g_mds, dtype=np.float64)
    g_tsne = np.asarray(g_tsne, dtype=np.float64)
    if g_mds.shape != g_tsne.shape:
        raise DimensionMismatch(f"arm shapes differ: {g_mds.shape} vs {g_tsne.shape}")
    mds_schedule, tsne_schedule = schedules or (LrSchedule(cfg.lr_mds), LrSchedule(cfg.lr_tsne))
    out = np.zeros_like(g_mds)
    if cfg.lr_tsne > 0:
        out += lr_at(tsne_schedule, t) * normalize_by_norm_std(g_tsne, cfg.eps)
    if cfg.lr_mds > 0:
        out += lr_at(mds_schedule, t) * normalize_by_norm_std(g_mds, cfg.eps)
    return out


def descend(dataset, config, lr_mds, lr_tsne, init=None, telemetry=None, similarities=None):
    """Nesterov descent on the blend of the two normalised arms.

    Shared by :func:`run_hybrid` and :func:`squadmds.tsne.run_tsne`. The MDS
    arm draws its quartet partitions from the same permutation stream as
    standalone SQuaD-MDS, so with ``lr_tsne = 0`` and equal schedules the two
    trajectories coincide exactly.
    """
    n = dataset.n
    cfg = BlendConfig(lr_mds, lr_tsne)
    T = config.iterations
    mds_schedule, tsne_schedule = cfg.schedules(T, config.decay_ratio)
    parallel = config.workers > 1
    _kernels.use_workers(config.workers)
    if init is None:
        coords = initial_embedding(dataset, config, target_std=config.init_std)
    else:
        coords = check_embedding(init, n).copy()
    vel = np.zeros((n, 2))
    look = np.empty((n, 2))
    step = np.empty((n, 2))

    use_mds = lr_mds > 0
    use_tsne = lr_tsne > 0
    if use_mds:
        hd = np.ascontiguousarray(dataset.points)
        stream = PermutationStream(seeded_rng(config.seed), n)
        g_mds = np.empty((n, 2))
        mds_norms = np.empty(n)
        work = np.empty((n // 4, 30))
        qstress = np.empty(n // 4)
        qfn = _kernels.quartet_grads_par if parallel else _kernels.quartet_grads
    if use_tsne:
        if similarities is None:
            similarities = multiscale_similarities(dataset, config.perplexities,
                                                   sparse_knn=config.sparse_similarities,
                                                   workers=config.workers)
        p = similarities.p if isinstance(similarities, SimilarityMatrix) else similarities
        if p.shape[0] != n:
            raise DimensionMismatch(f"similarities for {p.shape[0]} points, dataset has {n}")
        tsne_fn = _kernels.tsne_sparse if hasattr(p, "indptr") else _kernels.tsne_dense
        if not hasattr(p, "indptr"):
            p = np.ascontiguousarray(p)
        g_tsne = np.empty((n, 2))
        tsne_norms = np.empty(n)
        exaggerate_until = min(EXAGGERATION_ITERS, T // 4) if config.exaggeration != 1.0 else 0

    for t in range(T):
        eta_mds = lr_at(mds_schedule, t)
        eta_tsne = lr_at(tsne_schedule, t)
        _kernels.lookahead(coords, vel, config.momentum, look)
        record = {"iteration": t}
        if use_mds:
            perm = stream.take(1)[0]
            stress, mean, std = _kernels.mds_arm(qfn, hd, look, perm, g_mds, mds_norms, work, qstress,
                                                 config.clip, CLIP_FACTOR, cfg.eps)
            _kernels.scale_into(step, g_mds, eta_mds)
            record.update(eta_mds=eta_mds, mds_norm_std=std, stress=stress)
        if use_tsne:
            exaggeration = config.exaggeration if t < exaggerate_until else 1.0
            tsne_fn(p, look, g_tsne, exaggeration)
            std = _kernels.normalize_rows(g_tsne, tsne_norms, cfg.eps)
            if use_mds:
                _kernels.add_scaled(step, g_tsne, eta_tsne)
            else:
                _kernels.scale_into(step, g_tsne, eta_tsne)
            record.update(eta_tsne=eta_tsne, tsne_norm_std=std)
        if not _kernels.apply_step(coords, vel, step, config.momentum):
            raise NonFiniteUpdate(t)
        if telemetry is not None:
            blended = np.sqrt(np.einsum("ij,ij->i", step, step))
            moved = np.sqrt(np.einsum("ij,ij->i", vel, vel))
            record.update(
                blend_norm_mean=float(blended.mean()),
                blend_norm_std=float(blended.std()),
                move_median=float(np.median(moved)),
                move_max=float(moved.max()),
            )
            telemetry(record)
    return coords


def run_hybrid(dataset, config=None, init=None, telemetry=None, similarities=None):
    """Hybrid SQuaD-MDS / t-SNE embedding.

    Defaults: 750 iterations, perplexities 4 and 50, ``lr_tsne = 1``,
    ``lr_mds = 0.5``, PCA initialisation rescaled to standard deviation
    ``config.init_std``.
    """
    dataset = validate_dataset(dataset)
    config = (config or RunConfig(method="hybrid")).resolved()
    if config.lr_mds == 0 and config.lr_tsne == 0:
        raise ConfigError("hybrid needs at least one non-zero learning rate")
    config.check_against(dataset)
    return descend(dataset, config, config.lr_mds, config.lr_tsne, init=init,
                   telemetry=telemetry, similarities=similarities)
