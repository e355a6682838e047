"""Shared domain types: datasets, embeddings and run configuration."""

from dataclasses import dataclass, fields, replace

import numpy as np

from .errors import ConfigError, DimensionMismatch, EmptyMatrix, NonFinite, TooFewPoints

METHODS = ("squad-mds", "hybrid", "tsne", "smacof", "pca")
INITS = ("pca", "random")

# per-method iteration budgets used when RunConfig.iterations is None
DEFAULT_ITERATIONS = {"squad-mds": 5000, "hybrid": 750, "tsne": 750, "smacof": 300, "pca": 0}


@dataclass(frozen=True, eq=False)
class Dataset:
    """N x M matrix of high-dimensional points plus optional display labels.

    Labels never enter any computation; they are carried for plot colouring.
    """

    points: np.ndarray
    labels: tuple | None = None

    @property
    def n(self):
        return self.points.shape[0]

    @property
    def m(self):
        return self.points.shape[1]

    def __eq__(self, other):
        if not isinstance(other, Dataset):
            return NotImplemented
        return (
            self.points.shape == other.points.shape
            and np.array_equal(self.points, other.points)
            and self.labels == other.labels
        )

    __hash__ = None


def validate_dataset(raw, labels=None):
    """Build a :class:`Dataset` from a raw matrix, enforcing its invariants.

    Parameters
    ----------
    raw : array_like, shape (n, m)
        Points in rows. A 1-D input is treated as a single feature column.
    labels : sequence, optional
        One tag per point.

    Raises
    ------
    EmptyMatrix
        If the matrix has no rows or no columns.
    TooFewPoints
        If fewer than four points are given.
    NonFinite
        At the first NaN or infinite entry, in row-major order.
    """
    if isinstance(raw, Dataset):
        if labels is None:
            labels = raw.labels
        raw = raw.points
    points = np.array(raw, dtype=np.float64, copy=True)
    if points.ndim == 1:
        points = points[:, None]
    if points.ndim != 2 or points.size == 0:
        raise EmptyMatrix("data matrix is empty")
    n = points.shape[0]
    if n < 4:
        raise TooFewPoints(f"need at least 4 points, got {n}")
    bad = ~np.isfinite(points)
    if bad.any():
        row, col = np.argwhere(bad)[0]
        raise NonFinite(int(row), int(col))
    if labels is not None:
        labels = tuple(labels)
        if len(labels) != n:
            raise DimensionMismatch(f"{len(labels)} labels for {n} points")
    points.flags.writeable = False
    return Dataset(points, labels)


def check_embedding(coords, n=None):
    """Return ``coords`` as a C-contiguous float64 (n, 2) array or raise."""
    coords = np.ascontiguousarray(coords, dtype=np.float64)
    if coords.ndim != 2 or coords.shape[1] != 2:
        raise DimensionMismatch(f"embedding must be N x 2, got shape {coords.shape}")
    if n is not None and coords.shape[0] != n:
        raise DimensionMismatch(f"embedding has {coords.shape[0]} rows, dataset has {n}")
    if not np.isfinite(coords).all():
        row, col = np.argwhere(~np.isfinite(coords))[0]
        raise NonFinite(int(row), int(col))
    return coords


@dataclass(frozen=True)
class RunConfig:
    """Every knob of one embedding run.

    ``None`` for ``iterations`` or ``lr_mds`` selects the method's default, see
    :meth:`resolved`. For the hybrid, ``lr_mds`` and ``lr_tsne`` weight the two
    normalised gradient arms. For standalone SQuaD-MDS, ``lr_mds`` is the
    initial step as a fraction of the initial embedding's span, which makes
    the run independent of the data's units.
    """

    method: str = "squad-mds"
    seed: int = 0
    iterations: int | None = None
    lr_mds: float | None = None
    lr_tsne: float = 1.0
    perplexities: tuple = (4.0, 50.0)
    init: str = "pca"
    workers: int = 1
    momentum: float = 0.9
    # the learning rate reaches 1/decay_ratio of its initial value at the last iteration
    decay_ratio: float = 10.0
    clip: bool = True
    exaggeration: float = 1.0
    sparse_similarities: bool = False
    smacof_tol: float = 1e-4
    init_std: float = 10.0

    def __post_init__(self):
        if self.method not in METHODS:
            raise ConfigError(f"unknown method {self.method!r}; expected one of {', '.join(METHODS)}")
        if self.init not in INITS:
            raise ConfigError(f"unknown init {self.init!r}; expected pca or random")
        object.__setattr__(self, "perplexities", tuple(float(p) for p in self.perplexities))
        if not self.perplexities or any(p < 1 for p in self.perplexities):
            raise ConfigError("perplexities must be a non-empty list of values >= 1")
        if self.iterations is not None and self.iterations < 1 and self.method != "pca":
            raise ConfigError("iterations must be >= 1")
        if self.lr_tsne < 0 or (self.lr_mds is not None and self.lr_mds < 0):
            raise ConfigError("learning rates must be non-negative")
        if self.method == "hybrid" and self.lr_tsne == 0 and self.lr_mds == 0:
            raise ConfigError("hybrid needs at least one non-zero learning rate")
        if not 0 <= self.momentum < 1:
            raise ConfigError("momentum must lie in [0, 1)")
        if self.decay_ratio < 1:
            raise ConfigError("decay_ratio must be >= 1")
        if self.workers < 1:
            raise ConfigError("workers must be >= 1")
        if self.exaggeration <= 0:
            raise ConfigError("exaggeration must be positive")

    def resolved(self):
        """Copy with every method-dependent default filled in."""
        iterations = self.iterations
        if iterations is None:
            iterations = DEFAULT_ITERATIONS[self.method]
        lr_mds = self.lr_mds
        if lr_mds is None:
            lr_mds = DEFAULT_LR_MDS.get(self.method, 0.0)
        return replace(self, iterations=iterations, lr_mds=lr_mds)

    def check_against(self, dataset):
        """Raise ConfigError when the config cannot run on ``dataset``."""
        if self.method in ("tsne", "hybrid"):
            for p in self.perplexities:
                if p >= dataset.n - 1:
                    raise ConfigError(f"perplexity {p:g} must be < n - 1 = {dataset.n - 1}")

    def as_dict(self):
        out = {}
        for f in fields(self):
            value = getattr(self, f.name)
            out[f.name] = list(value) if isinstance(value, tuple) else value
        return out


# standalone: fraction of the initial embedding's span; hybrid: weight of the normalised arm
DEFAULT_LR_MDS = {"squad-mds": 0.05, "hybrid": 0.5}
