"""Synthetic datasets used by the tests, the benchmark and the demo scripts.

Every generator takes ``n`` and a ``seed`` and returns a validated
:class:`~squadmds.core.Dataset` whose labels encode the generating structure.
"""

import numpy as np

from .core import validate_dataset
from .linalg import seeded_rng


def gaussian_blob(n, m=10, seed=0):
    rng = seeded_rng(seed)
    return validate_dataset(rng.standard_normal((n, m)), labels=[0] * n)


def two_clusters(n, m=10, separation=8.0, seed=0):
    rng = seeded_rng(seed)
    labels = np.arange(n) % 2
    points = rng.standard_normal((n, m))
    points[:, 0] += separation * labels
    return validate_dataset(points, labels=labels.tolist())


def hierarchical_mixture(n, n_macro=10, n_sub=5, m=20, macro_scale=10.0, sub_scale=3.0,
                         noise=1.0, seed=0):
    """Clusters of clusters: ``n_macro`` far-apart groups of ``n_sub`` sub-clusters.

    Labels are ``macro * n_sub + sub``.
    """
    rng = seeded_rng(seed)
    macro = rng.normal(0.0, macro_scale, size=(n_macro, m))
    sub = macro[:, None, :] + rng.normal(0.0, sub_scale, size=(n_macro, n_sub, m))
    labels = np.arange(n) % (n_macro * n_sub)
    centers = sub.reshape(-1, m)[labels]
    points = centers + rng.normal(0.0, noise, size=(n, m))
    return validate_dataset(points, labels=labels.tolist())


def swiss_roll(n, noise=0.05, seed=0):
    """Rolled-up rectangle in 3-D; labels are the position along the roll."""
    rng = seeded_rng(seed)
    t = 1.5 * np.pi * (1.0 + 2.0 * rng.uniform(size=n))
    h = 21.0 * rng.uniform(size=n)
    points = np.column_stack([t * np.cos(t), h, t * np.sin(t)])
    points += noise * rng.standard_normal((n, 3))
    return validate_dataset(points, labels=t.tolist())


def uniform_hypercube(n, m=10, seed=0):
    rng = seeded_rng(seed)
    return validate_dataset(rng.uniform(size=(n, m)), labels=[0] * n)


def anisotropic_gaussian(n, m=50, decay=0.9, seed=0):
    """Gaussian whose axis standard deviations shrink geometrically by ``decay``."""
    rng = seeded_rng(seed)
    scales = decay ** np.arange(m)
    return validate_dataset(rng.standard_normal((n, m)) * scales, labels=[0] * n)


def plane(n, seed=0):
    """Intrinsically 2-D data: a uniform square, stored with two columns."""
    rng = seeded_rng(seed)
    return validate_dataset(rng.uniform(-1.0, 1.0, size=(n, 2)), labels=[0] * n)


#: the five datasets of the SQuaD-MDS versus SMACOF comparison
BENCHMARK_SUITE = {
    "two-clusters": two_clusters,
    "hierarchical": hierarchical_mixture,
    "swiss-roll": swiss_roll,
    "hypercube": uniform_hypercube,
    "anisotropic": anisotropic_gaussian,
}
