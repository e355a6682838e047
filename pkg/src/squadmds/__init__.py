"""SQuaD-MDS: stochastic quartet descent for metric MDS, its t-SNE hybrid,
SMACOF and PCA baselines, and rank-based neighbourhood-preservation scores.

Typical use::

    from squadmds import RunConfig, embed, quality_curve
    from squadmds.datasets import hierarchical_mixture

    data = hierarchical_mixture(2000, seed=0)
    coords = embed(data, RunConfig(method="hybrid", seed=0))
    print(quality_curve(data, coords).auc)
"""

__version__ = "0.1.0"

from .baselines import pairwise_stress, run_pca, run_smacof  # noqa: E402
from .core import Dataset, RunConfig, validate_dataset  # noqa: E402
from .errors import (  # noqa: E402
    ConfigError,
    DataError,
    NumericalError,
    SquadError,
)
from .hybrid import run_hybrid  # noqa: E402
from .io import load_matrix, write_matrix  # noqa: E402
from .optimizer import run_squad_mds  # noqa: E402
from .plot import plot_svg  # noqa: E402
from .quality import QualityCurve, quality_curve  # noqa: E402
from .runner import embed  # noqa: E402
from .tsne import run_tsne  # noqa: E402

__all__ = [
    "ConfigError",
    "DataError",
    "Dataset",
    "NumericalError",
    "QualityCurve",
    "RunConfig",
    "SquadError",
    "embed",
    "load_matrix",
    "pairwise_stress",
    "plot_svg",
    "quality_curve",
    "run_hybrid",
    "run_pca",
    "run_smacof",
    "run_squad_mds",
    "run_tsne",
    "validate_dataset",
    "write_matrix",
]
