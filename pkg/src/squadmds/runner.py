"""Single entry point that runs any embedding method from a RunConfig."""

from .baselines import run_pca, run_smacof
from .core import RunConfig, validate_dataset
from .hybrid import run_hybrid
from .optimizer import run_squad_mds
from .tsne import run_tsne


def embed(dataset, config=None, init=None, telemetry=None):
    """Embed ``dataset`` with ``config.method``; returns an (n, 2) array.

    ``telemetry`` receives one dict per iteration for the iterative
    methods, and the stress of every iterate for SMACOF.
    """
    dataset = validate_dataset(dataset)
    config = (config or RunConfig()).resolved()
    if config.method == "squad-mds":
        return run_squad_mds(dataset, config, init=init, telemetry=telemetry)
    if config.method == "hybrid":
        return run_hybrid(dataset, config, init=init, telemetry=telemetry)
    if config.method == "tsne":
        return run_tsne(dataset, config, init=init, telemetry=telemetry)
    if config.method == "smacof":
        history = [] if telemetry is not None else None
        coords = run_smacof(dataset, config, init=init, history=history)
        for t, stress in enumerate(history or ()):
            telemetry({"iteration": t, "stress": stress})
        return coords
    return run_pca(dataset, config)
