"""Wall-clock scaling benchmark on synthetic Gaussian data."""

import time
from dataclasses import dataclass

import numpy as np

from .core import RunConfig
from .datasets import gaussian_blob
from .runner import embed

WARMUP_N = 64


@dataclass(frozen=True)
class BenchResult:
    method: str
    iterations: int
    sizes: tuple
    seconds: tuple
    slope: float | None

    def rows(self):
        return list(zip(self.sizes, self.seconds))


def loglog_slope(sizes, seconds):
    """Least-squares slope of log(seconds) against log(size); None below 2 sizes."""
    if len(sizes) < 2:
        return None
    slope, _ = np.polyfit(np.log(np.asarray(sizes, dtype=float)), np.log(np.asarray(seconds, dtype=float)), 1)
    return float(slope)


def run_bench(sizes, method="squad-mds", iterations=None, seed=0, m=10, workers=1, repeats=1):
    """Time full runs of ``method`` on an n x m Gaussian sample for every n.

    A tiny warm-up run triggers compilation first. SMACOF runs its full
    iteration budget (no early stop) so every size does the same work.
    Each size keeps the fastest of ``repeats`` runs.
    """
    sizes = tuple(int(n) for n in sizes)
    config = RunConfig(method=method, seed=seed, iterations=iterations, workers=workers,
                       smacof_tol=0.0, perplexities=(4.0, 50.0)).resolved()
    warm = RunConfig(method=method, seed=seed, iterations=2, workers=workers, smacof_tol=0.0,
                     perplexities=(4.0, 8.0))
    embed(gaussian_blob(WARMUP_N, m, seed), warm)
    seconds = []
    for n in sizes:
        data = gaussian_blob(n, m, seed)
        best = np.inf
        for _ in range(max(1, repeats)):
            start = time.perf_counter()
            embed(data, config)
            best = min(best, time.perf_counter() - start)
        seconds.append(best)
    return BenchResult(method, config.iterations, sizes, tuple(seconds), loglog_slope(sizes, seconds))
