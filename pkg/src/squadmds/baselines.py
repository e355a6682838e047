"""Reference embeddings: SMACOF metric MDS, plain PCA, and the exact pairwise stress."""

from dataclasses import dataclass

import numba
import numpy as np

from .core import RunConfig, check_embedding, validate_dataset
from .errors import DimensionMismatch, TooLarge
from .linalg import worker_rng
from .optimizer import initial_embedding

PAIRWISE_MAX_N = 20000
SMACOF_JITTER = 1e-9
JITTER_STREAM = 2


@numba.njit
def _pairwise_sums(hd, ld, scale):
    """Sums of squared residuals, delta * d and d * d over all pairs i < j."""
    n, m = hd.shape
    res = 0.0
    cross = 0.0
    ld2 = 0.0
    for i in range(n):
        for j in range(i + 1, n):
            s = 0.0
            for k in range(m):
                diff = hd[i, k] - hd[j, k]
                s += diff * diff
            delta = np.sqrt(s)
            dx = ld[i, 0] - ld[j, 0]
            dy = ld[i, 1] - ld[j, 1]
            d = np.sqrt(dx * dx + dy * dy)
            r = delta - scale * d
            res += r * r
            cross += delta * d
            ld2 += d * d
    return res, cross, ld2


def _as_points(data):
    return np.ascontiguousarray(getattr(data, "points", data), dtype=np.float64)


def optimal_scale(dataset, embedding):
    """Factor ``c`` minimising the pairwise stress of ``c * embedding``."""
    _, cross, ld2 = _pairwise_sums(_as_points(dataset), check_embedding(embedding), 1.0)
    return cross / ld2 if ld2 > 0 else 1.0


def pairwise_stress(dataset, embedding, max_n=PAIRWISE_MAX_N, rescale=False):
    """Mean squared residual between HD and LD distances over all pairs.

    With ``rescale=True`` the embedding is first multiplied by its
    least-squares optimal scale, which is the fair score for scale-free
    methods such as SQuaD-MDS.
    """
    hd = _as_points(dataset)
    ld = check_embedding(embedding)
    n = hd.shape[0]
    if ld.shape[0] != n:
        raise DimensionMismatch(f"{n} points but {ld.shape[0]} embedding rows")
    if n > max_n:
        raise TooLarge(f"pairwise stress is O(n^2); capped at n={max_n}, got {n}")
    if n < 2:
        return 0.0
    scale = optimal_scale(hd, ld) if rescale else 1.0
    res, _, _ = _pairwise_sums(hd, ld, scale)
    return res / (n * (n - 1) / 2)


@numba.njit
def _hd_distances(hd):
    n, m = hd.shape
    out = np.zeros((n, n))
    for i in range(n):
        for j in range(i + 1, n):
            s = 0.0
            for k in range(m):
                diff = hd[i, k] - hd[j, k]
                s += diff * diff
            out[i, j] = out[j, i] = np.sqrt(s)
    return out


@numba.njit
def _guttman(delta, x, out):
    """Guttman transform of ``x`` into ``out``.

    Returns (raw stress of ``x``, number of coincident LD pairs). Pairs at
    zero LD distance contribute nothing to the transform.
    """
    n = x.shape[0]
    stress = 0.0
    zero = 0
    for i in range(n):
        sx = 0.0
        sy = 0.0
        for j in range(n):
            if j == i:
                continue
            dx = x[i, 0] - x[j, 0]
            dy = x[i, 1] - x[j, 1]
            d = np.sqrt(dx * dx + dy * dy)
            if j > i:
                r = delta[i, j] - d
                stress += r * r
            if d > 0.0:
                ratio = delta[i, j] / d
                sx += ratio * dx
                sy += ratio * dy
            else:
                zero += 1
        out[i, 0] = sx / n
        out[i, 1] = sy / n
    return stress, zero // 2


@numba.njit
def _raw_stress(delta, x):
    n = x.shape[0]
    stress = 0.0
    for i in range(n):
        for j in range(i + 1, n):
            dx = x[i, 0] - x[j, 0]
            dy = x[i, 1] - x[j, 1]
            r = delta[i, j] - np.sqrt(dx * dx + dy * dy)
            stress += r * r
    return stress


@dataclass(frozen=True, eq=False)
class SmacofState:
    """SMACOF iterate; ``stress`` is the raw sum over pairs of squared residuals."""

    coords: np.ndarray
    stress: float
    iteration: int = 0
    delta: np.ndarray | None = None

    @classmethod
    def start(cls, dataset, coords):
        delta = _hd_distances(_as_points(dataset))
        coords = np.ascontiguousarray(coords, dtype=np.float64)
        return cls(coords, _raw_stress(delta, coords), 0, delta)


def _jitter_coincident(coords, rng):
    """Nudge every point that shares its LD position with another point."""
    _, inverse, counts = np.unique(coords, axis=0, return_inverse=True, return_counts=True)
    dup = counts[inverse.ravel()] > 1
    coords = coords.copy()
    coords[dup] += SMACOF_JITTER * rng.standard_normal((int(dup.sum()), 2))
    return coords


def smacof_step(dataset, state, rng=None):
    """One Guttman transform; stress never increases."""
    delta = state.delta if state.delta is not None else _hd_distances(_as_points(dataset))
    coords = state.coords
    out = np.empty_like(coords)
    _, zero = _guttman(delta, coords, out)
    if zero:
        coords = _jitter_coincident(coords, rng or np.random.default_rng(state.iteration))
        _guttman(delta, coords, out)
    return SmacofState(out, _raw_stress(delta, out), state.iteration + 1, delta)


def run_smacof(dataset, config=None, init=None, max_n=PAIRWISE_MAX_N, history=None):
    """SMACOF metric MDS from a PCA (default) or random start.

    Stops after ``config.iterations`` Guttman steps (default 300) or when the
    relative stress decrease falls below ``config.smacof_tol`` (default 1e-4;
    0 disables the test). ``history``, if a list, receives the stress of every
    iterate including the start.
    """
    dataset = validate_dataset(dataset)
    config = (config or RunConfig(method="smacof")).resolved()
    if dataset.n > max_n:
        raise TooLarge(f"SMACOF is O(n^2) per step; capped at n={max_n}, got {dataset.n}")
    coords = initial_embedding(dataset, config) if init is None else check_embedding(init, dataset.n)
    delta = _hd_distances(dataset.points)
    rng = worker_rng(config.seed, JITTER_STREAM)
    x = np.ascontiguousarray(coords, dtype=np.float64).copy()
    out = np.empty_like(x)
    stress, zero = _guttman(delta, x, out)
    if history is not None:
        history.append(stress)
    for _ in range(config.iterations):
        if zero:
            x = _jitter_coincident(x, rng)
            _guttman(delta, x, out)
        x, out = out, x
        new_stress, zero = _guttman(delta, x, out)
        if history is not None:
            history.append(new_stress)
        done = new_stress <= 1e-30 or (
            config.smacof_tol > 0 and (stress - new_stress) < config.smacof_tol * stress
        )
        stress = new_stress
        if done:
            break
    return x


def run_pca(dataset, config=None):
    dataset = validate_dataset(dataset)
    config = config or RunConfig(method="pca")
    return initial_embedding(dataset, config)
