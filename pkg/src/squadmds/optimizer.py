"""Nesterov-momentum SGD driving SQuaD-MDS.

Each iteration partitions the points into random quartets, evaluates the
quartet gradients at the Nesterov look-ahead coordinates, and moves every
point along its updated momentum. The learning rate decays as
``eta0 * b / (a * t + b)``.

Gradients are divided by the standard deviation of their per-point norms
before the step (the same normalisation the hybrid applies to each arm), so
``eta`` is measured in embedding units and the run does not depend on the
scale of the data.
"""

from dataclasses import dataclass, replace

import numpy as np

from . import _kernels
from .core import RunConfig, check_embedding, validate_dataset
from .errors import ConfigError, NonFiniteUpdate
from .linalg import pca_fit, pca_project, seeded_rng, worker_rng

CLIP_FACTOR = 10.0
NORM_EPS = 1e-12

# random-number stream ids derived from the run seed
INIT_STREAM = 1


@dataclass(frozen=True)
class LrSchedule:
    eta0: float
    a: float = 0.0
    b: float = 1.0

    def __post_init__(self):
        if self.a < 0 or self.b <= 0:
            raise ConfigError("schedule needs a >= 0 and b > 0")

    @classmethod
    def decaying(cls, eta0, iterations, ratio=10.0):
        """Schedule that reaches ``eta0 / ratio`` at ``t = iterations``."""
        return cls(eta0, (ratio - 1.0) / max(iterations, 1), 1.0)


def lr_at(schedule, t):
    return schedule.eta0 * schedule.b / (schedule.a * t + schedule.b)


@dataclass(frozen=True, eq=False)
class OptimizerState:
    velocity: np.ndarray
    schedule: LrSchedule
    gamma: float = 0.9
    t: int = 0
    max_iters: int = 1

    def __post_init__(self):
        if not 0 <= self.gamma < 1:
            raise ConfigError("momentum must lie in [0, 1)")
        if self.schedule.eta0 <= 0:
            raise ConfigError("eta0 must be positive")
        if self.max_iters < 1:
            raise ConfigError("max_iters must be >= 1")


def nesterov_step(coords, state, grad_fn):
    """One Nesterov update; ``grad_fn`` is evaluated at ``coords + gamma * v``.

    ``v <- gamma * v - eta(t) * grad``, then ``coords <- coords + v``.
    Returns the new coordinates and state; the inputs are left untouched.
    """
    coords = np.asarray(coords, dtype=np.float64)
    look = coords + state.gamma * state.velocity
    grad = np.asarray(grad_fn(look), dtype=np.float64)
    velocity = state.gamma * state.velocity - lr_at(state.schedule, state.t) * grad
    new = coords + velocity
    if not np.isfinite(new).all():
        raise NonFiniteUpdate(state.t)
    return new, replace(state, velocity=velocity, t=state.t + 1)


class PermutationStream:
    """Random permutations of ``range(n)``, drawn in fixed-size blocks.

    The block size depends only on ``n``, so consumers taking one permutation
    at a time see exactly the same sequence as consumers taking whole blocks.
    """

    def __init__(self, rng, n):
        self.rng = rng
        self.n = n
        self.block = max(1, min(64, (1 << 22) // n))
        self._base = np.tile(np.arange(n, dtype=np.int64), (self.block, 1))
        self._buf = np.empty((0, n), dtype=np.int64)
        self._pos = 0

    def _refill(self):
        self._buf = self.rng.permuted(self._base, axis=1)
        self._pos = 0

    def take(self, k):
        if self._pos == len(self._buf) and k == self.block:
            self._refill()
            self._pos = k
            return self._buf
        out = np.empty((k, self.n), dtype=np.int64)
        got = 0
        while got < k:
            if self._pos == len(self._buf):
                self._refill()
            step = min(k - got, len(self._buf) - self._pos)
            out[got:got + step] = self._buf[self._pos:self._pos + step]
            self._pos += step
            got += step
        return out


def embedding_span(coords):
    """Largest axis-aligned extent of an embedding."""
    return float(np.max(np.ptp(coords, axis=0)))


def initial_embedding(dataset, config, target_std=None):
    """PCA or uniform-random starting coordinates for ``dataset``.

    PCA falls back to uniform [-1, 1]^2 when the data has zero variance. With
    ``target_std`` the result is rescaled to that overall standard deviation.
    """
    dataset = validate_dataset(dataset)
    rng = worker_rng(config.seed, INIT_STREAM)
    coords = None
    if config.init == "pca":
        basis = pca_fit(dataset, allow_degenerate=True)
        if not basis.degenerate:
            coords = pca_project(basis, dataset)
    if coords is None or np.ptp(coords, axis=0).max() == 0.0:
        coords = rng.uniform(-1.0, 1.0, size=(dataset.n, 2))
    if target_std is not None:
        std = float(np.std(coords))
        coords = coords * (target_std / std)
    return np.ascontiguousarray(coords)


class _Workspace:
    """Scratch buffers for the compiled SQuaD-MDS iteration."""

    def __init__(self, n, block, parallel):
        self.look = np.empty((n, 2))
        self.grads = np.empty((n, 2))
        self.norms = np.empty(n)
        self.work = np.empty((n // 4, 30))
        self.qstress = np.empty(n // 4)
        self.eta = np.empty(block)
        self.stress = np.empty(block)
        self.mean = np.empty(block)
        self.std = np.empty(block)
        self.qfn = _kernels.quartet_grads_par if parallel else _kernels.quartet_grads


def run_squad_mds(dataset, config=None, init=None, telemetry=None):
    """Embed ``dataset`` in 2-D with stochastic quartet descent.

    Parameters
    ----------
    dataset : Dataset or array_like
    config : RunConfig, optional
        ``iterations`` (default 5000), ``lr_mds`` (initial step as a fraction
        of the initial embedding's span, default 0.05), ``momentum``,
        ``decay_ratio``, ``clip``, ``seed``, ``init`` and ``workers`` are used.
    init : array_like, optional
        Starting coordinates; overrides ``config.init``.
    telemetry : callable, optional
        Called with one dict per iteration.

    Returns
    -------
    ndarray, shape (n, 2)
    """
    dataset = validate_dataset(dataset)
    config = (config or RunConfig()).resolved()
    if config.lr_mds <= 0:
        raise ConfigError("standalone SQuaD-MDS needs lr_mds > 0")
    n = dataset.n
    coords = initial_embedding(dataset, config) if init is None else check_embedding(init, n).copy()
    span = embedding_span(coords)
    if span == 0.0:
        raise ConfigError("initial embedding has zero extent")
    schedule = LrSchedule.decaying(config.lr_mds * span, config.iterations, config.decay_ratio)
    hd = np.ascontiguousarray(dataset.points)
    vel = np.zeros((n, 2))
    _kernels.use_workers(config.workers)
    stream = PermutationStream(seeded_rng(config.seed), n)
    ws = _Workspace(n, stream.block, config.workers > 1)
    t = 0
    while t < config.iterations:
        k = min(stream.block, config.iterations - t)
        perms = stream.take(k)
        bad = _kernels.squad_block(
            ws.qfn, hd, coords, vel, perms, t, schedule.eta0, schedule.a, schedule.b,
            config.momentum, config.clip, CLIP_FACTOR, NORM_EPS,
            ws.look, ws.grads, ws.norms, ws.work, ws.qstress, ws.eta, ws.stress, ws.mean, ws.std,
        )
        if bad >= 0:
            raise NonFiniteUpdate(t + bad)
        if telemetry is not None:
            for i in range(k):
                telemetry({
                    "iteration": t + i,
                    "eta": float(ws.eta[i]),
                    "grad_norm_mean": float(ws.mean[i]),
                    "grad_norm_std": float(ws.std[i]),
                    "stress": float(ws.stress[i]),
                })
        t += k
    return coords
