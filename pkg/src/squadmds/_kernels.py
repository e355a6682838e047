"""Compiled inner loops.

Every kernel that touches more than a handful of points lives here so the
public modules stay readable numpy. Kernels with a ``_par`` twin are compiled
from the same Python source with ``parallel=True``; their parallel loops only
write disjoint rows and all reductions run sequentially in index order, so
both twins return identical bits.

Apart from the t-SNE row sums (see below) no kernel uses fastmath.
"""

import os

import numba
import numpy as np

if "NUMBA_THREADING_LAYER" not in os.environ:
    numba.config.THREADING_LAYER = "workqueue"

DIST_FLOOR = 1e-12


def use_workers(workers):
    """Set the thread count of parallel kernels, capped at what numba allows."""
    numba.set_num_threads(max(1, min(int(workers), numba.config.NUMBA_NUM_THREADS)))

# pair p of a quartet joins local points PAIR_A[p] and PAIR_B[p]
PAIR_A = (0, 0, 0, 1, 1, 2)
PAIR_B = (1, 2, 3, 2, 3, 3)


# ---------------------------------------------------------------- quartets


@numba.njit
def _one_quartet(hd, coords, perm, q, grads, work):
    """Gradient of the relative quartet stress for quartet ``q`` of ``perm``.

    Writes the four gradient rows into ``grads`` and returns the stress.
    ``work`` is a scratch row of length >= 30.
    """
    m = hd.shape[1]
    base = 4 * q
    dh = work[0:6]
    dl = work[6:12]
    ux = work[12:18]
    uy = work[18:24]
    c = work[24:30]
    sum_h = 0.0
    sum_l = 0.0
    for p in range(6):
        a = perm[base + PAIR_A[p]]
        b = perm[base + PAIR_B[p]]
        s = 0.0
        for k in range(m):
            diff = hd[a, k] - hd[b, k]
            s += diff * diff
        d = np.sqrt(s)
        if d < DIST_FLOOR:
            d = DIST_FLOOR
        dh[p] = d
        sum_h += d
        dx = coords[a, 0] - coords[b, 0]
        dy = coords[a, 1] - coords[b, 1]
        d = np.sqrt(dx * dx + dy * dy)
        if d < DIST_FLOOR:
            d = DIST_FLOOR
        dl[p] = d
        ux[p] = dx / d
        uy[p] = dy / d
        sum_l += d
    cross = 0.0
    stress = 0.0
    for p in range(6):
        rel_l = dl[p] / sum_l
        diff = rel_l - dh[p] / sum_h
        c[p] = 2.0 * diff / sum_l
        cross += c[p] * rel_l
        stress += diff * diff
    for r in range(4):
        grads[perm[base + r], 0] = 0.0
        grads[perm[base + r], 1] = 0.0
    for p in range(6):
        a = perm[base + PAIR_A[p]]
        b = perm[base + PAIR_B[p]]
        coef = c[p] - cross
        gx = coef * ux[p]
        gy = coef * uy[p]
        grads[a, 0] += gx
        grads[a, 1] += gy
        grads[b, 0] -= gx
        grads[b, 1] -= gy
    return stress


def _quartet_grads_src(hd, coords, perm, grads, work, qstress):
    n_quartets = perm.shape[0] // 4
    for q in numba.prange(n_quartets):
        qstress[q] = _one_quartet(hd, coords, perm, q, grads, work[q])
    for r in range(4 * n_quartets, perm.shape[0]):
        grads[perm[r], 0] = 0.0
        grads[perm[r], 1] = 0.0


quartet_grads = numba.njit(_quartet_grads_src)
quartet_grads_par = numba.njit(parallel=True)(_quartet_grads_src)


# ------------------------------------------------------- row statistics


def _row_norms_src(g, norms):
    for i in numba.prange(g.shape[0]):
        norms[i] = np.sqrt(g[i, 0] * g[i, 0] + g[i, 1] * g[i, 1])


row_norms = numba.njit(_row_norms_src)


@numba.njit
def mean_std(values):
    """Population mean and standard deviation, summed in index order."""
    n = values.shape[0]
    s = 0.0
    for i in range(n):
        s += values[i]
    mean = s / n
    v = 0.0
    for i in range(n):
        d = values[i] - mean
        v += d * d
    return mean, np.sqrt(v / n)


@numba.njit
def clip_rows(g, norms, factor):
    """Shrink rows whose norm exceeds ``max(factor * std, mean)`` of all norms.

    Returns the number of clipped rows. ``norms`` must hold the row norms of
    ``g`` and is updated for the clipped rows.
    """
    mean, std = mean_std(norms)
    limit = factor * std
    if limit < mean:
        limit = mean
    clipped = 0
    for i in range(g.shape[0]):
        if norms[i] > limit:
            s = limit / norms[i]
            g[i, 0] *= s
            g[i, 1] *= s
            norms[i] = limit
            clipped += 1
    return clipped


@numba.njit
def normalize_rows(g, norms, eps):
    """Divide ``g`` in place by max(std of its row norms, eps); return that std."""
    row_norms(g, norms)
    _, std = mean_std(norms)
    scale = std if std > eps else eps
    for i in range(g.shape[0]):
        g[i, 0] /= scale
        g[i, 1] /= scale
    return std


# ------------------------------------------------------------- nesterov


@numba.njit
def lookahead(coords, vel, gamma, out):
    for i in range(coords.shape[0]):
        out[i, 0] = coords[i, 0] + gamma * vel[i, 0]
        out[i, 1] = coords[i, 1] + gamma * vel[i, 1]


@numba.njit
def apply_step(coords, vel, step, gamma):
    """v <- gamma * v - step; x <- x + v. Returns False on a non-finite result."""
    ok = True
    for i in range(coords.shape[0]):
        for k in range(2):
            v = gamma * vel[i, k] - step[i, k]
            vel[i, k] = v
            x = coords[i, k] + v
            coords[i, k] = x
            if not np.isfinite(x):
                ok = False
    return ok


@numba.njit
def scale_into(out, g, eta):
    for i in range(g.shape[0]):
        out[i, 0] = eta * g[i, 0]
        out[i, 1] = eta * g[i, 1]


@numba.njit
def add_scaled(out, g, eta):
    for i in range(g.shape[0]):
        out[i, 0] += eta * g[i, 0]
        out[i, 1] += eta * g[i, 1]


@numba.njit
def mds_arm(qfn, hd, look, perm, grads, norms, work, qstress, clip, clip_factor, eps):
    """Clipped and std-normalised quartet gradient at ``look``.

    Returns (sampled stress, raw mean norm, raw norm std).
    """
    qfn(hd, look, perm, grads, work, qstress)
    row_norms(grads, norms)
    mean, std = mean_std(norms)
    if clip:
        clip_rows(grads, norms, clip_factor)
    normalize_rows(grads, norms, eps)
    n_quartets = perm.shape[0] // 4
    s = 0.0
    for q in range(n_quartets):
        s += qstress[q]
    return s / n_quartets, mean, std


@numba.njit
def squad_block(qfn, hd, coords, vel, perms, t0, eta0, a, b, gamma, clip, clip_factor, eps,
                look, grads, norms, work, qstress, out_eta, out_stress, out_mean, out_std):
    """Run ``perms.shape[0]`` standalone SQuaD-MDS iterations in place.

    Returns the index within the block of the first non-finite update, or -1.
    """
    for it in range(perms.shape[0]):
        t = t0 + it
        eta = eta0 * b / (a * t + b)
        lookahead(coords, vel, gamma, look)
        stress, mean, std = mds_arm(qfn, hd, look, perms[it], grads, norms, work, qstress,
                                    clip, clip_factor, eps)
        scale_into(grads, grads, eta)
        out_eta[it] = eta
        out_stress[it] = stress
        out_mean[it] = mean
        out_std[it] = std
        if not apply_step(coords, vel, grads, gamma):
            return it
    return -1


# ---------------------------------------------------------------- t-SNE


# exp(x) is exactly 0.0 in float64 below this argument
EXP_UNDERFLOW = -746.0
# largest change of log(beta) per calibration step
NEWTON_MAX_LOG_STEP = 3.0


@numba.njit
def calibrate_rows(sqd, target_log_perp, tol, max_iter, out, betas):
    """Entropy-matched Gaussian rows by safeguarded Newton steps on beta.

    ``sqd[r]`` holds squared distances from point r to every candidate
    neighbour (self already removed); distances are shifted by the row
    minimum so the nearest neighbour has kernel value 1. Terms whose kernel
    underflows to exactly zero are skipped without calling ``exp``.
    The entropy ``H(beta)`` is decreasing in beta, and a Newton step on
    ``log(beta)``, capped in size, is taken when it stays inside the current bracket, a
    geometric bisection (or doubling, while unbounded above) otherwise. Rows that miss
    the target after ``max_iter`` steps fall back to uniform and get a NaN
    beta.
    """
    n_rows, n_cols = sqd.shape
    target = np.exp(target_log_perp)
    d = np.empty(n_cols)
    for r in range(n_rows):
        dmin = np.inf
        for j in range(n_cols):
            if sqd[r, j] < dmin:
                dmin = sqd[r, j]
        total = 0.0
        for j in range(n_cols):
            d[j] = sqd[r, j] - dmin
            total += d[j]
        beta = n_cols / total if total > 0 else 1.0
        lo = 0.0
        hi = np.inf
        done = False
        z = 1.0
        for _ in range(max_iter):
            z = 0.0
            wsum = 0.0
            w2sum = 0.0
            for j in range(n_cols):
                x = -beta * d[j]
                if x >= EXP_UNDERFLOW:
                    e = np.exp(x)
                    z += e
                    wsum += d[j] * e
                    w2sum += d[j] * d[j] * e
            mean_d = wsum / z
            entropy = np.log(z) + beta * mean_d
            if abs(np.exp(entropy) - target) <= tol * target:
                done = True
                break
            if entropy > target_log_perp:
                lo = beta
            else:
                hi = beta
            # Newton on log(beta): dH/dlog(beta) = -beta^2 Var(d)
            slope = -beta * beta * (w2sum / z - mean_d * mean_d)
            step = -(entropy - target_log_perp) / slope if slope < 0.0 else NEWTON_MAX_LOG_STEP
            if step > NEWTON_MAX_LOG_STEP:
                step = NEWTON_MAX_LOG_STEP
            elif step < -NEWTON_MAX_LOG_STEP:
                step = -NEWTON_MAX_LOG_STEP
            cand = beta * np.exp(step)
            if lo < cand < hi:
                beta = cand
            elif hi == np.inf:
                beta = beta * 2.0
            elif lo > 0.0:
                beta = np.sqrt(lo * hi)
            else:
                beta = 0.5 * hi
        if done:
            for j in range(n_cols):
                x = -beta * d[j]
                out[r, j] = np.exp(x) / z if x >= EXP_UNDERFLOW else 0.0
            betas[r] = beta
        else:
            for j in range(n_cols):
                out[r, j] = 1.0 / n_cols
            betas[r] = np.nan


@numba.njit
def symmetrize_dense(p, scale):
    """p <- (p + p.T) * scale, in place."""
    n = p.shape[0]
    for i in range(n):
        p[i, i] = 0.0
        for j in range(i + 1, n):
            v = (p[i, j] + p[j, i]) * scale
            p[i, j] = v
            p[j, i] = v


# Reassociation lets the row reductions vectorise. It is confined to the
# t-SNE row kernels, which are compiled once with parallel=True and run with
# any thread count: a row is always summed by one thread with the same code,
# so the result does not depend on the number of workers.
_ROW_MATH = {"reassoc", "nsz", "contract"}


@numba.njit(fastmath=_ROW_MATH)
def _repulsion_row(y0, y1, i, out):
    n = y0.shape[0]
    a0 = y0[i]
    a1 = y1[i]
    rx = 0.0
    ry = 0.0
    z = 0.0
    for j in range(n):
        dx = a0 - y0[j]
        dy = a1 - y1[j]
        w = 1.0 / (1.0 + dx * dx + dy * dy)
        z += w
        ww = w * w
        rx += ww * dx
        ry += ww * dy
    # j == i contributed w = 1 to z and nothing to rx, ry
    out[0] = rx
    out[1] = ry
    out[2] = z - 1.0


@numba.njit(fastmath=_ROW_MATH)
def _dense_attraction_row(p, y0, y1, i, out):
    n = y0.shape[0]
    a0 = y0[i]
    a1 = y1[i]
    ax = 0.0
    ay = 0.0
    for j in range(n):
        dx = a0 - y0[j]
        dy = a1 - y1[j]
        pw = p[i, j] / (1.0 + dx * dx + dy * dy)
        ax += pw * dx
        ay += pw * dy
    out[3] = ax
    out[4] = ay


@numba.njit(parallel=True)
def _tsne_dense_parts(p, y0, y1, parts):
    for i in numba.prange(y0.shape[0]):
        _repulsion_row(y0, y1, i, parts[i])
        _dense_attraction_row(p, y0, y1, i, parts[i])


@numba.njit(parallel=True)
def _tsne_sparse_parts(indptr, indices, data, y0, y1, parts):
    for i in numba.prange(y0.shape[0]):
        _repulsion_row(y0, y1, i, parts[i])
        ax = 0.0
        ay = 0.0
        for k in range(indptr[i], indptr[i + 1]):
            j = indices[k]
            dx = y0[i] - y0[j]
            dy = y1[i] - y1[j]
            pw = data[k] / (1.0 + dx * dx + dy * dy)
            ax += pw * dx
            ay += pw * dy
        parts[i, 3] = ax
        parts[i, 4] = ay


@numba.njit
def _combine_tsne(parts, exaggeration, out):
    n = out.shape[0]
    z = 0.0
    for i in range(n):
        z += parts[i, 2]
    for i in range(n):
        out[i, 0] = 4.0 * (exaggeration * parts[i, 3] - parts[i, 0] / z)
        out[i, 1] = 4.0 * (exaggeration * parts[i, 4] - parts[i, 1] / z)
    return z


def tsne_dense(p, y, out, exaggeration=1.0):
    """Exact t-SNE gradient into ``out``; returns the normaliser Z."""
    parts = np.empty((y.shape[0], 5))
    _tsne_dense_parts(p, np.ascontiguousarray(y[:, 0]), np.ascontiguousarray(y[:, 1]), parts)
    return _combine_tsne(parts, exaggeration, out)


def tsne_sparse(p, y, out, exaggeration=1.0):
    parts = np.empty((y.shape[0], 5))
    _tsne_sparse_parts(p.indptr, p.indices, p.data,
                       np.ascontiguousarray(y[:, 0]), np.ascontiguousarray(y[:, 1]), parts)
    return _combine_tsne(parts, exaggeration, out)


# ------------------------------------------------------------- distances


def _sq_dist_rows_src(x, start, stop, out):
    n, m = x.shape
    for r in numba.prange(stop - start):
        i = start + r
        for j in range(n):
            s = 0.0
            for k in range(m):
                d = x[i, k] - x[j, k]
                s += d * d
            out[r, j] = s


sq_dist_rows = numba.njit(_sq_dist_rows_src)
sq_dist_rows_par = numba.njit(parallel=True)(_sq_dist_rows_src)
