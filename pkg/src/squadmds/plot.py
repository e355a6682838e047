"""Standalone SVG scatter plots of 2-D embeddings.

Output bytes depend only on the inputs: coordinates are rounded to a fixed
number of decimals and points are grouped by colour in order of first
appearance. Large embeddings get fewer decimals and smaller dots so
the file stays under a byte budget.
"""

import numpy as np

from .core import check_embedding
from .errors import IoError

# Categorical palette (cycled when there are more classes)
PALETTE = (
    "#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd",
    "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf",
)
# Anchor colours of a perceptually ordered dark-blue -> yellow ramp
RAMP = np.array([
    [68, 1, 84], [59, 82, 139], [33, 145, 140], [94, 201, 98], [253, 231, 37],
], dtype=np.float64)
# Labels with more distinct numeric values than this are coloured on the ramp
MAX_CATEGORIES = 20
MARGIN = 0.05
DEFAULT_BUDGET = 50 * 1024 * 1024


def _is_numeric(labels):
    try:
        values = np.array([float(x) for x in labels])
    except (TypeError, ValueError):
        return None
    return values if np.isfinite(values).all() else None


def _ramp_colour(u):
    pos = u * (len(RAMP) - 1)
    i = min(int(pos), len(RAMP) - 2)
    rgb = RAMP[i] + (pos - i) * (RAMP[i + 1] - RAMP[i])
    return "#%02x%02x%02x" % tuple(int(round(c)) for c in rgb)


def point_colours(labels, n):
    """Hex colour of every point: palette by class, or ramp for numeric labels."""
    if labels is None:
        return [PALETTE[0]] * n
    labels = list(labels)
    values = _is_numeric(labels)
    if values is not None and len(np.unique(values)) > MAX_CATEGORIES:
        lo, hi = values.min(), values.max()
        span = hi - lo if hi > lo else 1.0
        # quantise to 64 steps so colours group well
        return [_ramp_colour(round((v - lo) / span * 63) / 63) for v in values]
    if values is not None:
        order = sorted(set(values.tolist()))
        slot = {v: k for k, v in enumerate(order)}
        return [PALETTE[slot[v] % len(PALETTE)] for v in values.tolist()]
    order = sorted(set(map(str, labels)))
    slot = {v: k for k, v in enumerate(order)}
    return [PALETTE[slot[str(v)] % len(PALETTE)] for v in labels]


def _style(n, budget):
    """(decimals, radius) for n points; coarser when the file would be large."""
    decimals, radius = 2, 3.0
    if n > 5000:
        radius = 1.5
    if n > 20000:
        decimals, radius = 1, 1.0
    # ~40 bytes per circle at 2 decimals plus a fixed overhead
    while decimals > 0 and n * (30 + 2 * decimals) + 4096 > budget:
        decimals -= 1
    return decimals, radius


def render_svg(embedding, labels=None, size=800, budget=DEFAULT_BUDGET):
    """SVG document text for a scatter of ``embedding``.

    The drawing keeps the embedding's aspect ratio inside a ``size`` x
    ``size`` canvas and leaves a 5% margin on every side. SVG's y axis
    points down, so y is flipped to keep the usual orientation.
    """
    y = check_embedding(embedding)
    n = y.shape[0]
    if labels is not None and len(labels) != n:
        raise ValueError(f"{len(labels)} labels for {n} points")
    decimals, radius = _style(n, budget)
    lo = y.min(axis=0) if n else np.zeros(2)
    hi = y.max(axis=0) if n else np.ones(2)
    extent = float(max(hi[0] - lo[0], hi[1] - lo[1]))
    if extent == 0.0:
        extent = 1.0
    inner = size * (1.0 - 2.0 * MARGIN)
    scale = inner / extent
    centre = 0.5 * (lo + hi)
    px = size / 2.0 + (y[:, 0] - centre[0]) * scale
    py = size / 2.0 - (y[:, 1] - centre[1]) * scale

    colours = point_colours(labels, n)
    groups = {}
    for i, colour in enumerate(colours):
        groups.setdefault(colour, []).append(i)
    fmt = f"{{:.{decimals}f}}"
    r = f"{radius:g}"
    lines = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" viewBox="0 0 {size} {size}" '
        f'width="{size}" height="{size}">',
        f'<rect width="{size}" height="{size}" fill="#ffffff"/>',
    ]
    for colour, members in groups.items():
        lines.append(f'<g fill="{colour}" fill-opacity="0.8">')
        for i in members:
            lines.append(f'<circle cx="{fmt.format(px[i])}" cy="{fmt.format(py[i])}" r="{r}"/>')
        lines.append("</g>")
    lines.append("</svg>")
    return "\n".join(lines) + "\n"


def plot_svg(embedding, labels=None, path=None, size=800, budget=DEFAULT_BUDGET):
    """Write :func:`render_svg` output to ``path`` (if given) and return the text."""
    text = render_svg(embedding, labels, size, budget)
    if path is not None:
        try:
            with open(path, "w", encoding="utf-8", newline="\n") as fh:
                fh.write(text)
        except OSError as exc:
            raise IoError(f"cannot write {path}: {exc.strerror or exc}") from exc
    return text
