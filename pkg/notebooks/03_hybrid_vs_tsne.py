"""
Adding quartet gradients to t-SNE
=================================

t-SNE keeps small neighbourhoods but places clusters almost arbitrarily.
Blending in the normalised SQuaD-MDS gradient keeps the clusters and
puts them where the distances say they belong. The R_NX curve shows the
gain at large neighbourhood sizes K.
"""

import numpy as np

from squadmds import datasets
from squadmds.core import RunConfig
from squadmds.hybrid import run_hybrid
from squadmds.plot import plot_svg
from squadmds.quality import quality_curve
from squadmds.tsne import multiscale_similarities, run_tsne

# Ten far-apart groups of five sub-clusters each.
n = 2000
data = datasets.hierarchical_mixture(n, seed=0)

# Both runs share the similarities and the PCA start.
sims = multiscale_similarities(data, (4.0, 50.0))
y_tsne = run_tsne(data, RunConfig(method="tsne"), similarities=sims)
y_hybrid = run_hybrid(data, RunConfig(method="hybrid"), similarities=sims)

for name, y in [("t-SNE", y_tsne), ("hybrid", y_hybrid)]:
    c = quality_curve(data, y)
    print(f"{name:7s} AUC {c.auc:.3f}  R_NX K<=100 {c.mean_rnx(1, 100):.3f}  "
          f"R_NX K in [n/4, n/2] {c.mean_rnx(n // 4, n // 2):.3f}")

# Colour by macro cluster (label // 5).
macro = (np.array(data.labels) // 5).tolist()
plot_svg(y_tsne, macro, "hierarchy_tsne.svg")
plot_svg(y_hybrid, macro, "hierarchy_hybrid.svg")
