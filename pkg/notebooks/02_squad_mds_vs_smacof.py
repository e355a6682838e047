"""
SQuaD-MDS against SMACOF
========================

SMACOF minimises the full pairwise stress with O(n^2) work per step.
SQuaD-MDS only looks at random disjoint quartets, O(n) per step. On
moderate datasets the two land on layouts of comparable quality.
"""

import time

from squadmds import datasets
from squadmds.baselines import pairwise_stress, run_smacof
from squadmds.core import RunConfig
from squadmds.optimizer import run_squad_mds
from squadmds.plot import plot_svg
from squadmds.quality import quality_curve

data = datasets.swiss_roll(1000, seed=0)

start = time.perf_counter()
y_smacof = run_smacof(data, RunConfig(method="smacof"))
t_smacof = time.perf_counter() - start

start = time.perf_counter()
y_squad = run_squad_mds(data, RunConfig(iterations=5000))
t_squad = time.perf_counter() - start

# SQuaD-MDS works on relative distances, so its layout has an arbitrary
# scale; compare stresses after the optimal rescaling.
for name, y, seconds in [("smacof", y_smacof, t_smacof), ("squad-mds", y_squad, t_squad)]:
    stress = pairwise_stress(data, y, rescale=True)
    auc = quality_curve(data, y).auc
    print(f"{name:10s} stress {stress:8.3f}  AUC {auc:.3f}  {seconds:5.1f} s")

# Colour by position along the roll and write both layouts.
plot_svg(y_smacof, data.labels, "swiss_roll_smacof.svg")
plot_svg(y_squad, data.labels, "swiss_roll_squad_mds.svg")
