"""
Relative quartet stress, by hand
================================

A quartet is four points. Its six pairwise distances, divided by their
sum, form a scale-free shape descriptor. The quartet stress compares the
descriptor of the data with that of the embedding.
"""

import numpy as np

from squadmds.quartet import quartet_distances, quartet_gradient, quartet_stress

# A unit square in the data and the same square, seven times larger, in the
# embedding: the relative distances agree, so the stress is zero.
square = np.array([[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]])
w = quartet_distances(square, 7.0 * square, range(4))
print("relative distances:", np.round(w.hd_rel, 6))
print("stress of a scaled copy:", quartet_stress(w))

# Squash the embedded square into a rectangle. The stress becomes positive
# and the gradient points back towards a square.
rectangle = square * np.array([2.0, 0.5])
w = quartet_distances(square, rectangle, range(4))
print("stress of a 4:1 rectangle:", quartet_stress(w))
g = quartet_gradient(w, rectangle)
print("gradient (rows follow the points):")
print(g)

# A small step against the gradient lowers the stress.
step = rectangle - 5.0 * g
print("after one step:", quartet_stress(quartet_distances(square, step, range(4))))
