# Tour of category encodings and their rescaled distance matrices.
#
# A categorical variable becomes usable for distance-based statistics once
# each level is embedded as a point.  This script builds the three stock
# embeddings plus a custom one and prints their pairwise distances, all
# rescaled so the largest entry is exactly 1.

import numpy as np

from catdcor import custom, distance_matrix, one_hot, ordinal_equal, semicircle_equal

np.set_printoptions(precision=4, suppress=True)

# One-hot: every pair of distinct levels is equally far apart, so the
# rescaled matrix is 0 on the diagonal and 1 elsewhere.
enc = one_hot(4, labels=["north", "south", "east", "west"])
dm = distance_matrix(enc)
print("one-hot, four nominal levels (raw scale", round(dm.scale, 4), ")")
print(dm.d)

# Ordinal: levels sit on a line, distances add up along the order.
enc = ordinal_equal(4, labels=["none", "mild", "moderate", "severe"])
dm = distance_matrix(enc)
print("\nordinal, four ordered levels")
print(dm.d)
print("additivity: d(none, severe) =", dm.d[0, 3],
      "= d(none, mild) + d(mild, moderate) + d(moderate, severe) =",
      dm.d[0, 1] + dm.d[1, 2] + dm.d[2, 3])

# Semicircle: levels sit on a half circle; adjacent levels stay close but
# the extremes are only distance 1 apart instead of growing linearly.
enc = semicircle_equal(4)
dm = distance_matrix(enc)
print("\nsemicircle, four ordered levels")
print(dm.d)
print("strict triangle inequality: d(1,4) =", dm.d[0, 3],
      "< d(1,2) + d(2,4) =", dm.d[0, 1] + dm.d[1, 3])

# Custom: domain knowledge about spacings goes straight into the points.
# Here 'moderate' is perceived closer to 'mild' than to 'severe'.
enc = custom(["mild", "moderate", "severe"], [[1.0], [3.0], [6.0]])
dm = distance_matrix(enc)
print("\ncustom severity scale 1/3/6")
print(dm.d)

# The rescaling makes the matrix invariant to any uniform stretching of
# the embedding, so only relative spacings matter.
stretched = custom(["mild", "moderate", "severe"], [[10.0], [30.0], [60.0]])
print("\nsame matrix after stretching the points tenfold:",
      np.allclose(distance_matrix(stretched).d, dm.d))
