"""One free particle: binomial path counts against the transfer matrix.

Run with ``python demos/01_free_walk.py``.
"""

import numpy as np

from thirring_qca import WalkParams
from thirring_qca.free_walk import path_count_c, propagator_matrix, walk_matrix

params = WalkParams(0.5)
t = 6

print("Path counts c_ab(f) for a displacement of 2 in 6 steps")
for a in (0, 1):
    for b in (0, 1):
        row = [path_count_c(a, b, f, 0, 2, t) for f in range(t + 1)]
        print(f"  W_{a}{b}: {row}")

# The same propagator from W^t on a ring wide enough to avoid wrapping.
L = 2 * t + 3
P = np.linalg.matrix_power(walk_matrix(L, params), t)
block = propagator_matrix(2, t, params)
print("\nClosed form:\n", np.round(block, 6))
print("W^t block:\n", np.round(P[4:6, 0:2], 6))
print("max |diff| =", np.abs(block - P[4:6, 0:2]).max())
