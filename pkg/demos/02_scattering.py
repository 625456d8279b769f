"""Two fermions meeting head on, and the expansion in interaction events.

A right mover at site 0 and a left mover at site 4 cross once.  The exact
amplitude is compared with the partial sums over the number of
interactions ``k``, each computed from chains of interaction vertices.
"""

import numpy as np

from thirring_qca import WalkParams
from thirring_qca.interaction_pert import order_k_amplitude_pathsum
from thirring_qca.sector import SectorState
from thirring_qca.thirring import evolve, graded_evolve

T = 4
modes_in = ((0, 0), (4, 1))
modes_out = ((1, 1), (3, 0))
params = WalkParams(0.3, np.pi / 3)

exact = evolve(SectorState.basis(modes_in), params, T).amplitude(modes_out)
print(f"exact amplitude        {exact:.12f}")
partial = 0j
for k in range(T + 1):
    term = order_k_amplitude_pathsum(modes_in, modes_out, T, k, params)
    partial += term
    print(f"k = {k}: term {term:+.12f}   partial sum {partial:.12f}")

# The graded oracle keeps the same amplitude as exact integers.
g = graded_evolve(SectorState.basis(modes_in, graded=True), T).amplitude(modes_out)
print("\n(f, j) -> integer coefficient:")
for (f, j), c in sorted(g.terms.items()):
    print(f"  f={f} j={j}: {c}")
