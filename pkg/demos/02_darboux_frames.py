"""Darboux directions and frame coefficients.

A scene is a hypersurface graph z = f(t, y) with a submanifold y = g(t).
When the second fundamental form against the graph transversal is
non-degenerate there is a unique tangent line field along N whose
derivatives stay tangent to M: the osculating Darboux direction.
"""

import numpy as np

from darboux import (
    build_scene,
    darboux_direction,
    load_bundled,
    nondegeneracy,
    structure_coefficients,
)
from darboux.errors import DegenerateError

scene = load_bundled("nonflat")
print("scene:", scene.describe())
for t in ([0.0, 0.0], [0.1, 0.05], [-0.2, 0.1]):
    xi = darboux_direction(scene, t)
    coeffs = structure_coefficients(scene, t)
    print(f"\nt = {t}")
    print("  xi =", np.round(xi, 6))
    print("  S1 =", np.round(coeffs.S1, 6).tolist())
    print("  tau11 =", np.round(coeffs.tau11, 6))

# the ruled-saddle scene is degenerate: its osculating plane collapses
saddle = build_scene("t*y", "0", 1)
print("\nhyperbolic graph scene, det h2 =", nondegeneracy(saddle, [0.0]))
try:
    darboux_direction(saddle, [0.0])
except DegenerateError as err:
    print("as expected:", err)
