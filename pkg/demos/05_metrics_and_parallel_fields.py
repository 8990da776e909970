"""Affine metrics, the normal plane bundle, and parallel fields.

Parallelism of the Darboux field is equivalent to the vanishing of the
connection form tau11, to equiaffinity of the induced connection, and to
apolarity of the second cubic form; it fails exactly when the normal
bundle has curvature.
"""

import warnings

import numpy as np

from darboux import (
    affine_metric,
    affine_normal_plane,
    apolarity_defect,
    equiaffine_defect,
    load_bundled,
    normal_curvature,
    parallel_field_exists,
    tau_form,
)

for name in ("hyperquadric", "nonflat"):
    scene = load_bundled(name)
    t = [0.1, 0.05]
    g, record = affine_metric(scene, t)
    xi, eta = affine_normal_plane(scene, t)
    print(f"{name} at t = {t}:")
    print("  g =", np.round(g, 6).tolist(), " signature:", record["signature"])
    print("  xi =", np.round(xi, 6), " eta =", np.round(eta, 6))
    print("  tau11 =", np.round(tau_form(scene, t), 8))
    print("  apolarity defect =", np.round(apolarity_defect(scene, t), 8))
    print("  equiaffine defect =", np.round(equiaffine_defect(scene, t), 8))
    print("  dtau(X1, X2) at 0 =", normal_curvature(scene, [0.0, 0.0])[0, 1])
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        rep = parallel_field_exists(scene, [(-0.15, 0.15, 5), (-0.15, 0.15, 5)])
    print("  parallel field:", rep.verdict)
    if rep.verdict == "exists":
        print("    loop residual:", rep.loop_residual,
              " tangency check:", rep.tangency_residual)
    print()
