"""Curves in surfaces: adapted parameterizations and developables.

A parameterization is adapted when the third derivative stays tangent to
the surface; the affine Darboux frame then has unit volume and scalar
invariants sigma, mu, tau.  The criterion sigma_t - sigma tau11
distinguishes cuspidal edges from swallowtails on the developable.
"""

from pathlib import Path

import numpy as np

from darboux import (
    adapt_parameterization,
    as_curve,
    curve_invariants,
    curve_singularity,
    load_bundled,
    tangent_developable,
    write_obj,
)

out = Path("out")
out.mkdir(exist_ok=True)

curve = as_curve(load_bundled("cubic-curve"))
table = adapt_parameterization(curve, (-0.2, 0.2), 9)
print("adapted reparameterization of the cubic-curve scene:")
print("  max |nu(gamma_ttt)| / |nu(gamma_tt)| =", table.residual.max())
for t, s, p in zip(table.t[::4], table.s[::4], table.ds_dt[::4]):
    inv = curve_invariants(curve, t, s_value=s, p_value=p)
    print(f"  t = {t:+.3f}: s = {s:+.6f}, sigma = {inv.sigma:+.6f}, "
          f"mu = {inv.mu:+.6f}, tau = {inv.tau:+.6f}")

a2 = as_curve(load_bundled("a2"))
a3 = as_curve(load_bundled("a3"))
print("\nsingularity verdicts at t = 0:")
print("  cusp-edge scene:  ", curve_singularity(a2, 0.0))
print("  swallowtail scene:", curve_singularity(a3, 0.0))

mesh = tangent_developable(a3, (-0.5, 0.5, 60), (0.6, 1.4, 25))
path = out / "swallowtail_developable.obj"
write_obj(mesh, path)
print(f"\nwrote {path} ({len(mesh.vertices)} vertices)")
