"""Envelopes of tangent spaces and their simple singularities.

The envelope is the hypersurface swept by the Darboux lines.  It is
singular exactly where the ruling parameter u inverts an eigenvalue of
the shape operator, and the height-family germs there realize the simple
singularity classes.
"""

from pathlib import Path

import numpy as np

from darboux import (
    classify_envelope_point,
    envelope_mesh,
    envelope_point,
    load_bundled,
    regression_values,
    write_obj,
)

out = Path("out")
out.mkdir(exist_ok=True)

for name in ("a2", "a3", "a4", "d4", "e6"):
    scene = load_bundled(name)
    t0 = [0.0] * scene.n
    regs = regression_values(scene, t0)
    report = classify_envelope_point(scene, t0, regs[0])
    print(
        f"{name}: regression u = {regs}, class = {report['class']}, "
        f"versal = {report['versal']} ({report['versal_method']})"
    )

scene = load_bundled("a2")
mesh = envelope_mesh(scene, [(-0.45, 0.45, 60)], (0.55, 1.45, 25))
path = out / "cusp_edge_envelope.obj"
write_obj(mesh, path)
print(f"\nwrote {path} with {len(mesh.vertices)} vertices, "
      f"{int(mesh.singular.sum())} flagged singular")
print("the singular flags trace u = 1/sigma(t); for example:")
for t in (-0.2, 0.0, 0.2):
    print(f"  t = {t:+.1f}: u = {regression_values(scene, [t])[0]:.6f}")
