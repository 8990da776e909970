"""Envelope of tangent spaces along N, its defining family, regression
values, and mesh export.

The envelope is the hypersurface (t, u) -> phi(t) + u xi(t) swept by the
Darboux line field.  It is the discriminant of the tangency family
F(t, x) = bracket(X_1(t), ..., X_n(t), xi(t), x - phi(t)), and it is
singular exactly where u is the inverse of a nonzero eigenvalue of the
shape operator of xi.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import DegenerateError, EmptyGridError
from .frame import frame_fields, vec_values
from .jets import Jet, bracket

REGRESSION_DEDUPE_TOL = 1e-9
SINGULAR_FLAG_TOL = 1e-6


def envelope_point(scene, t, u):
    """phi(t) + u xi(t) in the scene's gauge."""
    ff = frame_fields(scene, t, 1)
    return vec_values(ff.phi) + float(u) * vec_values(ff.xi)


def family_value(scene, t, x):
    """The tangency family F and its parameter gradient at (t, x).

    F(t, x) is the oriented bracket of the tangent frame, the Darboux
    vector and the offset x - phi(t); for a graph scene it expands as
    f - x_{n+2} + ....  Returns (F, array of dF/dt_i).
    """
    ff = frame_fields(scene, t, 1)
    x = np.asarray(x, dtype=float)
    offset = [Jet.constant(ff.space, x[r]) - ff.phi[r] for r in range(scene.n + 2)]
    fam = bracket(ff.X + [ff.xi, offset])
    grad = np.array([float(fam.derivative(i).value) for i in range(scene.n)])
    return float(fam.value), grad


def family_jet(scene, t, x, order):
    """Jet of t -> F(t, x) at the given base point (internal)."""
    ff = frame_fields(scene, t, order)
    x = np.asarray(x, dtype=float)
    offset = [Jet.constant(ff.space, x[r]) - ff.phi[r] for r in range(scene.n + 2)]
    return bracket(ff.X + [ff.xi, offset])


def shape_operator(scene, t):
    """Matrix of the shape operator of the gauged Darboux field at t."""
    ff = frame_fields(scene, t, 1)
    coeffs = ff.structure_jets()
    n = scene.n
    return np.array(
        [[float(coeffs["S1"][k][j].value) for j in range(n)] for k in range(n)]
    )


def regression_values(scene, t):
    """Sorted inverses of the real nonzero eigenvalues of the shape operator."""
    S1 = shape_operator(scene, t)
    eigenvalues = np.linalg.eigvals(S1)
    scale = max(np.abs(eigenvalues).max(), 1.0)
    values = []
    for ev in eigenvalues:
        if abs(ev.imag) > REGRESSION_DEDUPE_TOL * scale:
            continue
        if abs(ev.real) <= REGRESSION_DEDUPE_TOL * scale:
            continue
        values.append(1.0 / ev.real)
    values.sort()
    deduped = []
    for v in values:
        if not deduped or abs(v - deduped[-1]) > REGRESSION_DEDUPE_TOL:
            deduped.append(v)
    return deduped


@dataclass
class Mesh:
    """Envelope samples over a tensor grid.

    For n = 1 the vertices live in R^3 and carry quad connectivity; for
    n >= 2 the mesh is a point cloud.  ``regression_gap`` stores
    det(u S1(t) - Id) per vertex and ``singular`` flags near-zero gaps.
    Degenerate vertices are NaN rows listed in ``diagnostics``.
    """

    vertices: np.ndarray
    faces: list
    regression_gap: np.ndarray
    singular: np.ndarray
    grid_shape: tuple
    diagnostics: list = field(default_factory=list)


def _axis(lo, hi, count):
    if count < 1:
        raise EmptyGridError("axis count must be at least 1")
    return np.linspace(lo, hi, count)


def envelope_mesh(scene, t_axes, u_range, singular_tol=SINGULAR_FLAG_TOL):
    """Sample the envelope over a tensor grid.

    ``t_axes`` is one (lo, hi, count) triple per parameter axis and
    ``u_range`` the triple for the ruling parameter.  Per-vertex
    degeneracies become NaN vertices plus a diagnostic, not a failure.
    """
    if len(t_axes) != scene.n:
        raise EmptyGridError(f"expected {scene.n} parameter axes, got {len(t_axes)}")
    axes = [_axis(*axis) for axis in t_axes]
    u_values = _axis(*u_range)
    t_grid = [np.array(p) for p in _product(axes)]
    n_vertices = len(t_grid) * len(u_values)
    vertices = np.full((n_vertices, scene.n + 2), np.nan)
    gaps = np.full(n_vertices, np.nan)
    diagnostics = []
    identity = np.eye(scene.n)
    row = 0
    for t in t_grid:
        try:
            ff = frame_fields(scene, t, 1)
            phi = vec_values(ff.phi)
            xi = vec_values(ff.xi)
            S1 = shape_operator(scene, t)
        except DegenerateError as err:
            diagnostics.append(f"t={t.tolist()}: {err}")
            row += len(u_values)
            continue
        for u in u_values:
            vertices[row] = phi + u * xi
            gaps[row] = float(np.linalg.det(u * S1 - identity))
            row += 1
    singular = np.abs(gaps) < singular_tol
    faces = []
    if scene.n == 1:
        nt, nu = len(axes[0]), len(u_values)
        for i in range(nt - 1):
            for j in range(nu - 1):
                a = i * nu + j
                faces.append((a, a + 1, a + nu + 1, a + nu))
    shape = tuple(len(a) for a in axes) + (len(u_values),)
    return Mesh(vertices, faces, gaps, singular, shape, diagnostics)


def _product(axes):
    if len(axes) == 1:
        for v in axes[0]:
            yield (v,)
        return
    for v in axes[0]:
        for rest in _product(axes[1:]):
            yield (v,) + rest


# -- export ---------------------------------------------------------------


def write_obj(mesh, path):
    """ASCII OBJ with quad faces; only meaningful for vertices in R^3."""
    if mesh.vertices.shape[1] != 3:
        raise EmptyGridError("OBJ export requires vertices in R^3 (n = 1 scenes)")
    with open(path, "w") as handle:
        for v in mesh.vertices:
            handle.write(f"v {v[0]:.17g} {v[1]:.17g} {v[2]:.17g}\n")
        for f in mesh.faces:
            handle.write("f " + " ".join(str(i + 1) for i in f) + "\n")


def write_ply(mesh, path):
    """ASCII PLY point cloud; the first three coordinates map to x, y, z
    and any remaining ones are kept as extra properties, together with the
    regression gap scalar field."""
    dim = mesh.vertices.shape[1]
    names = ["x", "y", "z"][: min(dim, 3)] + [f"c{k}" for k in range(3, dim)]
    with open(path, "w") as handle:
        handle.write("ply\nformat ascii 1.0\n")
        handle.write(f"element vertex {len(mesh.vertices)}\n")
        for name in names:
            handle.write(f"property double {name}\n")
        handle.write("property double regression_gap\n")
        handle.write("property uchar singular\n")
        handle.write("end_header\n")
        for v, gap, flag in zip(mesh.vertices, mesh.regression_gap, mesh.singular):
            coords = " ".join(f"{c:.17g}" for c in v)
            handle.write(f"{coords} {gap:.17g} {1 if flag else 0}\n")
