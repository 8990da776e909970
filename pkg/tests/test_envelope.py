"""Envelope points, the tangency family, regression values, meshes."""

import numpy as np
import pytest

from darboux import (
    build_scene,
    envelope_mesh,
    envelope_point,
    family_value,
    regression_values,
    write_obj,
    write_ply,
)
from darboux.envelope import shape_operator
from darboux.errors import EmptyGridError


def test_envelope_point_values(bundled):
    assert np.allclose(envelope_point(bundled["a2"], [0.0], 1.0), [0, 1, 0])
    assert np.allclose(envelope_point(bundled["a4"], [0.0, 0.0], 1.0), [0, 0, 1, 0])
    t = [0.11]
    assert np.allclose(
        envelope_point(bundled["a2"], t, 0.0),
        [0.11, 0.0, 0.11**2 / 2 + 0.11**3 / 6],
    )


def test_family_values(bundled):
    F0, _ = family_value(bundled["a2"], [0.0], [0.0, 1.0, 0.0])
    assert F0 == pytest.approx(0.0, abs=1e-14)
    F1, _ = family_value(bundled["a2"], [0.0], [0.0, 1.0, 1.0])
    assert F1 == pytest.approx(-1.0, abs=1e-14)


def test_family_vanishes_on_envelope():
    rng = np.random.default_rng(17)
    s = build_scene(
        "(t1^2 + t2^2)/2 + (t1^2 + t2^2)*y/2 + t1^3/5 + t1*t2^2/7", "0", 2
    )
    for _ in range(6):
        t = rng.uniform(-0.1, 0.1, 2)
        u = rng.uniform(0.3, 1.7)
        x = envelope_point(s, t, u)
        F, grad = family_value(s, t, x)
        assert abs(F) < 1e-9
        assert np.abs(grad).max() < 1e-9


def test_regression_values(bundled):
    sigma2 = build_scene("t^2/2 + t^3/6 + t^2*y", "0", 1)
    assert regression_values(sigma2, [0.0]) == pytest.approx([0.5])
    assert regression_values(bundled["a4"], [0.0, 0.0]) == pytest.approx([1.0])
    flat = build_scene("t^2/2 + t^4/24 + y^2/2", "0", 1)
    assert regression_values(flat, [0.0]) == []


def test_envelope_mesh_counts_and_flags(bundled):
    mesh = envelope_mesh(bundled["a2"], [(-0.2, 0.2, 10)], (0.5, 1.5, 10))
    assert len(mesh.vertices) == 100
    assert len(mesh.faces) == 81
    assert mesh.vertices.shape[1] == 3
    # a grid hitting the regression value exactly gets flagged
    mesh2 = envelope_mesh(bundled["a2"], [(0.0, 0.0, 1)], (1.0, 1.0, 1))
    assert mesh2.singular.all()
    gap = mesh2.regression_gap[0]
    u, S1 = 1.0, shape_operator(bundled["a2"], [0.0])
    assert gap == pytest.approx(float(np.linalg.det(u * S1 - np.eye(1))), abs=1e-12)
    with pytest.raises(EmptyGridError):
        envelope_mesh(bundled["a2"], [(-0.2, 0.2, 10)], (0.5, 1.5, 0))
    with pytest.raises(EmptyGridError):
        envelope_mesh(bundled["a2"], [], (0.5, 1.5, 3))


def test_mesh_flags_match_regression_values(bundled):
    s = bundled["a2"]
    ts = np.linspace(-0.1, 0.1, 5)
    u_values = sorted(regression_values(s, [t])[0] for t in ts)
    for t in ts:
        u = regression_values(s, [t])[0]
        mesh = envelope_mesh(s, [(t, t, 1)], (u, u, 1))
        assert mesh.singular.all()


def test_nan_policy_keeps_partial_mesh():
    degenerate_at_zero = build_scene("t^2*y/2 + t^2/2 + y^2/2", "0", 1)
    # h2 ~ 1 + y-corrections stays fine; build a scene degenerate at t=0
    s = build_scene("t^3*y + t^2/2 + y^2/2", "0", 1)
    # det h2 vanishes nowhere here; use the hyperbolic scene on a grid
    hyper = build_scene("t*y", "0", 1)
    mesh = envelope_mesh(hyper, [(-0.1, 0.1, 3)], (0.0, 1.0, 2))
    assert np.isnan(mesh.vertices).all()
    assert len(mesh.diagnostics) == 3


def test_mesh_export(tmp_path, bundled):
    mesh = envelope_mesh(bundled["a2"], [(-0.2, 0.2, 4)], (0.5, 1.5, 3))
    obj = tmp_path / "ruled.obj"
    write_obj(mesh, obj)
    lines = obj.read_text().splitlines()
    assert sum(1 for l in lines if l.startswith("v ")) == 12
    assert sum(1 for l in lines if l.startswith("f ")) == 6
    mesh4 = envelope_mesh(bundled["a4"], [(-0.1, 0.1, 3), (-0.1, 0.1, 3)], (0.9, 1.1, 2))
    ply = tmp_path / "cloud.ply"
    write_ply(mesh4, ply)
    text = ply.read_text()
    assert "property double regression_gap" in text
    assert "element vertex 18" in text


def test_jacobian_rank_drop_at_regression(bundled):
    """Finite-difference Jacobian of the envelope map drops rank exactly
    at regression values."""
    s = bundled["a2"]
    h = 1e-5

    def jacobian(t, u):
        cols = []
        for i in range(1):
            e = np.zeros(1)
            e[i] = 1.0
            cols.append(
                (envelope_point(s, t + h * e, u) - envelope_point(s, t - h * e, u))
                / (2 * h)
            )
        cols.append(
            (envelope_point(s, t, u + h) - envelope_point(s, t, u - h)) / (2 * h)
        )
        return np.column_stack(cols)

    t = np.array([0.05])
    u_sing = regression_values(s, t)[0]
    sv = np.linalg.svd(jacobian(t, u_sing), compute_uv=False)
    assert sv[-1] < 1e-5 * sv[0]
    sv2 = np.linalg.svd(jacobian(t, u_sing + 0.2), compute_uv=False)
    assert sv2[-1] > 1e-3 * sv2[0]
