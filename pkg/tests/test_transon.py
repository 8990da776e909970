"""Hyperplane sections, section normals, and the swept plane."""

import numpy as np
import pytest

from darboux import (
    build_scene,
    hyperplane_section,
    monge_frame,
    principal_angles,
    section_blaschke_normal,
    tau_form,
    transon_plane,
    transon_planarity_residual,
    transon_report,
    transon_vs_normal_plane,
)
from darboux.errors import NeedMoreSectionsError
from darboux.transon import projected_submanifold_normal
from conftest import eval_poly_jet, random_cubic_scene


def test_monge_frame_normalization():
    rng = np.random.default_rng(3)
    for _ in range(4):
        s = random_cubic_scene(rng, 2, with_g=True)
        t0 = rng.uniform(-0.05, 0.05, 2)
        mf = monge_frame(s, t0)
        W = mf.W
        assert abs(float(W.value)) < 1e-12
        for k in range(3):
            assert abs(float(W.derivative(k).value)) < 1e-12
        hess_t = np.array(
            [[_mixed(W, i, j) for j in range(2)] for i in range(2)]
        )
        assert np.abs(hess_t - np.diag(mf.eps)).max() < 1e-10
        assert abs(_mixed(W, 0, 2)) < 1e-10
        assert abs(_mixed(W, 1, 2)) < 1e-10
        # N in Monge coordinates has no constant or linear part
        assert abs(float(mf.G.value)) < 1e-12
        assert abs(float(mf.G.derivative(0).value)) < 1e-12


def _mixed(jet, i, j):
    alpha = [0] * jet.space.nvars
    alpha[i] += 1
    alpha[j] += 1
    c = float(jet.coefficient(tuple(alpha)))
    return c if i != j else 2 * c


def test_lambda_zero_section_is_direct_graph():
    s = build_scene("(t1^2 + t2^2 + y^2)/2 + t1^3/5", "0", 2)
    section = hyperplane_section(s, [0.0, 0.0], 0.0)
    mf = section.monge
    # at lambda = 0 the section graph equals W(x, 0)
    from darboux.jets import Jet, jet_compose, jet_space

    nsp = jet_space(2, section.graph.order)
    coords = Jet.coordinates(nsp, np.zeros(2))
    direct = jet_compose(mf.W, coords + [Jet.constant(nsp, 0.0)])
    assert np.abs(
        np.asarray((direct - section.graph).coeffs, dtype=float)
    ).max() < 1e-12


def test_rotationally_symmetric_sections():
    s = build_scene("(t1^2 + t2^2 + y^2)/2", "0", 2)
    for lam in (-0.2, 0.1, 0.3):
        section = hyperplane_section(s, [0.0, 0.0], lam)
        # reduced graph z = |x|^2/2 through cubic order
        assert section.graph.coefficient((2, 0)) == pytest.approx(0.5, abs=1e-10)
        assert section.graph.coefficient((0, 2)) == pytest.approx(0.5, abs=1e-10)
        for alpha in ((3, 0), (2, 1), (1, 2), (0, 3)):
            assert abs(section.graph.coefficient(alpha)) < 1e-10
        nrm = section_blaschke_normal(s, [0.0, 0.0], lam)
        assert abs(nrm[0]) < 1e-10 and abs(nrm[1]) < 1e-10
    plane = transon_plane(s, [0.0, 0.0])
    spanned = np.abs(plane[:, :2]).max()
    assert spanned < 1e-10  # plane sits inside the (y, z) coordinate plane
    res = transon_planarity_residual(s, [0.0, 0.0], [-0.2, -0.1, 0.0, 0.1, 0.2])
    assert res < 1e-12


def test_section_matches_root_finding_oracle():
    """Brute force: sample the hyperplane section by solving the implicit
    equation pointwise with a scalar iteration in the original ambient
    coordinates, and compare with the reverted jet."""
    from darboux.expr import eval_scalar

    rng = np.random.default_rng(41)
    s = random_cubic_scene(rng, 2)
    t0 = [0.0, 0.0]
    lam = 0.15
    section = hyperplane_section(s, t0, lam)
    mf = section.monge
    def surface_residual(x, z):
        # ambient = (t1, t2, y, zamb); membership in M demands
        # zamb = f(t1, t2, y)
        monge_point = np.array([x[0], x[1], lam * z, z])
        ambient = mf.base_point + mf.inverse @ monge_point
        return ambient[3] - eval_scalar(s.f, s.f_names, ambient[:3])

    for _ in range(6):
        x = rng.uniform(-0.04, 0.04, 2)
        z = 0.0
        for _ in range(80):
            r = surface_residual(x, z)
            slope = (surface_residual(x, z + 1e-6) - r) / 1e-6
            step = r / slope
            z -= step
            if abs(step) < 1e-14:
                break
        z_jet = eval_poly_jet(section.graph, x)
        assert abs(z - z_jet) < 1e-8


def test_normal_transversality():
    rng = np.random.default_rng(8)
    s = random_cubic_scene(rng, 2)
    section = hyperplane_section(s, [0.0, 0.0], 0.1)
    nrm = section_blaschke_normal(s, [0.0, 0.0], 0.1)
    monge_nrm = section.monge.vector_to_monge(nrm)
    # nonzero component off the section tangent space (spanned by e_1, e_2)
    assert np.abs(monge_nrm[2:]).max() > 1e-3


def test_planarity_on_random_cubics():
    rng = np.random.default_rng(77)
    sweep = [-0.2, -0.1, 0.0, 0.1, 0.2]
    for k in range(4):
        n = 1 + (k % 2)
        s = random_cubic_scene(rng, n)
        res = transon_planarity_residual(s, [0.0] * n, sweep)
        assert res < 1e-6
    with pytest.raises(NeedMoreSectionsError):
        transon_planarity_residual(s, [0.0] * n, [0.1])


def test_plane_contains_darboux_direction():
    rng = np.random.default_rng(15)
    from darboux.frame import frame_fields, vec_values

    for k in range(3):
        s = random_cubic_scene(rng, 2)
        plane = transon_plane(s, [0.0, 0.0])
        ff = frame_fields(s, [0.0, 0.0], 1)
        xi = vec_values(ff.xi)
        xi = xi / np.linalg.norm(xi)
        residual = xi - plane.T @ (plane @ xi)
        assert np.linalg.norm(residual) < 1e-8


def test_projected_submanifold_normal_in_plane(bundled):
    for name, t in (("cubic-curve", [0.0]), ("hyperquadric", [0.05, -0.08])):
        s = bundled[name]
        plane = transon_plane(s, t)
        v = projected_submanifold_normal(s, t)
        v = v / np.linalg.norm(v)
        residual = v - plane.T @ (plane @ v)
        assert np.linalg.norm(residual) < 1e-6


def test_curve_section_values(bundled):
    nrm = section_blaschke_normal(bundled["cubic-curve"], [0.0], 0.0)
    assert np.allclose(nrm, [-1, 0, 1], atol=1e-10)
    plane = transon_plane(bundled["cubic-curve"], [0.0])
    for v in ([0.0, 1.0, 0.0], [-1.0, 0.0, 1.0]):
        v = np.asarray(v) / np.linalg.norm(v)
        assert np.linalg.norm(v - plane.T @ (plane @ v)) < 1e-8


def test_verdicts_match_parallelism(bundled, parallel_corpus):
    scenes, grids = parallel_corpus
    angles, verdict = transon_vs_normal_plane(
        scenes["hyperquadric"], [0.1, -0.05])
    assert verdict == "coincide"
    angles, verdict = transon_vs_normal_plane(scenes["adapted-curve"], [0.0])
    assert verdict == "coincide"
    angles, verdict = transon_vs_normal_plane(bundled["nonflat"], [0.12, 0.08])
    assert verdict == "distinct"
    assert angles[1] > 1e-4
    assert np.abs(tau_form(bundled["nonflat"], [0.12, 0.08])).max() > 1e-3


def test_transon_report_shape(bundled):
    rep = transon_report(bundled["cubic-curve"], [0.0])
    assert len(rep.normals) == len(rep.lambdas) == 5
    assert rep.residual < 1e-6
    assert rep.verdict == "coincide"
    assert len(rep.plane_basis) == 2
