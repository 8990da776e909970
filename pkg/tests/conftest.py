"""Shared scene corpus and small numeric helpers for the test suite."""

import numpy as np
import pytest

from darboux import build_scene, load_bundled


def eval_poly_jet(jet, x):
    """Evaluate a jet's polynomial at a numeric offset from its base point
    (test-side helper, independent of the library's composition path)."""
    x = np.atleast_1d(np.asarray(x, dtype=float))
    total = 0.0
    for alpha, c in zip(jet.space.indices, np.asarray(jet.coeffs, dtype=float)):
        if sum(alpha) > jet.order or not c:
            continue
        term = float(c)
        for xi, a in zip(x, alpha):
            term *= xi**a
        total += term
    return total


@pytest.fixture(scope="session")
def bundled():
    return {name: load_bundled(name) for name in (
        "a2", "a3", "a4", "a5", "d4", "d5", "e6", "e7", "e8",
        "cubic-curve", "nonflat", "hyperquadric",
    )}


def make_parallel_corpus():
    """Scenes whose gauged Darboux field is parallel, with sample grids."""
    r2 = 1.0
    scenes = {
        "hyperplanar-1": build_scene("(t^2 + y^2)/2 + t^4/24", "0", 1,
                                     name="hyperplanar-1"),
        "hyperplanar-2": build_scene(
            "(t1^2 + t2^2 + y^2)/2 + t1^3/6 + t1*t2^2/3", "0", 2,
            name="hyperplanar-2"),
        "visual-contour": build_scene(
            "(t^2 + y^2)/2", f"sqrt({r2} - t^2)", 1,
            xi_scale_text=f"-{r2}/sqrt({r2} - t^2)", name="visual-contour"),
        "hyperquadric": load_bundled("hyperquadric"),
        "adapted-curve": load_bundled("cubic-curve"),
    }
    grids = {
        "hyperplanar-1": [(t,) for t in np.linspace(-0.2, 0.2, 9)],
        "hyperplanar-2": [(a, b) for a in (-0.15, 0.0, 0.15) for b in (-0.15, 0.0, 0.15)],
        "visual-contour": [(t,) for t in np.linspace(-0.2, 0.2, 9)],
        "hyperquadric": [(a, b) for a in (-0.15, 0.0, 0.15) for b in (-0.15, 0.0, 0.15)],
        "adapted-curve": [(t,) for t in np.linspace(-0.12, 0.12, 9)],
    }
    return scenes, grids


def nonflat_grid():
    return [(a, b) for a in (0.08, 0.14, 0.2) for b in (0.08, 0.14, 0.2)]


@pytest.fixture(scope="session")
def parallel_corpus():
    return make_parallel_corpus()


def random_cubic_scene(rng, n, with_g=False):
    """Quadratic normal-form scene plus random cubic terms in (t, y)."""
    t_names = ["t"] if n == 1 else [f"t{i}" for i in range(1, n + 1)]
    names = t_names + ["y"]
    terms = [f"({v}^2)/2" for v in names]
    for i, a in enumerate(names):
        for j, b in enumerate(names[i:], start=i):
            for c in names[j:]:
                coeff = rng.uniform(-0.3, 0.3)
                terms.append(f"({coeff})*{a}*{b}*{c}")
    g = "0"
    if with_g:
        gt = [f"({rng.uniform(-0.4, 0.4)})*{a}*{b}"
              for i, a in enumerate(t_names) for b in t_names[i:]]
        g = " + ".join(gt) if gt else "0"
    return build_scene(" + ".join(terms), g, n)
