"""Germs of the tangency family and recognition of simple singularities.

The pipeline: restrict the family F(t, x) to a fixed ambient point, check
that the germ actually sits on the discriminant, split off the regular
quadratic block (iterated critical-point elimination in jet arithmetic),
and recognize the residual germ by corank and cubic type:

  corank 0                  -> Morse
  corank 1                  -> A_k from the first surviving power
  corank 2, cubic 3 factors -> D4 (sign from the real factor count)
  corank 2, double factor   -> D_k from the lowest surviving pure power
  corank 2, perfect cube    -> E6 / E7 / E8 ladder
  anything else             -> Unresolved

All thresholds are relative to the germ scale (max |coefficient|).
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np

from .envelope import envelope_point, family_jet, regression_values
from .errors import (
    CorankTooHighError,
    NotAkPointError,
    NotOnDiscriminantError,
    ToleranceWarning,
    UnresolvedOrderError,
)
from .frame import frame_fields
from .jets import Jet, bracket, jet_compose, jet_space

COEFF_ZERO_RTOL = 1e-9
STRUCT_RTOL = 1e-8
RANK_RTOL = 1e-8


@dataclass
class Germ:
    """Taylor data of t -> F(t, x0) at t0, with provenance metadata."""

    nvars: int
    order: int
    jet: object
    scene_name: str | None = None
    t0: tuple = ()
    x0: tuple = ()


@dataclass
class SingularityClass:
    """Recognition result for a function germ.

    ``label`` is one of Regular, Morse, Ak, Dk, E6, E7, E8 or
    Unresolved(reason).  ``corank`` and ``milnor`` are filled when they
    are determined; D-germs carry a sign convention recorded in ``sign``.
    """

    kind: str
    k: int | None = None
    sign: str | None = None
    corank: int | None = None
    milnor: int | None = None
    reason: str | None = None
    detail: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.kind == "A" and self.corank is not None and self.corank > 1:
            raise ValueError("A-type germs have corank at most 1")
        if self.kind in ("D", "E") and self.corank not in (None, 2):
            raise ValueError("D/E-type germs have corank 2")

    @property
    def label(self):
        if self.kind == "A":
            return f"A{self.k}"
        if self.kind == "D":
            return f"D{self.k}"
        if self.kind == "E":
            return f"E{self.k}"
        if self.kind == "Unresolved":
            return f"Unresolved({self.reason})"
        return self.kind

    def __str__(self):
        return self.label


def germ_jet(scene, t0, x0, order):
    """Jet of the family restricted to the ambient point x0.

    Warns when x0 is near, but not on, the discriminant; the caller sees
    the unmodified jet either way.
    """
    if order < 2:
        raise UnresolvedOrderError(2)
    jet = family_jet(scene, t0, x0, order)
    coeffs = np.asarray(jet.coeffs, dtype=float)
    scale = max(np.abs(coeffs).max(), 1e-30)
    const = abs(float(jet.value))
    lin = max(abs(float(jet.derivative(i).value)) for i in range(scene.n))
    near = max(const, lin)
    if 10 * COEFF_ZERO_RTOL * scale < near < 1e-4 * scale:
        warnings.warn(
            f"probe point is near but not on the discriminant (offsets {near:.2e})",
            ToleranceWarning,
        )
    return Germ(
        nvars=scene.n,
        order=order,
        jet=jet,
        scene_name=scene.name,
        t0=tuple(np.atleast_1d(t0).tolist()),
        x0=tuple(np.asarray(x0, dtype=float).tolist()),
    )


# -- coefficient helpers --------------------------------------------------


def _hessian(jet, n):
    H = np.zeros((n, n))
    for i in range(n):
        for j in range(i, n):
            alpha = [0] * n
            alpha[i] += 1
            alpha[j] += 1
            c = float(jet.coefficient(tuple(alpha)))
            H[i, j] = H[j, i] = c if i != j else 2 * c
    return H


def _coeff(jet, *alpha):
    return float(jet.coefficient(tuple(alpha)))


def _clean(jet, rtol=COEFF_ZERO_RTOL):
    coeffs = np.asarray(jet.coeffs, dtype=float).copy()
    scale = max(np.abs(coeffs).max(), 1e-30)
    coeffs[np.abs(coeffs) < rtol * scale] = 0.0
    return Jet(jet.space, coeffs, jet.order)


def _linear_substitution(jet, matrix, space=None):
    """Compose a jet with the linear map t = M s (columns of M are the
    images of the new coordinate directions)."""
    m = matrix.shape[1]
    sp = space or jet_space(m, jet.order)
    coords = Jet.coordinates(sp, np.zeros(m))
    inners = []
    for i in range(matrix.shape[0]):
        acc = Jet.constant(sp, 0.0)
        for j in range(m):
            if matrix[i, j]:
                acc = acc + coords[j] * float(matrix[i, j])
        inners.append(acc)
    return jet_compose(jet, inners)


# -- splitting-lemma reduction --------------------------------------------


@dataclass
class _Reduction:
    corank: int
    rotation: np.ndarray          # columns: regular directions then kernel
    regular_values: np.ndarray    # Hessian eigenvalues on the regular block
    reduced: object               # jet in `corank` variables (absent if corank 0)
    to_t: list | None             # kernel-space -> t-space inner jets


def _split(jet, n, order):
    H = _hessian(jet, n)
    eigenvalues, vectors = np.linalg.eigh(H)
    scale = max(np.abs(eigenvalues).max(), 1.0)
    kernel = np.abs(eigenvalues) < STRUCT_RTOL * scale
    corank = int(kernel.sum())
    # regular directions (largest |eigenvalue| first), kernel last
    perm = sorted(range(n), key=lambda i: (bool(kernel[i]), -abs(eigenvalues[i])))
    Q = vectors[:, perm]
    for col in range(n):
        lead = np.argmax(np.abs(Q[:, col]))
        if Q[lead, col] < 0:
            Q[:, col] = -Q[:, col]
    lam = eigenvalues[perm][: n - corank]
    if corank == 0:
        return _Reduction(0, Q, lam, None, None)
    if corank == n:
        rotated = _linear_substitution(jet, Q) if n > 1 else jet
        sp = rotated.space
        coords = Jet.coordinates(sp, np.zeros(corank))
        return _Reduction(corank, Q, lam, rotated, list(coords))

    rotated = _linear_substitution(jet, Q)
    r = n - corank
    zsp = jet_space(corank, order)
    zero = Jet.constant(zsp, 0.0)
    zcoords = Jet.coordinates(zsp, np.zeros(corank))
    grads = [rotated.derivative(i) for i in range(r)]
    Y = [zero] * r
    for _ in range(order):
        inners = Y + zcoords
        G = [jet_compose(g, inners) for g in grads]
        Y = [Y[i] - G[i] * (1.0 / lam[i]) for i in range(r)]
    # The restriction to the critical graph is first-order insensitive to Y
    # (the y-gradient vanishes there), so the graph known one order short
    # still determines the reduced germ through the full order.
    inners = [Jet(zsp, y.coeffs, order) for y in Y] + zcoords
    reduced = jet_compose(rotated, inners)
    return _Reduction(corank, Q, lam, _clean(reduced), inners)


# -- corank-2 recognition ---------------------------------------------------


def _cubic_coeffs(jet):
    return np.array(
        [_coeff(jet, 3, 0), _coeff(jet, 2, 1), _coeff(jet, 1, 2), _coeff(jet, 0, 3)]
    )


def _cubic_hessian(c):
    a, b, cc, d = c
    return np.array([12 * a * cc - 4 * b**2, 36 * a * d - 4 * b * cc, 12 * b * d - 4 * cc**2])


def _cubic_discriminant(c):
    a, b, cc, d = c
    return 18 * a * b * cc * d - 4 * b**3 * d + b**2 * cc**2 - 4 * a * cc**3 - 27 * a**2 * d**2


def _real_cbrt(x):
    return np.sign(x) * abs(x) ** (1.0 / 3.0)


def _kill_degree_terms(jet, degree, mode):
    """One normal-form step at a fixed total degree for 2-variable germs.

    mode "cube":   cubic is x^3; substitute x -> x + phi to remove all
                   degree-`degree` terms divisible by x^2.
    mode "double": cubic is x^2 y; substitute y -> y + psi to remove x^2
                   divisible terms, then x -> x + chi for the x y^{d-1} term.
    """
    sp = jet.space
    coords = Jet.coordinates(sp, np.zeros(2))

    def monomial(a, b, coefficient):
        return (coords[0] ** a) * (coords[1] ** b) * coefficient

    if mode == "cube":
        phi = Jet.constant(sp, 0.0)
        touched = False
        for a in range(2, degree + 1):
            b = degree - a
            c = _coeff(jet, a, b)
            if c:
                phi = phi + monomial(a - 2, b, -c / 3.0)
                touched = True
        if touched:
            jet = jet_compose(jet, [coords[0] + phi, coords[1]])
        return jet

    psi = Jet.constant(sp, 0.0)
    touched = False
    for a in range(2, degree + 1):
        b = degree - a
        c = _coeff(jet, a, b)
        if c:
            psi = psi + monomial(a - 2, b, -c)
            touched = True
    if touched:
        jet = jet_compose(jet, [coords[0], coords[1] + psi])
    c = _coeff(jet, 1, degree - 1)
    if c:
        chi = monomial(0, degree - 2, -c / 2.0)
        jet = jet_compose(jet, [coords[0] + chi, coords[1]])
    return jet


def _classify_corank2(reduced, order, detail):
    coeffs = np.asarray(reduced.coeffs, dtype=float)
    scale = max(np.abs(coeffs).max(), 1e-30)
    cubic = _cubic_coeffs(reduced)
    cubic_scale = np.abs(cubic).max()
    if cubic_scale < COEFF_ZERO_RTOL * scale:
        return SingularityClass(
            "Unresolved", reason="modality suspected", corank=2,
            detail=dict(detail, note="vanishing cubic part"),
        )
    hess = _cubic_hessian(cubic)
    disc = _cubic_discriminant(cubic)
    if np.abs(hess).max() < STRUCT_RTOL * cubic_scale**2:
        return _classify_cube(reduced, cubic, order, detail)
    if abs(disc) < STRUCT_RTOL * cubic_scale**4:
        return _classify_double_factor(reduced, cubic, hess, order, detail)
    sign = "-" if disc > 0 else "+"  # three real factors -> hyperbolic (minus)
    return SingularityClass("D", k=4, sign=sign, corank=2, milnor=4,
                            detail=dict(detail, discriminant=float(disc)))


def _classify_cube(reduced, cubic, order, detail):
    # cubic = (a x + b y)^3; send the root direction to the y-axis.
    if abs(cubic[0]) >= abs(cubic[3]):
        a = _real_cbrt(cubic[0])
        b = cubic[1] / (3 * a * a)
    else:
        b = _real_cbrt(cubic[3])
        a = cubic[2] / (3 * b * b)
    v1 = np.array([b, -a])                       # root direction, l(v1) = 0
    v2 = np.array([a, b]) / (a * a + b * b)      # l(v2) = 1
    T = np.column_stack([v2, v1])
    jet = _linear_substitution(reduced, T, reduced.space)
    kappa = _coeff(jet, 3, 0)
    jet = _linear_substitution(jet, np.diag([1.0 / _real_cbrt(kappa), 1.0]), jet.space)
    for degree in range(4, order + 1):
        jet = _kill_degree_terms(_clean(jet), degree, "cube")
    jet = _clean(jet)
    scale = max(np.abs(np.asarray(jet.coeffs, dtype=float)).max(), 1e-30)
    b4 = _coeff(jet, 0, 4) if order >= 4 else None
    a3 = _coeff(jet, 1, 3) if order >= 4 else None
    if order < 4:
        raise UnresolvedOrderError(4)
    if abs(b4) > COEFF_ZERO_RTOL * scale:
        return SingularityClass("E", k=6, corank=2, milnor=6, detail=detail)
    if abs(a3) > COEFF_ZERO_RTOL * scale:
        return SingularityClass("E", k=7, corank=2, milnor=7, detail=detail)
    if order < 5:
        raise UnresolvedOrderError(5)
    b5 = _coeff(jet, 0, 5)
    if abs(b5) > COEFF_ZERO_RTOL * scale:
        return SingularityClass("E", k=8, corank=2, milnor=8, detail=detail)
    return SingularityClass(
        "Unresolved", reason="modality suspected", corank=2,
        detail=dict(detail, note="perfect cube with no E-type term through order 5"),
    )


def _classify_double_factor(reduced, cubic, hess, order, detail):
    # Hessian of the cubic is proportional to the square of the repeated factor.
    h0, h1, h2 = hess
    if abs(h0) >= abs(h2):
        s = np.sign(h0)
        p = np.sqrt(abs(h0))
        q = h1 / (2 * s * p)
    else:
        s = np.sign(h2)
        q = np.sqrt(abs(h2))
        p = h1 / (2 * s * q)
    v1 = np.array([q, -p])                       # double-root direction
    v1 /= np.linalg.norm(v1)
    # simple factor by least squares on the convolution (p x + q y)^2 (u0 x + u1 y)
    A = np.array(
        [[p * p, 0.0], [2 * p * q, p * p], [q * q, 2 * p * q], [0.0, q * q]]
    )
    u, *_ = np.linalg.lstsq(A, cubic / s, rcond=None)
    u0, u1 = u
    v2 = np.array([u1, -u0])
    v2 /= np.linalg.norm(v2)
    T = np.column_stack([v2, v1])
    jet = _linear_substitution(reduced, T, reduced.space)
    kappa = _coeff(jet, 2, 1)
    jet = _linear_substitution(jet, np.diag([1.0, 1.0 / kappa]), jet.space)
    for degree in range(4, order + 1):
        jet = _kill_degree_terms(_clean(jet), degree, "double")
    jet = _clean(jet)
    scale = max(np.abs(np.asarray(jet.coeffs, dtype=float)).max(), 1e-30)
    for m in range(4, order + 1):
        bm = _coeff(jet, 0, m)
        if abs(bm) > COEFF_ZERO_RTOL * scale:
            return SingularityClass(
                "D", k=m + 1, sign="+" if bm > 0 else "-", corank=2, milnor=m + 1,
                detail=dict(detail, pure_power=m),
            )
    raise UnresolvedOrderError(order + 1)


# -- public classification -------------------------------------------------


def classify_germ(germ):
    """Recognize the singularity class of a germ on the discriminant.

    Raises NotOnDiscriminantError when the constant part does not vanish,
    CorankTooHighError above corank 2, and UnresolvedOrderError when the
    stored order cannot decide (with the minimum order that could).
    """
    jet = germ.jet.to_float() if germ.jet.exact else germ.jet
    n = germ.nvars
    order = min(germ.order, jet.order)
    coeffs = np.asarray(jet.coeffs, dtype=float)
    scale = max(np.abs(coeffs).max(), 1e-30)
    if abs(float(jet.value)) > 1e-7 * scale:
        raise NotOnDiscriminantError(
            f"constant term {float(jet.value):.3e} does not vanish"
        )
    linear = np.array([float(jet.derivative(i).value) for i in range(n)])
    if np.abs(linear).max() > 1e-7 * scale:
        return SingularityClass("Regular", detail={"gradient": linear.tolist()})
    if not np.abs(coeffs).max() > 0:
        raise UnresolvedOrderError(order + 1)

    work = Jet(jet.space, coeffs / scale, order)
    reduction = _split(work, n, order)
    detail = {
        "corank": reduction.corank,
        "regular_eigenvalues": (reduction.regular_values * scale).tolist(),
    }
    if reduction.corank == 0:
        return SingularityClass("Morse", k=1, corank=0, milnor=1, detail=detail)
    if reduction.corank > 2:
        raise CorankTooHighError(reduction.corank)
    if reduction.corank == 1:
        red = reduction.reduced
        rscale = max(np.abs(np.asarray(red.coeffs, dtype=float)).max(), 1e-30)
        for m in range(3, order + 1):
            cm = float(red.coefficient((m,)))
            if abs(cm) > COEFF_ZERO_RTOL * rscale:
                return SingularityClass(
                    "A", k=m - 1, corank=1, milnor=m - 1,
                    detail=dict(detail, leading_power=m),
                )
        raise UnresolvedOrderError(order + 1)
    result = _classify_corank2(reduction.reduced, order, detail)
    return result


def split_germ(germ):
    """Expose the splitting-lemma reduction (rotation, eigenvalues, the
    reduced germ and the kernel-space graph) for tests and diagnostics."""
    jet = germ.jet.to_float() if germ.jet.exact else germ.jet
    coeffs = np.asarray(jet.coeffs, dtype=float)
    scale = max(np.abs(coeffs).max(), 1e-30)
    work = Jet(jet.space, coeffs / scale, min(germ.order, jet.order))
    return _split(work, germ.nvars, work.order), scale


def versality_matrix(scene, t0, x0, k, order=None):
    """Rank data of the unfolding at an A_k point.

    Rows are the Taylor coefficients (orders 0..k-1 along the Hessian
    kernel direction) of each ambient partial of the family; the unfolding
    is versal exactly when the rank is k.  Raises NotAkPointError when the
    germ at (t0, x0) is not of type A_k.
    """
    order = order or max(k + 1, 3)
    germ = germ_jet(scene, t0, x0, order)
    klass = classify_germ(germ)
    if not (klass.kind == "A" and klass.k == k) and not (
        klass.kind == "Morse" and k == 1
    ):
        raise NotAkPointError(f"germ classifies as {klass.label}, not A{k}")
    n = scene.n
    if n == 1:
        kernel = np.array([1.0])
    else:
        reduction, _ = split_germ(germ)
        kernel = reduction.rotation[:, -1]
    ff = frame_fields(scene, t0, order)
    sp1 = jet_space(1, order)
    s = Jet.coordinates(sp1, np.zeros(1))[0]
    rows = np.zeros((k, n + 2))
    for j in range(n + 2):
        basis_vec = [Jet.constant(ff.space, float(r == j)) for r in range(n + 2)]
        fx = bracket(ff.X + [ff.xi, basis_vec])
        restricted = jet_compose(fx, [s * float(kernel[i]) for i in range(n)]) \
            if n > 1 else fx
        for m in range(k):
            alpha = (m,)
            rows[m, j] = float(restricted.coefficient(alpha))
    sv = np.linalg.svd(rows, compute_uv=False)
    rank = int((sv > RANK_RTOL * sv.max()).sum()) if sv.max() > 0 else 0
    return rows, rank


def _versality_heuristic(scene, t0, germ, klass):
    """Coefficient-span check for D/E germs: restrict the ambient partials
    of the family to the splitting kernel plane and ask whether they span
    at least mu independent directions among the monomials through the
    degree of the recognized miniversal basis.  Heuristic: monomial-space
    independence stands in for independence in the local algebra."""
    reduction, _ = split_germ(germ)
    if reduction.corank != 2 or reduction.to_t is None or klass.milnor is None:
        return None
    max_degree = {"E6": 3, "E7": 4, "E8": 4}.get(klass.label, max(klass.k - 2, 2))
    monos = [
        alpha
        for alpha in jet_space(2, germ.order).indices
        if sum(alpha) <= max_degree
    ]
    n = scene.n
    ff = frame_fields(scene, t0, germ.order)
    rot = reduction.rotation
    rows = []
    for j in range(n + 2):
        basis_vec = [Jet.constant(ff.space, float(r == j)) for r in range(n + 2)]
        fx = bracket(ff.X + [ff.xi, basis_vec])
        rotated = _linear_substitution(fx, rot) if n > 1 else fx
        in_kernel = jet_compose(rotated, reduction.to_t)
        rows.append([float(in_kernel.coefficient(m)) for m in monos])
    matrix = np.array(rows)
    sv = np.linalg.svd(matrix, compute_uv=False)
    rank = int((sv > RANK_RTOL * sv.max()).sum()) if sv.max() > 0 else 0
    return rank >= klass.milnor


def classify_envelope_point(scene, t0, u, order=6):
    """Classification report for the envelope point over (t0, u).

    ``u`` must sit on the regression set of t0 within tolerance; the
    report carries the class, the corank, and a versality verdict (exact
    rank test for A-germs, heuristic span test for D/E)."""
    regs = regression_values(scene, t0)
    tol = 1e-6 * max(1.0, abs(u))
    if not regs or min(abs(u - r) for r in regs) > tol:
        raise NotOnDiscriminantError(
            f"u={u} is not a regression value (candidates {regs})"
        )
    x0 = envelope_point(scene, t0, u)
    germ = germ_jet(scene, t0, x0, order)
    diagnostics = []
    try:
        klass = classify_germ(germ)
    except CorankTooHighError as err:
        klass = SingularityClass("Unresolved", reason="corank > 2", corank=err.corank)
        diagnostics.append(str(err))
    except UnresolvedOrderError as err:
        klass = SingularityClass("Unresolved", reason="order exceeded",
                                 detail={"needed_order": err.needed_order})
        diagnostics.append(str(err))
    versal = None
    versal_method = None
    if klass.kind == "A" or klass.kind == "Morse":
        k = klass.k if klass.kind == "A" else 1
        try:
            _, rank = versality_matrix(scene, t0, x0, k, order=order)
            versal = rank == k
            versal_method = "rank"
        except NotAkPointError as err:
            diagnostics.append(str(err))
    elif klass.kind in ("D", "E"):
        verdict = _versality_heuristic(scene, t0, germ, klass)
        if verdict is not None:
            versal = verdict
            versal_method = "heuristic"
    return {
        "point": list(np.atleast_1d(np.asarray(t0, dtype=float))),
        "u": float(u),
        "x0": [float(v) for v in x0],
        "class": klass.label,
        "milnor_corank": klass.corank,
        "milnor": klass.milnor,
        "versal": versal,
        "versal_method": versal_method,
        "diagnostics": diagnostics,
    }
