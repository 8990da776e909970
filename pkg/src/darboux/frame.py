"""Scenes in graph form, tangent frames, Darboux directions, and the
structure coefficients of the frame equations.

A scene is a hypersurface M in R^{n+2} given as a graph z = f(t_1..t_n, y)
together with a codimension-1 submanifold N of M given by y = g(t).  All
geometry is computed in truncated Taylor-jet arithmetic at a base point,
so first and second derivatives of every produced field are available to
machine precision.

Frame conventions.  The ambient volume bracket is oriented as in
:func:`darboux.jets.bracket`.  The Darboux vector field is returned in the
"graph gauge" xi = sum_j alpha_j X_j + psi_y (unit psi_y component); an
optional scalar gauge expression on the scene rescales it.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from . import expr as ex
from .errors import (
    DegenerateError,
    DimensionError,
    RankError,
    SingularBasisError,
)
from .jets import Jet, bracket, jet_det, jet_solve, jet_space

DEGENERACY_RTOL = 1e-9


def _variable_names(n):
    return ["t"] if n == 1 else [f"t{i}" for i in range(1, n + 1)]


@dataclass(frozen=True)
class Scene:
    """A hypersurface graph z = f(t, y) with the submanifold y = g(t).

    ``gauge`` selects the scale of the Darboux field: "graph" (unit
    psi_y component over the tangent frame) or "blaschke" (normalized so
    the hypersurface Blaschke metric gives h(xi, xi) = 1); ``xi_scale``
    optionally multiplies the gauged field by a scalar expression in t.
    """

    n: int
    f: ex.Expr
    g: ex.Expr
    f_text: str
    g_text: str
    xi_scale: ex.Expr | None = None
    xi_scale_text: str | None = None
    gauge: str = "graph"
    t0: tuple = ()
    name: str | None = None

    @property
    def t_names(self):
        return _variable_names(self.n)

    @property
    def f_names(self):
        return self.t_names + ["y"]

    def base_point(self):
        return np.array(self.t0 if self.t0 else (0.0,) * self.n, dtype=float)

    def describe(self):
        return self.name or f"graph scene (n={self.n})"


def build_scene(f_text, g_text, n, xi_scale_text=None, gauge="graph", name=None):
    """Parse and validate a scene; see the scene-file format in the CLI docs.

    Raises parse errors from the expression language and DimensionError
    when an expression uses variables outside its slot (for instance a
    submanifold expression referencing y).
    """
    if n < 1:
        raise DimensionError("the submanifold dimension n must be at least 1")
    t_names = _variable_names(n)
    try:
        f = ex.parse_expression(f_text, t_names + ["y"])
    except ex.UnknownVariableError as err:
        raise DimensionError(
            f"hypersurface expression may use only {', '.join(t_names)}, y: {err}"
        ) from err
    try:
        g = ex.parse_expression(g_text, t_names)
    except ex.UnknownVariableError as err:
        raise DimensionError(
            f"submanifold expression may use only {', '.join(t_names)}: {err}"
        ) from err
    xi_scale = None
    if xi_scale_text is not None:
        try:
            xi_scale = ex.parse_expression(xi_scale_text, t_names)
        except ex.UnknownVariableError as err:
            raise DimensionError(
                f"gauge scale may use only {', '.join(t_names)}: {err}"
            ) from err
    if gauge not in ("graph", "blaschke"):
        raise DimensionError(f"unknown gauge '{gauge}'")
    return Scene(
        n=n,
        f=f,
        g=g,
        f_text=f_text.strip(),
        g_text=g_text.strip(),
        xi_scale=xi_scale,
        xi_scale_text=xi_scale_text.strip() if xi_scale_text else None,
        gauge=gauge,
        t0=(0.0,) * n,
        name=name,
    )


@dataclass
class FramePoint:
    """Frame data at one parameter point; ``gauge`` records how the
    transversal slots were chosen so coefficient solves can rebuild the
    matching fields."""

    t: np.ndarray
    X: np.ndarray          # n x (n+2), rows are tangent vectors
    xi: np.ndarray
    eta: np.ndarray
    gauge: dict = field(default_factory=dict)


@dataclass
class StructureCoeffs:
    """Coefficients of the frame derivative equations at a point, with
    respect to the frame recorded in ``frame``."""

    frame: FramePoint
    Gamma: np.ndarray      # n x n x n, Gamma[i][j][k]
    h1: np.ndarray         # n x n
    h2: np.ndarray         # n x n
    S1: np.ndarray         # n x n, column j = tangential part of -D_{X_j} xi
    S2: np.ndarray
    tau11: np.ndarray      # length n
    tau12: np.ndarray
    tau21: np.ndarray
    tau22: np.ndarray


# -- jet-level machinery -------------------------------------------------


def vec_scale(vector, factor):
    return [component * factor for component in vector]


def vec_add(a, b):
    return [x + y for x, y in zip(a, b)]


def vec_sub(a, b):
    return [x - y for x, y in zip(a, b)]


def vec_partial(vector, var):
    return [component.derivative(var) for component in vector]


def vec_values(vector):
    return np.array([float(component.value) for component in vector])


def pair_conormal(conormal, vector):
    acc = conormal[0] * vector[0]
    for a, b in zip(conormal[1:], vector[1:]):
        acc = acc + a * b
    return acc


class FrameFields:
    """Jet-valued Darboux frame data along N around one base point.

    ``order`` is the order through which the structure-coefficient jets
    are exact.  Everything downstream (cubic forms, flatness, curve
    criteria) reads derivatives from these jets.
    """

    def __init__(self, scene, t0, order, gauged=True):
        self.scene = scene
        self.t0 = np.array(t0, dtype=float)
        self.order = order
        n = scene.n
        phi_order = order + 2
        space = jet_space(n, phi_order)
        self.space = space
        t_names = scene.t_names
        coords = Jet.coordinates(space, self.t0)
        env = dict(zip(t_names, coords))
        g_jet = ex.eval_expr(scene.g, env)
        env_f = dict(env)
        env_f["y"] = g_jet
        f_on_n = ex.eval_expr(scene.f, env_f)
        self.g_jet = g_jet
        self.phi = coords + [g_jet, f_on_n]
        self.X = [vec_partial(self.phi, i) for i in range(n)]

        jacobian = np.array([vec_values(x) for x in self.X])
        if np.linalg.matrix_rank(jacobian, tol=1e-10) < n:
            raise RankError(f"tangent vectors are dependent at t={self.t0.tolist()}")

        f_y = ex.derivative(scene.f, "y")
        zero = Jet.constant(space, 0.0)
        one = Jet.constant(space, 1.0)
        self.psi_y = [zero] * n + [one, ex.eval_expr(f_y, env_f)]
        self.conormal = (
            [-ex.eval_expr(ex.derivative(scene.f, name), env_f) for name in t_names]
            + [-ex.eval_expr(f_y, env_f), one]
        )
        self.e_last = [zero] * (n + 1) + [one]
        self.zero = zero
        self.one = one

        # Provisional decomposition in the frame {X_1..X_n, psi_y, e_last}.
        basis = self._basis_matrix(self.X, self.psi_y, self.e_last)
        rhs = []
        self.second = [[None] * n for _ in range(n)]
        for i in range(n):
            for j in range(i, n):
                self.second[i][j] = self.second[j][i] = vec_partial(self.X[i], j)
        for i in range(n):
            for j in range(n):
                rhs.append([self.second[i][j][r] for r in range(n + 2)])
        dpsi = [vec_partial(self.psi_y, i) for i in range(n)]
        rhs.extend([v[r] for r in range(n + 2)] for v in dpsi)
        try:
            solved, _ = jet_solve(basis, rhs)
        except SingularBasisError as err:
            raise RankError(str(err)) from err
        self.h2_prov = [[solved[i * n + j][n + 1] for j in range(n)] for i in range(n)]
        self.tau12_prov = [solved[n * n + i][n + 1] for i in range(n)]

        det_h2 = jet_det(self.h2_prov) if n > 1 else self.h2_prov[0][0]
        self.det_h2_prov = det_h2
        row_scale = 1.0
        for row in self.h2_prov:
            row_scale *= max(np.sqrt(sum(float(e.value) ** 2 for e in row)), 1e-30)
        self.h2_scale = max(row_scale, 1e-30)

        self.alpha = None
        self.lam = None
        self.xi = None
        self.eta = None
        self.bracket_scale = None
        if gauged:
            self._build_darboux(env)

    def _basis_matrix(self, X, xi_slot, eta_slot):
        cols = [list(x) for x in X] + [list(xi_slot), list(eta_slot)]
        return [[cols[c][r] for c in range(len(cols))] for r in range(len(cols[0]))]

    def _build_darboux(self, env):
        if abs(float(self.det_h2_prov.value)) < DEGENERACY_RTOL * self.h2_scale:
            raise DegenerateError(
                "non-degeneracy determinant "
                f"{float(self.det_h2_prov.value):.3e} at t={self.t0.tolist()}",
                determinant=float(self.det_h2_prov.value),
            )
        rhs = [-tau for tau in self.tau12_prov]
        alpha, _ = jet_solve(self.h2_prov, rhs)
        self.alpha = alpha
        xi = list(self.psi_y)
        for a, x in zip(alpha, self.X):
            xi = vec_add(xi, vec_scale(x, a))
        self.lam = self.one
        if self.scene.gauge == "blaschke":
            lam_b = self._blaschke_scale(env, xi)
            xi = vec_scale(xi, lam_b)
            self.lam = self.lam * lam_b
        if self.scene.xi_scale is not None:
            lam = ex.eval_expr(self.scene.xi_scale, env)
            xi = vec_scale(xi, lam)
            self.lam = self.lam * lam
        self.xi = xi
        c = bracket(self.X + [self.e_last, xi])
        if abs(float(c.value)) < 1e-12:
            raise SingularBasisError("frame bracket vanishes; cannot normalize eta")
        self.bracket_scale = c
        self.eta = vec_scale(self.e_last, c.reciprocal())

    def _blaschke_scale(self, env, xi):
        """1 / sqrt(h(xi, xi)) with h the hypersurface Blaschke metric,
        as a jet along N.  The graph frame is unitriangular in the first
        n+1 ambient coordinates, so those components of xi are exactly its
        hypersurface-frame coefficients."""
        scene = self.scene
        names = scene.f_names
        m = scene.n + 1
        hess = [[None] * m for _ in range(m)]
        for a in range(m):
            da = ex.derivative(scene.f, names[a])
            for b in range(a, m):
                dd = ex.derivative(da, names[b])
                hess[a][b] = hess[b][a] = ex.eval_expr(dd, env)
        det = jet_det([row[:] for row in hess]) if m > 1 else hess[0][0]
        val = float(det.value)
        if abs(val) < 1e-12:
            raise DegenerateError(
                "blaschke gauge needs a non-degenerate hypersurface", val
            )
        sign = 1.0 if val > 0 else -1.0
        phi = (det * sign).fractional_power(1.0 / (m + 2))
        inv_phi = phi.reciprocal()
        acc = None
        for a in range(m):
            for b in range(m):
                term = xi[a] * xi[b] * hess[a][b]
                acc = term if acc is None else acc + term
        h_xixi = acc * inv_phi
        if float(h_xixi.value) <= 0:
            raise DegenerateError(
                "blaschke gauge needs h(xi, xi) > 0", float(h_xixi.value)
            )
        return h_xixi.fractional_power(0.5).reciprocal()

    # -- coefficient solves -------------------------------------------

    def decompose(self, fields, xi_slot=None, eta_slot=None, X=None):
        """Coefficients of ambient jet fields in the frame {X, xi, eta}."""
        X = self.X if X is None else X
        basis = self._basis_matrix(
            X,
            self.xi if xi_slot is None else xi_slot,
            self.eta if eta_slot is None else eta_slot,
        )
        rhs = [[f[r] for r in range(len(f))] for f in fields]
        solved, _ = jet_solve(basis, rhs)
        return solved

    def derive_along(self, W, combination_row):
        """Directional derivative of the ambient field W along a tangent
        frame vector written as sum_k c_k * d/dt_k (``combination_row`` is
        the list of jet coefficients c_k)."""
        acc = None
        for k, c in enumerate(combination_row):
            term = [component * c for component in vec_partial(W, k)]
            acc = term if acc is None else vec_add(acc, term)
        return acc

    def structure_jets(self, X=None, xi_slot=None, eta_slot=None, combination=None):
        """All structure-coefficient jets for a frame given by jet fields.

        ``combination`` expresses each frame vector as a derivation,
        frame_i = sum_k combination[i][k] d/dt_k; it defaults to the
        identity (the coordinate frame).  Returns a dict with
        Gamma[i][j][k], h1, h2 (n x n of jets), S1, S2 (entries S[k][j]:
        coefficient of X_k in S X_j) and the four tau covectors.
        """
        n = self.scene.n
        X = self.X if X is None else X
        xi_slot = self.xi if xi_slot is None else xi_slot
        eta_slot = self.eta if eta_slot is None else eta_slot
        if combination is None:
            combination = [
                [self.one if i == k else self.zero for k in range(n)] for i in range(n)
            ]
        fields = []
        for i in range(n):
            for j in range(n):
                fields.append(self.derive_along(X[j], combination[i]))
        for i in range(n):
            fields.append(self.derive_along(xi_slot, combination[i]))
        for i in range(n):
            fields.append(self.derive_along(eta_slot, combination[i]))
        solved = self.decompose(fields, xi_slot=xi_slot, eta_slot=eta_slot, X=X)
        Gamma = [[[solved[i * n + j][k] for k in range(n)] for j in range(n)] for i in range(n)]
        h1 = [[solved[i * n + j][n] for j in range(n)] for i in range(n)]
        h2 = [[solved[i * n + j][n + 1] for j in range(n)] for i in range(n)]
        dxi = [solved[n * n + i] for i in range(n)]
        deta = [solved[n * n + n + i] for i in range(n)]
        S1 = [[-dxi[j][k] for j in range(n)] for k in range(n)]
        S2 = [[-deta[j][k] for j in range(n)] for k in range(n)]
        tau11 = [dxi[i][n] for i in range(n)]
        tau12 = [dxi[i][n + 1] for i in range(n)]
        tau21 = [deta[i][n] for i in range(n)]
        tau22 = [deta[i][n + 1] for i in range(n)]
        return {
            "Gamma": Gamma, "h1": h1, "h2": h2, "S1": S1, "S2": S2,
            "tau11": tau11, "tau12": tau12, "tau21": tau21, "tau22": tau22,
        }


@lru_cache(maxsize=256)
def _fields(scene, t0_key, order, gauged=True):
    return FrameFields(scene, np.array(t0_key), order, gauged=gauged)


def frame_fields(scene, t, order, gauged=True):
    t = np.atleast_1d(np.asarray(t, dtype=float))
    if t.shape != (scene.n,):
        raise DimensionError(f"expected a point with {scene.n} coordinates")
    return _fields(scene, tuple(float(v) for v in t), order, gauged)


# -- public operations ---------------------------------------------------


def tangent_frame(scene, t, order=2):
    """Provisional frame: tangent vectors plus the graph transversals.

    The xi slot holds the psi_y direction and the eta slot the last
    coordinate direction; no bracket normalization is applied yet.
    """
    ff = frame_fields(scene, t, order, gauged=False)
    return FramePoint(
        t=ff.t0.copy(),
        X=np.array([vec_values(x) for x in ff.X]),
        xi=vec_values(ff.psi_y),
        eta=vec_values(ff.e_last),
        gauge={"kind": "provisional", "normalized": False},
    )


def nondegeneracy(scene, t, order=2):
    """Determinant of (h2(X_i, X_j)) in the provisional frame."""
    ff = frame_fields(scene, t, order, gauged=False)
    return float(ff.det_h2_prov.value)


def darboux_direction(scene, t, order=2):
    """The osculating Darboux vector at t, in the scene's gauge."""
    ff = frame_fields(scene, t, order)
    return vec_values(ff.xi)


def darboux_frame(scene, t, order=2):
    """Bracket-normalized frame with the gauged Darboux field in the xi slot."""
    ff = frame_fields(scene, t, order)
    return FramePoint(
        t=ff.t0.copy(),
        X=np.array([vec_values(x) for x in ff.X]),
        xi=vec_values(ff.xi),
        eta=vec_values(ff.eta),
        gauge={
            "kind": "darboux",
            "normalized": True,
            "xi_scale": scene.xi_scale_text,
        },
    )


def structure_coefficients(scene, t, frame=None, order=2):
    """Structure coefficients at t with respect to ``frame``.

    ``frame`` defaults to the bracket-normalized Darboux frame.  A
    provisional frame from :func:`tangent_frame` is honored by rebuilding
    the matching fields from its gauge record.
    """
    provisional = frame is not None and frame.gauge.get("kind") == "provisional"
    if provisional:
        ff = frame_fields(scene, t, order, gauged=False)
        coeffs = ff.structure_jets(xi_slot=ff.psi_y, eta_slot=ff.e_last)
        frame_point = tangent_frame(scene, t, order)
    else:
        ff = frame_fields(scene, t, order, gauged=True)
        coeffs = ff.structure_jets()
        frame_point = frame or darboux_frame(scene, t, order)
    n = scene.n

    def val(jet):
        return float(jet.value)

    return StructureCoeffs(
        frame=frame_point,
        Gamma=np.array([[[val(coeffs["Gamma"][i][j][k]) for k in range(n)]
                         for j in range(n)] for i in range(n)]),
        h1=np.array([[val(coeffs["h1"][i][j]) for j in range(n)] for i in range(n)]),
        h2=np.array([[val(coeffs["h2"][i][j]) for j in range(n)] for i in range(n)]),
        S1=np.array([[val(coeffs["S1"][k][j]) for j in range(n)] for k in range(n)]),
        S2=np.array([[val(coeffs["S2"][k][j]) for j in range(n)] for k in range(n)]),
        tau11=np.array([val(t_) for t_ in coeffs["tau11"]]),
        tau12=np.array([val(t_) for t_ in coeffs["tau12"]]),
        tau21=np.array([val(t_) for t_ in coeffs["tau21"]]),
        tau22=np.array([val(t_) for t_ in coeffs["tau22"]]),
    )
