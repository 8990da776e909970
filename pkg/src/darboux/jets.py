"""Truncated multivariate Taylor-jet arithmetic.

A jet stores the Taylor coefficients of a smooth function at a base point,
up to a fixed total order.  The coefficient attached to a multi-index a is
the normalized derivative  (d^a f)(p) / a!,  so polynomial identities hold
coefficientwise.  Jets form a commutative ring under truncated addition
and multiplication; jets with a nonzero value part are invertible.

Coefficients are stored in a dense vector ordered degree-major and
lexicographically within each degree.  Two modes are supported: float64,
and exact rational (``fractions.Fraction`` in an object array) for
polynomial data.
"""

from __future__ import annotations

import math
from fractions import Fraction
from functools import lru_cache
from itertools import combinations_with_replacement

import numpy as np

from .errors import (
    DomainError,
    ExactModeError,
    ShapeMismatchError,
    SingularBasisError,
)

MAX_ORDER_DEFAULT = 10

_PIVOT_EPS = 1e-13


def _monomials(nvars, degree):
    """Exponent tuples of total degree ``degree``, lexicographically ascending."""
    if degree == 0:
        return [(0,) * nvars]
    out = []
    for combo in combinations_with_replacement(range(nvars), degree):
        alpha = [0] * nvars
        for v in combo:
            alpha[v] += 1
        out.append(tuple(alpha))
    return sorted(set(out))


@lru_cache(maxsize=None)
def jet_space(nvars, order):
    return JetSpace(nvars, order)


class JetSpace:
    """Shared index tables for jets in ``nvars`` variables up to ``order``."""

    def __init__(self, nvars, order):
        if nvars < 1:
            raise ShapeMismatchError("a jet space needs at least one variable")
        if order < 0:
            raise ShapeMismatchError("jet order must be non-negative")
        self.nvars = nvars
        self.order = order
        indices = []
        self.prefix = [0]  # prefix[d] = #indices with degree < d ... cumulative
        for d in range(order + 1):
            indices.extend(_monomials(nvars, d))
            self.prefix.append(len(indices))
        self.indices = indices
        self.size = len(indices)
        self.index_of = {alpha: i for i, alpha in enumerate(indices)}
        self.degrees = np.array([sum(a) for a in indices], dtype=np.int64)

        # Multiplication table: all (i, j) with deg_i + deg_j <= order and the
        # target slot k for alpha_i + alpha_j.  Indices of degree <= d form a
        # prefix, which keeps this quadratic loop near the useful pair count.
        mi, mj, mk = [], [], []
        for i, alpha in enumerate(indices):
            room = order - sum(alpha)
            for j in range(self.prefix[room + 1]):
                beta = indices[j]
                mi.append(i)
                mj.append(j)
                mk.append(self.index_of[tuple(a + b for a, b in zip(alpha, beta))])
        self.mul_i = np.array(mi, dtype=np.int64)
        self.mul_j = np.array(mj, dtype=np.int64)
        self.mul_k = np.array(mk, dtype=np.int64)

        # Parent pointers: every index of degree >= 1 equals parent + e_var.
        self.parent_index = np.zeros(self.size, dtype=np.int64)
        self.parent_var = np.zeros(self.size, dtype=np.int64)
        for i, alpha in enumerate(indices):
            if sum(alpha) == 0:
                continue
            v = next(k for k in range(nvars) if alpha[k] > 0)
            beta = list(alpha)
            beta[v] -= 1
            self.parent_index[i] = self.index_of[tuple(beta)]
            self.parent_var[i] = v

        # Per-variable differentiation maps: dst <- (alpha_v+1) * src.
        self.diff_maps = []
        for v in range(nvars):
            dst, src, fac = [], [], []
            for i, alpha in enumerate(indices):
                if sum(alpha) >= order + 1:
                    continue
                beta = list(alpha)
                beta[v] += 1
                j = self.index_of.get(tuple(beta))
                if j is not None:
                    dst.append(i)
                    src.append(j)
                    fac.append(beta[v])
            self.diff_maps.append(
                (
                    np.array(dst, dtype=np.int64),
                    np.array(src, dtype=np.int64),
                    np.array(fac, dtype=np.int64),
                )
            )

    def truncation_length(self, order):
        return self.prefix[min(order, self.order) + 1]

    def __repr__(self):
        return f"JetSpace(nvars={self.nvars}, order={self.order})"


def _as_value(x, exact):
    if exact:
        if isinstance(x, Fraction):
            return x
        if isinstance(x, int):
            return Fraction(x)
        if isinstance(x, float):
            return Fraction(x)
        raise ExactModeError(f"cannot coerce {type(x).__name__} to a rational")
    return float(x)


class Jet:
    """A truncated Taylor expansion in a fixed :class:`JetSpace`.

    ``order`` is the order through which the coefficients are meaningful;
    it may be lower than the space order (derivatives lose one order).
    """

    __slots__ = ("space", "order", "coeffs")

    def __init__(self, space, coeffs, order=None):
        self.space = space
        self.order = space.order if order is None else min(order, space.order)
        self.coeffs = coeffs

    # -- constructors -------------------------------------------------

    @staticmethod
    def constant(space, value, order=None, exact=False):
        if exact:
            coeffs = np.array([Fraction(0)] * space.size, dtype=object)
        else:
            coeffs = np.zeros(space.size)
        coeffs[0] = _as_value(value, exact)
        return Jet(space, coeffs, order)

    @staticmethod
    def variable(space, var, value, order=None, exact=False):
        jet = Jet.constant(space, value, order, exact)
        if jet.order >= 1:
            one = Fraction(1) if exact else 1.0
            jet.coeffs[space.index_of[tuple(int(k == var) for k in range(space.nvars))]] = one
        return jet

    @staticmethod
    def coordinates(space, point, order=None, exact=False):
        return [Jet.variable(space, v, point[v], order, exact) for v in range(space.nvars)]

    # -- basic accessors ----------------------------------------------

    @property
    def exact(self):
        return self.coeffs.dtype == object

    @property
    def value(self):
        return self.coeffs[0]

    def coefficient(self, alpha):
        return self.coeffs[self.space.index_of[tuple(alpha)]]

    def to_float(self):
        if not self.exact:
            return self
        return Jet(self.space, self.coeffs.astype(float), self.order)

    def truncated(self, order):
        if order >= self.order:
            return self
        out = self.coeffs.copy()
        out[self.space.truncation_length(order):] = 0
        return Jet(self.space, out, order)

    def _zero_like(self, order):
        if self.exact:
            return np.array([Fraction(0)] * self.space.size, dtype=object)
        return np.zeros(self.space.size)

    def _mask(self, coeffs, order):
        coeffs[self.space.truncation_length(order):] = 0
        return coeffs

    # -- ring operations ----------------------------------------------

    def _coerce(self, other):
        if isinstance(other, Jet):
            if other.space is not self.space:
                raise ShapeMismatchError("jets live in different spaces")
            if self.exact and not other.exact:
                return self.to_float(), other
            if other.exact and not self.exact:
                return self, other.to_float()
            return self, other
        if isinstance(other, (int, float, Fraction)):
            return self, Jet.constant(self.space, other, self.order, self.exact)
        return self, NotImplemented

    def __add__(self, other):
        a, b = self._coerce(other)
        if b is NotImplemented:
            return NotImplemented
        order = min(a.order, b.order)
        return Jet(a.space, a._mask(a.coeffs + b.coeffs, order), order)

    __radd__ = __add__

    def __sub__(self, other):
        a, b = self._coerce(other)
        if b is NotImplemented:
            return NotImplemented
        order = min(a.order, b.order)
        return Jet(a.space, a._mask(a.coeffs - b.coeffs, order), order)

    def __rsub__(self, other):
        return (-self).__add__(other)

    def __neg__(self):
        return Jet(self.space, -self.coeffs, self.order)

    def __mul__(self, other):
        a, b = self._coerce(other)
        if b is NotImplemented:
            return NotImplemented
        order = min(a.order, b.order)
        sp = a.space
        if a.exact:
            out = a._zero_like(order)
            ca, cb = a.coeffs, b.coeffs
            for i, j, k in zip(sp.mul_i, sp.mul_j, sp.mul_k):
                if ca[i] and cb[j]:
                    out[k] += ca[i] * cb[j]
        else:
            prod = a.coeffs[sp.mul_i] * b.coeffs[sp.mul_j]
            out = np.bincount(sp.mul_k, weights=prod, minlength=sp.size)
        return Jet(sp, a._mask(out, order), order)

    __rmul__ = __mul__

    def __truediv__(self, other):
        a, b = self._coerce(other)
        if b is NotImplemented:
            return NotImplemented
        return a * b.reciprocal()

    def __rtruediv__(self, other):
        return self.reciprocal() * other

    def __pow__(self, exponent):
        if not isinstance(exponent, int) or exponent < 0:
            raise DomainError("jet powers take non-negative integer exponents")
        result = Jet.constant(self.space, 1, self.order, self.exact)
        base = self
        e = exponent
        while e:
            if e & 1:
                result = result * base
            base = base * base if e > 1 else base
            e >>= 1
        return result

    def reciprocal(self):
        v = self.value
        if (self.exact and v == 0) or (not self.exact and abs(v) < 1e-300):
            raise DomainError("division by a jet with vanishing value part")
        # b = v (1 + u) with u nilpotent: 1/b = (1/v) sum (-u)^k.
        inv = Fraction(1) / v if self.exact else 1.0 / float(v)
        u = Jet(self.space, self._mask(self.coeffs.copy(), self.order), self.order)
        u.coeffs[0] = 0
        u = u * inv
        acc = Jet.constant(self.space, 1, self.order, self.exact)
        term = Jet.constant(self.space, 1, self.order, self.exact)
        for _ in range(self.order):
            term = -(term * u)
            acc = acc + term
        return acc * inv

    # -- calculus ------------------------------------------------------

    def derivative(self, var):
        if self.order < 1:
            raise ShapeMismatchError("cannot differentiate an order-0 jet")
        dst, src, fac = self.space.diff_maps[var]
        out = self._zero_like(self.order - 1)
        if self.exact:
            for d, s, f in zip(dst, src, fac):
                out[d] = self.coeffs[s] * f
        else:
            out[dst] = self.coeffs[src] * fac
        return Jet(self.space, self._mask(out, self.order - 1), self.order - 1)

    def antiderivative(self, var):
        """Coefficientwise antiderivative with zero constant term."""
        if self.order >= self.space.order:
            raise ShapeMismatchError("no room for the antiderivative order")
        dst, src, fac = self.space.diff_maps[var]
        out = self._zero_like(self.order + 1)
        if self.exact:
            for d, s, f in zip(dst, src, fac):
                out[s] = self.coeffs[d] / Fraction(int(f))
        else:
            out[src] = self.coeffs[dst] / fac
        return Jet(self.space, self._mask(out, self.order + 1), self.order + 1)

    # -- analytic functions --------------------------------------------

    def _analytic(self, taylor_coeffs):
        """Compose with a univariate analytic germ given by its Taylor
        coefficients at this jet's value part (Horner over the nilpotent part)."""
        if self.exact:
            raise ExactModeError("elementary functions are not available in exact mode")
        u = Jet(self.space, self.coeffs.copy(), self.order)
        u.coeffs[0] = 0.0
        acc = Jet.constant(self.space, taylor_coeffs[-1], self.order)
        for c in reversed(taylor_coeffs[:-1]):
            acc = acc * u + c
        return acc

    def sin(self):
        v = float(self.value)
        table = [math.sin(v), math.cos(v), -math.sin(v), -math.cos(v)]
        return self._analytic([table[k % 4] / math.factorial(k) for k in range(self.order + 1)])

    def cos(self):
        v = float(self.value)
        table = [math.cos(v), -math.sin(v), -math.cos(v), math.sin(v)]
        return self._analytic([table[k % 4] / math.factorial(k) for k in range(self.order + 1)])

    def exp(self):
        e = math.exp(float(self.value))
        return self._analytic([e / math.factorial(k) for k in range(self.order + 1)])

    def log(self):
        v = float(self.value)
        if v <= 0:
            raise DomainError(f"log of non-positive value {v}")
        coeffs = [math.log(v)]
        coeffs += [(-1) ** (k - 1) / (k * v**k) for k in range(1, self.order + 1)]
        return self._analytic(coeffs)

    def sqrt(self):
        return self.fractional_power(0.5)

    def fractional_power(self, exponent):
        v = float(self.value)
        if v <= 0:
            raise DomainError(f"fractional power of non-positive value {v}")
        coeffs, c = [], 1.0
        for k in range(self.order + 1):
            coeffs.append(c * v ** (exponent - k))
            c *= (exponent - k) / (k + 1)
        return self._analytic(coeffs)

    def __repr__(self):
        head = ", ".join(f"{a}:{c}" for a, c in zip(self.space.indices[:6], self.coeffs[:6]))
        return f"Jet(order={self.order}, [{head}{', ...' if self.space.size > 6 else ''}])"


def jet_compose(outer, inner):
    """Taylor expansion of the composition outer(inner_1, ..., inner_m).

    ``inner`` is one jet per outer variable; all inner jets share a space
    and base point, and their value parts must sit at the outer base point.
    The result is truncated at the minimum of the participating orders.
    """
    if len(inner) != outer.space.nvars:
        raise ShapeMismatchError(
            f"outer jet takes {outer.space.nvars} arguments, got {len(inner)}"
        )
    if not inner:
        raise ShapeMismatchError("composition needs at least one inner jet")
    sp = inner[0].space
    for jet in inner[1:]:
        if jet.space is not sp:
            raise ShapeMismatchError("inner jets live in different spaces")
    order = min([outer.order] + [jet.order for jet in inner])
    exact = outer.exact and all(jet.exact for jet in inner)
    work_outer = outer if exact or not outer.exact else outer
    inners = list(inner)
    if not exact:
        work_outer = outer.to_float()
        inners = [jet.to_float() for jet in inners]

    # Nilpotent displacements u_i = inner_i - value_i.
    us = []
    for jet in inners:
        u = Jet(sp, jet._mask(jet.coeffs.copy(), order), order)
        u.coeffs[0] = 0
        us.append(u)

    osp = work_outer.space
    # Monomial products via parent pointers: one multiplication per index.
    monos = [Jet.constant(sp, 1, order, exact)]
    limit = osp.truncation_length(min(order, work_outer.order))
    for i in range(1, limit):
        monos.append(monos[osp.parent_index[i]] * us[osp.parent_var[i]])
    acc = Jet.constant(sp, 0, order, exact)
    for i in range(limit):
        c = work_outer.coeffs[i]
        if c:
            acc = acc + monos[i] * c
    return acc


def jet_matrix(rows):
    return [list(r) for r in rows]


def _max_abs_value(matrix):
    best = 0.0
    for row in matrix:
        for entry in row:
            best = max(best, abs(float(entry.value)))
    return best


def _cofactor_det(matrix):
    m = len(matrix)
    if m == 1:
        return matrix[0][0]
    if m == 2:
        return matrix[0][0] * matrix[1][1] - matrix[0][1] * matrix[1][0]
    acc = None
    for j in range(m):
        minor = [row[:j] + row[j + 1:] for row in matrix[1:]]
        term = matrix[0][j] * _cofactor_det(minor)
        if j % 2:
            term = -term
        acc = term if acc is None else acc + term
    return acc


def jet_det(matrix):
    """Determinant of a square matrix of jets.

    Gaussian elimination with full pivoting on value parts; when the
    remaining block has no usable pivot (all value parts nilpotent) it
    falls back to cofactor expansion, which stays division-free.
    """
    m = len(matrix)
    a = [row[:] for row in matrix]
    scale = _max_abs_value(a) or 1.0
    det = None
    sign = 1
    for col in range(m - 1):
        sub = [[abs(float(a[r][c].value)) for c in range(col, m)] for r in range(col, m)]
        best = max((v, -r, -c) for r, row in enumerate(sub) for c, v in enumerate(row))
        pval, prow, pcol = best[0], col - best[1], col - best[2]
        if pval <= _PIVOT_EPS * scale:
            rest = [[a[r][c] for c in range(col, m)] for r in range(col, m)]
            if len(rest) > 4:
                raise SingularBasisError("jet determinant: no usable pivot in a large block")
            tail = _cofactor_det(rest)
            return tail * det * sign if det is not None else tail * sign
        if prow != col:
            a[col], a[prow] = a[prow], a[col]
            sign = -sign
        if pcol != col:
            for row in a:
                row[col], row[pcol] = row[pcol], row[col]
            sign = -sign
        pivot = a[col][col]
        det = pivot if det is None else det * pivot
        inv = pivot.reciprocal()
        for r in range(col + 1, m):
            factor = a[r][col] * inv
            for c in range(col + 1, m):
                a[r][c] = a[r][c] - factor * a[col][c]
    last = a[m - 1][m - 1]
    det = last if det is None else det * last
    return det * sign if sign == -1 else det


def jet_solve(matrix, rhs):
    """Solve A x = b over the jet ring (partial pivoting on value parts).

    ``rhs`` may be a vector (list of jets) or a matrix (list of columns).
    Returns (solution, determinant jet).  Raises SingularBasisError when a
    pivot with usable value part cannot be found.
    """
    m = len(matrix)
    columns = rhs if isinstance(rhs[0], list) else [rhs]
    a = [row[:] + [col[r] for col in columns] for r, row in enumerate(matrix)]
    scale = _max_abs_value(matrix) or 1.0
    det = None
    sign = 1
    for col in range(m):
        pivot_row = max(range(col, m), key=lambda r: (abs(float(a[r][col].value)), -r))
        if abs(float(a[pivot_row][col].value)) <= _PIVOT_EPS * scale:
            raise SingularBasisError("jet solve: singular value part")
        if pivot_row != col:
            a[col], a[pivot_row] = a[pivot_row], a[col]
            sign = -sign
        pivot = a[col][col]
        det = pivot if det is None else det * pivot
        inv = pivot.reciprocal()
        a[col] = [entry * inv for entry in a[col]]
        for r in range(m):
            if r == col:
                continue
            factor = a[r][col]
            if (factor.exact and not factor.coeffs.any()) or (
                not factor.exact and not factor.coeffs.any()
            ):
                continue
            a[r] = [a[r][c] - factor * a[col][c] for c in range(len(a[r]))]
    if sign == -1:
        det = -det
    solution = [[a[r][m + k] for r in range(m)] for k in range(len(columns))]
    if not isinstance(rhs[0], list):
        return solution[0], det
    return solution, det


def bracket(vectors):
    """Oriented volume bracket of n+2 ambient jet vectors.

    The orientation is pinned so that, for a graph hypersurface
    z = f(t, y), the tangency family expands as f - z + ...; concretely
    bracket(v_1, ..., v_k) = det of the matrix with columns
    (v_1, ..., v_{k-2}, v_k, v_{k-1}).
    """
    cols = list(vectors)
    cols[-1], cols[-2] = cols[-2], cols[-1]
    matrix = [[cols[c][r] for c in range(len(cols))] for r in range(len(cols[0]))]
    return jet_det(matrix)
