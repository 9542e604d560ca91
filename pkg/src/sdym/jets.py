"""Truncated power series ("jets") in four variables with matrix coefficients.

A :class:`Jet` is a Taylor polynomial about a real base point x0, truncated at
total degree ``space.order``.  The variables are offsets from x0, either the
real coordinates x_mu - x0_mu or the complex ones (y - y0, ybar - ybar0,
z - z0, zbar - zbar0), the latter treated as four independent variables.

Coefficients are stored densely in a graded monomial order: every monomial of
degree d precedes every monomial of degree d + 1, so truncation is slicing.
The coefficient array has shape ``(M, ..., n, n)``; scalar jets use 1x1
matrices and multiply elementwise.

The stored order is also the *valid* order: derivatives drop it by one,
products take the minimum, and nothing beyond it is ever reported.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from . import frames
from .frames import COMPLEX, REAL


class FrameMismatchError(ValueError):
    pass


class OrderError(ValueError):
    """A requested result needs more valid order than is available."""


def n_monomials(order):
    return math.comb(order + 4, 4) if order >= 0 else 0


@lru_cache(maxsize=None)
def monomials(order):
    """Exponent table (M, 4) in graded order, and the exponent -> index map."""
    exps = []
    for d in range(order + 1):
        for a in range(d, -1, -1):
            for b in range(d - a, -1, -1):
                for c in range(d - a - b, -1, -1):
                    exps.append((a, b, c, d - a - b - c))
    table = np.array(exps, dtype=int).reshape(-1, 4)
    table.setflags(write=False)
    return table, {e: i for i, e in enumerate(exps)}


@lru_cache(maxsize=None)
def _product_table(order):
    exps, index = monomials(order)
    deg = exps.sum(axis=1)
    I, J, K = [], [], []
    for i, ei in enumerate(exps):
        for j, ej in enumerate(exps):
            if deg[i] + deg[j] > order:
                break  # graded order: later j only get worse
            I.append(i)
            J.append(j)
            K.append(index[tuple(ei + ej)])
    I, J, K = (np.array(v, dtype=np.intp) for v in (I, J, K))
    perm = np.argsort(K, kind="stable")
    I, J, K = I[perm], J[perm], K[perm]
    starts = np.flatnonzero(np.r_[True, K[1:] != K[:-1]])
    # pair ranges for each output degree
    out_deg = deg[K]
    bounds = np.searchsorted(out_deg, np.arange(order + 2))
    return I, J, starts, bounds


@lru_cache(maxsize=None)
def _derivative_table(order, var):
    """For d/dvar: output (order - 1) index k <- source index, factor."""
    exps, index = monomials(order)
    m_out = n_monomials(order - 1)
    src = np.empty(m_out, dtype=np.intp)
    fac = np.empty(m_out)
    for k in range(m_out):
        e = list(exps[k])
        e[var] += 1
        src[k] = index[tuple(e)]
        fac[k] = e[var]
    return src, fac


@lru_cache(maxsize=None)
def _antiderivative_table(order, var):
    """For the zero-constant antiderivative in var: order -> order + 1."""
    exps = monomials(order)[0]
    _, index_up = monomials(order + 1)
    dst = np.empty(len(exps), dtype=np.intp)
    fac = np.empty(len(exps))
    for k, e in enumerate(exps):
        e = list(e)
        e[var] += 1
        dst[k] = index_up[tuple(e)]
        fac[k] = 1.0 / e[var]
    return dst, fac


@lru_cache(maxsize=None)
def _conj_perm(order):
    exps, index = monomials(order)
    return np.array([index[tuple(e[list(frames.CONJ_PERM)])] for e in exps], dtype=np.intp)


@lru_cache(maxsize=None)
def _var_mask(order, var):
    """True for monomials that do not contain var."""
    return monomials(order)[0][:, var] == 0


def _is_scalar(c):
    return c.shape[-1] == 1 and c.shape[-2] == 1


def _pair_product(a, b):
    if _is_scalar(a) or _is_scalar(b):
        return a * b
    return a @ b


def graded_product(a, b, order, degree=None):
    """Cauchy product of coefficient arrays truncated at ``order``; with
    ``degree`` only that homogeneous part is returned (as an (M_d, ...) array)."""
    I, J, starts, bounds = _product_table(order)
    if degree is None:
        lo, hi = 0, len(I)
    else:
        lo, hi = bounds[degree], bounds[degree + 1]
    prods = _pair_product(a[I[lo:hi]], b[J[lo:hi]])
    st = starts[(starts >= lo) & (starts < hi)] - lo
    return np.add.reduceat(prods, st, axis=0)


def _variable_index(frame, var):
    """Resolve a variable name or index in the given frame.

    Returns ('own', index) for a variable of the frame, or ('combo', weights)
    for a derivative along a variable of the other frame."""
    if isinstance(var, (int, np.integer)):
        return "own", int(var)
    names_c = frames.COMPLEX_NAMES
    names_r = ("x1", "x2", "x3", "x4")
    if var in names_c:
        c = names_c.index(var)
        if frame == COMPLEX:
            return "own", c
        return "combo", frames.TO_COMPLEX[c]
    if var in names_r:
        mu = names_r.index(var)
        if frame == REAL:
            return "own", mu
        return "combo", frames.TO_REAL[mu]
    raise ValueError(f"unknown variable {var!r}")


@dataclass(frozen=True)
class JetSpace:
    order: int
    base_point: tuple = (0.0, 0.0, 0.0, 0.0)
    frame: str = COMPLEX

    def __post_init__(self):
        if self.frame not in frames.FRAMES:
            raise ValueError(f"unknown frame {self.frame!r}")
        bp = tuple(float(v) for v in self.base_point)
        if len(bp) != 4:
            raise ValueError("base point needs four coordinates")
        object.__setattr__(self, "base_point", bp)

    @property
    def size(self):
        return n_monomials(self.order)

    def with_order(self, order):
        return JetSpace(order, self.base_point, self.frame)

    def compatible(self, other):
        return self.base_point == other.base_point and self.frame == other.frame

    def offsets(self, x):
        """Variable values at real points x (..., 4)."""
        dx = np.asarray(x, dtype=float) - np.asarray(self.base_point)
        if self.frame == REAL:
            return dx.astype(complex)
        return frames.to_complex_coords(dx)


class Jet:
    """Truncated multivariate power series with (matrix) coefficients."""

    __array_ufunc__ = None  # keep numpy from broadcasting over Jet objects

    def __init__(self, space, coeffs):
        coeffs = np.asarray(coeffs, dtype=complex)
        if coeffs.ndim < 3:
            raise ValueError("coefficients need shape (M, ..., n, n)")
        if coeffs.shape[0] != space.size:
            raise ValueError(
                f"order {space.order} needs {space.size} coefficients, got {coeffs.shape[0]}"
            )
        self.space = space
        self.coeffs = coeffs

    # construction -----------------------------------------------------
    @classmethod
    def zeros(cls, space, shape=(1, 1)):
        return cls(space, np.zeros((space.size,) + tuple(shape), dtype=complex))

    @classmethod
    def constant(cls, space, value):
        value = np.asarray(value, dtype=complex)
        if value.ndim == 0:
            value = value.reshape(1, 1)
        c = np.zeros((space.size,) + value.shape, dtype=complex)
        c[0] = value
        return cls(space, c)

    @classmethod
    def variable(cls, space, var):
        """The jet of one of the space's own offset variables."""
        kind, v = _variable_index(space.frame, var)
        if kind != "own":
            raise ValueError(f"{var!r} is not a variable of the {space.frame} frame")
        j = cls.zeros(space)
        if space.order >= 1:
            j.coeffs[1 + v] = 1.0  # degree-1 block is in variable order
        return j

    @classmethod
    def coordinate(cls, space, name):
        """Absolute coordinate (x_mu or y, ybar, z, zbar) as a scalar jet."""
        x0 = np.asarray(space.base_point)
        if name in ("x1", "x2", "x3", "x4"):
            mu = int(name[1]) - 1
            if space.frame == REAL:
                return cls.variable(space, mu) + x0[mu]
            out = cls.constant(space, x0[mu])
            for c in range(4):
                out = out + cls.variable(space, c) * frames.COORD_INV[mu, c]
            return out
        c = frames.COMPLEX_NAMES.index(name)
        w0 = frames.COORD[c] @ x0
        if space.frame == COMPLEX:
            return cls.variable(space, c) + w0
        out = cls.constant(space, w0)
        for mu in range(4):
            out = out + cls.variable(space, mu) * frames.COORD[c, mu]
        return out

    @classmethod
    def from_polynomial(cls, space, poly, symbols):
        """Scalar jet of a sympy polynomial in the real coordinates ``symbols``."""
        import sympy

        P = sympy.Poly(sympy.expand(poly), *symbols)
        coords = [cls.coordinate(space, f"x{mu + 1}") for mu in range(4)]
        out = cls.zeros(space)
        powers = {}
        for exps, coef in P.terms():
            term = cls.constant(space, complex(coef))
            for mu, e in enumerate(exps):
                if e:
                    key = (mu, e)
                    if key not in powers:
                        powers[key] = coords[mu] ** e
                    term = term * powers[key]
            out = out + term
        return out

    # basic protocol -----------------------------------------------------
    @property
    def order(self):
        return self.space.order

    @property
    def shape(self):
        return self.coeffs.shape[1:]

    def __repr__(self):
        return f"Jet(order={self.order}, frame={self.space.frame}, shape={self.shape})"

    def _align(self, other):
        if not self.space.compatible(other.space):
            raise FrameMismatchError(f"{self.space} vs {other.space}")
        order = min(self.order, other.order)
        m = n_monomials(order)
        return self.space.with_order(order), self.coeffs[:m], other.coeffs[:m]

    def __add__(self, other):
        if isinstance(other, Jet):
            space, a, b = self._align(other)
            return Jet(space, a + b)
        c = self.coeffs.copy()
        c[0] = c[0] + _as_constant(other, c.shape[-1])
        return Jet(self.space, c)

    __radd__ = __add__

    def __neg__(self):
        return Jet(self.space, -self.coeffs)

    def __sub__(self, other):
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, Jet):
            space, a, b = self._align(other)
            return Jet(space, graded_product(a, b, space.order))
        if np.ndim(other) == 0:
            return Jet(self.space, self.coeffs * other)
        return self.rmatmul_const(other)

    def __rmul__(self, other):
        if np.ndim(other) == 0:
            return Jet(self.space, self.coeffs * other)
        return self.lmatmul_const(other)

    def __truediv__(self, other):
        return Jet(self.space, self.coeffs / other)

    def __pow__(self, k):
        out = Jet.constant(self.space, np.eye(self.shape[-1]))
        for _ in range(int(k)):
            out = out * self
        return out

    def lmatmul_const(self, M):
        """Left-multiply every coefficient by a constant matrix."""
        return Jet(self.space, np.asarray(M) @ self.coeffs)

    def rmatmul_const(self, M):
        return Jet(self.space, self.coeffs @ np.asarray(M))

    def __getitem__(self, idx):
        """Index the batch axes (between the monomial and matrix axes)."""
        if not isinstance(idx, tuple):
            idx = (idx,)
        return Jet(self.space, self.coeffs[(slice(None),) + idx])

    # calculus -----------------------------------------------------------
    def derive(self, var):
        kind, v = _variable_index(self.space.frame, var)
        if kind == "combo":
            out = None
            for k, w in enumerate(v):
                if w != 0:
                    term = self.derive(k) * w
                    out = term if out is None else out + term
            return out
        if self.order < 1:
            raise OrderError("derivative of an order-0 jet has no valid terms")
        src, fac = _derivative_table(self.order, v)
        c = self.coeffs[src] * fac.reshape((-1,) + (1,) * (self.coeffs.ndim - 1))
        return Jet(self.space.with_order(self.order - 1), c)

    def antiderive(self, var):
        """Zero-constant antiderivative; the result is valid to order + 1."""
        kind, v = _variable_index(self.space.frame, var)
        if kind != "own":
            raise ValueError("antiderivatives are taken along the jet's own variables")
        dst, fac = _antiderivative_table(self.order, v)
        space = self.space.with_order(self.order + 1)
        c = np.zeros((space.size,) + self.shape, dtype=complex)
        c[dst] = self.coeffs * fac.reshape((-1,) + (1,) * (self.coeffs.ndim - 1))
        return Jet(space, c)

    def truncate(self, order):
        if order > self.order:
            raise OrderError(f"cannot raise valid order {self.order} to {order}")
        return Jet(self.space.with_order(order), self.coeffs[: n_monomials(order)])

    def degree_part(self, d):
        """Homogeneous degree-d part as a jet of the same order."""
        c = np.zeros_like(self.coeffs)
        lo, hi = n_monomials(d - 1), n_monomials(d)
        c[lo:hi] = self.coeffs[lo:hi]
        return Jet(self.space, c)

    def eval(self, x):
        """Evaluate the truncated series at real point(s) x of shape (..., 4)."""
        x = np.asarray(x, dtype=float)
        off = self.space.offsets(x)
        exps = monomials(self.order)[0]
        vals = np.prod(off[..., None, :] ** exps, axis=-1)
        out = np.tensordot(vals, self.coeffs, axes=(-1, 0))
        if _is_scalar(self.coeffs) and self.coeffs.ndim == 3:
            return out[..., 0, 0]
        return out

    def norm(self, order=None):
        """Max Frobenius norm of the coefficients up to ``order``."""
        m = self.space.size if order is None else n_monomials(order)
        c = self.coeffs[:m]
        if c.size == 0:
            return 0.0
        return float(np.max(np.sqrt(np.sum(np.abs(c) ** 2, axis=(-2, -1)))))

    def dagger(self):
        """Pointwise Hermitian conjugate on real points (x stays real, so the
        complex variables are swapped with their conjugates)."""
        c = np.conj(np.swapaxes(self.coeffs, -1, -2))
        if self.space.frame == COMPLEX:
            c = c[_conj_perm(self.order)]
        return Jet(self.space, c)

    def without(self, var):
        """Drop every monomial containing ``var`` (restrict to var = 0)."""
        kind, v = _variable_index(self.space.frame, var)
        c = self.coeffs * _var_mask(self.order, v).reshape((-1,) + (1,) * (self.coeffs.ndim - 1))
        return Jet(self.space, c)

    def inverse(self):
        """Multiplicative inverse of a matrix (or scalar) jet whose constant
        term is invertible, by the terminating Neumann series."""
        c0 = self.coeffs[0]
        inv0 = 1.0 / c0 if _is_scalar(self.coeffs) else np.linalg.inv(c0)
        # self = c0 (1 + h), h has no constant term
        h = Jet(self.space, (inv0 * self.coeffs) if _is_scalar(self.coeffs) else inv0 @ self.coeffs)
        h.coeffs[0] = 0
        eye = np.ones_like(c0) if _is_scalar(self.coeffs) else np.eye(c0.shape[-1])
        total = Jet.constant(self.space, eye)
        term = total
        for _ in range(self.order):
            term = -(term * h)
            total = total + term
        return total.rmatmul_const(inv0) if not _is_scalar(self.coeffs) else total * inv0

    def to_frame(self, frame):
        """Re-expand in the other variable frame (a linear substitution)."""
        if frame == self.space.frame:
            return self
        space = JetSpace(self.order, self.space.base_point, frame)
        exps = monomials(self.order)[0]
        if frame == COMPLEX:  # old real offsets in terms of the complex ones
            old = [sum((Jet.variable(space, c) * frames.COORD_INV[mu, c] for c in range(4)),
                       Jet.zeros(space)) for mu in range(4)]
        else:
            old = [sum((Jet.variable(space, mu) * frames.COORD[c, mu] for mu in range(4)),
                       Jet.zeros(space)) for c in range(4)]
        powers = [[Jet.constant(space, 1.0)] for _ in range(4)]
        for v in range(4):
            for _ in range(self.order):
                powers[v].append(powers[v][-1] * old[v])
        out = np.zeros_like(self.coeffs)
        for k, e in enumerate(exps):
            mono = powers[0][e[0]] * powers[1][e[1]] * powers[2][e[2]] * powers[3][e[3]]
            out = out + mono.coeffs[..., 0, 0].reshape((-1,) + (1,) * (out.ndim - 1)) * self.coeffs[k]
        return Jet(space, out)


def _as_constant(value, n):
    value = np.asarray(value, dtype=complex)
    if value.ndim == 0:
        return value * (np.eye(n) if n > 1 else np.ones((1, 1)))
    return value


def commutator(a, b):
    return a * b - b * a


def reciprocal(f):
    """1/f for a scalar jet with nonzero constant term."""
    return f.inverse()


def random_jet(space, n, rng, scale=1.0):
    c = rng.normal(size=(space.size, n, n)) + 1j * rng.normal(size=(space.size, n, n))
    return Jet(space, scale * c)
