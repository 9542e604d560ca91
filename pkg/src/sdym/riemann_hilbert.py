"""Functions of the spectral parameter on an annulus around |lambda| = 1 and
the additive splitting phi = phi_minus - phi_plus.

Two backends share the :class:`AnnulusFunction` interface:

* :class:`LaurentPoly` stores a finite window of modes ``lo..hi``.  A mode is
  a constant matrix (``data`` is an array of shape (count, ...)) or a jet
  (``data`` is a :class:`~sdym.jets.Jet` whose first batch axis is the mode
  index), so derivatives and products act on every mode at once.
* :class:`Sampled` stores values at N equispaced points of the unit circle.
"""
from __future__ import annotations

from typing import NamedTuple

import numpy as np

from .jets import Jet, graded_product

# Share of the constant mode given to the minus part:
#   phi_minus_0 = CONSTANT_SHARE * phi_0,  phi_plus_0 = -(1 - CONSTANT_SHARE) * phi_0
CONSTANT_SHARE = 0.5

DEFAULT_SAMPLES = 256
DEFAULT_BUDGET = 16


class AliasingError(ValueError):
    """Sample count too small for the declared mode budget."""


class ModeWindowError(ValueError):
    """Requested mode outside the representable window."""


class AnnulusFunction:
    backend = None

    def laurent(self):
        raise NotImplementedError


# -- Laurent polynomials --------------------------------------------------------

def _mode_axis_jet(space, modes):
    """Stack per-mode jets (same space, same shape) along a new batch axis."""
    order = min(m.order for m in modes)
    sub = space.with_order(order)
    coeffs = np.stack([m.truncate(order).coeffs for m in modes], axis=1)
    return Jet(sub, coeffs)


class LaurentPoly(AnnulusFunction):
    """sum_{k=lo}^{hi} lambda^k c_k with array or jet coefficients."""

    backend = "laurent"

    def __init__(self, data, lo=0):
        if isinstance(data, Jet):
            if len(data.shape) < 3:
                raise ValueError("jet data needs a leading mode axis")
        else:
            data = np.asarray(data, dtype=complex)
            if data.ndim < 1:
                raise ValueError("array data needs a leading mode axis")
        self.data = data
        self.lo = int(lo)

    # construction ----------------------------------------------------------
    @classmethod
    def from_modes(cls, modes, like=None):
        """From a dict {k: coefficient}; coefficients are arrays or jets."""
        if not modes:
            if like is None:
                raise ValueError("empty mode table needs a template")
            return cls.zeros_like(like, 0, 0)
        lo, hi = min(modes), max(modes)
        vals = list(modes.values())
        if isinstance(vals[0], Jet):
            zero = Jet.zeros(vals[0].space, vals[0].shape)
            seq = [modes.get(k, zero) for k in range(lo, hi + 1)]
            return cls(_mode_axis_jet(vals[0].space, seq), lo)
        shape = np.shape(vals[0])
        seq = [np.asarray(modes.get(k, np.zeros(shape)), dtype=complex) for k in range(lo, hi + 1)]
        return cls(np.stack(seq), lo)

    @classmethod
    def zeros_like(cls, other, lo, hi):
        count = hi - lo + 1
        if other.is_jet:
            shape = other.data.shape[1:]
            return cls(Jet.zeros(other.data.space, (count,) + shape), lo)
        return cls(np.zeros((count,) + other.data.shape[1:], dtype=complex), lo)

    @classmethod
    def constant(cls, value):
        if isinstance(value, Jet):
            return cls(Jet(value.space, value.coeffs[:, None]), 0)
        return cls(np.asarray(value, dtype=complex)[None], 0)

    # protocol ----------------------------------------------------------------
    @property
    def is_jet(self):
        return isinstance(self.data, Jet)

    @property
    def count(self):
        return self.data.shape[0]

    @property
    def hi(self):
        return self.lo + self.count - 1

    @property
    def window(self):
        return self.lo, self.hi

    @property
    def space(self):
        return self.data.space if self.is_jet else None

    def __repr__(self):
        kind = f"jet order {self.data.order}" if self.is_jet else "array"
        return f"LaurentPoly(window=[{self.lo}, {self.hi}], {kind})"

    def laurent(self):
        return self

    def mode(self, k):
        """Coefficient of lambda^k (zero outside the window)."""
        i = k - self.lo
        if self.is_jet:
            if 0 <= i < self.count:
                return self.data[i]
            return Jet.zeros(self.data.space, self.data.shape[1:])
        if 0 <= i < self.count:
            return self.data[i]
        return np.zeros(self.data.shape[1:], dtype=complex)

    def modes(self):
        return {k: self.mode(k) for k in range(self.lo, self.hi + 1)}

    def _array(self):
        """Raw array with the mode axis first."""
        if self.is_jet:
            return np.moveaxis(self.data.coeffs, 1, 0)
        return self.data

    def _wrap(self, arr, lo, space=None):
        if space is not None:
            return LaurentPoly(Jet(space, np.moveaxis(arr, 0, 1)), lo)
        return LaurentPoly(arr, lo)

    def with_window(self, lo, hi):
        """Restrict or zero-pad to the window [lo, hi]."""
        arr = self._array()
        out = np.zeros((hi - lo + 1,) + arr.shape[1:], dtype=complex)
        a, b = max(lo, self.lo), min(hi, self.hi)
        if a <= b:
            out[a - lo:b - lo + 1] = arr[a - self.lo:b - self.lo + 1]
        return self._wrap(out, lo, self.space)

    def to_jets(self, space):
        """Constant-in-x jets from array modes (no-op for jet modes)."""
        if self.is_jet:
            return self
        arr = np.zeros((space.size,) + self.data.shape, dtype=complex)
        arr[0] = self.data
        return LaurentPoly(Jet(space, arr), self.lo)

    # arithmetic ----------------------------------------------------------------
    def _align(self, other):
        if self.is_jet != other.is_jet:
            if self.is_jet:
                other = other.to_jets(self.space)
            else:
                self = self.to_jets(other.space)
        lo, hi = min(self.lo, other.lo), max(self.hi, other.hi)
        a, b = self.with_window(lo, hi), other.with_window(lo, hi)
        if a.is_jet:
            order = min(a.data.order, b.data.order)
            a = LaurentPoly(a.data.truncate(order), lo)
            b = LaurentPoly(b.data.truncate(order), lo)
        return a, b

    def __add__(self, other):
        if not isinstance(other, LaurentPoly):
            return self + LaurentPoly.constant(other)
        a, b = self._align(other)
        return LaurentPoly(a.data + b.data, a.lo)

    __radd__ = __add__

    def __neg__(self):
        return LaurentPoly(-self.data, self.lo)

    def __sub__(self, other):
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, LaurentPoly):
            return laurent_product(self, other)
        if np.ndim(other) == 0:
            return LaurentPoly(self.data * other, self.lo)
        return self.rmatmul_const(other)

    def __rmul__(self, other):
        if np.ndim(other) == 0:
            return LaurentPoly(self.data * other, self.lo)
        return self.lmatmul_const(other)

    def lmatmul_const(self, M):
        if self.is_jet:
            return LaurentPoly(self.data.lmatmul_const(M), self.lo)
        return LaurentPoly(np.asarray(M) @ self.data, self.lo)

    def rmatmul_const(self, M):
        if self.is_jet:
            return LaurentPoly(self.data.rmatmul_const(M), self.lo)
        return LaurentPoly(self.data @ np.asarray(M), self.lo)

    def shift(self, m):
        """Multiply by lambda^m."""
        return LaurentPoly(self.data, self.lo + m)

    def derive(self, var):
        """x-derivative of every mode (jet modes only)."""
        if not self.is_jet:
            return LaurentPoly(np.zeros_like(self.data), self.lo)
        return LaurentPoly(self.data.derive(var), self.lo)

    def lambda_derivative(self):
        """d/dlambda: mode k -> k c_k at lambda^(k-1)."""
        ks = np.arange(self.lo, self.hi + 1)
        arr = self._array() * ks.reshape((-1,) + (1,) * (self._array().ndim - 1))
        return self._wrap(arr, self.lo - 1, self.space)

    def antipodal(self):
        """(f(-1/conj(lambda)))^dagger: mode k -> mode -k, coefficient (-1)^k c_k^dagger.

        Jet modes are conjugated pointwise on real x (Jet.dagger)."""
        ks = np.arange(self.lo, self.hi + 1)
        signs = (-1.0) ** ks
        if self.is_jet:
            d = self.data.dagger()
            arr = np.moveaxis(d.coeffs, 1, 0)
        else:
            arr = np.conj(np.swapaxes(self.data, -1, -2))
        arr = arr * signs.reshape((-1,) + (1,) * (arr.ndim - 1))
        return self._wrap(arr[::-1].copy(), -self.hi, self.space)

    def dagger(self):
        """Mode-wise Hermitian conjugate (no change of lambda)."""
        if self.is_jet:
            return LaurentPoly(self.data.dagger(), self.lo)
        return LaurentPoly(np.conj(np.swapaxes(self.data, -1, -2)), self.lo)

    def truncate(self, order):
        """Truncate jet modes to a lower valid order."""
        return LaurentPoly(self.data.truncate(order), self.lo) if self.is_jet else self

    def eval(self, lam):
        """Value at a complex lambda (array, or jet for jet modes)."""
        lam = complex(lam)
        if self.is_jet:
            w = lam ** np.arange(self.lo, self.hi + 1)
            return Jet(self.data.space, np.einsum("mk...,k->m...", self.data.coeffs, w))
        w = lam ** np.arange(self.lo, self.hi + 1)
        return np.tensordot(w, self.data, axes=(0, 0))

    def norm(self, order=None):
        """Max Frobenius norm over modes (and jet coefficients up to ``order``)."""
        if self.is_jet:
            return self.data.norm(order)
        if self.data.size == 0:
            return 0.0
        return float(np.max(np.sqrt(np.sum(np.abs(self.data) ** 2, axis=(-2, -1)))))

    def support(self, tol=0.0):
        """Modes whose coefficient norm exceeds ``tol``."""
        out = []
        for k in range(self.lo, self.hi + 1):
            c = self.mode(k)
            nrm = c.norm() if isinstance(c, Jet) else float(np.max(np.abs(c), initial=0.0))
            if nrm > tol:
                out.append(k)
        return out

    def series_inverse(self, degree):
        """Inverse of a one-sided series, to ``degree`` terms.

        A series in lambda (lo = 0) returns sum_{k=0}^{degree} lambda^k e_k;
        a series in 1/lambda (hi = 0) returns the analogue in 1/lambda."""
        if self.lo == 0:
            sign = 1
        elif self.hi == 0:
            sign = -1
        else:
            raise ValueError("series_inverse needs a one-sided series")
        c = [self.mode(sign * k) for k in range(degree + 1)]
        if self.is_jet:
            e0 = c[0].inverse()
        else:
            e0 = np.linalg.inv(c[0])
        e = [e0]
        for k in range(1, degree + 1):
            acc = None
            for j in range(1, k + 1):
                t = c[j] * e[k - j] if self.is_jet else c[j] @ e[k - j]
                acc = t if acc is None else acc + t
            e.append(-(e0 * acc) if self.is_jet else -(e0 @ acc))
        modes = {sign * k: v for k, v in enumerate(e)}
        return LaurentPoly.from_modes(modes)

    def to_sampled(self, N=DEFAULT_SAMPLES, budget=None):
        if self.is_jet:
            raise TypeError("sampling is provided for array modes")
        lam = np.exp(2j * np.pi * np.arange(N) / N)
        vals = np.stack([self.eval(l) for l in lam])
        if budget is None:
            budget = max(abs(self.lo), abs(self.hi), 1)
        return Sampled(vals, budget)


def laurent_product(a, b):
    """Convolution of mode tables; jet modes use the truncated jet product."""
    if a.is_jet or b.is_jet:
        if not a.is_jet:
            a = a.to_jets(b.space)
        if not b.is_jet:
            b = b.to_jets(a.space)
        if not a.space.compatible(b.space):
            from .jets import FrameMismatchError
            raise FrameMismatchError("mode tables live on different jet spaces")
        order = min(a.data.order, b.data.order)
        M = a.data.space.with_order(order).size
        A = a.data.coeffs[:M]
        B = b.data.coeffs[:M]
        ca, cb = A.shape[1], B.shape[1]
        prod = graded_product(A[:, :, None], B[:, None, :], order)  # (M, ca, cb, ...)
        out = np.zeros((M, ca + cb - 1) + prod.shape[3:], dtype=complex)
        for i in range(ca):
            out[:, i:i + cb] += prod[:, i]
        return LaurentPoly(Jet(a.data.space.with_order(order), out), a.lo + b.lo)
    A, B = a.data, b.data
    ca, cb = A.shape[0], B.shape[0]
    scalar = A.shape[-2:] == (1, 1) or B.shape[-2:] == (1, 1)
    out = None
    for i in range(ca):
        term = A[i] * B if scalar else A[i] @ B
        if out is None:
            out = np.zeros((ca + cb - 1,) + term.shape[1:], dtype=complex)
        out[i:i + cb] += term
    return LaurentPoly(out, a.lo + b.lo)


# -- sampled backend ----------------------------------------------------------------

class Sampled(AnnulusFunction):
    """Values at lambda_j = exp(2 pi i j / N), with a declared mode budget."""

    backend = "sampled"

    def __init__(self, values, budget=DEFAULT_BUDGET):
        values = np.asarray(values, dtype=complex)
        N = values.shape[0]
        if N & (N - 1):
            raise ValueError("sample count must be a power of two")
        if N < 4 * budget:
            raise AliasingError(f"{N} samples cannot resolve a mode budget of {budget}")
        self.values = values
        self.budget = int(budget)

    @classmethod
    def from_function(cls, fn, N=DEFAULT_SAMPLES, budget=DEFAULT_BUDGET):
        if N < 4 * budget:
            raise AliasingError(f"{N} samples cannot resolve a mode budget of {budget}")
        lam = np.exp(2j * np.pi * np.arange(N) / N)
        return cls(np.stack([np.asarray(fn(l), dtype=complex) for l in lam]), budget)

    @property
    def N(self):
        return self.values.shape[0]

    @property
    def points(self):
        return np.exp(2j * np.pi * np.arange(self.N) / self.N)

    def _spectrum(self):
        return np.fft.fft(self.values, axis=0) / self.N

    def laurent(self):
        spec = self._spectrum()
        K = self.budget
        idx = np.arange(-K, K + 1) % self.N
        return LaurentPoly(spec[idx], -K)

    def coefficient(self, k):
        """Trapezoidal rule for (1/2 pi i) closed integral of f lambda^(-k-1) d lambda."""
        if abs(k) > self.budget:
            raise ModeWindowError(f"mode {k} outside the budget {self.budget}")
        w = self.points ** (-k)
        return np.tensordot(w, self.values, axes=(0, 0)) / self.N

    def __add__(self, other):
        return Sampled(self.values + other.values, max(self.budget, other.budget))

    def __neg__(self):
        return Sampled(-self.values, self.budget)

    def __sub__(self, other):
        return self + (-other)

    def __mul__(self, c):
        return Sampled(self.values * c, self.budget)

    __rmul__ = __mul__

    def norm(self):
        if self.values.size == 0:
            return 0.0
        v = self.values.reshape(self.N, -1)
        return float(np.max(np.linalg.norm(v, axis=1)))


# -- splitting -------------------------------------------------------------------

class SplitPair(NamedTuple):
    plus: AnnulusFunction
    minus: AnnulusFunction

    def reconstruct(self):
        return self.minus - self.plus


def laurent_coefficients(f):
    """Mode table of f: passthrough for LaurentPoly, FFT for Sampled."""
    return f.laurent()


def split(f, constant_share=CONSTANT_SHARE):
    """phi_plus = -(1 - s) phi_0 - sum_{n>=1} lambda^n phi_n,
    phi_minus = s phi_0 + sum_{n<=-1} lambda^n phi_n, with s = ``constant_share``.

    Laurent input splits mode by mode.  Sampled input splits the full FFT
    spectrum (the Nyquist bin is shared like the constant mode), so
    reconstruction is exact to rounding even beyond the budget."""
    if isinstance(f, Sampled):
        spec = np.fft.fft(f.values, axis=0)
        N = f.N
        bins = np.fft.fftfreq(N, 1.0 / N).astype(int)
        shape = (-1,) + (1,) * (spec.ndim - 1)
        pos = (bins > 0).reshape(shape)
        neg = (bins < 0).reshape(shape)
        zero = (bins == 0).reshape(shape)
        nyq = np.zeros(N, dtype=bool)
        nyq[N // 2] = True
        nyq = nyq.reshape(shape)
        pos = pos & ~nyq
        neg = neg & ~nyq
        s = constant_share
        plus = -(spec * pos) - (1 - s) * spec * (zero | nyq)
        minus = spec * neg + s * spec * (zero | nyq)
        return SplitPair(Sampled(np.fft.ifft(plus, axis=0), f.budget),
                         Sampled(np.fft.ifft(minus, axis=0), f.budget))
    L = f.laurent()
    lo, hi = L.lo, L.hi
    plus = L.with_window(0, max(hi, 0))
    minus = L.with_window(min(lo, 0), 0)
    arr_p = -plus._array()
    arr_p[0] *= 1 - constant_share
    arr_m = minus._array().copy()
    arr_m[-1] = arr_m[-1] * constant_share
    return SplitPair(plus._wrap(arr_p, 0, L.space), minus._wrap(arr_m, min(lo, 0), L.space))


def contour_coefficient(f, k):
    """Coefficient of lambda^k: exact on LaurentPoly, trapezoidal on Sampled."""
    if isinstance(f, Sampled):
        return f.coefficient(k)
    if not f.lo <= k <= f.hi:
        raise ModeWindowError(f"mode {k} outside the window [{f.lo}, {f.hi}]")
    return f.mode(k)
