"""Constant complex structures on R^4, the (0,1) frame along the twistor
fibre, twistor coordinates, the two-chart cover, holomorphy residuals and the
lift of conformal vector fields to twistor space.

Laurent-in-lambda objects are :class:`~sdym.riemann_hilbert.LaurentPoly`
instances with jet modes in the complex frame; lambda-bar never appears, so
the third frame vector d/d(lambda-bar) annihilates them by construction.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import sympy

from . import frames, lie
from .jets import Jet
from .manifest import X, ConformalGenerator, _components
from .riemann_hilbert import LaurentPoly

LAM = sympy.Symbol("lam")
DEFAULT_ALPHA = 0.5

# exact complex coordinates as functions of the real ones
_W = (X[0] + sympy.I * X[1], X[0] - sympy.I * X[1], X[2] - sympy.I * X[3], X[2] + sympy.I * X[3])
# and the real ones through independent complex symbols
YC = sympy.symbols("y ybar z zbar")
_X_OF_W = (
    (YC[0] + YC[1]) / 2,
    (YC[0] - YC[1]) / (2 * sympy.I),
    (YC[2] + YC[3]) / 2,
    sympy.I * (YC[2] - YC[3]) / 2,
)


class LiftError(ValueError):
    """No (or no unique) vertical component preserves the holomorphic structure."""


@dataclass(frozen=True)
class ComplexStructureParams:
    s: tuple

    def __post_init__(self):
        s = tuple(float(v) for v in self.s)
        if len(s) != 3 or abs(np.dot(s, s) - 1) > 1e-12:
            raise ValueError("s must be a unit 3-vector")
        object.__setattr__(self, "s", s)

    @property
    def lam(self):
        s1, s2, s3 = self.s
        if 1 + s3 == 0:
            return complex("inf")
        return complex(s1, s2) / (1 + s3)


def lambda_to_s(lam):
    """Inverse stereographic map lambda -> unit s."""
    lam = complex(lam)
    r2 = abs(lam) ** 2
    return np.array([2 * lam.real, 2 * lam.imag, 1 - r2]) / (1 + r2)


def complex_structure(s):
    """J[nu, mu] = s_a etabar^a_{mu nu}, acting on vectors as V -> J V."""
    params = s if isinstance(s, ComplexStructureParams) else ComplexStructureParams(s)
    return np.einsum("a,amn->nm", np.asarray(params.s), lie.ETA_BAR).astype(float)


def frame_vectors(lam):
    """Real-frame components of Vbar_1 = d_ybar - lam d_z and Vbar_2 = d_zbar + lam d_y."""
    lam = complex(lam)
    v1 = 0.5 * np.array([1, 1j, -lam, -1j * lam])
    v2 = 0.5 * np.array([lam, -1j * lam, 1, -1j])
    return v1, v2


@dataclass(frozen=True)
class FrameOperator:
    """A first-order operator of the (0,1) frame: index 1, 2 (horizontal) or 3 (d/d lambda-bar)."""

    index: int
    lam: complex | None = None

    def __call__(self, f):
        if self.index == 3:
            if isinstance(f, LaurentPoly):
                return LaurentPoly(f.data * 0, f.lo)
            return f * 0
        a, b, sign = ("ybar", "z", -1) if self.index == 1 else ("zbar", "y", 1)
        if isinstance(f, LaurentPoly):
            return f.derive(a) + f.derive(b).shift(1) * sign
        if self.lam is None:
            raise ValueError("a jet argument needs a numeric lambda")
        return f.derive(a) + f.derive(b) * (sign * self.lam)


def antiholomorphic_frame(lam=None):
    """(Vbar_1, Vbar_2, Vbar_3) as operators on jets (numeric ``lam``) or on
    Laurent-in-lambda jets (``lam=None``)."""
    return tuple(FrameOperator(i, None if lam is None else complex(lam)) for i in (1, 2, 3))


def twistor_coords(x, lam):
    """w1 = y - lam zbar, w2 = z + lam ybar at real points x (..., 4)."""
    w = frames.to_complex_coords(x)
    return w[..., 0] - lam * w[..., 3], w[..., 2] + lam * w[..., 1]


def twistor_coord_jets(space):
    """w1, w2 as Laurent polynomials in lambda with (absolute) coordinate jets."""
    y, yb, z, zb = (Jet.coordinate(space, nm) for nm in frames.COMPLEX_NAMES)
    w1 = LaurentPoly.from_modes({0: y, 1: -zb})
    w2 = LaurentPoly.from_modes({0: z, 1: yb})
    return w1, w2


@dataclass(frozen=True)
class CoverRegion:
    """U_plus = {|lam| <= 1 + alpha}, U_minus = {|lam| >= 1 - alpha} (lam = inf included)."""

    alpha: float = DEFAULT_ALPHA

    def __post_init__(self):
        if not 0 < self.alpha < 1:
            raise ValueError("alpha must lie in (0, 1)")

    def in_plus(self, lam):
        return bool(np.abs(lam) <= 1 + self.alpha)

    def in_minus(self, lam):
        return bool(np.abs(lam) >= 1 - self.alpha)

    def in_overlap(self, lam):
        r = np.abs(lam)
        return bool(1 - self.alpha <= r <= 1 + self.alpha)

    def samples(self, count=8):
        """``count`` points on each of |lam| = 1 - alpha/2, 1, 1 + alpha/2."""
        phase = np.exp(2j * np.pi * (np.arange(count) + 0.5) / count)
        return np.concatenate([r * phase for r in (1 - self.alpha / 2, 1.0, 1 + self.alpha / 2)])


def holomorphy_residual(f, lambdas=None, order=None):
    """max_a |Vbar_a f| for a Laurent-in-lambda jet (all modes, or at the
    given lambda samples) or a single jet at one numeric lambda."""
    if isinstance(f, LaurentPoly):
        V = antiholomorphic_frame()
        res = 0.0
        for op in V[:2]:
            g = op(f)
            if lambdas is None:
                res = max(res, g.norm(order))
            else:
                res = max(res, max(g.eval(l).norm(order) for l in lambdas))
        return res
    if lambdas is None or np.ndim(lambdas) == 0:
        V = antiholomorphic_frame(lambdas if lambdas is not None else 0.0)
        return max(op(f).norm(order) for op in V[:2])
    return max(holomorphy_residual(f, l, order) for l in lambdas)


# -- vector fields on twistor space ----------------------------------------------

def _laurent_window(expr):
    expr = sympy.expand(expr)
    if expr == 0:
        return 0, 0
    degs = [int(t.as_powers_dict().get(LAM, 0)) for t in sympy.Add.make_args(expr)]
    return min(degs), max(degs)


def laurent_from_expr(expr, space):
    """Scalar expression in (x, lam), Laurent in lam and polynomial in x, as
    a LaurentPoly of scalar jets."""
    expr = sympy.expand(expr)
    lo, hi = _laurent_window(expr)
    shifted = sympy.expand(expr * LAM ** (-lo))
    P = sympy.Poly(shifted, LAM)
    modes = {}
    for (k,), coef in P.terms():
        modes[k + lo] = Jet.from_polynomial(space, coef, X)
    if not modes:
        modes[0] = Jet.zeros(space)
    return LaurentPoly.from_modes(modes)


@dataclass(frozen=True)
class TwistorVectorField:
    """eta = N^mu(x, lam) d_mu + N^lam(x, lam) d_lam (real horizontal frame)."""

    horizontal: tuple
    vertical: object
    label: str = ""

    @property
    def window(self):
        parts = [c for c in self.horizontal + (self.vertical,) if sympy.expand(c) != 0]
        if not parts:
            return 0, 0
        los, his = zip(*(_laurent_window(c) for c in parts))
        return min(los), max(his)

    def times_lambda_power(self, m):
        f = LAM ** m
        return TwistorVectorField(tuple(sympy.expand(f * c) for c in self.horizontal),
                                  sympy.expand(f * self.vertical), f"lam^{m} {self.label}".strip())

    def __add__(self, other):
        return TwistorVectorField(tuple(sympy.expand(a + b) for a, b in zip(self.horizontal, other.horizontal)),
                                  sympy.expand(self.vertical + other.vertical))

    def scaled(self, c):
        return TwistorVectorField(tuple(sympy.expand(c * a) for a in self.horizontal),
                                  sympy.expand(c * self.vertical), self.label)

    def complex_horizontal(self):
        """Components along d_y, d_ybar, d_z, d_zbar."""
        N = self.horizontal
        return tuple(sympy.expand(sum(sympy.diff(_W[c], X[mu]) * N[mu] for mu in range(4))) for c in range(4))

    def apply(self, F):
        """eta(F) for a Laurent-in-lambda jet F (matrix or scalar modes)."""
        space = F.space
        out = None
        for mu, comp in enumerate(self.horizontal):
            if comp == 0:
                continue
            term = laurent_from_expr(comp, space) * F.derive(f"x{mu + 1}")
            out = term if out is None else out + term
        if self.vertical != 0:
            term = laurent_from_expr(self.vertical, space) * F.lambda_derivative()
            out = term if out is None else out + term
        if out is None:
            return LaurentPoly(F.data * 0, F.lo)
        return out


def _frame_complex():
    # components along (y, ybar, z, zbar, lam)
    zero = sympy.Integer(0)
    return ((zero, sympy.Integer(1), -LAM, zero, zero), (LAM, zero, zero, sympy.Integer(1), zero))


def _bracket_residuals(Nc, Nlam):
    """Components (y, z, lam) of [N~, Vbar_a] minus its (0,1) part, a = 1, 2."""
    coords = tuple(YC) + (LAM,)
    fields = tuple(Nc) + (Nlam,)
    out = []
    for V in _frame_complex():
        B = []
        for i in range(5):
            term = Nlam * sympy.diff(V[i], LAM)
            term -= sum(V[j] * sympy.diff(fields[i], coords[j]) for j in range(5))
            B.append(sympy.expand(term))
        a, b = B[1], B[3]
        out += [sympy.expand(B[0] - LAM * b), sympy.expand(B[2] + LAM * a), B[4]]
    return out


def _in_complex_coords(expr):
    return sympy.expand(sympy.sympify(expr).subs(dict(zip(X, _X_OF_W)), simultaneous=True))


def lift_conformal(N, label=None):
    """Lift a conformal vector field N to N~ = N^mu d_mu + N^lam d_lam whose
    bracket with Vbar_1, Vbar_2 stays in their span.

    N^lam is sought as a polynomial of degree <= 2 in lam with coefficients
    affine in x; the linear system is solved exactly."""
    comps = tuple(sympy.sympify(c) for c in _components(N))
    if label is None:
        label = str(N) if isinstance(N, ConformalGenerator) else "N"
    unknowns = sympy.symbols("c0:15")
    basis = (sympy.Integer(1),) + tuple(YC)
    Nlam = sum(unknowns[5 * j + k] * LAM ** j * basis[k] for j in range(3) for k in range(5))
    Nc = tuple(_in_complex_coords(sum(sympy.diff(_W[c], X[mu]) * comps[mu] for mu in range(4)))
               for c in range(4))
    eqs = []
    for r in _bracket_residuals(Nc, Nlam):
        if r != 0:
            eqs += list(sympy.Poly(r, *YC, LAM).coeffs())
    sol = sympy.linsolve(eqs, unknowns)
    if sol == sympy.EmptySet:
        raise LiftError(f"{label}: no holomorphic lift of the assumed form")
    (values,) = tuple(sol)
    if any(v.free_symbols & set(unknowns) for v in values):
        raise LiftError(f"{label}: lift is not unique")
    Nlam_w = sympy.expand(Nlam.subs(dict(zip(unknowns, values))))
    vertical = sympy.expand(Nlam_w.subs(dict(zip(YC, _W)), simultaneous=True))
    return TwistorVectorField(tuple(sympy.expand(c) for c in comps), vertical, label)


def bracket_residual(field):
    """Largest coefficient of the part of [N~, Vbar_a] outside span{Vbar_1, Vbar_2}."""
    Nc = tuple(_in_complex_coords(c) for c in field.complex_horizontal())
    Nlam = _in_complex_coords(field.vertical)
    worst = 0.0
    for r in _bracket_residuals(Nc, Nlam):
        if r != 0:
            num = sympy.expand(r * LAM ** 8)
            worst = max(worst, max(abs(complex(c)) for c in sympy.Poly(num, *YC, LAM).coeffs()))
    return worst


def lift_is_x_dependent(field):
    return bool(set(X) & sympy.sympify(field.vertical).free_symbols)
