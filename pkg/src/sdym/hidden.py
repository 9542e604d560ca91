"""Hidden symmetries through the linear system.

Pipeline on a jet-backed self-dual potential A:

1. :func:`lax_recursion` solves (D_ybar - lam D_z) psi = 0 = (D_zbar + lam D_y) psi
   order by order in lam (psi_plus) and in 1/lam (psi_minus).
2. :func:`transition_matrix` forms F = psi_minus^-1 psi_plus.
3. A generator acts on F (:func:`gauge_type_delta_F`, or a twistor vector
   field), the result is dressed by psi_minus (.) psi_plus^-1, split on the
   circle and turned into delta A by exact mode extraction.

Truncation bookkeeping.  With A valid to jet order N, the psi coefficients
are valid to N + 1.  Level k of psi_plus lies in the ideal (ybar, zbar)^k and
level k of psi_minus in (y, z)^k, so cutting the lam-series at K is exact up
to jet order Q = min(N + 1, K).  :class:`OrderBudget` carries these numbers
and refuses requests beyond them.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from . import frames, lie
from .gauge import GaugePotential, Variation, complex_components, real_components
from .jets import Jet, OrderError, graded_product, n_monomials
from .riemann_hilbert import CONSTANT_SHARE, LaurentPoly, split
from .twistor import TwistorVectorField, twistor_coord_jets

DEFAULT_LAMBDA_ORDER = 7
COMPAT_TOL = 1e-9


class CompatibilityError(ValueError):
    """The linear system is not integrable at some degree (A not self-dual)."""


class TruncationError(ValueError):
    """A lam-expansion that must terminate did not."""


@dataclass(frozen=True)
class OrderBudget:
    jet_order: int
    lambda_order: int

    def __post_init__(self):
        if self.jet_order < 1 or self.lambda_order < 1:
            raise OrderError("jet and lambda orders must be positive")

    @property
    def psi_order(self):
        return self.jet_order + 1

    @property
    def exact_order(self):
        """Jet order to which truncated psi, F and dressed cochains are exact."""
        return min(self.jet_order + 1, self.lambda_order)

    @property
    def system_order(self):
        """Order to which the truncated linear-system residual is meaningful."""
        return min(self.jet_order, self.lambda_order - 1)

    def require(self, order, what):
        if order < 0:
            raise OrderError(f"{what} needs more jet order than the budget {self} provides")
        return order


# -- Lax recursion -------------------------------------------------------------------

def _fund(Ac, f, c):
    """Fundamental covariant derivative along complex direction index c."""
    return f.derive(c) + Ac[c] * f


def _adj(Ac, f, c):
    return f.derive(c) + (Ac[c] * f - f * Ac[c])


def _solve_level(a1, a2, v1, v2, f, g, init, tol):
    """Solve d_v1 xi + a1 xi = f, d_v2 xi + a2 xi = g degree by degree, with
    zero freedom apart from the constant term ``init``."""
    space = a1.space
    N = space.order
    n = a1.shape[-1]
    M = space.size
    out_space = space.with_order(N + 1)
    xi = np.zeros((out_space.size, n, n), dtype=complex)
    if init is not None:
        xi[0] = init
    fc = np.zeros((M, n, n), complex) if f is None else f.truncate(N).coeffs
    gc = np.zeros((M, n, n), complex) if g is None else g.truncate(N).coeffs
    for d in range(N + 1):
        lo, hi = n_monomials(d - 1), n_monomials(d)
        R1 = np.zeros((M, n, n), complex)
        R2 = np.zeros((M, n, n), complex)
        R1[lo:hi] = fc[lo:hi] - graded_product(a1.coeffs, xi[:M], N, degree=d)
        R2[lo:hi] = gc[lo:hi] - graded_product(a2.coeffs, xi[:M], N, degree=d)
        P = Jet(space, R1).antiderive(v1)
        G = Jet(space, R2 - P.derive(v2).coeffs)
        viol = (G - G.without(v1)).norm()
        scale = 1.0 + max(Jet(space, R1).norm(), Jet(space, R2).norm())
        if viol > tol * scale:
            raise CompatibilityError(f"linear system not integrable at degree {d} (defect {viol:.3g})")
        Q = G.without(v1).antiderive(v2)
        lo1, hi1 = n_monomials(d), n_monomials(d + 1)
        xi[lo1:hi1] += P.coeffs[lo1:hi1] + Q.coeffs[lo1:hi1]
    return Jet(out_space, xi)


@dataclass(frozen=True)
class LaxSolution:
    """psi_plus = sum_k lam^k xi[k], psi_minus = sum_k lam^-k chi[k]."""

    xi: tuple
    chi: tuple
    base_point: tuple
    budget: OrderBudget
    valid_orders: tuple = ()

    @property
    def K(self):
        return self.budget.lambda_order

    @property
    def space(self):
        return self.xi[0].space

    def psi_plus(self):
        return LaurentPoly.from_modes({k: x for k, x in enumerate(self.xi)})

    def psi_minus(self):
        return LaurentPoly.from_modes({-k: c for k, c in enumerate(self.chi)})

    def rotated(self, g):
        """psi -> g^-1 psi for a constant matrix g (a gauge rotation)."""
        gi = np.linalg.inv(g)
        return LaxSolution(tuple(x.lmatmul_const(gi) for x in self.xi),
                           tuple(c.lmatmul_const(gi) for c in self.chi),
                           self.base_point, self.budget, self.valid_orders)

    def perturbed(self, side, level, index, delta):
        """Copy with one coefficient of xi[level] (side '+') or chi[level] changed."""
        seq = list(self.xi if side == "+" else self.chi)
        c = seq[level].coeffs.copy()
        c[index] = c[index] + delta
        seq[level] = Jet(seq[level].space, c)
        if side == "+":
            return LaxSolution(tuple(seq), self.chi, self.base_point, self.budget, self.valid_orders)
        return LaxSolution(self.xi, tuple(seq), self.base_point, self.budget, self.valid_orders)


def _complex_jets(A):
    if A.jets is None:
        raise TypeError("the linear system is solved on jet-backed potentials")
    if A.jets[0].space.frame != frames.COMPLEX:
        A = GaugePotential(A.n, jets=tuple(j.to_frame(frames.COMPLEX) for j in A.jets),
                           family=A.family, params=A.params, su=A.su)
    return A, complex_components(A)


def lax_recursion(A, K=DEFAULT_LAMBDA_ORDER, tol=COMPAT_TOL):
    """Coefficient towers of psi_plus and psi_minus, normalized to the
    identity at the base point."""
    A, Ac = _complex_jets(A)
    N = A.jets[0].order
    budget = OrderBudget(N, K)
    eye = np.eye(A.n)
    Y, YB, Z, ZB = range(4)
    xi = [_solve_level(Ac[YB], Ac[ZB], YB, ZB, None, None, eye, tol)]
    for _ in range(K):
        prev = xi[-1]
        xi.append(_solve_level(Ac[YB], Ac[ZB], YB, ZB, _fund(Ac, prev, Z), -_fund(Ac, prev, Y), None, tol))
    chi = [_solve_level(Ac[Z], Ac[Y], Z, Y, None, None, eye, tol)]
    for _ in range(K):
        prev = chi[-1]
        chi.append(_solve_level(Ac[Z], Ac[Y], Z, Y, _fund(Ac, prev, YB), -_fund(Ac, prev, ZB), None, tol))
    return LaxSolution(tuple(xi), tuple(chi), A.jets[0].space.base_point, budget,
                       tuple(x.order for x in xi))


def _const(j):
    return LaurentPoly.constant(j)


def _system_operators(Ac, F, action):
    """(D_ybar - lam D_z) F and (D_zbar + lam D_y) F on Laurent-in-lambda jets."""
    Y, YB, Z, ZB = range(4)

    def D(c):
        if action == "fundamental":
            return F.derive(c) + _const(Ac[c]) * F
        Ai = _const(Ac[c])
        return F.derive(c) + (Ai * F - F * Ai)

    return D(YB) - D(Z).shift(1), D(ZB) + D(Y).shift(1)


def verify_linear_system(A, psi, lambdas=None, order=None):
    """Residual of both equations of the linear system for psi_plus and
    psi_minus, at the lambda samples (or over all modes), up to the order
    where truncation in lambda is invisible."""
    A, Ac = _complex_jets(A)
    q = psi.budget.system_order if order is None else order
    res = 0.0
    for P in (psi.psi_plus(), psi.psi_minus()):
        for L in _system_operators(Ac, P, "fundamental"):
            if lambdas is None:
                res = max(res, L.norm(q))
            else:
                res = max(res, max(L.eval(l).norm(q) for l in lambdas))
    return res


def _read_potential(P, side, K, order, tol):
    """Complex components from -(d_ybar - lam d_z) psi psi^-1 etc., to ``order``."""
    inv = P.series_inverse(K)
    L1 = ((P.derive("ybar") - P.derive("z").shift(1)) * inv).truncate(order)
    L2 = ((P.derive("zbar") + P.derive("y").shift(1)) * inv).truncate(order)
    if side == "+":
        stray = range(2, K + 1)
    else:
        stray = range(-K, 0)
    worst = max([L1.mode(k).norm() for k in stray] + [L2.mode(k).norm() for k in stray] + [0.0])
    if worst > tol:
        raise TruncationError(f"lambda expansion of psi_{side} does not terminate (defect {worst:.3g})")
    return (-L2.mode(1), -L1.mode(0), L1.mode(1), -L2.mode(0)), worst


def potentials_from_psi(psi, tol=1e-8, return_defect=False):
    """Recover the potential (real-frame jets) from psi_plus, cross-checked
    against psi_minus.  The result is valid to one order below the budget's
    exact order (the lam-truncation is invisible there)."""
    K = psi.K
    order = psi.budget.require(psi.budget.exact_order - 1, "potential read-off")
    comps_p, d1 = _read_potential(psi.psi_plus(), "+", K, order, tol)
    comps_m, d2 = _read_potential(psi.psi_minus(), "-", K, order, tol)
    mismatch = max((a - b).norm() for a, b in zip(comps_p, comps_m))
    if mismatch > tol:
        raise TruncationError(f"psi_plus and psi_minus give different potentials ({mismatch:.3g})")
    n = comps_p[0].shape[-1]
    A = GaugePotential(n, jets=tuple(real_components(comps_p)), family="from_psi")
    if return_defect:
        return A, max(d1, d2, mismatch)
    return A


def transition_matrix(psi):
    """F = psi_minus^-1 psi_plus on the window [-K, K], exact to the budget's order."""
    K = psi.K
    Q = psi.budget.exact_order
    F = psi.psi_minus().series_inverse(K) * psi.psi_plus()
    return F.with_window(-K, K).truncate(Q)


def reality_defect(F):
    """|F^a - F|, where F^a(lam) = F(-1/conj(lam))^dagger (pointwise on real x)."""
    return (F.antipodal() - F).norm()


# -- generators -------------------------------------------------------------------

class GaugeTypeGenerator:
    """phi = sum lam^n w1^a w2^b c_(n, a, b), c traceless."""

    def __init__(self, terms, atol=lie.ATOL):
        clean = {}
        for key, c in dict(terms).items():
            c = np.asarray(c, dtype=complex)
            if not lie.is_traceless(c, atol):
                raise ValueError(f"coefficient of {key} is not traceless")
            if np.any(c != 0):
                k = tuple(int(v) for v in key)
                clean[k] = clean.get(k, 0) + c
        self.terms = clean
        self.n = next(iter(clean.values())).shape[-1] if clean else None

    @classmethod
    def from_modes(cls, modes):
        """x-independent generator sum_n lam^n T_n."""
        return cls({(k, 0, 0): T for k, T in modes.items()})

    def __repr__(self):
        return f"GaugeTypeGenerator({sorted(self.terms)})"

    @property
    def window(self):
        if not self.terms:
            return 0, 0
        return min(k[0] for k in self.terms), max(k[0] + k[1] + k[2] for k in self.terms)

    def __add__(self, other):
        t = dict(self.terms)
        for k, c in other.terms.items():
            t[k] = t.get(k, 0) + c
        return GaugeTypeGenerator(t)

    def scaled(self, s):
        return GaugeTypeGenerator({k: s * c for k, c in self.terms.items()})

    def __mul__(self, other):
        t = {}
        for (n1, a1, b1), c1 in self.terms.items():
            for (n2, a2, b2), c2 in other.terms.items():
                k = (n1 + n2, a1 + a2, b1 + b2)
                t[k] = t.get(k, 0) + c1 @ c2
        out = GaugeTypeGenerator.__new__(GaugeTypeGenerator)
        out.terms = {k: v for k, v in t.items() if np.any(v != 0)}
        out.n = self.n or other.n
        return out

    def commutator(self, other):
        """Pointwise commutator [phi1, phi2] (traceless again)."""
        a, b = self * other, other * self
        t = dict(a.terms)
        for k, c in b.terms.items():
            t[k] = t.get(k, 0) - c
        return GaugeTypeGenerator(t, atol=1e-10)

    def antipodal(self):
        """phi(-1/conj(lam))^dagger on the w-table:
        lam^n w1^a w2^b c -> (-1)^(n+b) lam^(-n-a-b) w1^b w2^a c^dagger."""
        return GaugeTypeGenerator({(-n - a - b, b, a): (-1) ** (n + b) * lie.dagger(c)
                                   for (n, a, b), c in self.terms.items()})

    def is_antipodal_compatible(self, atol=lie.ATOL):
        """phi^a = -phi: the su(n) reality condition on the full phi."""
        diff = self.antipodal() + self
        return all(np.max(np.abs(c)) <= atol for c in diff.terms.values())

    def to_laurent(self, space):
        """Laurent-in-lambda jet at ``space`` (w1, w2 substituted)."""
        if not self.terms:
            raise ValueError("empty generator has no dimension; use zeros")
        w1, w2 = twistor_coord_jets(space)
        powers = {}

        def wpow(a, b):
            if (a, b) not in powers:
                p = LaurentPoly.constant(Jet.constant(space, 1.0))
                for _ in range(a):
                    p = p * w1
                for _ in range(b):
                    p = p * w2
                powers[(a, b)] = p
            return powers[(a, b)]

        out = None
        for (k, a, b), c in self.terms.items():
            s = wpow(a, b)
            term = LaurentPoly(Jet(s.data.space, s.data.coeffs * c), s.lo + k)
            out = term if out is None else out + term
        return out


@dataclass(frozen=True)
class DiffeoTypeGenerator:
    """A 0-cochain {eta_plus, eta_minus} of twistor vector fields."""

    plus: TwistorVectorField
    minus: TwistorVectorField | None = None

    def branch(self, side):
        if side == "+":
            return self.plus
        if side == "-":
            return self.minus if self.minus is not None else self.plus
        raise ValueError(f"branch must be '+' or '-', got {side!r}")


# -- the hidden actions -------------------------------------------------------------

def _as_laurent(phi, space):
    if isinstance(phi, GaugeTypeGenerator):
        return phi.to_laurent(space), phi.antipodal().to_laurent(space)
    return phi, phi.antipodal()


def gauge_type_delta_F(phi, F):
    """delta F = phi F + F phi^a."""
    if isinstance(phi, GaugeTypeGenerator) and not phi.terms:
        return LaurentPoly(F.data * 0, F.lo)
    p, pa = _as_laurent(phi, F.space)
    return p * F + F * pa


class HiddenVariation(NamedTuple):
    variation: Variation
    complex: tuple
    plus: LaurentPoly
    minus: LaurentPoly
    delta_psi_plus: LaurentPoly
    delta_psi_minus: LaurentPoly
    consistency: float
    sides_defect: float


def _delta_components(L1, L2):
    """(y, ybar, z, zbar) components from the lam^0, lam^1 modes."""
    return (L2.mode(1), L1.mode(0), -L1.mode(1), L2.mode(0))


def _variation_from_split(A, Ac, psi, phi_p, phi_m, label, order):
    L1p, L2p = _system_operators(Ac, phi_p, "adjoint")
    L1m, L2m = _system_operators(Ac, phi_m, "adjoint")
    cp = _delta_components(L1p, L2p)
    cm = _delta_components(L1m, L2m)
    order = min(order, cp[0].order)
    consistency = max((L1p - L1m).norm(order), (L2p - L2m).norm(order))
    sides = max((a - b).norm(order) for a, b in zip(cp, cm))
    comps = tuple(c.truncate(order) for c in cp)
    var = Variation(A.n, jets=tuple(real_components(comps)), label=label)
    dpp = -(phi_p * psi.psi_plus())
    dpm = -(phi_m * psi.psi_minus())
    return HiddenVariation(var, comps, phi_p, phi_m, dpp, dpm, consistency, sides)


def _dress(psi, cochain, Q):
    """psi_minus (cochain) psi_plus^-1, exact to order Q."""
    K = psi.K
    out = psi.psi_minus().truncate(Q) * cochain * psi.psi_plus().series_inverse(K).truncate(Q)
    return out


def gauge_type_variation(A, psi, phi, split_override=None, constant_share=CONSTANT_SHARE):
    """delta A for a gauge-type generator phi.

    Phi = psi_minus phi psi_minus^-1 + psi_plus phi^a psi_plus^-1 is split on
    the circle and delta A read off from the lam^0 and lam^1 modes of
    (D_ybar - lam D_z) phi_plus and (D_zbar + lam D_y) phi_plus.
    ``split_override = (phi_plus, phi_minus)`` injects a split by hand."""
    A, Ac = _complex_jets(A)
    budget = psi.budget
    Q = budget.exact_order
    order = budget.require(Q - 1, "delta A")
    if split_override is not None:
        phi_p, phi_m = (s if isinstance(s, LaurentPoly) else LaurentPoly.constant(s) for s in split_override)
        label = "injected split"
    else:
        space = psi.space.with_order(Q)
        K = psi.K
        Pm = psi.psi_minus().truncate(Q)
        Pp = psi.psi_plus().truncate(Q)
        if isinstance(phi, GaugeTypeGenerator) and not phi.terms:
            Phi = LaurentPoly(Pm.data * 0, 0)
        else:
            p, pa = _as_laurent(phi, space)
            Phi = (Pm * p * Pm.series_inverse(K).truncate(Q)
                   + Pp * pa * Pp.series_inverse(K).truncate(Q))
        parts = split(Phi, constant_share)
        phi_p, phi_m = parts.plus, parts.minus
        label = "gauge-type"
    return _variation_from_split(A, Ac, psi, phi_p, phi_m, label, order)


def diffeo_type_variation(A, psi, eta, branch="+", constant_share=CONSTANT_SHARE):
    """delta^(+/-) A for a 0-cochain of twistor vector fields (or one field)."""
    A, Ac = _complex_jets(A)
    field_ = eta.branch(branch) if isinstance(eta, DiffeoTypeGenerator) else eta
    budget = psi.budget
    Q = budget.exact_order
    order = budget.require(Q - 2, "delta A of a diffeo-type generator")
    F = transition_matrix(psi)
    eF = field_.apply(F)
    K = psi.K
    Pm = psi.psi_minus().truncate(Q - 1)
    theta = Pm * eF * psi.psi_plus().truncate(Q - 1).series_inverse(K)
    parts = split(theta, constant_share)
    return _variation_from_split(A, Ac, psi, parts.plus, parts.minus,
                                 f"diffeo-type {branch} {field_.label}".strip(), order)


def diffeo_pair_variation(A, psi, eta):
    """delta_eta = delta^- - delta^+ (real-frame jets)."""
    vm = diffeo_type_variation(A, psi, eta, "-").variation
    vp = diffeo_type_variation(A, psi, eta, "+").variation
    return Variation(A.n, jets=tuple(a - b for a, b in zip(vm.jets, vp.jets)), label="diffeo pair")


# -- algebra checks -----------------------------------------------------------------

def _act_gauge(phi, G, space):
    p, pa = _as_laurent(phi, space)
    return p * G + G * pa


def action_bracket_check(phi1, phi2, F):
    """|[delta_1, delta_2] F - delta_[phi1, phi2] F| with composition acting
    on F only."""
    space = F.space
    lhs = _act_gauge(phi1, _act_gauge(phi2, F, space), space) - _act_gauge(phi2, _act_gauge(phi1, F, space), space)
    if isinstance(phi1, GaugeTypeGenerator) and isinstance(phi2, GaugeTypeGenerator):
        br = phi1.commutator(phi2)
        if not br.terms:
            return lhs.norm()
        rhs = _act_gauge(br, F, space)
    else:
        p1, _ = _as_laurent(phi1, space)
        p2, _ = _as_laurent(phi2, space)
        rhs = _act_gauge(p1 * p2 - p2 * p1, F, space)
    return (lhs - rhs).norm()


def derivation_check(eta, phi, F):
    """|(delta_eta delta_phi - delta_phi delta_eta) F - delta_eta(phi) F|."""
    space = F.space
    p, pa = _as_laurent(phi, space)
    eF = eta.apply(F)
    lhs = eta.apply(p * F + F * pa) - (p * eF + eF * pa)
    ep = eta.apply(p)
    rhs = ep * F + F * ep.antipodal()
    return (lhs - rhs).norm(space.order - 1)


# -- open question: is a variation a manifest gauge transformation? --------------

def nearest_gauge_parameter(A, dA, degree=None):
    """Least-squares theta (sl(n,C)-valued polynomial in the complex offsets)
    minimizing |dA - D theta| on the common valid order.

    Returns (theta jet, residual max-norm, relative residual)."""
    A, Ac = _complex_jets(A)
    order = dA.jets[0].order
    degree = order + 1 if degree is None else degree
    space = A.jets[0].space.with_order(degree)
    basis = lie.su_n_basis(A.n)
    M = n_monomials(degree)
    target = np.concatenate([j.truncate(order).coeffs.ravel() for j in dA.jets])
    cols = []
    for m in range(M):
        for T in basis:
            c = np.zeros((M, A.n, A.n), complex)
            c[m] = T
            th = Jet(space, c)
            D = [th.derive(f"x{mu + 1}") + (A.jets[mu] * th - th * A.jets[mu]) for mu in range(4)]
            cols.append(np.concatenate([d.truncate(order).coeffs.ravel() for d in D]))
    mat = np.array(cols).T
    coef, *_ = np.linalg.lstsq(mat, target, rcond=None)
    fit = mat @ coef
    resid = float(np.max(np.abs(fit - target))) if target.size else 0.0
    rel = resid / max(float(np.max(np.abs(target))), 1e-300)
    c = np.einsum("mt,tij->mij", coef.reshape(M, len(basis)), basis)
    return Jet(space, c), resid, rel
