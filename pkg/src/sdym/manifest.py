"""Manifest symmetries: infinitesimal gauge transformations and the
15 conformal Killing fields of R^4 acting on potentials.

Vector fields are tuples of four sympy polynomials in ``X = (x1, x2, x3, x4)``
with rational coefficients, so brackets and closure are exact.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import sympy

from . import lie
from .gauge import GaugePotential, Variation, covariant_derive
from .jets import Jet

X = sympy.symbols("x1:5", real=True)

NAMES = ("X", "Y", "P", "K", "B")


@dataclass(frozen=True)
class ConformalGenerator:
    name: str
    index: int | None
    components: tuple  # N^nu, sympy expressions in X

    def __str__(self):
        return self.name if self.index is None else f"{self.name}{self.index}"

    def degree(self):
        return max((sympy.Poly(c, *X).total_degree() for c in self.components if c != 0), default=0)


def _rotation(table, a):
    # N = delta_ab tensor^b_{mu nu} x_mu d_nu
    return tuple(sum(int(table[a, mu, nu]) * X[mu] for mu in range(4)) for nu in range(4))


def conformal_generator(name, index=None):
    """X_a, Y_a (a = 1..3), P_mu, K_mu (mu = 1..4) or B."""
    if name == "B":
        if index is not None:
            raise ValueError("B takes no index")
        comps = tuple(X)
    elif name in ("X", "Y"):
        if index not in (1, 2, 3):
            raise ValueError(f"{name} needs an index in 1..3")
        comps = _rotation(lie.ETA if name == "X" else lie.ETA_BAR, index - 1)
    elif name in ("P", "K"):
        if index not in (1, 2, 3, 4):
            raise ValueError(f"{name} needs an index in 1..4")
        mu = index - 1
        if name == "P":
            comps = tuple(sympy.Integer(int(nu == mu)) for nu in range(4))
        else:
            r2 = sum(x * x for x in X)
            comps = tuple(sympy.Rational(1, 2) * r2 * int(nu == mu) - X[mu] * X[nu] for nu in range(4))
    else:
        raise ValueError(f"unknown generator {name!r}")
    return ConformalGenerator(name, index, tuple(sympy.expand(c) for c in comps))


def all_generators():
    gens = [conformal_generator("X", a) for a in (1, 2, 3)]
    gens += [conformal_generator("Y", a) for a in (1, 2, 3)]
    gens += [conformal_generator("P", m) for m in (1, 2, 3, 4)]
    gens += [conformal_generator("K", m) for m in (1, 2, 3, 4)]
    gens.append(conformal_generator("B"))
    return gens


def _components(N):
    return N.components if isinstance(N, ConformalGenerator) else tuple(N)


def vf_bracket(N, M):
    """[N, M]^nu = N^s d_s M^nu - M^s d_s N^nu, exactly."""
    n, m = _components(N), _components(M)
    return tuple(
        sympy.expand(sum(n[s] * sympy.diff(m[nu], X[s]) - m[s] * sympy.diff(n[nu], X[s]) for s in range(4)))
        for nu in range(4)
    )


def vf_combination(coeffs, fields):
    return tuple(sympy.expand(sum(c * _components(f)[nu] for c, f in zip(coeffs, fields))) for nu in range(4))


def _coefficient_vector(field, monos):
    vec = []
    for comp in _components(field):
        P = sympy.Poly(comp, *X)
        d = dict(P.terms())
        vec.extend(d.get(m, 0) for m in monos)
    return vec


def _monomial_basis(max_degree):
    monos = []
    for a in range(max_degree + 1):
        for b in range(max_degree + 1 - a):
            for c in range(max_degree + 1 - a - b):
                for d in range(max_degree + 1 - a - b - c):
                    monos.append((a, b, c, d))
    return monos


def span_rank(fields, max_degree=3):
    """Exact rank of the real span of polynomial vector fields."""
    monos = _monomial_basis(max_degree)
    return sympy.Matrix([_coefficient_vector(f, monos) for f in fields]).rank()


def closure_defects(generators=None):
    """Brackets of generator pairs that leave the generators' span (exact)."""
    gens = list(generators or all_generators())
    base = span_rank(gens)
    bad = []
    for i, N in enumerate(gens):
        for M in gens[i + 1:]:
            br = vf_bracket(N, M)
            if any(c != 0 for c in br) and span_rank(gens + [br]) != base:
                bad.append((str(N), str(M)))
    return bad


# -- actions on potentials ----------------------------------------------------------

def _polynomial_jets(N, space):
    return [Jet.from_polynomial(space, c, X) for c in _components(N)]


def gauge_variation(A, theta):
    """delta A_mu = d_mu theta + [A_mu, theta].

    ``theta`` is a matrix jet on the potential's jet space, or (analytic
    backend) a callable x -> (theta (P, n, n), dtheta (P, 4, n, n))."""
    if A.jets is not None:
        if not isinstance(theta, Jet):
            raise TypeError("jet potentials need a jet gauge parameter")
        return Variation(A.n, jets=tuple(covariant_derive(A, theta, mu + 1) for mu in range(4)),
                         label="gauge")

    def field_fn(x):
        a = A(x)[0]
        t, dt = theta(x)
        return dt + lie.commutator(a, t[:, None])

    return Variation(A.n, field=field_fn, label="gauge")


def conformal_variation(A, N):
    """delta_N A_mu = N^nu d_nu A_mu + A_nu d_mu N^nu (Lie derivative of the 1-form)."""
    comps = _components(N)
    label = str(N) if isinstance(N, ConformalGenerator) else "vector field"
    if A.jets is not None:
        J = A.jets
        space = J[0].space
        Nj = _polynomial_jets(comps, space)
        dN = [[Nj[nu].derive(f"x{mu + 1}") for nu in range(4)] for mu in range(4)]
        out = []
        for mu in range(4):
            acc = None
            for nu in range(4):
                term = Nj[nu] * J[mu].derive(f"x{nu + 1}") + dN[mu][nu] * J[nu]
                acc = term if acc is None else acc + term
            out.append(acc)
        return Variation(A.n, jets=tuple(out), label=label)

    f = sympy.lambdify(X, list(comps), "numpy")
    grad = [[sympy.lambdify(X, sympy.diff(comps[nu], X[mu]), "numpy") for nu in range(4)] for mu in range(4)]

    def field_fn(x):
        a, da = A(x)
        cols = [x[:, k] for k in range(4)]
        Nv = np.stack([np.broadcast_to(v, x.shape[:1]) for v in f(*cols)], axis=1)
        dNv = np.array([[np.broadcast_to(grad[mu][nu](*cols), x.shape[:1]) for nu in range(4)]
                        for mu in range(4)])  # [mu, nu, p]
        out = np.einsum("pn,pnmij->pmij", Nv, da)
        out = out + np.einsum("mnp,pnij->pmij", dNv, a)
        return out

    return Variation(A.n, field=field_fn, label=label)


def composed_conformal_variation(A, N, M):
    """(delta_N o delta_M) A: apply the variation formula for N to delta_M A."""
    inner = conformal_variation(A, M)
    return conformal_variation(GaugePotential(A.n, jets=inner.jets), N)


def random_gauge_parameter(space, n, rng, degree=3):
    """Random su(n)-valued polynomial of the given degree, as a jet."""
    out = Jet.zeros(space, (n, n))
    coords = [Jet.coordinate(space, f"x{mu + 1}") for mu in range(4)]
    for mono in _monomial_basis(degree):
        term = Jet.constant(space, lie.random_su(n, rng))
        for mu, e in enumerate(mono):
            for _ in range(e):
                term = term * coords[mu]
        out = out + term
    return out
