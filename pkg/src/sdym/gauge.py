"""Gauge potentials on R^4, curvature, the self-duality residual and its
linearization, complex components, and the 't Hooft instanton families.

A :class:`GaugePotential` has one of two backends:

* ``analytic``: a callable ``x -> (A, dA)`` on points of shape (P, 4) with
  ``A[p, mu]`` and ``dA[p, nu, mu] = d_nu A_mu``, each an n x n matrix;
* ``jet``: four :class:`~sdym.jets.Jet` objects holding A_1..A_4.

Analytic families also know how to expand themselves into jets at any base
point, so both backends are available for them.
"""
from __future__ import annotations

import json
import dataclasses
from dataclasses import dataclass
from typing import Callable, NamedTuple

import numpy as np
from scipy.stats import qmc

from . import frames, lie
from .jets import Jet, JetSpace, OrderError

# Orientation conventions of the 't Hooft-ansatz families, in the form
#   A_mu = SIGN * tensor^a_{mu nu} T_a d_nu log(profile),  T_a = -i sigma_a / 2.
# Pinned by scanning all four (sign, tensor) choices against the self-duality
# residual; tests/test_gauge.py re-runs the scan.
BPST_CONVENTION = (1, lie.SELF_DUAL)       # regular gauge, profile |x-a|^2 + rho^2
THOOFT_CONVENTION = (-1, lie.ANTI_SELF_DUAL)  # singular gauge, profile 1 + sum w/|x-a|^2


class ComplexComponents(NamedTuple):
    y: object
    ybar: object
    z: object
    zbar: object


@dataclass(frozen=True)
class GaugePotential:
    n: int
    field: Callable | None = None
    jets: tuple | None = None
    family: str = "custom"
    params: dict = dataclasses.field(default_factory=dict)
    jet_builder: Callable | None = None
    su: bool = True

    @property
    def backend(self):
        return "jet" if self.jets is not None else "analytic"

    def __call__(self, x):
        """Values and first derivatives at points (P, 4) (analytic backend)."""
        if self.field is None:
            raise TypeError("potential has no analytic backend")
        return self.field(np.atleast_2d(np.asarray(x, dtype=float)))

    def to_jets(self, base_point, order, frame=frames.COMPLEX):
        """Jet backend at ``base_point`` valid to ``order``."""
        if self.jet_builder is None:
            raise TypeError(f"family {self.family!r} cannot build jets")
        space = JetSpace(order, base_point, frame)
        return GaugePotential(self.n, jets=tuple(self.jet_builder(space)), family=self.family,
                              params=dict(self.params, base_point=list(space.base_point)),
                              su=self.su)

    @property
    def space(self):
        return self.jets[0].space


@dataclass(frozen=True)
class Variation:
    """Four Lie-algebra valued components delta A_mu (real frame).

    ``field`` maps points (P, 4) to (P, 4, n, n); its derivatives are taken by
    central finite differences."""

    n: int
    field: Callable | None = None
    jets: tuple | None = None
    label: str = ""

    @property
    def backend(self):
        return "jet" if self.jets is not None else "analytic"

    def __call__(self, x):
        if self.jets is not None:
            x = np.atleast_2d(x)
            return np.stack([j.eval(x) for j in self.jets], axis=1)
        return self.field(np.atleast_2d(np.asarray(x, dtype=float)))

    def scaled(self, c):
        if self.jets is not None:
            return Variation(self.n, jets=tuple(j * c for j in self.jets), label=self.label)
        return Variation(self.n, field=lambda x: c * self.field(x), label=self.label)

    def complex_components(self):
        return _complex_from_real(self.jets)


def _complex_from_real(parts):
    out = []
    for c in range(4):
        acc = None
        for mu in range(4):
            w = frames.TO_COMPLEX[c, mu]
            if w != 0:
                term = parts[mu] * w
                acc = term if acc is None else acc + term
        out.append(acc)
    return ComplexComponents(*out)


def _real_from_complex(parts):
    out = []
    for mu in range(4):
        acc = None
        for c in range(4):
            w = frames.TO_REAL[mu, c]
            if w != 0:
                term = parts[c] * w
                acc = term if acc is None else acc + term
        out.append(acc)
    return tuple(out)


def complex_components(A):
    """(A_y, A_ybar, A_z, A_zbar) with A_mu dx^mu = A_y dy + A_ybar dybar + A_z dz + A_zbar dzbar.

    Accepts a jet-backed potential (returns jets) or an array whose leading
    axis holds the four real components."""
    if isinstance(A, GaugePotential):
        if A.jets is None:
            raise TypeError("complex_components needs the jet backend; pass arrays for point values")
        return _complex_from_real(A.jets)
    return ComplexComponents(*frames.to_complex_components(A))


def real_components(Ac):
    """Inverse of :func:`complex_components`."""
    if isinstance(Ac[0], Jet):
        return _real_from_complex(Ac)
    return tuple(frames.to_real_components(np.asarray(Ac)))


# -- directions and covariant derivatives ------------------------------------

def _direction(direction):
    """Normalize a direction to a variable name understood by Jet.derive."""
    if isinstance(direction, (int, np.integer)):
        if not 1 <= direction <= 4:
            raise IndexError("real directions are 1..4")
        return f"x{direction}"
    if direction in frames.COMPLEX_NAMES or direction in ("x1", "x2", "x3", "x4"):
        return direction
    raise ValueError(f"unknown direction {direction!r}")


def component(A, direction):
    """The potential's component along a real or complex direction (jets)."""
    name = _direction(direction)
    if name.startswith("x"):
        return A.jets[int(name[1]) - 1]
    return complex_components(A)[frames.COMPLEX_NAMES.index(name)]


def covariant_derive(A, f, direction, action="adjoint"):
    """D f = d f + [A, f] (adjoint) or d f + A f (fundamental), on jets."""
    name = _direction(direction)
    df = f.derive(name)
    if A is None:
        return df
    a = component(A, name)
    if not a.space.compatible(f.space):
        from .jets import FrameMismatchError
        raise FrameMismatchError("potential and field live on different jet spaces")
    if action == "adjoint":
        return df + (a * f - f * a)
    if action == "fundamental":
        return df + a * f
    raise ValueError(f"unknown action {action!r}")


# -- curvature and residuals ------------------------------------------------------

def _stack_tensor(entries, space):
    """4x4 nested list of jets (None = zero) -> one jet with batch shape (4, 4)."""
    order = min(e.order for row in entries for e in row if e is not None)
    sub = space.with_order(order)
    shape = next(e for row in entries for e in row if e is not None).shape
    c = np.zeros((sub.size, 4, 4) + shape, dtype=complex)
    for mu in range(4):
        for nu in range(4):
            if entries[mu][nu] is not None:
                c[:, mu, nu] = entries[mu][nu].truncate(order).coeffs
    return Jet(sub, c)


def curvature(A, x=None):
    """F_{mu nu} = d_mu A_nu - d_nu A_mu + [A_mu, A_nu].

    Jet backend: a jet with batch shape (4, 4), valid to one order less than A.
    Analytic backend: an array (P, 4, 4, n, n) at the points ``x``."""
    if A.jets is not None:
        if A.jets[0].order < 1:
            raise OrderError("curvature needs jets of order >= 1")
        J = A.jets
        d = [[J[nu].derive(f"x{mu + 1}") for nu in range(4)] for mu in range(4)]
        ent = [[None] * 4 for _ in range(4)]
        for mu in range(4):
            for nu in range(4):
                if mu != nu:
                    ent[mu][nu] = d[mu][nu] - d[nu][mu] + (J[mu] * J[nu] - J[nu] * J[mu])
        return _stack_tensor(_fill_zero(ent, J[0]), J[0].space)
    Ax, dA = A(x)
    F = dA - np.swapaxes(dA, 1, 2)
    F = F + lie.commutator(Ax[:, :, None], Ax[:, None, :])
    return F


def _fill_zero(ent, like):
    z = Jet.zeros(like.space.with_order(like.order - 1), like.shape)
    return [[e if e is not None else z for e in row] for row in ent]


def _asd_norm(F, duality, order=None):
    """Norm of the part of F violating F = duality * (*F)."""
    if isinstance(F, Jet):
        c = np.moveaxis(F.coeffs, (1, 2), (0, 1))
        plus, minus = lie.sd_asd_project(c)
        bad = minus if duality > 0 else plus
        bad = np.moveaxis(bad, (0, 1), (1, 2))
        return Jet(F.space, bad).norm(order)
    c = np.moveaxis(F, (1, 2), (0, 1))
    plus, minus = lie.sd_asd_project(c)
    bad = minus if duality > 0 else plus
    if bad.size == 0:
        return 0.0
    return float(np.max(np.sqrt(np.sum(np.abs(bad) ** 2, axis=(-2, -1)))))


def sdym_residual(A, probes=None, duality=1):
    """Max norm of the anti-self-dual part of the curvature (``duality=-1``
    checks anti-self-duality instead).  Jets: max over coefficients."""
    if A.jets is not None:
        return _asd_norm(curvature(A), duality)
    if probes is None:
        raise ValueError("analytic potentials need probe points")
    return _asd_norm(curvature(A, probes), duality)


def linearized_curvature(A, dA):
    """delta F_{mu nu} = D_mu dA_nu - D_nu dA_mu (adjoint), on jets."""
    J = A.jets
    V = dA.jets
    ent = [[None] * 4 for _ in range(4)]
    for mu in range(4):
        for nu in range(4):
            if mu != nu:
                ent[mu][nu] = (covariant_derive(A, V[nu], mu + 1)
                               - covariant_derive(A, V[mu], nu + 1))
    return _stack_tensor(_fill_zero(ent, V[0]), J[0].space)


def linearized_sdym_residual(A, dA, probes=None, duality=1, step=1e-5):
    """Anti-self-dual part of the linearized curvature.  Zero iff dA is an
    infinitesimal symmetry direction at the self-dual potential A.

    Jets are exact to their valid order; the analytic path differentiates dA
    by central differences (accuracy ~ step**2)."""
    if A.jets is not None and dA.jets is not None:
        return _asd_norm(linearized_curvature(A, dA), duality)
    if probes is None:
        raise ValueError("analytic checks need probe points")
    x = np.atleast_2d(np.asarray(probes, dtype=float))
    Ax = A(x)[0] if A.jets is None else np.stack([j.eval(x) for j in A.jets], axis=1)
    V = dA(x)
    dV = np.empty((x.shape[0], 4) + V.shape[1:], dtype=complex)  # [p, nu, mu]
    for nu in range(4):
        e = np.zeros(4)
        e[nu] = step
        dV[:, nu] = (dA(x + e) - dA(x - e)) / (2 * step)
    dF = dV - np.swapaxes(dV, 1, 2)
    dF = dF + lie.commutator(Ax[:, :, None], V[:, None, :]) - lie.commutator(Ax[:, None, :], V[:, :, None])
    return _asd_norm(dF, duality)


# -- instanton families -----------------------------------------------------------

def _ansatz_matrices(sign, kind, n):
    if n != 2:
        raise ValueError("the 't Hooft ansatz is built for su(2)")
    table = lie.ETA if kind == lie.SELF_DUAL else lie.ETA_BAR
    # M[mu, nu] = sign * tensor^a_{mu nu} T_a
    return sign * np.einsum("amn,aij->mnij", table, lie.su2_basis())


def _profile_regular(center, scale):
    a = np.asarray(center, dtype=float)

    def profile(x):
        d = x - a
        r2 = np.sum(d * d, axis=-1)
        phi = r2 + scale ** 2
        g = 2 * d
        h = np.broadcast_to(2 * np.eye(4), d.shape[:-1] + (4, 4))
        return phi, g, h

    def jet_profile(space):
        acc = Jet.constant(space, scale ** 2)
        for mu in range(4):
            t = Jet.coordinate(space, f"x{mu + 1}") - a[mu]
            acc = acc + t * t
        return acc

    return profile, jet_profile


def _profile_harmonic(poles):
    centers = np.array([p[0] for p in poles], dtype=float).reshape(-1, 4)
    weights = np.array([p[1] for p in poles], dtype=float)

    def profile(x):
        d = x[:, None, :] - centers[None]  # (P, k, 4)
        r2 = np.sum(d * d, axis=-1)
        phi = 1 + np.sum(weights / r2, axis=1)
        g = np.sum(-2 * weights[:, None] * d / r2[..., None] ** 2, axis=1)
        eye = np.eye(4)
        h = np.sum(weights[:, None, None] * (-2 * eye / r2[..., None, None] ** 2
                                              + 8 * d[..., :, None] * d[..., None, :] / r2[..., None, None] ** 3),
                   axis=1)
        return phi, g, h

    def jet_profile(space):
        acc = Jet.constant(space, 1.0)
        for c, w in zip(centers, weights):
            r2 = Jet.zeros(space)
            for mu in range(4):
                t = Jet.coordinate(space, f"x{mu + 1}") - c[mu]
                r2 = r2 + t * t
            acc = acc + r2.inverse() * w
        return acc

    return profile, jet_profile


def _log_gradient_potential(profile, jet_profile, M, n, family, params):
    def field_fn(x):
        phi, g, h = profile(x)
        lg = g / phi[:, None]  # d_nu log phi
        dlg = h / phi[:, None, None] - g[:, :, None] * g[:, None, :] / phi[:, None, None] ** 2
        A = np.einsum("mnij,pn->pmij", M, lg)
        dA = np.einsum("mnij,prn->prmij", M, dlg)  # [p, rho, mu] = d_rho A_mu
        return A, dA

    def jet_builder(space):
        phi = jet_profile(space.with_order(space.order + 1))
        inv = phi.truncate(space.order).inverse()
        lg = [phi.derive(f"x{nu + 1}") * inv for nu in range(4)]
        comps = []
        for mu in range(4):
            c = np.zeros((space.size, n, n), dtype=complex)
            for nu in range(4):
                c += lg[nu].coeffs * M[mu, nu]
            comps.append(Jet(space, c))
        return comps

    return GaugePotential(n, field=field_fn, family=family, params=params, jet_builder=jet_builder)


def _check_point(p, name):
    p = np.asarray(p, dtype=float)
    if p.shape != (4,):
        raise ValueError(f"{name} must have four coordinates")
    return p


def bpst_instanton(center=(0.0, 0.0, 0.0, 0.0), scale=1.0, n=2, anti=False, convention=None):
    """Regular-gauge BPST (anti-)instanton of size ``scale``.

    ``convention`` overrides the pinned (sign, tensor) pair; used only by the
    convention scan."""
    center = _check_point(center, "center")
    if not scale > 0:
        raise ValueError("scale must be positive")
    sign, kind = convention or BPST_CONVENTION
    if anti and convention is None:
        kind = lie.ANTI_SELF_DUAL if kind == lie.SELF_DUAL else lie.SELF_DUAL
    profile, jet_profile = _profile_regular(center, float(scale))
    params = {"center": center.tolist(), "scale": float(scale), "poles": []}
    return _log_gradient_potential(profile, jet_profile, _ansatz_matrices(sign, kind, n), n,
                                   "anti_bpst" if anti else "bpst", params)


def thooft_ansatz(poles, n=2, anti=False, convention=None):
    """Singular-gauge 't Hooft multi-instanton with profile
    1 + sum_i w_i / |x - a_i|^2; ``poles`` is a list of (center, weight)."""
    poles = [(_check_point(c, "pole center"), float(w)) for c, w in poles]
    if not poles:
        raise ValueError("need at least one pole")
    if any(w <= 0 for _, w in poles):
        raise ValueError("pole weights must be positive")
    cs = [c for c, _ in poles]
    for i in range(len(cs)):
        for j in range(i):
            if np.allclose(cs[i], cs[j]):
                raise ValueError("pole centers must be distinct")
    sign, kind = convention or THOOFT_CONVENTION
    if anti and convention is None:
        kind = lie.ANTI_SELF_DUAL if kind == lie.SELF_DUAL else lie.SELF_DUAL
    profile, jet_profile = _profile_harmonic(poles)
    params = {"center": None, "scale": None,
              "poles": [{"center": c.tolist(), "weight": w} for c, w in poles]}
    return _log_gradient_potential(profile, jet_profile, _ansatz_matrices(sign, kind, n), n,
                                   "anti_thooft" if anti else "thooft", params)


def zero_potential(n=2):
    def field_fn(x):
        P = x.shape[0]
        return np.zeros((P, 4, n, n), complex), np.zeros((P, 4, 4, n, n), complex)

    def jet_builder(space):
        return [Jet.zeros(space, (n, n)) for _ in range(4)]

    return GaugePotential(n, field=field_fn, family="zero", jet_builder=jet_builder)


def constant_potential(values, su=False):
    """A_mu = values[mu] everywhere (values: (4, n, n))."""
    values = np.asarray(values, dtype=complex)
    n = values.shape[-1]

    def field_fn(x):
        P = x.shape[0]
        return (np.broadcast_to(values, (P, 4, n, n)).copy(),
                np.zeros((P, 4, 4, n, n), complex))

    def jet_builder(space):
        return [Jet.constant(space, values[mu]) for mu in range(4)]

    return GaugePotential(n, field=field_fn, family="constant", jet_builder=jet_builder, su=su)


def with_flipped_components(A, mus):
    """Flip the sign of the listed components (1-based); a negative control."""
    signs = np.ones(4)
    for mu in mus:
        signs[int(mu) - 1] = -1

    field_fn = None
    if A.field is not None:
        def field_fn(x):
            a, da = A.field(x)
            return a * signs[None, :, None, None], da * signs[None, None, :, None, None]

    jet_builder = None
    if A.jet_builder is not None:
        def jet_builder(space):
            return [j * s for j, s in zip(A.jet_builder(space), signs)]

    jets = None if A.jets is None else tuple(j * s for j, s in zip(A.jets, signs))
    return GaugePotential(A.n, field=field_fn, jets=jets, family=A.family,
                          params=dict(A.params, flip=list(mus)), jet_builder=jet_builder, su=A.su)


def conjugated(A, g):
    """A -> g A g^-1 for a constant group element g."""
    g = np.asarray(g, dtype=complex)
    gi = np.linalg.inv(g)
    field_fn = None
    if A.field is not None:
        def field_fn(x):
            a, da = A.field(x)
            return g @ a @ gi, g @ da @ gi
    jets = None if A.jets is None else tuple(j.lmatmul_const(g).rmatmul_const(gi) for j in A.jets)
    return GaugePotential(A.n, field=field_fn, jets=jets, family=A.family, params=A.params, su=A.su)


# -- probes and fixtures ------------------------------------------------------------

def probe_points(center, count=100, radius=2.0, seed=0, avoid=(), exclusion=0.1):
    """Deterministic scrambled-Halton points in a 4-ball, keeping ``exclusion``
    away from every point in ``avoid``."""
    center = np.asarray(center, dtype=float)
    avoid = np.asarray(avoid, dtype=float).reshape(-1, 4)
    sampler = qmc.Halton(d=4, scramble=True, seed=seed)
    out = []
    while sum(len(o) for o in out) < count:
        u = 2 * sampler.random(4 * count) - 1
        u = u[np.sum(u * u, axis=1) <= 1]
        pts = center + radius * u
        if len(avoid):
            dist = np.linalg.norm(pts[:, None] - avoid[None], axis=-1)
            pts = pts[np.all(dist > exclusion, axis=1)]
        out.append(pts)
    return np.concatenate(out)[:count]


# Jets are expanded about the family's reference point shifted by this offset,
# so that the base point is generic (A does not vanish there).
BASE_OFFSET = (0.2, 0.1, -0.1, 0.35)


def default_base_point(A):
    """Reference point (center, pole centroid or origin) plus BASE_OFFSET."""
    if A.params.get("base_point") is not None:
        return tuple(float(v) for v in A.params["base_point"])
    if A.params.get("center") is not None:
        ref = np.asarray(A.params["center"], dtype=float)
    elif A.params.get("poles"):
        ref = np.mean([p["center"] for p in A.params["poles"]], axis=0)
    else:
        ref = np.zeros(4)
    return tuple(float(v) for v in ref + np.asarray(BASE_OFFSET))


def poles_of(A):
    """Singular points of a family (for probe exclusion)."""
    return [p["center"] for p in A.params.get("poles", [])]


FAMILIES = ("bpst", "anti_bpst", "thooft", "anti_thooft", "zero")


def potential_from_record(rec):
    """Build a potential from a fixture record
    ``{family, n, center, scale, poles: [{center, weight}], flip?}``."""
    family = rec["family"]
    n = int(rec.get("n", 2))
    if family in ("bpst", "anti_bpst"):
        A = bpst_instanton(rec["center"], rec["scale"], n=n, anti=family == "anti_bpst")
    elif family in ("thooft", "anti_thooft"):
        poles = [(p["center"], p["weight"]) for p in rec["poles"]]
        A = thooft_ansatz(poles, n=n, anti=family == "anti_thooft")
    elif family == "zero":
        A = zero_potential(n)
    else:
        raise ValueError(f"unknown family {family!r}")
    if rec.get("flip"):
        A = with_flipped_components(A, rec["flip"])
    return A


def record_of(A):
    rec = {"family": A.family, "n": A.n, "center": A.params.get("center"),
           "scale": A.params.get("scale"), "poles": A.params.get("poles", [])}
    if A.params.get("flip"):
        rec["flip"] = list(A.params["flip"])
    return rec


def load_fixtures(path):
    with open(path) as fh:
        data = json.load(fh)
    if isinstance(data, dict):
        data = data.get("fixtures", [data])
    return list(data)


def save_fixtures(path, records):
    with open(path, "w") as fh:
        json.dump(list(records), fh, indent=2, sort_keys=True)
        fh.write("\n")


DEFAULT_FIXTURES = (
    {"family": "bpst", "n": 2, "center": [0.1, -0.2, 0.3, 0.05], "scale": 1.0, "poles": []},
    {"family": "thooft", "n": 2, "center": None, "scale": None,
     "poles": [{"center": [1.0, 0.0, 0.0, 0.0], "weight": 1.0},
               {"center": [-1.0, 0.5, 0.0, 0.0], "weight": 0.5}]},
)
