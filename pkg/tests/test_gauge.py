import itertools
import json

import numpy as np
import pytest
from hypothesis import given, strategies as st

from sdym import gauge, lie
from sdym.jets import OrderError

BASE = (0.3, 0.2, -0.1, 0.4)
POLES = [([1.0, 0.0, 0.0, 0.0], 1.0), ([-1.0, 0.5, 0.0, 0.0], 0.5)]


def probes(A, count=100, seed=0):
    return gauge.probe_points(gauge.default_base_point(A), count, seed=seed, avoid=gauge.poles_of(A))


@pytest.mark.parametrize("make,pinned", [
    (lambda conv: gauge.bpst_instanton(convention=conv), gauge.BPST_CONVENTION),
    (lambda conv: gauge.thooft_ansatz(POLES, convention=conv), gauge.THOOFT_CONVENTION),
])
def test_convention_scan(make, pinned):
    # exactly the pinned (sign, tensor) choice is self-dual
    good = []
    for conv in itertools.product((1, -1), (lie.SELF_DUAL, lie.ANTI_SELF_DUAL)):
        A = make(conv)
        if gauge.sdym_residual(A, probes(A, 30)) < 1e-10:
            good.append(conv)
    assert good == [pinned]


@pytest.mark.parametrize("A", [gauge.bpst_instanton((0.1, -0.2, 0.3, 0.05), 1.3), gauge.thooft_ansatz(POLES)],
                         ids=["bpst", "thooft"])
def test_fixtures_self_dual(A):
    assert gauge.sdym_residual(A, probes(A)) <= 1e-10
    J = A.to_jets(gauge.default_base_point(A), 6)
    assert gauge.sdym_residual(J) <= 1e-10


@pytest.mark.parametrize("family", ["anti_bpst", "anti_thooft"])
def test_anti_self_dual_families(family):
    rec = {"family": family, "center": [0, 0, 0, 0], "scale": 1.0,
           "poles": [{"center": c, "weight": w} for c, w in POLES]}
    A = gauge.potential_from_record(rec)
    x = probes(A, 50)
    assert gauge.sdym_residual(A, x) > 1e-2
    assert gauge.sdym_residual(A, x, duality=-1) < 1e-10


def test_analytic_derivatives_match_finite_differences():
    A = gauge.thooft_ansatz(POLES)
    x = probes(A, 10)
    _, dA = A(x)
    h = 1e-5
    for nu in range(4):
        e = np.zeros(4)
        e[nu] = h
        fd = (A(x + e)[0] - A(x - e)[0]) / (2 * h)
        assert np.max(np.abs(fd - dA[:, nu])) < 1e-6


def test_jets_match_analytic_backend():
    A = gauge.bpst_instanton((0.1, 0.0, -0.2, 0.3), 0.8)
    J = A.to_jets(BASE, 5)
    a, da = A(np.array([BASE]))
    for mu in range(4):
        assert np.allclose(J.jets[mu].eval(np.array(BASE)), a[0, mu])
        for nu in range(4):
            d = J.jets[mu].derive(f"x{nu + 1}").eval(np.array(BASE))
            assert np.allclose(d, da[0, nu, mu])
    # truncated series converges near the base point
    x = np.asarray(BASE) + 0.02
    assert np.max(np.abs(J.jets[2].eval(x) - A(x[None])[0][0, 2])) < 1e-8


def test_potentials_are_su2():
    A = gauge.bpst_instanton()
    a, _ = A(probes(A, 20))
    assert lie.is_anti_hermitian(a) and lie.is_traceless(a)
    J = A.to_jets(BASE, 4)
    Ac = gauge.complex_components(J)
    # reality in the complex frame: A_ybar = -A_y^dagger, A_zbar = -A_z^dagger
    assert (Ac[1] + Ac[0].dagger()).norm() < 1e-14
    assert (Ac[3] + Ac[2].dagger()).norm() < 1e-14


def test_complex_components_roundtrip(bpst_jets):
    back = gauge.real_components(gauge.complex_components(bpst_jets))
    assert max((a - b).norm() for a, b in zip(back, bpst_jets.jets)) < 1e-14


def test_flipped_component_is_not_self_dual():
    A = gauge.with_flipped_components(gauge.bpst_instanton(), [2])
    assert gauge.sdym_residual(A, probes(A, 30)) > 1e-2


@given(st.integers(0, 2**32 - 1))
def test_constant_conjugation_preserves_self_duality(seed):
    rng = np.random.default_rng(seed)
    g = np.linalg.qr(rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2)))[0]
    A = gauge.conjugated(gauge.bpst_instanton(), g)
    assert gauge.sdym_residual(A, probes(A, 20)) < 1e-10


def test_abelian_constant_potential_is_flat():
    vals = np.zeros((4, 2, 2), complex)
    vals[:, 0, 0], vals[:, 1, 1] = 1j, -1j
    A = gauge.constant_potential(vals)
    assert gauge.sdym_residual(A, probes(A, 5)) == 0


def test_linearized_residual_detects_random_direction(bpst_jets, rng):
    from sdym.gauge import Variation
    from sdym.jets import random_jet
    dA = Variation(2, jets=tuple(random_jet(bpst_jets.space, 2, rng) for _ in range(4)))
    assert gauge.linearized_sdym_residual(bpst_jets, dA) > 1e-2


def test_linearized_residual_is_derivative_of_residual(bpst):
    # finite-difference cross-check of the linearized curvature
    A = bpst
    J = A.to_jets(BASE, 3)
    from sdym.gauge import Variation, GaugePotential
    from sdym.jets import random_jet
    rng = np.random.default_rng(7)
    dA = Variation(2, jets=tuple(random_jet(J.space, 2, rng) for _ in range(4)))
    t = 1e-3
    up = GaugePotential(2, jets=tuple(a + d * t for a, d in zip(J.jets, dA.jets)))
    down = GaugePotential(2, jets=tuple(a - d * t for a, d in zip(J.jets, dA.jets)))
    lin = gauge.linearized_curvature(J, dA)
    # curvature is quadratic in A, so the central difference is exact up to rounding
    fd = (gauge.curvature(up) - gauge.curvature(down)) * (1 / (2 * t))
    assert (fd - lin).norm() < 1e-6


def test_errors():
    with pytest.raises(ValueError):
        gauge.bpst_instanton(scale=0)
    with pytest.raises(ValueError):
        gauge.thooft_ansatz([])
    with pytest.raises(ValueError):
        gauge.thooft_ansatz([([0, 0, 0, 0], 1.0), ([0, 0, 0, 0], 2.0)])
    with pytest.raises(ValueError):
        gauge.potential_from_record({"family": "monopole"})
    with pytest.raises(ValueError):
        gauge.sdym_residual(gauge.bpst_instanton())
    with pytest.raises(OrderError):
        gauge.curvature(gauge.bpst_instanton().to_jets(BASE, 0))


def test_probes_are_deterministic_and_avoid_poles():
    a = gauge.probe_points(BASE, 50, seed=3, avoid=[p for p, _ in POLES])
    b = gauge.probe_points(BASE, 50, seed=3, avoid=[p for p, _ in POLES])
    assert np.array_equal(a, b) and a.shape == (50, 4)
    d = np.linalg.norm(a[:, None] - np.array([p for p, _ in POLES])[None], axis=-1)
    assert d.min() > 0.1


def test_fixture_roundtrip(tmp_path):
    path = tmp_path / "fx.json"
    gauge.save_fixtures(path, gauge.DEFAULT_FIXTURES)
    recs = gauge.load_fixtures(path)
    assert recs == json.loads(json.dumps(list(gauge.DEFAULT_FIXTURES)))
    for rec in recs:
        A = gauge.potential_from_record(rec)
        assert gauge.record_of(A)["family"] == rec["family"]
