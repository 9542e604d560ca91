import numpy as np
import pytest
import sympy
from hypothesis import given, strategies as st

from sdym import manifest, twistor
from sdym.jets import JetSpace
from sdym.manifest import X
from sdym.twistor import LAM

SPACE = JetSpace(3, (0.3, 0.2, -0.1, 0.4))
I = sympy.I

# lifts computed once with the exact solver; the vertical parts below are the
# frozen values (lam-polynomials, x-independent except for K)
FROZEN_VERTICAL = {
    "P1": 0, "P2": 0, "P3": 0, "P4": 0, "B": 0, "X1": 0, "X2": 0, "X3": 0,
    "Y1": I * LAM**2 - I, "Y2": LAM**2 + 1, "Y3": 2 * I * LAM,
    "K1": LAM**2 * X[2] / 2 + I * LAM**2 * X[3] / 2 - I * LAM * X[1] + X[2] / 2 - I * X[3] / 2,
}


def unit_vectors(seed, count):
    v = np.random.default_rng(seed).normal(size=(count, 3))
    return v / np.linalg.norm(v, axis=1, keepdims=True)


def test_complex_structures_square_to_minus_one():
    for s in unit_vectors(0, 100):
        J = twistor.complex_structure(s)
        assert np.max(np.abs(J @ J + np.eye(4))) <= 1e-14
        assert np.max(np.abs(J + J.T)) <= 1e-14


@given(st.complex_numbers(max_magnitude=5, allow_nan=False, allow_infinity=False))
def test_frame_is_antiholomorphic_for_J(lam):
    s = twistor.lambda_to_s(lam)
    assert np.isclose(np.linalg.norm(s), 1)
    assert np.isclose(twistor.ComplexStructureParams(s).lam, lam, atol=1e-9)
    J = twistor.complex_structure(s)
    for v in twistor.frame_vectors(lam):
        assert np.allclose(J @ v, -1j * v, atol=1e-12)


def test_frame_annihilates_twistor_coordinates():
    rng = np.random.default_rng(3)
    x0 = rng.normal(size=4)
    for lam in np.exp(2j * np.pi * rng.random(20)) * rng.uniform(0.3, 2, 20):
        w = twistor.twistor_coords(x0, lam)
        # w is linear in x, so the directional derivative is exact
        grads = np.array([np.array(twistor.twistor_coords(x0 + e, lam)) - np.array(w) for e in np.eye(4)])
        for v in twistor.frame_vectors(lam):
            assert np.max(np.abs(v @ grads)) <= 1e-14


def test_twistor_coordinate_jets_are_holomorphic():
    w1, w2 = twistor.twistor_coord_jets(SPACE)
    assert twistor.holomorphy_residual(w1) <= 1e-14
    assert twistor.holomorphy_residual(w2) <= 1e-14
    lam = 0.7 + 0.2j
    assert np.isclose(w1.eval(lam).eval(np.array(SPACE.base_point)),
                      twistor.twistor_coords(np.array(SPACE.base_point), lam)[0])


def test_holomorphy_residual_detects_ybar():
    ybar = twistor.laurent_from_expr(X[0] - I * X[1], SPACE)
    assert twistor.holomorphy_residual(ybar) > 0.5
    assert twistor.holomorphy_residual(ybar.mode(0), 0.5) > 0.5


def test_cover_region():
    c = twistor.CoverRegion(0.5)
    assert c.in_plus(0) and not c.in_plus(2) and c.in_minus(2) and not c.in_minus(0.2)
    assert all(c.in_overlap(l) for l in c.samples())
    with pytest.raises(ValueError):
        twistor.CoverRegion(1.0)
    with pytest.raises(ValueError):
        twistor.ComplexStructureParams((1, 1, 0))


@pytest.mark.parametrize("g", manifest.all_generators(), ids=str)
def test_lift_preserves_holomorphic_structure(g):
    lift = twistor.lift_conformal(g)
    assert twistor.bracket_residual(lift) <= 1e-12
    # independent route: eta(w_i) is again holomorphic
    for w in twistor.twistor_coord_jets(SPACE):
        assert twistor.holomorphy_residual(lift.apply(w), order=1) <= 1e-12
    if str(g) in FROZEN_VERTICAL:
        assert sympy.expand(lift.vertical - FROZEN_VERTICAL[str(g)]) == 0
    assert twistor.lift_is_x_dependent(lift) == (g.name == "K")


def test_bare_horizontal_field_is_not_enough():
    # Y1 without its vertical part fails the bracket condition
    lift = twistor.lift_conformal(manifest.conformal_generator("Y", 1))
    bare = twistor.TwistorVectorField(lift.horizontal, sympy.Integer(0))
    assert twistor.bracket_residual(bare) > 0.5


def test_no_lift_for_non_conformal_field():
    with pytest.raises(twistor.LiftError):
        twistor.lift_conformal((X[0] ** 2, 0, 0, 0))


def test_lambda_powers_keep_the_condition():
    lift = twistor.lift_conformal(manifest.conformal_generator("X", 2))
    for m in (-2, -1, 1, 3):
        shifted = lift.times_lambda_power(m)
        assert twistor.bracket_residual(shifted) == 0
        assert shifted.window[1] - shifted.window[0] == lift.window[1] - lift.window[0]


def test_apply_translation():
    P2 = twistor.lift_conformal(manifest.conformal_generator("P", 2))
    w1, _ = twistor.twistor_coord_jets(SPACE)
    # d/dx2 (y - lam zbar) = i
    out = P2.apply(w1)
    assert np.isclose(out.mode(0).coeffs[0, 0, 0], 1j) and out.norm(0) == 1
