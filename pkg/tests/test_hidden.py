import numpy as np
import pytest
from hypothesis import given, strategies as st

from sdym import gauge, hidden, lie, manifest, twistor
from sdym.gauge import Variation
from sdym.hidden import GaugeTypeGenerator as G
from sdym.jets import OrderError

T = lie.su2_basis()
SAMPLES = twistor.CoverRegion(0.5).samples()


def max_diff(u, v):
    o = min(u[0].order, v[0].order)
    return max((a.truncate(o) - b.truncate(o)).norm() for a, b in zip(u, v))


# -- order budget ---------------------------------------------------------------

@given(st.integers(1, 12), st.integers(1, 12))
def test_order_budget(N, K):
    b = hidden.OrderBudget(N, K)
    assert b.psi_order == N + 1
    assert b.exact_order == min(N + 1, K)
    assert b.system_order == min(N, K - 1)
    assert b.system_order <= b.exact_order <= b.psi_order


def test_order_budget_refusals():
    with pytest.raises(OrderError):
        hidden.OrderBudget(0, 3)
    with pytest.raises(OrderError):
        hidden.OrderBudget(3, 1).require(-1, "delta A")


# -- linear system and Ward roundtrip ----------------------------------------------

def test_linear_system(bpst_jets, bpst_psi):
    assert hidden.verify_linear_system(bpst_jets, bpst_psi) <= 1e-10
    assert hidden.verify_linear_system(bpst_jets, bpst_psi, SAMPLES) <= 1e-10


def test_normalisation_and_levels(bpst_psi):
    xi, chi = bpst_psi.xi, bpst_psi.chi
    assert np.allclose(xi[0].coeffs[0], np.eye(2)) and np.allclose(chi[0].coeffs[0], np.eye(2))
    for k in range(1, len(xi)):
        # level k starts at degree k
        for d in range(k):
            assert xi[k].degree_part(d).norm() == 0 and chi[k].degree_part(d).norm() == 0
    assert bpst_psi.valid_orders == (7,) * 8


def test_ward_roundtrip(bpst_jets, bpst_psi):
    B, defect = hidden.potentials_from_psi(bpst_psi, return_defect=True)
    assert max_diff(B.jets, bpst_jets.jets) <= 1e-10
    assert defect <= 1e-10


def test_transition_matrix(bpst_psi):
    F = hidden.transition_matrix(bpst_psi)
    q = bpst_psi.budget.exact_order - 1
    assert F.window == (-7, 7) and F.data.order == 7
    assert twistor.holomorphy_residual(F, order=q) <= 1e-10
    assert hidden.reality_defect(F) <= 1e-12
    # F(base point) is the identity: both towers are normalized there
    assert np.allclose(F.mode(0).coeffs[0], np.eye(2))
    assert all(np.allclose(F.mode(k).coeffs[0], 0) for k in range(-7, 8) if k)


def test_non_self_dual_background_is_rejected():
    A = gauge.bpst_instanton(anti=True).to_jets((0.3, 0.2, -0.1, 0.4), 4)
    with pytest.raises(hidden.CompatibilityError):
        hidden.lax_recursion(A, 4)


def test_corrupted_solution_is_detected(bpst_jets, bpst_psi):
    bad = bpst_psi.perturbed("+", 1, 3, 1e-3 * np.eye(2))
    assert hidden.verify_linear_system(bpst_jets, bad) >= 1e-4
    bad = bpst_psi.perturbed("-", 2, 20, 1e-3 * T[0])
    assert hidden.verify_linear_system(bpst_jets, bad) >= 1e-4


def test_rotation_gives_conjugated_potential(bpst_small, rng):
    A, psi = bpst_small
    g = np.linalg.qr(rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2)))[0]
    B = hidden.potentials_from_psi(psi.rotated(g))
    gi = np.linalg.inv(g)
    expect = [a.lmatmul_const(gi).rmatmul_const(g) for a in A.jets]
    assert max_diff(B.jets, expect) <= 1e-12


def test_small_lambda_order(bpst_jets):
    psi = hidden.lax_recursion(bpst_jets, 3)
    assert hidden.verify_linear_system(bpst_jets, psi) <= 1e-10
    B = hidden.potentials_from_psi(psi)
    assert B.jets[0].order == 2
    assert max_diff(B.jets, bpst_jets.jets) <= 1e-10


# -- generators -----------------------------------------------------------------

def test_generator_validation_and_antipodal():
    with pytest.raises(ValueError):
        G({(0, 0, 0): np.eye(2)})
    phi = G({(1, 0, 0): T[0], (0, 1, 1): T[1] + 0.5j * T[2]})
    assert set(phi.antipodal().antipodal().terms) == set(phi.terms)
    for k, c in phi.antipodal().antipodal().terms.items():
        assert np.allclose(c, phi.terms[k])
    assert phi.window == (0, 2)


def test_antipodal_matches_laurent_route(bpst_small):
    space = bpst_small[0].space
    phi = G({(1, 1, 0): T[0], (-1, 0, 2): T[2], (0, 0, 0): T[1]})
    a = phi.antipodal().to_laurent(space)
    b = phi.to_laurent(space).antipodal()
    assert (a - b).norm() == 0


def test_reality_predicate():
    assert G.from_modes({0: T[0]}).is_antipodal_compatible()
    assert not G.from_modes({1: T[0]}).is_antipodal_compatible()
    assert G.from_modes({1: T[0], -1: -T[0]}).is_antipodal_compatible()
    assert not G.from_modes({1: T[0], -1: T[0]}).is_antipodal_compatible()


def test_generators_are_holomorphic(bpst_small):
    phi = G({(2, 1, 0): T[0], (0, 0, 1): T[2]})
    assert twistor.holomorphy_residual(phi.to_laurent(bpst_small[0].space)) <= 1e-14


# -- gauge-type variations ---------------------------------------------------------

@pytest.mark.parametrize("n", [0, 1, 2])
@pytest.mark.parametrize("a", [0, 1, 2])
def test_gauge_type_symmetry(bpst_jets, bpst_psi, n, a):
    res = hidden.gauge_type_variation(bpst_jets, bpst_psi, G.from_modes({n: T[a]}))
    assert res.consistency <= 1e-10 and res.sides_defect <= 1e-10
    assert gauge.linearized_sdym_residual(bpst_jets, res.variation) <= 1e-8
    assert res.variation.jets[0].order == bpst_psi.budget.exact_order - 1
    # real su(2) directions
    assert max((j.dagger() + j).norm() for j in res.variation.jets) <= 1e-12


def test_gauge_type_nonzero_and_linear(bpst_small):
    A, psi = bpst_small
    v1 = hidden.gauge_type_variation(A, psi, G.from_modes({1: T[0]})).variation
    v2 = hidden.gauge_type_variation(A, psi, G.from_modes({1: T[1]})).variation
    v12 = hidden.gauge_type_variation(A, psi, G.from_modes({1: T[0] + 2 * T[1]})).variation
    assert max(j.norm() for j in v1.jets) > 1e-2
    assert max_diff(v12.jets, [a + 2 * b for a, b in zip(v1.jets, v2.jets)]) <= 1e-12


def test_w_dependent_generator(bpst_small):
    A, psi = bpst_small
    res = hidden.gauge_type_variation(A, psi, G({(0, 1, 0): T[0], (1, 0, 1): T[2]}))
    assert res.consistency <= 1e-10
    assert gauge.linearized_sdym_residual(A, res.variation) <= 1e-8


@pytest.mark.parametrize("share", [0.0, 0.3, 1.0])
def test_split_convention_does_not_matter_for_symmetry(bpst_small, share):
    A, psi = bpst_small
    res = hidden.gauge_type_variation(A, psi, G.from_modes({1: T[2]}), constant_share=share)
    assert gauge.linearized_sdym_residual(A, res.variation) <= 1e-8


def test_zero_generator(bpst_small):
    A, psi = bpst_small
    res = hidden.gauge_type_variation(A, psi, G({}))
    assert max(j.norm() for j in res.variation.jets) == 0


def test_injected_split_reduces_to_gauge_transformation(bpst_jets, bpst_psi, rng):
    theta = manifest.random_gauge_parameter(bpst_jets.space, 2, rng)
    res = hidden.gauge_type_variation(bpst_jets, bpst_psi, G({}), split_override=(theta, theta))
    ref = manifest.gauge_variation(bpst_jets, theta)
    assert max_diff(res.variation.jets, ref.jets) <= 1e-12
    assert res.consistency <= 1e-12


def test_loop_mode_zero_is_a_gauge_transformation(bpst_small):
    # n = 0 variations are manifest gauge transformations; n = 1 are not
    A, psi = bpst_small
    v0 = hidden.gauge_type_variation(A, psi, G.from_modes({0: T[0]})).variation
    v1 = hidden.gauge_type_variation(A, psi, G.from_modes({1: T[0]})).variation
    assert hidden.nearest_gauge_parameter(A, v0)[2] <= 1e-10
    assert hidden.nearest_gauge_parameter(A, v1)[2] > 0.1


# -- diffeo-type variations ---------------------------------------------------------

DIFFEO = [("P", 1), ("B", None), ("X", 1)]


@pytest.mark.parametrize("name,idx", DIFFEO)
@pytest.mark.parametrize("n", [0, 1])
def test_diffeo_type_symmetry(bpst_jets, bpst_psi, name, idx, n):
    lift = twistor.lift_conformal(manifest.conformal_generator(name, idx)).times_lambda_power(-n)
    res = hidden.diffeo_type_variation(bpst_jets, bpst_psi, lift)
    assert res.consistency <= 1e-10 and res.sides_defect <= 1e-10
    assert gauge.linearized_sdym_residual(bpst_jets, res.variation) <= 1e-8
    assert res.variation.jets[0].order == bpst_psi.budget.exact_order - 2


@pytest.mark.parametrize("name,idx,pure_gauge_flip", [("P", 1, False), ("B", None, False), ("K", 1, False),
                                                      ("X", 1, True), ("Y", 2, True)])
def test_diffeo_mode_zero_is_manifest_conformal(bpst_small, name, idx, pure_gauge_flip):
    # lam^0 lift(N) reproduces delta_N A up to a gauge transformation
    A, psi = bpst_small
    N = manifest.conformal_generator(name, idx)
    dv = hidden.diffeo_type_variation(A, psi, twistor.lift_conformal(N)).variation
    man = manifest.conformal_variation(A, N)
    o = dv.jets[0].order
    same = Variation(2, jets=tuple(a - b.truncate(o) for a, b in zip(dv.jets, man.jets)))
    flip = Variation(2, jets=tuple(a + b.truncate(o) for a, b in zip(dv.jets, man.jets)))
    assert hidden.nearest_gauge_parameter(A, same)[2] <= 1e-10
    # rotations of the BPST background are themselves gauge transformations
    assert (hidden.nearest_gauge_parameter(A, flip)[2] <= 1e-10) == pure_gauge_flip


def test_diffeo_branches_and_pair(bpst_small):
    A, psi = bpst_small
    lift = twistor.lift_conformal(manifest.conformal_generator("B"))
    eta = hidden.DiffeoTypeGenerator(lift)
    assert eta.branch("-") is lift
    with pytest.raises(ValueError):
        eta.branch("0")
    pair = hidden.diffeo_pair_variation(A, psi, eta)
    assert max(j.norm() for j in pair.jets) == 0
    other = lift.times_lambda_power(-1)
    eta2 = hidden.DiffeoTypeGenerator(lift, other)
    pair2 = hidden.diffeo_pair_variation(A, psi, eta2)
    assert gauge.linearized_sdym_residual(A, pair2) <= 1e-8


def test_diffeo_needs_order():
    A = gauge.bpst_instanton().to_jets((0.3, 0.2, -0.1, 0.4), 2)
    psi = hidden.lax_recursion(A, 1)
    lift = twistor.lift_conformal(manifest.conformal_generator("P", 1))
    with pytest.raises(OrderError):
        hidden.diffeo_type_variation(A, psi, lift)


# -- algebra ----------------------------------------------------------------------

BRACKET_CASES = [
    (G.from_modes({1: T[0]}), G.from_modes({0: T[1]})),
    (G.from_modes({2: T[2]}), G.from_modes({-1: T[0]})),
    (G({(0, 1, 0): T[0], (1, 0, 1): T[2]}), G.from_modes({1: T[2]})),
]


@pytest.mark.parametrize("phi1,phi2", BRACKET_CASES)
def test_action_bracket(bpst_psi, phi1, phi2):
    F = hidden.transition_matrix(bpst_psi)
    assert hidden.action_bracket_check(phi1, phi2, F) <= 1e-10
    # the commutator generator is what the bracket produces
    br = phi1.commutator(phi2)
    assert br.terms


@pytest.mark.parametrize("name,idx", [("P", 2), ("B", None), ("X", 3), ("Y", 1), ("K", 2)])
def test_derivation(bpst_small, name, idx):
    A, psi = bpst_small
    F = hidden.transition_matrix(psi)
    lift = twistor.lift_conformal(manifest.conformal_generator(name, idx))
    assert hidden.derivation_check(lift, G.from_modes({1: T[0]}), F) <= 1e-10


def test_determinism(bpst_small):
    A, psi = bpst_small
    r1 = hidden.gauge_type_variation(A, psi, G.from_modes({1: T[1]}))
    psi2 = hidden.lax_recursion(A, psi.K)
    r2 = hidden.gauge_type_variation(A, psi2, G.from_modes({1: T[1]}))
    assert all(np.array_equal(a.coeffs, b.coeffs) for a, b in zip(r1.variation.jets, r2.variation.jets))
