"""Walk through the hidden-symmetry pipeline on a BPST instanton.

    python demos/hidden_symmetries_walkthrough.py
"""
import numpy as np

from sdym import gauge, hidden, lie, manifest, twistor

np.set_printoptions(precision=3, suppress=True)

# %% background: regular-gauge instanton, expanded to order 6 near its centre
A = gauge.bpst_instanton(center=(0.1, -0.2, 0.3, 0.05), scale=1.0)
base = gauge.default_base_point(A)
J = A.to_jets(base, 6)
print("base point         ", base)
print("self-duality       ", gauge.sdym_residual(J))

# %% solve the linear system order by order in lambda
psi = hidden.lax_recursion(J, 7)
print("budget             ", psi.budget, "exact to order", psi.budget.exact_order)
print("linear system      ", hidden.verify_linear_system(J, psi))
B = hidden.potentials_from_psi(psi)
print("Ward roundtrip     ", max((a - b).norm() for a, b in zip(J.jets, B.jets)))

F = hidden.transition_matrix(psi)
print("F window           ", F.window)
print("F holomorphy       ", twistor.holomorphy_residual(F, order=psi.budget.exact_order - 1))
print("F reality          ", hidden.reality_defect(F))

# %% a loop-algebra generator lam T_1
T = lie.su2_basis()
res = hidden.gauge_type_variation(J, psi, hidden.GaugeTypeGenerator.from_modes({1: T[0]}))
print("\nlam T1: two-sided  ", res.consistency, res.sides_defect)
print("lam T1: symmetry   ", gauge.linearized_sdym_residual(J, res.variation))
print("delta A_1 at base  \n", res.variation.jets[0].coeffs[0])

# n = 0 gives nothing new: it is a gauge transformation
for n in (0, 1):
    v = hidden.gauge_type_variation(J, psi, hidden.GaugeTypeGenerator.from_modes({n: T[0]})).variation
    print(f"lam^{n} T1 vs nearest gauge transformation: relative residual",
          f"{hidden.nearest_gauge_parameter(J, v)[2]:.2e}")

# %% conformal generators lifted to twistor space
for name, idx in (("P", 1), ("Y", 1), ("K", 1)):
    lift = twistor.lift_conformal(manifest.conformal_generator(name, idx))
    print(f"\nlift {lift.label}: N^lam = {lift.vertical}   bracket residual {twistor.bracket_residual(lift)}")
    for n in (0, 1):
        r = hidden.diffeo_type_variation(J, psi, lift.times_lambda_power(-n))
        print(f"  lam^-{n}: symmetry residual {gauge.linearized_sdym_residual(J, r.variation):.2e}")
