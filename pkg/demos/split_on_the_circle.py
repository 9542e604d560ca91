"""The additive split phi = phi_minus - phi_plus, exact and sampled.

    python demos/split_on_the_circle.py
"""
import numpy as np

from sdym import riemann_hilbert as rh

np.set_printoptions(precision=4, suppress=True)

# %% a rational function with one pole inside and one outside the circle
f = rh.Sampled.from_function(lambda lam: np.array([[1 / (lam - 2) + 1 / (lam - 0.5)]]), 256, 16)
L = rh.laurent_coefficients(f)
for k in range(-4, 5):
    print(f"mode {k:+d}  {L.mode(k)[0, 0].real: .6f}")

parts = rh.split(f)
print("reconstruction     ", (parts.reconstruct() - f).norm())
print("minus, mode +1     ", abs(rh.contour_coefficient(parts.minus, 1)[0, 0]))
print("plus, mode -1      ", abs(rh.contour_coefficient(parts.plus, -1)[0, 0]))

# %% the same function through the exact backend
g = rh.LaurentPoly.from_modes({k: L.mode(k) for k in range(-16, 17)})
print("dual backend       ", max(abs(rh.contour_coefficient(g, k) - rh.contour_coefficient(f, k))[0, 0]
                                for k in range(-16, 17)))

# %% too few samples for the declared budget
try:
    rh.Sampled.from_function(lambda lam: np.eye(1), 32, 16)
except rh.AliasingError as exc:
    print("refused:", exc)
