"""Real and complex coordinates on R^4 = C^2.

    y = x1 + i x2,  ybar = x1 - i x2,  z = x3 - i x4,  zbar = x3 + i x4

Complex-frame variables are always ordered (y, ybar, z, zbar).
"""
import numpy as np

REAL = "real"
COMPLEX = "complex"
FRAMES = (REAL, COMPLEX)

Y, YBAR, Z, ZBAR = range(4)
COMPLEX_NAMES = ("y", "ybar", "z", "zbar")

# w_c = COORD[c, mu] x_mu
COORD = np.array(
    [[1, 1j, 0, 0], [1, -1j, 0, 0], [0, 0, 1, -1j], [0, 0, 1, 1j]], dtype=complex
)
# x_mu = COORD_INV[mu, c] w_c
COORD_INV = np.linalg.inv(COORD)
# Covariant objects (derivatives, 1-form components):
#   d_c = TO_COMPLEX[c, mu] d_mu,   A_c = TO_COMPLEX[c, mu] A_mu
TO_COMPLEX = COORD_INV.T.copy()
# d_mu = TO_REAL[mu, c] d_c
TO_REAL = COORD.T.copy()
# complex conjugation permutes the complex variables: y <-> ybar, z <-> zbar
CONJ_PERM = (YBAR, Y, ZBAR, Z)

for _m in (COORD, COORD_INV, TO_COMPLEX, TO_REAL):
    _m.setflags(write=False)


def to_complex_coords(x):
    """(..., 4) real points -> (..., 4) complex coordinates (y, ybar, z, zbar)."""
    return np.asarray(x, dtype=float) @ COORD.T


def to_complex_components(A):
    """Real components on the leading axis -> complex components."""
    return np.tensordot(TO_COMPLEX, np.asarray(A), axes=(1, 0))


def to_real_components(Ac):
    return np.tensordot(TO_REAL, np.asarray(Ac), axes=(1, 0))
