"""Matrix Lie algebra helpers, the epsilon and 't Hooft symbols, and the
(anti-)self-dual split of antisymmetric 2-tensors on R^4.

Matrices are plain complex ndarrays with the matrix indices last.  Index
arguments of the public symbol functions are 1-based (mu, nu in 1..4,
a in 1..3); the dense tables ``EPS4``, ``ETA`` and ``ETA_BAR`` are 0-based.
"""
from __future__ import annotations

import itertools

import numpy as np

ATOL = 1e-12

SELF_DUAL = "eta"
ANTI_SELF_DUAL = "eta_bar"


def _levi_civita(dim):
    eps = np.zeros((dim,) * dim, dtype=int)
    for perm in itertools.permutations(range(dim)):
        inversions = sum(
            1 for i in range(dim) for j in range(i + 1, dim) if perm[i] > perm[j]
        )
        eps[perm] = -1 if inversions % 2 else 1
    return eps


EPS3 = _levi_civita(3)
EPS4 = _levi_civita(4)  # EPS4[0, 1, 2, 3] == +1


def _thooft_table(kind):
    sign = 1 if kind == SELF_DUAL else -1
    table = np.zeros((3, 4, 4), dtype=int)
    for a in range(3):
        for mu in range(3):
            for nu in range(3):
                table[a, mu, nu] = EPS3[a, mu, nu]
        table[a, a, 3] = sign
        table[a, 3, a] = -sign
    return table


ETA = _thooft_table(SELF_DUAL)
ETA_BAR = _thooft_table(ANTI_SELF_DUAL)
for _t in (EPS3, EPS4, ETA, ETA_BAR):
    _t.setflags(write=False)


def thooft(kind, a, mu, nu):
    """'t Hooft symbol eta^a_{mu nu} (kind ``"eta"``) or its anti-self-dual
    partner (kind ``"eta_bar"``), with 1-based indices."""
    if kind not in (SELF_DUAL, ANTI_SELF_DUAL):
        raise ValueError(f"unknown 't Hooft kind {kind!r}")
    if not (1 <= a <= 3 and 1 <= mu <= 4 and 1 <= nu <= 4):
        raise IndexError(f"index out of range: a={a}, mu={mu}, nu={nu}")
    table = ETA if kind == SELF_DUAL else ETA_BAR
    return int(table[a - 1, mu - 1, nu - 1])


def hodge_dual(F):
    """(*F)_{mu nu} = 1/2 eps_{mu nu rho sigma} F_{rho sigma} over the two
    leading axes; any trailing shape rides along."""
    F = np.asarray(F)
    return 0.5 * np.tensordot(EPS4, F, axes=([2, 3], [0, 1]))


def sd_asd_project(F):
    """Split an antisymmetric tensor (leading axes 4x4) into self-dual and
    anti-self-dual parts.  ``F_plus + F_minus == F``."""
    F = np.asarray(F)
    if F.shape[:2] != (4, 4):
        raise ValueError(f"expected leading shape (4, 4), got {F.shape[:2]}")
    F_plus = 0.5 * (F + hodge_dual(F))
    return F_plus, F - F_plus


def commutator(A, B):
    A = np.asarray(A)
    B = np.asarray(B)
    if A.shape[-2:] != B.shape[-2:]:
        raise ValueError(f"dimension mismatch: {A.shape[-2:]} vs {B.shape[-2:]}")
    return A @ B - B @ A


def dagger(A):
    return np.conj(np.swapaxes(np.asarray(A), -1, -2))


def is_traceless(A, atol=ATOL):
    return bool(np.all(np.abs(np.trace(A, axis1=-2, axis2=-1)) <= atol))


def is_anti_hermitian(A, atol=ATOL):
    A = np.asarray(A)
    return bool(np.all(np.abs(A + dagger(A)) <= atol))


def lie_matrix(entries, su=False, atol=ATOL):
    """Validate a traceless square matrix; ``su=True`` also asserts
    anti-Hermiticity.  Returns a read-only complex array."""
    A = np.array(entries, dtype=complex)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {A.shape}")
    if not is_traceless(A, atol):
        raise ValueError("matrix is not traceless")
    if su and not is_anti_hermitian(A, atol):
        raise ValueError("matrix is not anti-Hermitian")
    A.setflags(write=False)
    return A


PAULI = np.array(
    [[[0, 1], [1, 0]], [[0, -1j], [1j, 0]], [[1, 0], [0, -1]]], dtype=complex
)


def su2_basis():
    """T_a = -i sigma_a / 2, so that [T_a, T_b] = eps_abc T_c."""
    return -0.5j * PAULI


def su_n_basis(n):
    """Anti-Hermitian traceless basis of su(n) (i times generalized Gell-Mann)."""
    basis = []
    for j in range(n):
        for k in range(j + 1, n):
            S = np.zeros((n, n), dtype=complex)
            S[j, k] = S[k, j] = 1
            basis.append(1j * S)
            S = np.zeros((n, n), dtype=complex)
            S[j, k], S[k, j] = -1j, 1j
            basis.append(1j * S)
    for l in range(1, n):
        D = np.zeros((n, n), dtype=complex)
        D[np.arange(l), np.arange(l)] = 1
        D[l, l] = -l
        basis.append(1j * D * np.sqrt(2.0 / (l * (l + 1))))
    return np.array(basis)


def random_su(n, rng, size=None):
    """Random anti-Hermitian traceless matrices with unit-scale entries."""
    shape = (n, n) if size is None else (size, n, n)
    X = rng.normal(size=shape) + 1j * rng.normal(size=shape)
    X = 0.5 * (X - dagger(X))
    tr = np.trace(X, axis1=-2, axis2=-1)[..., None, None] / n
    return X - tr * np.eye(n)


def random_antisymmetric(rng, n, complex_values=True):
    """Random (4, 4, n, n) tensor antisymmetric in the first two axes."""
    X = rng.normal(size=(4, 4, n, n))
    if complex_values:
        X = X + 1j * rng.normal(size=(4, 4, n, n))
    return X - np.swapaxes(X, 0, 1)
