"""Dense complex linear algebra kernel and seeded random generators.

Matrices are plain ``numpy.ndarray`` objects of dtype ``complex128``.
"""
from dataclasses import dataclass

import numpy as np

from .errors import NotHermitian


@dataclass(frozen=True)
class ToleranceConfig:
    """Numerical tolerances used across the package.

    eq_tol
        relative tolerance for comparing invariant values
    rank_tol
        relative singular-value cutoff for nullspaces and genericity
    oracle_tol
        cost threshold at which the optimization oracle declares success
    """

    eq_tol: float = 1e-8
    rank_tol: float = 1e-8
    oracle_tol: float = 1e-8

    def __post_init__(self):
        for name in ("eq_tol", "rank_tol", "oracle_tol"):
            value = getattr(self, name)
            if not 0.0 < value < 1.0:
                raise ValueError(f"{name} must lie in (0, 1), got {value!r}")


DEFAULT_TOL = ToleranceConfig()


def dagger(M):
    return np.conj(np.swapaxes(M, -1, -2))


def allclose(A, B, tol):
    """Max-abs-difference comparison, the only matrix equality used here."""
    A = np.asarray(A)
    B = np.asarray(B)
    return A.shape == B.shape and (A.size == 0 or float(np.max(np.abs(A - B))) <= tol)


def close(a, b, tol):
    """Relative scalar comparison |a - b| <= tol * max(1, |a|, |b|)."""
    return abs(a - b) <= tol * max(1.0, abs(a), abs(b))


def hermitize(M, cfg=DEFAULT_TOL):
    """Return (M + M^dag)/2, or raise NotHermitian if M is too far from Hermitian."""
    M = np.asarray(M, dtype=complex)
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise NotHermitian(f"expected a square matrix, got shape {M.shape}")
    scale = max(1.0, float(np.max(np.abs(M)))) if M.size else 1.0
    asym = float(np.max(np.abs(M - dagger(M)))) if M.size else 0.0
    if asym > cfg.rank_tol * scale:
        raise NotHermitian(f"max |M - M^dag| = {asym:.3e} exceeds {cfg.rank_tol:.1e}")
    return (M + dagger(M)) / 2


def hermitian_eig(M, cfg=DEFAULT_TOL):
    """Eigendecomposition of a Hermitian matrix.

    Eigenvalues come back in descending order, ties kept in the order
    ``numpy.linalg.eigh`` produced them.  Eigenvectors are the columns of the
    second return value.
    """
    H = hermitize(M, cfg)
    w, V = np.linalg.eigh(H)
    order = np.argsort(-w, kind="stable")
    return w[order], V[:, order]


def degeneracy_blocks(values, cfg=DEFAULT_TOL):
    """Group descending ``values`` into runs of (numerically) equal entries.

    Consecutive values closer than ``eq_tol * max(1, |values[0]|)`` share a block.
    """
    values = np.asarray(values, dtype=float)
    if values.size == 0:
        return []
    gap = cfg.eq_tol * max(1.0, abs(float(values[0])))
    blocks = [[0]]
    for k in range(1, values.size):
        if abs(values[k - 1] - values[k]) <= gap:
            blocks[-1].append(k)
        else:
            blocks.append([k])
    return blocks


def svd(M):
    """Full SVD, M = U @ diag(s) @ V^dag, singular values descending."""
    M = np.asarray(M, dtype=complex)
    U, s, Vh = np.linalg.svd(M)
    return U, s, dagger(Vh)


def kron(A, B):
    return np.kron(np.asarray(A, dtype=complex), np.asarray(B, dtype=complex))


def nullspace(M, cfg=DEFAULT_TOL):
    """Orthonormal basis (as columns) of the right nullspace of M.

    A right singular vector belongs to the nullspace when its singular value is
    at most ``rank_tol * sigma_max``.  Missing singular values (wide matrices)
    count as zero.
    """
    M = np.asarray(M, dtype=complex)
    cols = M.shape[1]
    if M.size == 0:
        return np.eye(cols, dtype=complex)
    _, s, Vh = np.linalg.svd(M)
    smax = float(s[0]) if s.size else 0.0
    rank = int(np.sum(s > cfg.rank_tol * smax)) if smax > 0 else 0
    return dagger(Vh[rank:])


def _rng(seed):
    return np.random.default_rng(seed)


def ginibre(rows, cols, rng):
    """Complex Ginibre matrix with independent standard normal real/imag parts."""
    return rng.standard_normal((rows, cols)) + 1j * rng.standard_normal((rows, cols))


def random_haar_unitary(N, seed=None, rng=None):
    """Haar-distributed N x N unitary from the QR factorization of a Ginibre matrix.

    Pass either an integer ``seed`` or an existing ``numpy.random.Generator``.
    """
    if N < 1:
        raise ValueError("N must be >= 1")
    rng = rng if rng is not None else _rng(seed)
    Q, R = np.linalg.qr(ginibre(N, N, rng))
    d = np.diag(R)
    phases = d / np.abs(d)
    return Q * phases[np.newaxis, :]


def random_density(D, seed=None, rng=None):
    """Wishart density matrix G G^dag / Tr(G G^dag) with G a D x D Ginibre matrix."""
    if D < 1:
        raise ValueError("D must be >= 1")
    rng = rng if rng is not None else _rng(seed)
    G = ginibre(D, D, rng)
    rho = G @ dagger(G)
    rho = (rho + dagger(rho)) / 2
    return rho / np.trace(rho).real


def random_pure_coefficients(N, seed=None, rng=None):
    """Normalized N x N Ginibre coefficient matrix (Haar-random pure state)."""
    rng = rng if rng is not None else _rng(seed)
    A = ginibre(N, N, rng)
    return A / np.linalg.norm(A)
