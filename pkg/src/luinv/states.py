"""Bipartite state types, validation and the eigen-ensemble decomposition.

Basis convention: the product basis vector |i> (x) |j> of H (x) H sits at row
``N*i + j`` (0-based).  A vector of length N**2 therefore reshapes row-major
into an N x N coefficient matrix ``A[i, j]``, and the local action
(u (x) w)|psi> becomes ``A -> u @ A @ w.T``.
"""
from dataclasses import dataclass, field
from typing import List

import numpy as np

from .errors import BadDimension, DimensionMismatch, NotNormalized, NotPSD
from .linalg import DEFAULT_TOL, dagger, degeneracy_blocks, hermitian_eig, hermitize, kron, svd

STATE_TOL = 1e-10


@dataclass(frozen=True)
class PureState:
    N: int
    A: np.ndarray

    @property
    def vector(self):
        return self.A.reshape(-1)

    def density(self):
        v = self.vector
        return BipartiteDensityMatrix(self.N, np.outer(v, v.conj()))


@dataclass(frozen=True)
class BipartiteDensityMatrix:
    N: int
    rho: np.ndarray


@dataclass(frozen=True)
class EigenEnsemble:
    N: int
    n: int
    lambdas: np.ndarray
    coeff_mats: np.ndarray  # shape (n, N, N)
    degeneracy_blocks: List[List[int]] = field(default_factory=list)

    def reconstruct(self):
        vecs = self.coeff_mats.reshape(self.n, -1)
        return np.einsum("k,ka,kb->ab", self.lambdas, vecs, vecs.conj())

    def permuted(self, perm):
        """Relabel eigenstates: entry k of the result is entry perm[k] of self."""
        perm = list(perm)
        return EigenEnsemble(self.N, self.n, self.lambdas[perm], self.coeff_mats[perm],
                             self.degeneracy_blocks)


@dataclass(frozen=True)
class ReducedPair:
    rhos: np.ndarray    # (n, N, N), A_i A_i^dag
    thetas: np.ndarray  # (n, N, N), A_i^dag A_i


@dataclass(frozen=True)
class LocalUnitaryPair:
    u: np.ndarray
    w: np.ndarray

    def __post_init__(self):
        for name in ("u", "w"):
            M = np.asarray(getattr(self, name), dtype=complex)
            if M.ndim != 2 or M.shape[0] != M.shape[1]:
                raise BadDimension(f"{name} must be square, got {M.shape}")
            if not np.allclose(dagger(M) @ M, np.eye(M.shape[0]), atol=STATE_TOL, rtol=0):
                raise ValueError(f"{name} is not unitary")
            object.__setattr__(self, name, M)
        if self.u.shape != self.w.shape:
            raise DimensionMismatch("u and w must have the same size")

    @property
    def N(self):
        return self.u.shape[0]

    def operator(self):
        return kron(self.u, self.w)


def _local_dim(D):
    N = int(round(np.sqrt(D)))
    if N * N != D:
        raise BadDimension(f"{D} is not a perfect square")
    return N


def validate(raw, N=None, kind="mixed", cfg=DEFAULT_TOL):
    """Check a raw matrix and wrap it as a PureState or BipartiteDensityMatrix.

    ``kind="pure"`` expects the N x N coefficient matrix; ``kind="mixed"`` the
    N^2 x N^2 density matrix.  Hermiticity violations below tolerance are
    symmetrized away.
    """
    M = np.asarray(raw, dtype=complex)
    if kind == "pure":
        if M.ndim == 1:
            N = N or _local_dim(M.size)
            M = M.reshape(N, N) if M.size == N * N else M
        if M.ndim != 2 or M.shape[0] != M.shape[1] or (N is not None and M.shape[0] != N):
            raise BadDimension(f"pure state needs an {N} x {N} coefficient matrix, got {M.shape}")
        N = M.shape[0]
        norm2 = float(np.sum(np.abs(M) ** 2))
        if abs(norm2 - 1.0) > STATE_TOL:
            raise NotNormalized(f"sum |a_ij|^2 = {norm2!r}")
        return PureState(N, M.copy())
    if kind != "mixed":
        raise ValueError(f"unknown kind {kind!r}")

    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise BadDimension(f"density matrix must be square, got {M.shape}")
    if N is None:
        N = _local_dim(M.shape[0])
    if M.shape[0] != N * N:
        raise BadDimension(f"expected {N * N} x {N * N} for N={N}, got {M.shape}")
    H = hermitize(M, cfg)
    tr = np.trace(H).real
    if abs(tr - 1.0) > STATE_TOL:
        raise NotNormalized(f"trace = {tr!r}")
    lmin = float(np.linalg.eigvalsh(H)[0])
    if lmin < -STATE_TOL:
        raise NotPSD(f"smallest eigenvalue {lmin:.3e}")
    return BipartiteDensityMatrix(N, H)


def fix_phase(M):
    """Multiply by a global phase so the largest-magnitude entry is real positive."""
    flat = M.reshape(-1)
    k = int(np.argmax(np.abs(flat)))
    if abs(flat[k]) == 0:
        return M
    return M * (abs(flat[k]) / flat[k])


def eigen_ensemble(state, cfg=DEFAULT_TOL):
    """Nonzero eigenvalues (descending) and eigenvectors reshaped to N x N matrices."""
    if isinstance(state, PureState):
        state = state.density()
    N = state.N
    lam, V = hermitian_eig(state.rho, cfg)
    keep = lam > cfg.rank_tol
    lam = lam[keep]
    mats = np.array([fix_phase(V[:, k].reshape(N, N)) for k in np.flatnonzero(keep)])
    if mats.size == 0:
        mats = np.zeros((0, N, N), dtype=complex)
    return EigenEnsemble(N, int(lam.size), lam, mats, degeneracy_blocks(lam, cfg))


def reduced_pair(ens):
    A = ens.coeff_mats
    Ad = dagger(A)
    return ReducedPair(A @ Ad, Ad @ A)


def apply_local(state, lu):
    """Act with u (x) w.

    Pure states transform as A -> u A w^T, density matrices as
    rho -> (u (x) w) rho (u (x) w)^dag; the two agree under |psi><psi|.
    """
    if lu.N != state.N:
        raise DimensionMismatch(f"local unitaries are {lu.N}-dimensional, state has N={state.N}")
    if isinstance(state, PureState):
        return validate(lu.u @ state.A @ lu.w.T, state.N, "pure")
    K = lu.operator()
    return validate(K @ state.rho @ dagger(K), state.N, "mixed")


def schmidt(psi):
    """Schmidt coefficients (eigenvalues of A A^dag), descending."""
    s = np.linalg.svd(psi.A, compute_uv=False)
    return s ** 2


def schmidt_bases(psi):
    """Return (U, s, V) with A = U diag(s) V^dag."""
    return svd(psi.A)


def bell_state(N=2):
    """Maximally entangled coefficient matrix I/sqrt(N)."""
    return PureState(N, np.eye(N, dtype=complex) / np.sqrt(N))


def product_state(i, j, N=2):
    A = np.zeros((N, N), dtype=complex)
    A[i, j] = 1.0
    return PureState(N, A)


def bell_basis():
    """The four two-qubit Bell vectors as columns, in the order Phi+, Phi-, Psi+, Psi-."""
    s = 1 / np.sqrt(2)
    return np.array([[s, s, 0, 0],
                     [0, 0, s, s],
                     [0, 0, s, -s],
                     [s, -s, 0, 0]], dtype=complex)


def bell_diagonal(weights):
    """Two-qubit state diagonal in the Bell basis."""
    B = bell_basis()
    w = np.asarray(weights, dtype=float)
    return validate(B @ np.diag(w) @ B.conj().T, 2, "mixed")
