"""Local-unitary invariants of bipartite states and the canonical fingerprint."""
import hashlib
from dataclasses import dataclass
from typing import List, Optional

import numpy as np

from .errors import SingularOmega
from .linalg import DEFAULT_TOL
from .states import EigenEnsemble, ReducedPair, eigen_ensemble, reduced_pair, schmidt

ROUND_DECIMALS = 10


@dataclass(frozen=True)
class GenericityReport:
    generic: bool
    omega_ratio: float  # sigma_min / sigma_max
    theta_ratio: float
    full_rank: bool


@dataclass(frozen=True)
class InvariantFingerprint:
    N: int
    n: int
    spectrum: np.ndarray
    J: np.ndarray
    Omega: np.ndarray
    Theta: np.ndarray
    X: np.ndarray
    Y: np.ndarray
    degeneracy_blocks: List[List[int]]
    genericity: Optional[GenericityReport] = None

    def relabeled(self, perm):
        """Fingerprint after moving eigenstate perm[k] to position k."""
        p = np.asarray(perm, dtype=int)
        ix2 = np.ix_(p, p)
        ix3 = np.ix_(p, p, p)
        return InvariantFingerprint(self.N, self.n, self.spectrum[p], self.J,
                                    self.Omega[ix2], self.Theta[ix2],
                                    self.X[ix3], self.Y[ix3],
                                    self.degeneracy_blocks, self.genericity)

    def canonical_text(self):
        return canonical_serialization(self)

    def key(self):
        return fingerprint_key(self)


@dataclass(frozen=True)
class StructureConstants:
    C: np.ndarray  # C[i, j, k]: rho_i rho_j = sum_k C[i, j, k] rho_k
    f: np.ndarray  # C[i, j, k] - C[j, i, k]


def pure_invariants(psi):
    """I_alpha = Tr (A A^dag)^alpha for alpha = 1..N."""
    lam = schmidt(psi)
    return np.array([np.sum(lam ** a) for a in range(1, psi.N + 1)])


def trace_moments(M, m=None):
    """Tr(M^a) for a = 1..m (default: the matrix size)."""
    M = np.asarray(M, dtype=complex)
    m = m or M.shape[0]
    out = []
    P = np.eye(M.shape[0], dtype=complex)
    for _ in range(m):
        P = P @ M
        out.append(np.trace(P))
    return np.array(out)


def same_spectrum(A, B, cfg=DEFAULT_TOL):
    """Unitary similarity test for Hermitian A, B via Tr A^a = Tr B^a, a = 1..m."""
    A = np.asarray(A)
    B = np.asarray(B)
    if A.shape != B.shape:
        return False
    ta, tb = trace_moments(A), trace_moments(B)
    return all(abs(a - b) <= cfg.eq_tol * max(1.0, abs(a), abs(b)) for a, b in zip(ta, tb))


def j_moments(ens, N=None):
    """J^s = sum_i lambda_i^s for s = 1..N^2; equals Tr(rho^s)."""
    N = N or ens.N
    s = np.arange(1, N * N + 1)
    return np.array([np.sum(ens.lambdas ** k) for k in s], dtype=float)


def _gram(mats):
    # Tr(M_i M_j) for Hermitian M_i: sum_ab M_i[a,b] M_j[b,a]
    return np.einsum("iab,jba->ij", mats, mats)


def metric_tensors(rp, n=None, N=None, padded=False):
    """Omega_ij = Tr(rho_i rho_j) and Theta_ij = Tr(theta_i theta_j), real symmetric.

    With ``padded=True`` both are embedded in N^2 x N^2 zero matrices.
    """
    Omega = _gram(rp.rhos).real
    Theta = _gram(rp.thetas).real
    Omega = (Omega + Omega.T) / 2
    Theta = (Theta + Theta.T) / 2
    if padded:
        n = n if n is not None else Omega.shape[0]
        N = N if N is not None else rp.rhos.shape[-1]
        full = N * N
        Op = np.zeros((full, full))
        Tp = np.zeros((full, full))
        Op[:n, :n] = Omega
        Tp[:n, :n] = Theta
        return Op, Tp
    return Omega, Theta


def _cubic(mats):
    pair = np.einsum("iab,jbc->ijac", mats, mats)
    return np.einsum("ijac,kca->ijk", pair, mats)


def cubic_tensors(rp, n=None):
    """X_ijk = Tr(rho_i rho_j rho_k), Y_ijk = Tr(theta_i theta_j theta_k)."""
    return _cubic(rp.rhos), _cubic(rp.thetas)


def _sv_ratio(M):
    if M.size == 0:
        return 0.0
    s = np.linalg.svd(M, compute_uv=False)
    return float(s[-1] / s[0]) if s[0] > 0 else 0.0


def is_generic(Omega, Theta, cfg=DEFAULT_TOL, N=None):
    """Both metric tensors nonsingular (by singular-value ratio) and full rank n = N^2."""
    ro, rt = _sv_ratio(np.asarray(Omega)), _sv_ratio(np.asarray(Theta))
    n = np.asarray(Omega).shape[0]
    full = True if N is None else n == N * N
    return GenericityReport(bool(full and ro > cfg.rank_tol and rt > cfg.rank_tol), ro, rt, full)


def structure_constants(Omega, X, cfg=DEFAULT_TOL):
    """C_ij^l = sum_k X_ijk (Omega^-1)_lk, the product table of the rho_i family."""
    Omega = np.asarray(Omega)
    X = np.asarray(X)
    n = Omega.shape[0]
    if n == 0 or _sv_ratio(Omega) <= cfg.rank_tol:
        raise SingularOmega("metric tensor is singular; structure constants undefined")
    # X[i,j,:] = C[i,j,:] @ Omega, Omega symmetric
    C = np.linalg.solve(Omega, X.reshape(n * n, n).T).T.reshape(n, n, n)
    return StructureConstants(C, C - np.swapaxes(C, 0, 1))


def reduce_trace(indices, sc, Omega):
    """Tr(rho_{i1} ... rho_{im}) rebuilt from structure constants and the metric.

    Indices are 0-based; at least two are required.
    """
    idx = list(indices)
    if len(idx) < 2:
        raise ValueError("need at least two indices")
    Omega = np.asarray(Omega)
    if len(idx) == 2:
        return complex(Omega[idx[0], idx[1]])
    v = sc.C[idx[0], idx[1], :]
    for i in idx[2:-1]:
        v = v @ sc.C[:, i, :]
    return complex(v @ Omega[:, idx[-1]])


def fingerprint(state, cfg=DEFAULT_TOL):
    """All invariants of a validated state under the canonical eigenstate labeling."""
    ens = eigen_ensemble(state, cfg)
    return fingerprint_from_ensemble(ens, cfg)


def fingerprint_from_ensemble(ens: EigenEnsemble, cfg=DEFAULT_TOL):
    rp: ReducedPair = reduced_pair(ens)
    Omega, Theta = metric_tensors(rp)
    X, Y = cubic_tensors(rp)
    return InvariantFingerprint(
        N=ens.N, n=ens.n, spectrum=ens.lambdas.copy(), J=j_moments(ens),
        Omega=Omega, Theta=Theta, X=X, Y=Y,
        degeneracy_blocks=[list(b) for b in ens.degeneracy_blocks],
        genericity=is_generic(Omega, Theta, cfg, ens.N),
    )


def _fmt(x):
    s = f"{x:.{ROUND_DECIMALS}f}"
    if s.lstrip("-").strip("0.") == "":
        s = s.lstrip("-")
    return s


def _real_list(a):
    return [_fmt(float(x)) for x in np.asarray(a, dtype=float).reshape(-1)]


def _complex_list(a):
    return [f"{_fmt(float(z.real))},{_fmt(float(z.imag))}" for z in np.asarray(a).reshape(-1)]


def canonical_serialization(fp):
    """Rounded text form in the fixed order N, n, spectrum, J, Omega, Theta, X, Y.

    One line per field; arrays are flattened row-major, reals are printed with
    ten decimals and complex entries as ``re,im``.
    """
    lines = [
        f"N={fp.N}",
        f"n={fp.n}",
        "spectrum=" + ";".join(_real_list(fp.spectrum)),
        "J=" + ";".join(_real_list(fp.J)),
        "Omega=" + ";".join(_real_list(fp.Omega)),
        "Theta=" + ";".join(_real_list(fp.Theta)),
        "X=" + ";".join(_complex_list(fp.X)),
        "Y=" + ";".join(_complex_list(fp.Y)),
    ]
    return "\n".join(lines) + "\n"


def fingerprint_key(fp):
    return hashlib.sha256(canonical_serialization(fp).encode("ascii")).hexdigest()


def fingerprint_to_dict(fp):
    """JSON-ready dict with values rounded to ROUND_DECIMALS."""
    r = lambda a: (np.round(np.asarray(a, dtype=float), ROUND_DECIMALS) + 0.0).tolist()
    c = lambda a: (np.stack([np.round(np.real(a), ROUND_DECIMALS),
                            np.round(np.imag(a), ROUND_DECIMALS)], axis=-1) + 0.0).tolist()
    out = {
        "key": fingerprint_key(fp),
        "N": fp.N,
        "n": fp.n,
        "spectrum": r(fp.spectrum),
        "J": r(fp.J),
        "Omega": r(fp.Omega),
        "Theta": r(fp.Theta),
        "X": c(fp.X),
        "Y": c(fp.Y),
        "degeneracy_blocks": fp.degeneracy_blocks,
    }
    if fp.genericity is not None:
        g = fp.genericity
        out["generic"] = g.generic
        out["diagnostics"] = {"full_rank": g.full_rank,
                              "omega_sv_ratio": g.omega_ratio,
                              "theta_sv_ratio": g.theta_ratio}
    return out
