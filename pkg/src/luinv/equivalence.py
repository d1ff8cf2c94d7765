"""Deciding local-unitary equivalence and building witness unitaries.

For generic full-rank states the reduced families {rho_i} and {theta_i} each
span the full N x N matrix algebra, so by Schur's lemma two matching families
are intertwined by a unitary that is unique up to phase.  Solving for the two
intertwiners gives u and w directly; every witness is checked against the
states before it is returned.
"""
import itertools
import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Optional

import numpy as np

from .errors import (AmbiguousIntertwiner, DimensionMismatch, LUInvError, NoIntertwiner,
                     NotScalar, SearchBudgetExceeded, VerificationFailed)
from .invariants import fingerprint, pure_invariants
from .linalg import DEFAULT_TOL, close, dagger, kron, nullspace
from .states import (BipartiteDensityMatrix, LocalUnitaryPair, PureState, eigen_ensemble,
                     fix_phase, reduced_pair, schmidt_bases)

MAX_PERMUTATIONS = 10_000
NON_GENERIC_REASON = "non-generic, Theorem inapplicable"


class Outcome(str, Enum):
    EQUIVALENT = "Equivalent"
    INEQUIVALENT = "Inequivalent"
    INDETERMINATE = "Indeterminate"


@dataclass
class EquivalenceVerdict:
    outcome: Outcome
    witness: Optional[LocalUnitaryPair] = None
    detail: dict = field(default_factory=dict)
    residual: Optional[float] = None

    def to_dict(self):
        out = {"outcome": self.outcome.value, "detail": _jsonable(self.detail),
               "residual": self.residual}
        if self.witness is not None:
            out["witness"] = {"u": matrix_to_pairs(self.witness.u),
                              "w": matrix_to_pairs(self.witness.w)}
        return out


@dataclass
class FingerprintMatch:
    match: bool
    permutation: Optional[list]
    detail: dict


def matrix_to_pairs(M):
    M = np.asarray(M)
    return np.stack([M.real, M.imag], axis=-1).tolist()


def _jsonable(obj):
    if isinstance(obj, dict):
        return {k: _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, (complex, np.complexfloating)):
        return [float(obj.real), float(obj.imag)]
    if isinstance(obj, np.generic):
        return obj.item()
    if isinstance(obj, np.ndarray):
        return _jsonable(obj.tolist())
    return obj


def _first_mismatch(name, a, b, tol):
    a = np.asarray(a)
    b = np.asarray(b)
    if a.shape != b.shape:
        return {"invariant": name, "index": None, "values": [list(a.shape), list(b.shape)],
                "reason": "shape differs"}
    scale = np.maximum(1.0, np.maximum(np.abs(a), np.abs(b)))
    bad = np.abs(a - b) > tol * scale
    if not bad.any():
        return None
    idx = tuple(int(i) for i in np.argwhere(bad)[0])
    return {"invariant": name, "index": list(idx), "values": [a[idx].item(), b[idx].item()]}


def _block_permutations(blocks):
    per_block = [list(itertools.permutations(b)) for b in blocks]
    for choice in itertools.product(*per_block):
        perm = [0] * sum(len(b) for b in blocks)
        for block, image in zip(blocks, choice):
            for pos, src in zip(block, image):
                perm[pos] = src
        yield perm


def compare_fingerprints(f, g, cfg=DEFAULT_TOL, max_permutations=MAX_PERMUTATIONS):
    """Look for an eigenstate labeling of ``g`` under which it equals ``f``.

    Spectra and moments are compared first.  Then relabelings are tried only
    inside blocks of equal eigenvalues.  The returned permutation ``p`` means
    eigenstate ``p[k]`` of ``g`` plays the role of eigenstate ``k`` of ``f``.
    """
    if f.N != g.N:
        return FingerprintMatch(False, None, {"invariant": "N", "index": None,
                                              "values": [f.N, g.N]})
    if f.n != g.n:
        return FingerprintMatch(False, None, {"invariant": "rank", "index": None,
                                              "values": [f.n, g.n]})
    for name, a, b in (("spectrum", f.spectrum, g.spectrum), ("J", f.J, g.J)):
        miss = _first_mismatch(name, a, b, cfg.eq_tol)
        if miss:
            return FingerprintMatch(False, None, miss)

    blocks = f.degeneracy_blocks
    if [len(b) for b in blocks] != [len(b) for b in g.degeneracy_blocks]:
        return FingerprintMatch(False, None, {"invariant": "degeneracy_blocks", "index": None,
                                              "values": [blocks, g.degeneracy_blocks]})
    total = math.prod(math.factorial(len(b)) for b in blocks)
    if total > max_permutations:
        raise SearchBudgetExceeded(f"{total} relabelings exceed the cap of {max_permutations}")

    first_miss = None
    for perm in _block_permutations(blocks):
        h = g.relabeled(perm)
        miss = None
        for name in ("Omega", "Theta", "X", "Y"):
            miss = _first_mismatch(name, getattr(f, name), getattr(h, name), cfg.eq_tol)
            if miss:
                break
        if miss is None:
            return FingerprintMatch(True, perm, {"permutations_tried": total})
        if first_miss is None:
            first_miss = miss
    return FingerprintMatch(False, None, first_miss)


def intertwiner_operator(family, family2):
    """Stacked linear map V -> (F_i V - V G_i)_i acting on row-major vec(V)."""
    F = np.asarray(family, dtype=complex)
    G = np.asarray(family2, dtype=complex)
    N = F.shape[-1]
    eye = np.eye(N)
    return np.concatenate([np.kron(Fi, eye) - np.kron(eye, Gi.T) for Fi, Gi in zip(F, G)])


def solve_intertwiner(family, family2, cfg=DEFAULT_TOL):
    """Unitary v with family[i] @ v == v @ family2[i] for every i.

    The solution space must be one-dimensional; its generator is rescaled to
    a unitary (projected onto the nearest one) with the largest entry made
    real positive.
    """
    F = np.asarray(family, dtype=complex)
    G = np.asarray(family2, dtype=complex)
    if F.shape != G.shape:
        raise DimensionMismatch(f"family shapes differ: {F.shape} vs {G.shape}")
    N = F.shape[-1]
    basis = nullspace(intertwiner_operator(F, G), cfg)
    dim = basis.shape[1]
    if dim == 0:
        raise NoIntertwiner("intertwiner equations have only the zero solution")
    if dim > 1:
        raise AmbiguousIntertwiner(f"intertwiner space has dimension {dim}")
    V = basis[:, 0].reshape(N, N)
    VdV = dagger(V) @ V
    c = np.trace(VdV).real / N
    dev = float(np.max(np.abs(VdV - c * np.eye(N))))
    if dev > cfg.eq_tol * c:
        raise NotScalar(f"V^dag V deviates from scalar by {dev / c:.3e} (relative)")
    U, _, Vh = np.linalg.svd(V)
    v = fix_phase(U @ Vh)
    action = max(float(np.max(np.abs(Fi @ v - v @ Gi))) for Fi, Gi in zip(F, G))
    if action > cfg.eq_tol:
        raise NoIntertwiner(f"intertwiner action residual {action:.3e}")
    return v


def witness_residual(rho, rho2, lu):
    """Frobenius norm of (u (x) w) rho (u (x) w)^dag - rho2."""
    K = kron(lu.u, lu.w)
    return float(np.linalg.norm(K @ rho.rho @ dagger(K) - rho2.rho))


def extract_witness(rho, rho2, labeling=None, cfg=DEFAULT_TOL):
    """Local unitaries (u, w) mapping ``rho`` to ``rho2``.

    rho_i' = u rho_i u^dag gives rho_i u^dag = u^dag rho_i', so u is the adjoint
    of the rho-family intertwiner; theta_i' = conj(w) theta_i w^T makes w the
    transpose of the theta-family intertwiner.
    """
    ens = eigen_ensemble(rho, cfg)
    ens2 = eigen_ensemble(rho2, cfg)
    if labeling is not None:
        ens2 = ens2.permuted(labeling)
    rp, rp2 = reduced_pair(ens), reduced_pair(ens2)
    v_rho = solve_intertwiner(rp.rhos, rp2.rhos, cfg)
    v_theta = solve_intertwiner(rp.thetas, rp2.thetas, cfg)
    lu = LocalUnitaryPair(fix_phase(dagger(v_rho)), fix_phase(v_theta.T))
    res = witness_residual(rho, rho2, lu)
    if res > cfg.eq_tol:
        raise VerificationFailed(f"assembled witness leaves residual {res:.3e}")
    return lu


def decide_equivalence(rho, rho2, cfg=DEFAULT_TOL, use_oracle=False, oracle_seed=0,
                       restarts=20, max_iter=500, max_permutations=MAX_PERMUTATIONS):
    """Full decision pipeline for two density matrices of the same local dimension."""
    if rho.N != rho2.N:
        raise DimensionMismatch(f"local dimensions differ: {rho.N} vs {rho2.N}")
    f, g = fingerprint(rho, cfg), fingerprint(rho2, cfg)
    verdict = _decide_from_fingerprints(rho, rho2, f, g, cfg, max_permutations)
    if use_oracle:
        from .oracle import optimize_local
        rep = optimize_local(rho, rho2, restarts=restarts, max_iter=max_iter,
                             seed=oracle_seed, cfg=cfg)
        info = {"converged": rep.converged, "best_cost": rep.best_cost,
                "restarts_used": rep.restarts_used}
        if verdict.outcome is not Outcome.INDETERMINATE:
            agrees = rep.converged == (verdict.outcome is Outcome.EQUIVALENT)
            info["agrees"] = agrees
            if not agrees:
                info["flag"] = "oracle disagrees with the invariant verdict"
        verdict.detail["oracle"] = info
    return verdict


LABEL_FREE = ("N", "rank", "spectrum", "J", "degeneracy_blocks")


def _decide_from_fingerprints(rho, rho2, f, g, cfg, max_permutations):
    gen_f, gen_g = f.genericity.generic, g.genericity.generic
    try:
        cmp = compare_fingerprints(f, g, cfg, max_permutations)
    except SearchBudgetExceeded as exc:
        return EquivalenceVerdict(Outcome.INDETERMINATE, detail={"reason": str(exc)})

    if not cmp.match:
        # Label-free invariants, or tensors under a forced labeling, certify
        # inequivalence for any state. Inside degenerate blocks eigenvectors may
        # mix continuously, so a failed permutation search proves nothing.
        simple = all(len(b) == 1 for b in f.degeneracy_blocks)
        if cmp.detail["invariant"] in LABEL_FREE or simple:
            detail = dict(cmp.detail)
            if not (gen_f and gen_g):
                detail["generic"] = [gen_f, gen_g]
            return EquivalenceVerdict(Outcome.INEQUIVALENT, detail=detail)
        return EquivalenceVerdict(Outcome.INDETERMINATE, detail={
            "reason": "degenerate spectrum: no eigenstate permutation matches",
            "first_mismatch": cmp.detail})

    if not (gen_f and gen_g):
        return EquivalenceVerdict(Outcome.INDETERMINATE, detail={
            "reason": NON_GENERIC_REASON,
            "generic": [gen_f, gen_g],
            "omega_sv_ratio": [f.genericity.omega_ratio, g.genericity.omega_ratio],
            "theta_sv_ratio": [f.genericity.theta_ratio, g.genericity.theta_ratio]})

    try:
        lu = extract_witness(rho, rho2, cmp.permutation, cfg)
    except LUInvError as exc:
        return EquivalenceVerdict(Outcome.INDETERMINATE, detail={
            "reason": f"invariants match but witness extraction failed: "
                      f"{type(exc).__name__}: {exc}",
            "labeling": cmp.permutation})
    return EquivalenceVerdict(Outcome.EQUIVALENT, lu,
                              {"labeling": cmp.permutation},
                              witness_residual(rho, rho2, lu))


def pure_witness(psi, psi2):
    """(u, w) with u A w^T == A' built from the two singular value decompositions."""
    Ua, _, Va = schmidt_bases(psi)
    Ub, _, Vb = schmidt_bases(psi2)
    u = Ub @ dagger(Ua)
    w = (Va @ dagger(Vb)).T
    # gauge: fix the phase of u, compensate on w so the product is unchanged
    fixed = fix_phase(u)
    k = int(np.argmax(np.abs(u)))
    phase = fixed.reshape(-1)[k] / u.reshape(-1)[k]
    return LocalUnitaryPair(fixed, w * np.conj(phase))


def pure_residual(psi, psi2, lu):
    return float(np.linalg.norm(lu.u @ psi.A @ lu.w.T - psi2.A))


def pure_decide(psi, psi2, cfg=DEFAULT_TOL):
    """Pure states are LU-equivalent exactly when their Schmidt coefficients agree."""
    if psi.N != psi2.N:
        raise DimensionMismatch(f"local dimensions differ: {psi.N} vs {psi2.N}")
    _, sa, _ = schmidt_bases(psi)
    _, sb, _ = schmidt_bases(psi2)
    la, lb = sa ** 2, sb ** 2
    if not all(close(a, b, cfg.eq_tol) for a, b in zip(la, lb)):
        miss = _first_mismatch("I", pure_invariants(psi), pure_invariants(psi2), cfg.eq_tol)
        if miss is None:
            miss = _first_mismatch("schmidt", la, lb, cfg.eq_tol)
        else:
            miss["index"] = [miss["index"][0] + 1]  # report the power alpha, 1-based
        return EquivalenceVerdict(Outcome.INEQUIVALENT, detail=miss)
    lu = pure_witness(psi, psi2)
    res = pure_residual(psi, psi2, lu)
    if res > cfg.eq_tol:
        return EquivalenceVerdict(Outcome.INDETERMINATE, detail={
            "reason": f"Schmidt values agree but witness residual is {res:.3e}"})
    return EquivalenceVerdict(Outcome.EQUIVALENT, lu, {"schmidt": la.tolist()}, res)


def decide(a, b, cfg=DEFAULT_TOL, **kwargs):
    """Dispatch on state kind."""
    if isinstance(a, PureState) and isinstance(b, PureState):
        return pure_decide(a, b, cfg)
    if isinstance(a, BipartiteDensityMatrix) and isinstance(b, BipartiteDensityMatrix):
        return decide_equivalence(a, b, cfg, **kwargs)
    raise DimensionMismatch("cannot compare a pure state with a density matrix")
