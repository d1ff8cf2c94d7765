"""Numerical cross-check: search U(N) x U(N) for a local map between two states.

Minimizes ||(u (x) w) rho (u (x) w)^dag - rho'||_F^2 over updates
u <- exp(iH) u, w <- exp(iH') w with H, H' Hermitian.  The search direction is
the damped Gauss-Newton step in the tangent coordinates (falling back to the
negative gradient), and the step length comes from Armijo backtracking, so the
cost never increases along a restart.
Independent of the invariant machinery in ``equivalence``.
"""
from dataclasses import dataclass, field
from typing import List

import numpy as np

from .linalg import DEFAULT_TOL, close, dagger, random_haar_unitary
from .states import LocalUnitaryPair, schmidt

ARMIJO = 1e-4
MAX_BACKTRACK = 50
STALL_RTOL = 1e-6
STALL_STEPS = 20


@dataclass
class OracleReport:
    best_cost: float  # Frobenius distance, not squared
    best_pair: LocalUnitaryPair
    restarts_used: int
    iterations: int
    converged: bool
    best_restart: int = 0
    traces: List[List[float]] = field(default_factory=list, repr=False)

    def to_dict(self):
        from .equivalence import matrix_to_pairs
        return {"best_cost": self.best_cost, "converged": self.converged,
                "restarts_used": self.restarts_used, "iterations": self.iterations,
                "best_restart": self.best_restart,
                "best_pair": {"u": matrix_to_pairs(self.best_pair.u),
                              "w": matrix_to_pairs(self.best_pair.w)}}


def expi(H):
    """exp(iH) for Hermitian H, exactly unitary up to rounding."""
    lam, V = np.linalg.eigh(H)
    return (V * np.exp(1j * lam)) @ dagger(V)


def _partial_traces(C, N):
    T = C.reshape(N, N, N, N)
    return np.einsum("abcb->ac", T), np.einsum("abad->bd", T)


def cost_and_gradient(u, w, rho, rho2):
    """Squared cost and its Riemannian gradients (Hermitian N x N) for u and w.

    Moving u along exp(-i t G_u) decreases the cost at rate ||G_u||_F^2.
    """
    N = u.shape[0]
    K = np.kron(u, w)
    M = K @ rho @ dagger(K)
    D = M - rho2
    f = float(np.sum(np.abs(D) ** 2))
    C = M @ rho2 - rho2 @ M
    t2, t1 = _partial_traces(C, N)
    return f, -2j * t2, -2j * t1


def _cost(u, w, rho, rho2):
    K = np.kron(u, w)
    return float(np.sum(np.abs(K @ rho @ dagger(K) - rho2) ** 2))


def hermitian_basis(N):
    """Orthonormal basis of N x N Hermitian matrices (Frobenius inner product)."""
    out = []
    for a in range(N):
        E = np.zeros((N, N), dtype=complex)
        E[a, a] = 1
        out.append(E)
    s = 1 / np.sqrt(2)
    for a in range(N):
        for b in range(a + 1, N):
            E = np.zeros((N, N), dtype=complex)
            E[a, b] = E[b, a] = s
            out.append(E)
            E = np.zeros((N, N), dtype=complex)
            E[a, b], E[b, a] = -1j * s, 1j * s
            out.append(E)
    return np.array(out)


def _residual_jacobian(u, w, rho, rho2, basis):
    """Real residual vector and its Jacobian in the tangent coordinates (h_u, h_w)."""
    N = u.shape[0]
    K = np.kron(u, w)
    M = K @ rho @ dagger(K)
    D = M - rho2
    eye = np.eye(N)
    cols = []
    for side in (0, 1):
        for E in basis:
            G = np.kron(E, eye) if side == 0 else np.kron(eye, E)
            cols.append((1j * (G @ M - M @ G)).reshape(-1))
    Jc = np.array(cols).T
    r = np.concatenate([D.real.reshape(-1), D.imag.reshape(-1)])
    J = np.concatenate([Jc.real, Jc.imag])
    return r, J


def _descend(u, w, rho, rho2, max_iter, stop_cost, basis):
    nb = len(basis)
    r, J = _residual_jacobian(u, w, rho, rho2, basis)
    f = _cost(u, w, rho, rho2)
    trace = [f]
    it = 0
    stalled = 0
    mu = None
    while it < max_iter and f > stop_cost:
        grad = 2 * J.T @ r
        if float(grad @ grad) <= 1e-30:
            break
        JTJ = J.T @ J
        scale = np.trace(JTJ) / len(JTJ)
        # adaptive Levenberg-Marquardt damping; global phases span ker J
        mu = 1e-3 * scale if mu is None else mu
        h = -np.linalg.solve(JTJ + mu * np.eye(2 * nb), J.T @ r)
        slope = float(grad @ h)
        if slope >= 0:
            h, slope = -grad, -float(grad @ grad)
        t = 1.0
        for _ in range(MAX_BACKTRACK):
            Hu = np.tensordot(t * h[:nb], basis, axes=1)
            Hw = np.tensordot(t * h[nb:], basis, axes=1)
            un, wn = expi(Hu) @ u, expi(Hw) @ w
            fn = _cost(un, wn, rho, rho2)
            if fn <= f + ARMIJO * t * slope:
                break
            t *= 0.5
        else:
            break
        mu = max(mu / 3, 1e-12 * scale) if t == 1.0 else min(mu * 4, 1e3 * scale)
        it += 1
        u, w = un, wn
        f_old = f
        r, J = _residual_jacobian(u, w, rho, rho2, basis)
        f = fn
        trace.append(f)
        # stuck at a nonzero local minimum
        stalled = stalled + 1 if f_old - f <= STALL_RTOL * f_old else 0
        if stalled >= STALL_STEPS:
            break
    return u, w, f, it, trace


def optimize_local(rho, rho2, restarts=20, max_iter=500, seed=0, cfg=DEFAULT_TOL):
    """Multistart search for (u, w) with (u (x) w) rho (u (x) w)^dag close to rho2.

    Restart 0 starts at the identity pair; restart r > 0 at a Haar pair drawn
    from the stream ``(seed, r)``.  Stops early once a restart converges.
    """
    R = np.asarray(getattr(rho, "rho", rho), dtype=complex)
    R2 = np.asarray(getattr(rho2, "rho", rho2), dtype=complex)
    N = int(round(np.sqrt(R.shape[0])))
    # descend well past the success threshold so reported costs are not borderline
    stop = (1e-3 * cfg.oracle_tol) ** 2
    basis = hermitian_basis(N)
    best = None
    traces = []
    total_iter = 0
    used = 0
    for r in range(restarts):
        if r == 0:
            u0 = np.eye(N, dtype=complex)
            w0 = np.eye(N, dtype=complex)
        else:
            rng = np.random.default_rng([seed, r])
            u0 = random_haar_unitary(N, rng=rng)
            w0 = random_haar_unitary(N, rng=rng)
        u, w, f, it, trace = _descend(u0, w0, R, R2, max_iter, stop, basis)
        used += 1
        total_iter += it
        traces.append(trace)
        if best is None or f < best[0]:
            best = (f, u, w, r)
        if np.sqrt(best[0]) <= cfg.oracle_tol:
            break
    f, u, w, r = best
    # re-project to remove accumulated rounding drift
    pu, _, qu = np.linalg.svd(u)
    pw, _, qw = np.linalg.svd(w)
    pair = LocalUnitaryPair(pu @ qu, pw @ qw)
    cost = float(np.sqrt(max(f, 0.0)))
    return OracleReport(cost, pair, used, total_iter, cost <= cfg.oracle_tol, r, traces)


def pure_oracle(psi, psi2, cfg=DEFAULT_TOL):
    """Exact pure-state test: sorted Schmidt coefficients coincide."""
    a, b = np.sort(schmidt(psi)), np.sort(schmidt(psi2))
    return a.shape == b.shape and all(close(x, y, cfg.eq_tol) for x, y in zip(a, b))
