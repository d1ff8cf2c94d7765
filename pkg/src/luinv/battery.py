"""Property battery run by ``luinv selftest`` and the acceptance tests.

Every check draws its random inputs from ``numpy.random.default_rng([seed,
check_id, trial])`` so runs are reproducible.  ``trials`` caps the number of
random instances per check; ``None`` runs the full counts.
"""
import itertools
import time
from dataclasses import dataclass

import numpy as np

from .equivalence import (Outcome, _first_mismatch, decide_equivalence, intertwiner_operator,
                          pure_decide, solve_intertwiner)
from .errors import NoIntertwiner
from .invariants import (cubic_tensors, fingerprint, j_moments, metric_tensors, pure_invariants,
                         reduce_trace, structure_constants)
from .linalg import (DEFAULT_TOL, dagger, nullspace, random_density, random_haar_unitary,
                     random_pure_coefficients)
from .oracle import optimize_local, pure_oracle
from .states import (LocalUnitaryPair, apply_local, bell_diagonal, bell_state, eigen_ensemble,
                     product_state, reduced_pair, validate)

DIMS = (2, 3)


@dataclass
class CheckResult:
    name: str
    passed: bool
    detail: str
    seconds: float = 0.0

    def line(self):
        mark = "PASS" if self.passed else "FAIL"
        return f"[{mark}] {self.name}: {self.detail} ({self.seconds:.1f}s)"


def _count(full, trials):
    return full if trials is None else max(1, min(full, trials))


def _rng(seed, check, trial):
    return np.random.default_rng([seed, check, trial])


def _haar_pair(N, rng):
    return LocalUnitaryPair(random_haar_unitary(N, rng=rng), random_haar_unitary(N, rng=rng))


def _nondegenerate_state(N, rng, cfg, generic=False, rejected=None):
    """Wishart draw with a simple spectrum (and nonsingular metrics if ``generic``)."""
    while True:
        rho = validate(random_density(N * N, rng=rng), N, "mixed", cfg)
        fp = fingerprint(rho, cfg)
        ok = all(len(b) == 1 for b in fp.degeneracy_blocks)
        if ok and (not generic or fp.genericity.generic):
            return rho
        if rejected is not None:
            rejected.append(N)


def check_invariance(seed=0, trials=None, cfg=DEFAULT_TOL):
    """Fingerprints of rho and a random local image agree to 1e-8 (relative)."""
    count = _count(100, trials)
    worst = 0.0
    for N in DIMS:
        for t in range(count):
            rng = _rng(seed, 1, N * 1000 + t)
            rho = _nondegenerate_state(N, rng, cfg)
            image = apply_local(rho, _haar_pair(N, rng))
            f, g = fingerprint(rho, cfg), fingerprint(image, cfg)
            for name in ("J", "Omega", "Theta", "X", "Y"):
                a, b = getattr(f, name), getattr(g, name)
                rel = float(np.max(np.abs(a - b) / np.maximum(1.0, np.maximum(abs(a), abs(b)))))
                worst = max(worst, rel)
                if _first_mismatch(name, a, b, 1e-8):
                    return False, f"N={N} trial {t}: {name} differs (rel {rel:.2e})"
    return True, f"{count} states per N, worst relative deviation {worst:.2e}"


def check_round_trip(seed=0, trials=None, cfg=DEFAULT_TOL):
    """Orbit pairs are decided Equivalent with a witness residual below 1e-8."""
    count = _count(100, trials)
    worst = 0.0
    rejected = []
    for N in DIMS:
        for t in range(count):
            rng = _rng(seed, 2, N * 1000 + t)
            rho = _nondegenerate_state(N, rng, cfg, generic=True, rejected=rejected)
            image = apply_local(rho, _haar_pair(N, rng))
            v = decide_equivalence(rho, image, cfg)
            if v.outcome is not Outcome.EQUIVALENT or not v.residual < 1e-8:
                return False, f"N={N} trial {t}: {v.outcome.value} {v.detail}"
            worst = max(worst, v.residual)
    return True, (f"{count} orbit pairs per N, worst residual {worst:.2e} "
                  f"({len(rejected)} non-generic draws skipped)")


def check_separation(seed=0, trials=None, cfg=DEFAULT_TOL, oracle_pairs=20, floor=1e-3):
    """Independent states are Inequivalent; the oracle stays above ``floor``."""
    count = _count(100, trials)
    for N in DIMS:
        for t in range(count):
            rng = _rng(seed, 3, N * 1000 + t)
            a = validate(random_density(N * N, rng=rng), N, "mixed", cfg)
            b = validate(random_density(N * N, rng=rng), N, "mixed", cfg)
            v = decide_equivalence(a, b, cfg)
            if v.outcome is not Outcome.INEQUIVALENT or "invariant" not in v.detail:
                return False, f"N={N} trial {t}: {v.outcome.value} {v.detail}"
    costs = []
    for t in range(_count(oracle_pairs, trials)):
        rng = _rng(seed, 3, 2000 + t)
        a = validate(random_density(4, rng=rng), 2, "mixed", cfg)
        b = validate(random_density(4, rng=rng), 2, "mixed", cfg)
        costs.append(optimize_local(a, b, restarts=20, max_iter=500, seed=seed + t, cfg=cfg).best_cost)
    if min(costs) <= floor:
        return False, f"oracle reached {min(costs):.2e} <= {floor:g} on an independent pair"
    return True, (f"{count} pairs per N Inequivalent; oracle min cost {min(costs):.3f} "
                  f"on {len(costs)} pairs")


def check_moments(seed=0, trials=None, cfg=DEFAULT_TOL):
    """J^s from eigenvalues equals Tr(rho^s); equal moments give equal spectra."""
    count = _count(50, trials)
    worst_j = worst_spec = 0.0
    for N in DIMS:
        for t in range(count):
            rng = _rng(seed, 4, N * 1000 + t)
            rho = validate(random_density(N * N, rng=rng), N, "mixed", cfg)
            J = j_moments(eigen_ensemble(rho, cfg), N)
            P = np.eye(N * N, dtype=complex)
            for s in range(1, N * N + 1):
                P = P @ rho.rho
                worst_j = max(worst_j, abs(J[s - 1] - np.trace(P).real))
            # global (non-local) conjugation keeps every moment
            U = random_haar_unitary(N * N, rng=rng)
            other = validate(U @ rho.rho @ dagger(U), N, "mixed", cfg)
            J2 = j_moments(eigen_ensemble(other, cfg), N)
            if np.max(np.abs(J - J2)) > 1e-9:
                return False, f"N={N} trial {t}: moments of conjugated state differ"
            worst_spec = max(worst_spec, float(np.max(np.abs(
                eigen_ensemble(rho, cfg).lambdas - eigen_ensemble(other, cfg).lambdas))))
    ok = worst_j <= 1e-9 and worst_spec <= 1e-7
    return ok, f"{count} states per N, |J - Tr rho^s| <= {worst_j:.1e}, spectra within {worst_spec:.1e}"


def check_structure_constants(seed=0, trials=None, cfg=DEFAULT_TOL):
    """rho_i rho_j = sum_k C_ij^k rho_k, sum_k C_ij^k = Omega_ij, chain traces reduce."""
    count = _count(50, trials)
    worst = [0.0, 0.0, 0.0]
    for N in DIMS:
        for t in range(count):
            rng = _rng(seed, 5, N * 1000 + t)
            rho = _nondegenerate_state(N, rng, cfg, generic=True)
            rp = reduced_pair(eigen_ensemble(rho, cfg))
            Omega, _ = metric_tensors(rp)
            X, _ = cubic_tensors(rp)
            sc = structure_constants(Omega, X, cfg)
            R = rp.rhos
            prod = np.einsum("iab,jbc->ijac", R, R)
            rebuilt = np.einsum("ijk,kac->ijac", sc.C, R)
            worst[0] = max(worst[0], float(np.max(np.linalg.norm(prod - rebuilt, axis=(2, 3)))))
            worst[1] = max(worst[1], float(np.max(np.abs(sc.C.sum(axis=2) - Omega))))
            n = N * N
            for m in (4, 5):
                for _ in range(10):
                    idx = rng.integers(0, n, size=m)
                    P = np.eye(N, dtype=complex)
                    for i in idx:
                        P = P @ R[i]
                    worst[2] = max(worst[2], abs(reduce_trace(idx, sc, Omega) - np.trace(P)))
    ok = worst[0] < 1e-8 and worst[1] < 1e-8 and worst[2] < 1e-7
    return ok, (f"{count} states per N: product residual {worst[0]:.1e}, "
                f"sum rule {worst[1]:.1e}, chain traces {worst[2]:.1e}")


def _nongeneric_examples():
    w = [0.4, 0.3, 0.2, 0.1]
    product = validate(np.diag(w).astype(complex), 2, "mixed")
    return [("bell-diagonal", bell_diagonal(w)), ("product-diagonal", product)]


def check_non_generic(seed=0, trials=None, cfg=DEFAULT_TOL):
    """Full-rank Bell-diagonal and product-diagonal states are flagged non-generic."""
    notes = []
    for name, rho in _nongeneric_examples():
        fp = fingerprint(rho, cfg)
        g = fp.genericity
        if fp.n != 4 or g.generic or not g.full_rank:
            return False, f"{name}: n={fp.n}, generic={g.generic}"
        image = apply_local(rho, _haar_pair(2, _rng(seed, 6, 0)))
        v = decide_equivalence(rho, image, cfg)
        if v.outcome is not Outcome.INDETERMINATE:
            return False, f"{name}: verdict {v.outcome.value}"
        notes.append(f"{name} sv ratio {g.omega_ratio:.1e}")
    return True, "; ".join(notes) + "; both Indeterminate"


def check_pure(seed=0, trials=None, cfg=DEFAULT_TOL):
    """I_alpha invariance, pure_decide vs pure_oracle agreement, Bell vs |00>."""
    count = _count(100, trials)
    worst = 0.0
    for t in range(count):
        rng = _rng(seed, 7, t)
        N = DIMS[t % 2]
        psi = validate(random_pure_coefficients(N, rng=rng), N, "pure")
        worst = max(worst, float(np.max(np.abs(
            pure_invariants(psi) - pure_invariants(apply_local(psi, _haar_pair(N, rng)))))))
    if worst > 1e-10:
        return False, f"I_alpha moved by {worst:.2e}"
    for t in range(count):
        rng = _rng(seed, 7, 10_000 + t)
        N = DIMS[t % 2]
        psi = validate(random_pure_coefficients(N, rng=rng), N, "pure")
        if t % 4 < 2:
            other = apply_local(psi, _haar_pair(N, rng))
        else:
            other = validate(random_pure_coefficients(N, rng=rng), N, "pure")
        v = pure_decide(psi, other, cfg)
        if (v.outcome is Outcome.EQUIVALENT) != pure_oracle(psi, other, cfg):
            return False, f"pair {t}: pure_decide {v.outcome.value} disagrees with oracle"
        if v.outcome is Outcome.EQUIVALENT and not v.residual < 1e-10:
            return False, f"pair {t}: witness residual {v.residual:.2e}"
    v = pure_decide(bell_state(2), product_state(0, 0, 2), cfg)
    if v.outcome is not Outcome.INEQUIVALENT or v.detail.get("index") != [2]:
        return False, f"Bell vs |00>: {v.outcome.value} {v.detail}"
    a, b = v.detail["values"]
    if abs(a - 0.5) > 1e-12 or abs(b - 1.0) > 1e-12:
        return False, f"Bell vs |00>: I_2 values {a}, {b}"
    return True, f"I_alpha within {worst:.1e}; {count} pairs agree; Bell vs |00> I_2 = 1/2 vs 1"


def check_intertwiner(seed=0, trials=None, cfg=DEFAULT_TOL):
    """Identity, conjugated and unrelated families; scalar V^dag V."""
    count = _count(20, trials)
    worst_act = worst_scalar = 0.0
    for N in DIMS:
        for t in range(count):
            rng = _rng(seed, 8, N * 1000 + t)
            rho = validate(random_density(N * N, rng=rng), N, "mixed", cfg)
            fam = reduced_pair(eigen_ensemble(rho, cfg)).rhos
            v = solve_intertwiner(fam, fam, cfg)
            if np.max(np.abs(v - np.eye(N))) > 1e-8:
                return False, f"N={N} trial {t}: identity family gave v != I"
            g = random_haar_unitary(N, rng=rng)
            fam2 = dagger(g) @ fam @ g
            v = solve_intertwiner(fam, fam2, cfg)
            act = float(np.max(np.linalg.norm(fam @ v - v @ fam2, axis=(1, 2))))
            k = int(np.argmax(np.abs(g)))
            phase = v.reshape(-1)[k] / g.reshape(-1)[k]
            if act >= 1e-8 or np.max(np.abs(v - phase * g)) > 1e-8:
                return False, f"N={N} trial {t}: conjugated family not recovered"
            worst_act = max(worst_act, act)
            basis = nullspace(intertwiner_operator(fam, fam2), cfg)
            if basis.shape[1] == 1:
                V = basis[:, 0].reshape(N, N)
                VdV = dagger(V) @ V
                c = np.trace(VdV).real / N
                worst_scalar = max(worst_scalar, float(np.max(np.abs(VdV - c * np.eye(N)))))
            other = validate(random_density(N * N, rng=rng), N, "mixed", cfg)
            fam3 = reduced_pair(eigen_ensemble(other, cfg)).rhos
            try:
                solve_intertwiner(fam, fam3, cfg)
            except NoIntertwiner:
                pass
            else:
                return False, f"N={N} trial {t}: unrelated families intertwined"
    ok = worst_scalar < 1e-8
    return ok, (f"{count} families per N, action residual {worst_act:.1e}, "
                f"scalar deviation {worst_scalar:.1e}")


def check_tensor_symmetries(seed=0, trials=None, cfg=DEFAULT_TOL):
    """Omega, Theta real symmetric; X, Y cyclic and conjugate-reversal symmetric."""
    count = _count(20, trials)
    worst_sym = worst_cubic = 0.0
    states = []
    for N in DIMS:
        for t in range(count):
            rng = _rng(seed, 9, N * 1000 + t)
            states.append(validate(random_density(N * N, rng=rng), N, "mixed", cfg))
    states += [s for _, s in _nongeneric_examples()]
    for rho in states:
        fp = fingerprint(rho, cfg)
        for M in (fp.Omega, fp.Theta):
            worst_sym = max(worst_sym, float(np.max(np.abs(M - M.T))))
        for T in (fp.X, fp.Y):
            worst_cubic = max(worst_cubic,
                              float(np.max(np.abs(T - np.transpose(T, (1, 2, 0))))),
                              float(np.max(np.abs(np.conj(T) - np.transpose(T, (2, 1, 0))))))
    ok = worst_sym <= 1e-10 and worst_cubic <= 1e-12
    return ok, f"{len(states)} states: metric asymmetry {worst_sym:.1e}, cubic {worst_cubic:.1e}"


CHECKS = [
    ("1 invariance", check_invariance),
    ("2 theorem round-trip", check_round_trip),
    ("3 separation", check_separation),
    ("4 spectrum-moments", check_moments),
    ("5 structure constants", check_structure_constants),
    ("6 non-generic detection", check_non_generic),
    ("7 pure states", check_pure),
    ("8 intertwiner", check_intertwiner),
    ("9 tensor symmetries", check_tensor_symmetries),
]


def run_check(name, fn, seed=0, trials=None, cfg=DEFAULT_TOL):
    start = time.perf_counter()
    try:
        passed, detail = fn(seed=seed, trials=trials, cfg=cfg)
    except Exception as exc:  # a crashing check is a failed check
        passed, detail = False, f"{type(exc).__name__}: {exc}"
    return CheckResult(name, bool(passed), detail, time.perf_counter() - start)


def run_battery(seed=0, trials=None, cfg=DEFAULT_TOL):
    return [run_check(name, fn, seed, trials, cfg) for name, fn in CHECKS]
