import numpy as np
import pytest

from luinv.equivalence import (Outcome, compare_fingerprints, decide, decide_equivalence,
                               extract_witness, intertwiner_operator, pure_decide,
                               solve_intertwiner, witness_residual)
from luinv.errors import (AmbiguousIntertwiner, DimensionMismatch, NoIntertwiner,
                          SearchBudgetExceeded)
from luinv.invariants import fingerprint
from luinv.linalg import dagger, nullspace, random_density, random_haar_unitary, random_pure_coefficients
from luinv.states import (LocalUnitaryPair, apply_local, bell_diagonal, bell_state,
                          eigen_ensemble, product_state, reduced_pair, validate)

from conftest import haar_pair


def _family(rho):
    return reduced_pair(eigen_ensemble(rho)).rhos


def test_compare_reflexive(wishart7):
    fp = fingerprint(wishart7)
    m = compare_fingerprints(fp, fp)
    assert m.match and m.permutation == [0, 1, 2, 3]


def test_compare_lu_image(wishart7, haar_pair9):
    m = compare_fingerprints(fingerprint(wishart7), fingerprint(apply_local(wishart7, haar_pair9)))
    assert m.match and m.permutation == [0, 1, 2, 3]


def test_compare_independent(wishart7, wishart8):
    m = compare_fingerprints(fingerprint(wishart7), fingerprint(wishart8))
    assert not m.match
    assert m.detail["invariant"] in ("spectrum", "J")


def test_compare_degenerate_block_search():
    # diag(0.3, 0.3, 0.2, 0.2) in the product basis vs. a relabeled copy
    rho = validate(np.diag([0.3, 0.2, 0.3, 0.2]).astype(complex), 2, "mixed")
    swap = np.array([[0, 1], [1, 0]], dtype=complex)
    image = apply_local(rho, LocalUnitaryPair(swap, np.eye(2)))
    m = compare_fingerprints(fingerprint(rho), fingerprint(image))
    assert m.match and sorted(m.permutation) == [0, 1, 2, 3]


def test_compare_budget():
    mm = fingerprint(validate(np.eye(9) / 9, 3, "mixed"))
    with pytest.raises(SearchBudgetExceeded):
        compare_fingerprints(mm, mm)
    v = decide_equivalence(validate(np.eye(9) / 9, 3, "mixed"), validate(np.eye(9) / 9, 3, "mixed"))
    assert v.outcome is Outcome.INDETERMINATE


def test_intertwiner_identity(wishart7):
    fam = _family(wishart7)
    v = solve_intertwiner(fam, fam)
    np.testing.assert_allclose(v, np.eye(2), atol=1e-10)


def test_intertwiner_conjugated(wishart7):
    fam = _family(wishart7)
    g = random_haar_unitary(2, 3)
    fam2 = dagger(g) @ fam @ g
    v = solve_intertwiner(fam, fam2)
    assert np.max(np.linalg.norm(fam @ v - v @ fam2, axis=(1, 2))) < 1e-8
    k = np.argmax(np.abs(g))
    phase = v.reshape(-1)[k] / g.reshape(-1)[k]
    np.testing.assert_allclose(v, phase * g, atol=1e-10)
    basis = nullspace(intertwiner_operator(fam, fam2))
    V = basis[:, 0].reshape(2, 2)
    VdV = dagger(V) @ V
    assert np.max(np.abs(VdV - np.trace(VdV).real / 2 * np.eye(2))) < 1e-8


def test_intertwiner_unrelated(wishart7, wishart8):
    with pytest.raises(NoIntertwiner):
        solve_intertwiner(_family(wishart7), _family(wishart8))


def test_intertwiner_reducible_family():
    fam = np.array([np.diag([0.7, 0.3]), np.diag([0.2, 0.8])], dtype=complex)
    with pytest.raises(AmbiguousIntertwiner):
        solve_intertwiner(fam, fam)


def test_witness_identity(wishart7):
    lu = extract_witness(wishart7, wishart7)
    np.testing.assert_allclose(lu.u, np.eye(2), atol=1e-10)
    np.testing.assert_allclose(lu.w, np.eye(2), atol=1e-10)
    assert witness_residual(wishart7, wishart7, lu) < 1e-10


def test_witness_orbit(wishart7):
    g, h = random_haar_unitary(2, 11), random_haar_unitary(2, 12)
    image = apply_local(wishart7, LocalUnitaryPair(g, h))
    lu = extract_witness(wishart7, image)
    assert witness_residual(wishart7, image, lu) < 1e-8


def test_witness_independent(wishart7, wishart8):
    with pytest.raises(NoIntertwiner):
        extract_witness(wishart7, wishart8)


def test_decide_examples(wishart7, wishart8, haar_pair9):
    v = decide_equivalence(wishart7, apply_local(wishart7, haar_pair9))
    assert v.outcome is Outcome.EQUIVALENT and v.residual < 1e-8
    assert v.witness is not None

    v = decide_equivalence(wishart7, wishart8)
    assert v.outcome is Outcome.INEQUIVALENT
    assert v.detail["invariant"] in ("spectrum", "J") and v.witness is None

    b = bell_diagonal([0.4, 0.3, 0.2, 0.1])
    v = decide_equivalence(b, b)
    assert v.outcome is Outcome.INDETERMINATE
    assert v.detail["reason"] == "non-generic, Theorem inapplicable"


def test_decide_soundness_n3():
    for seed in range(10):
        rho = validate(random_density(9, seed=seed), 3, "mixed")
        image = apply_local(rho, haar_pair(3, 100 + seed))
        v = decide_equivalence(rho, image)
        assert v.outcome is Outcome.EQUIVALENT
        assert witness_residual(rho, image, v.witness) <= 1e-8


def test_decide_non_generic_with_different_spectra_is_inequivalent():
    a = bell_diagonal([0.4, 0.3, 0.2, 0.1])
    b = bell_diagonal([0.5, 0.25, 0.15, 0.1])
    v = decide_equivalence(a, b)
    assert v.outcome is Outcome.INEQUIVALENT
    assert v.detail["invariant"] == "spectrum" and v.detail["generic"] == [False, False]


def test_decide_dimension_mismatch(wishart7):
    with pytest.raises(DimensionMismatch):
        decide_equivalence(wishart7, validate(np.eye(9) / 9, 3, "mixed"))


def test_decide_with_oracle(wishart7, wishart8, haar_pair9):
    v = decide_equivalence(wishart7, apply_local(wishart7, haar_pair9), use_oracle=True)
    assert v.detail["oracle"]["converged"] and v.detail["oracle"]["agrees"]
    v = decide_equivalence(wishart7, wishart8, use_oracle=True, restarts=5)
    assert not v.detail["oracle"]["converged"] and v.detail["oracle"]["agrees"]


def test_verdict_serializes(wishart7, haar_pair9):
    import json
    v = decide_equivalence(wishart7, apply_local(wishart7, haar_pair9))
    rec = json.loads(json.dumps(v.to_dict()))
    assert rec["outcome"] == "Equivalent"
    u = np.array(rec["witness"]["u"])
    assert u.shape == (2, 2, 2)


def test_pure_decide_examples():
    v = pure_decide(bell_state(2), product_state(0, 0))
    assert v.outcome is Outcome.INEQUIVALENT
    assert v.detail["invariant"] == "I" and v.detail["index"] == [2]
    np.testing.assert_allclose(v.detail["values"], [0.5, 1.0])

    psi = validate(random_pure_coefficients(3, seed=4), 3, "pure")
    image = apply_local(psi, haar_pair(3, 5))
    v = pure_decide(psi, image)
    assert v.outcome is Outcome.EQUIVALENT and v.residual < 1e-10
    np.testing.assert_allclose(v.witness.u @ psi.A @ v.witness.w.T, image.A, atol=1e-10)

    P = np.eye(3)[[2, 0, 1]].astype(complex)
    relabeled = apply_local(psi, LocalUnitaryPair(P, P))
    assert pure_decide(psi, relabeled).outcome is Outcome.EQUIVALENT


def test_pure_decide_degenerate_schmidt():
    bell = bell_state(3)
    image = apply_local(bell, haar_pair(3, 8))
    v = pure_decide(bell, image)
    assert v.outcome is Outcome.EQUIVALENT and v.residual < 1e-10


def test_pure_decide_handles_global_phase():
    psi = validate(random_pure_coefficients(2, seed=6), 2, "pure")
    shifted = validate(np.exp(0.7j) * psi.A, 2, "pure")
    v = pure_decide(psi, shifted)
    assert v.outcome is Outcome.EQUIVALENT and v.residual < 1e-10


def test_pure_and_mixed_paths_agree_with_oracle():
    # rank-1 states are non-generic: the mixed path only reports the oracle's view
    for seed in range(4):
        psi = validate(random_pure_coefficients(2, seed=seed), 2, "pure")
        other = (apply_local(psi, haar_pair(2, seed + 50)) if seed % 2 == 0
                 else validate(random_pure_coefficients(2, seed=seed + 50), 2, "pure"))
        pure = pure_decide(psi, other).outcome is Outcome.EQUIVALENT
        v = decide_equivalence(psi.density(), other.density(), use_oracle=True, restarts=10)
        if pure:
            assert v.outcome is Outcome.INDETERMINATE
        else:
            assert v.outcome is Outcome.INEQUIVALENT
        assert v.detail["oracle"]["converged"] == pure


def test_decide_dispatch(wishart7):
    with pytest.raises(DimensionMismatch):
        decide(bell_state(2), wishart7)
