import itertools

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from luinv.errors import SingularOmega
from luinv.invariants import (canonical_serialization, cubic_tensors, fingerprint,
                              fingerprint_key, fingerprint_to_dict, is_generic, j_moments,
                              metric_tensors, pure_invariants, reduce_trace, same_spectrum,
                              structure_constants)
from luinv.linalg import dagger, random_density, random_haar_unitary
from luinv.states import (apply_local, bell_diagonal, bell_state, eigen_ensemble, product_state,
                          reduced_pair, validate)

from conftest import haar_pair

WEIGHTS = [0.4, 0.3, 0.2, 0.1]


def _product_diagonal():
    return validate(np.diag(WEIGHTS).astype(complex), 2, "mixed")


def _parts(rho):
    rp = reduced_pair(eigen_ensemble(rho))
    Omega, Theta = metric_tensors(rp)
    X, Y = cubic_tensors(rp)
    return rp, Omega, Theta, X, Y


def _direct_trace(mats, idx):
    P = np.eye(mats.shape[-1], dtype=complex)
    for i in idx:
        P = P @ mats[i]
    return np.trace(P)


def test_pure_invariants():
    np.testing.assert_allclose(pure_invariants(bell_state(2)), [1, 0.5])
    np.testing.assert_allclose(pure_invariants(product_state(0, 0)), [1, 1])
    psi = validate(np.diag([np.sqrt(0.9), np.sqrt(0.1)]), 2, "pure")
    assert abs(pure_invariants(psi)[1] - 0.82) < 1e-12


def test_same_spectrum_trace_moments():
    A = np.diag([3.0, 1.0, 1.0])
    U = random_haar_unitary(3, 4)
    assert same_spectrum(A, U @ A @ dagger(U))
    assert not same_spectrum(A, np.diag([2.0, 2.0, 1.0]))


def test_j_moments_examples(wishart7):
    J = j_moments(eigen_ensemble(validate(np.eye(4) / 4, 2, "mixed")))
    np.testing.assert_allclose(J, [1, 1 / 4, 1 / 16, 1 / 64])
    np.testing.assert_allclose(j_moments(eigen_ensemble(bell_state(2).density())), [1] * 4)
    J = j_moments(eigen_ensemble(wishart7))
    assert abs(J[1] - np.trace(wishart7.rho @ wishart7.rho).real) < 1e-10


def test_metric_bell_diagonal():
    _, Omega, Theta, X, _ = _parts(bell_diagonal(WEIGHTS))
    np.testing.assert_allclose(Omega, np.full((4, 4), 0.5), atol=1e-12)
    np.testing.assert_allclose(Theta, np.full((4, 4), 0.5), atol=1e-12)
    np.testing.assert_allclose(X, np.full((4, 4, 4), 0.25), atol=1e-12)


def test_metric_product_diagonal():
    _, Omega, _, _, _ = _parts(_product_diagonal())
    # eigenvector i is |k l> with (k, l) = divmod(i, 2)
    expected = np.array([[float(i // 2 == j // 2) for j in range(4)] for i in range(4)])
    np.testing.assert_allclose(Omega, expected, atol=1e-12)


def test_metric_wishart(wishart7):
    _, Omega, Theta, _, _ = _parts(wishart7)
    np.testing.assert_allclose(Omega, Omega.T, atol=1e-15)
    assert np.all(np.diag(Omega) >= 0.5 - 1e-12) and np.all(np.diag(Omega) <= 1 + 1e-12)
    assert np.all(np.diag(Theta) >= 0.5 - 1e-12) and np.all(np.diag(Theta) <= 1 + 1e-12)


def test_metric_padding():
    rho = validate(np.diag([0.6, 0.4, 0, 0]).astype(complex), 2, "mixed")
    rp = reduced_pair(eigen_ensemble(rho))
    Omega, Theta = metric_tensors(rp, n=2, N=2, padded=True)
    assert Omega.shape == (4, 4)
    np.testing.assert_array_equal(Omega[2:, :], 0)
    np.testing.assert_array_equal(Theta[:, 2:], 0)


def test_cubic_wishart(wishart7):
    rp, _, _, X, Y = _parts(wishart7)
    for T in (X, Y):
        np.testing.assert_allclose(np.conj(T), np.transpose(T, (2, 1, 0)), atol=1e-12)
        np.testing.assert_allclose(T, np.transpose(T, (1, 2, 0)), atol=1e-12)
        d = np.array([T[i, i, i] for i in range(4)])
        assert np.all(np.abs(d.imag) < 1e-15) and np.all(d.real >= 0.25 - 1e-12)
    for i, j, k in itertools.product(range(4), repeat=3):
        assert abs(X[i, j, k] - _direct_trace(rp.rhos, (i, j, k))) < 1e-14


def test_genericity_examples(wishart7):
    assert not is_generic(*_parts(bell_diagonal(WEIGHTS))[1:3], N=2).generic
    assert not is_generic(*_parts(_product_diagonal())[1:3], N=2).generic
    rep = is_generic(*_parts(wishart7)[1:3], N=2)
    assert rep.generic and rep.full_rank and rep.omega_ratio > 1e-8
    assert np.linalg.det(_parts(wishart7)[1]) != 0


def test_rank_deficient_is_not_generic():
    rho = validate(random_density(4, seed=1), 2, "mixed")
    ens = eigen_ensemble(rho)
    v = ens.coeff_mats[:3].reshape(3, -1)
    low = validate(np.einsum("k,ka,kb->ab", [0.5, 0.3, 0.2], v, v.conj()), 2, "mixed")
    fp = fingerprint(low)
    assert fp.n == 3 and not fp.genericity.full_rank and not fp.genericity.generic


def test_structure_constants(wishart7):
    rp, Omega, _, X, _ = _parts(wishart7)
    sc = structure_constants(Omega, X)
    np.testing.assert_allclose(sc.C.sum(axis=2), Omega, atol=1e-8)
    prod = np.einsum("iab,jbc->ijac", rp.rhos, rp.rhos)
    rebuilt = np.einsum("ijk,kac->ijac", sc.C, rp.rhos)
    assert np.max(np.abs(prod - rebuilt)) < 1e-8
    np.testing.assert_array_equal(sc.f, -np.swapaxes(sc.f, 0, 1))


def test_structure_constants_singular():
    _, Omega, _, X, _ = _parts(bell_diagonal(WEIGHTS))
    with pytest.raises(SingularOmega):
        structure_constants(Omega, X)


def test_reduce_trace_examples(wishart7):
    rp, Omega, _, X, _ = _parts(wishart7)
    sc = structure_constants(Omega, X)
    assert reduce_trace((1, 2), sc, Omega) == Omega[1, 2]
    assert abs(reduce_trace((0, 3, 2), sc, Omega) - X[0, 3, 2]) < 1e-8
    idx = (0, 1, 2, 3, 0)
    assert abs(reduce_trace(idx, sc, Omega) - _direct_trace(rp.rhos, idx)) < 1e-7
    with pytest.raises(ValueError):
        reduce_trace((0,), sc, Omega)


def test_reduce_trace_all_short_chains():
    rho = validate(random_density(4, seed=21), 2, "mixed")
    rp, Omega, _, X, _ = _parts(rho)
    sc = structure_constants(Omega, X)
    rng = np.random.default_rng(0)
    for m in range(2, 7):
        for _ in range(30):
            idx = rng.integers(0, 4, size=m)
            assert abs(reduce_trace(idx, sc, Omega) - _direct_trace(rp.rhos, idx)) < 1e-9


def test_fingerprint_maximally_mixed():
    fp = fingerprint(validate(np.eye(4) / 4, 2, "mixed"))
    np.testing.assert_allclose(fp.J, [1, 1 / 4, 1 / 16, 1 / 64])
    assert fp.degeneracy_blocks == [[0, 1, 2, 3]]
    assert not fp.genericity.generic


def test_fingerprint_invariance(wishart7, haar_pair9):
    f = fingerprint(wishart7)
    g = fingerprint(apply_local(wishart7, haar_pair9))
    for name in ("spectrum", "J", "Omega", "Theta", "X", "Y"):
        a, b = getattr(f, name), getattr(g, name)
        assert np.all(np.abs(a - b) <= 1e-8 * np.maximum(1, np.maximum(abs(a), abs(b)))), name


def test_fingerprint_separates(wishart7, wishart8):
    assert abs(fingerprint(wishart7).J[1] - fingerprint(wishart8).J[1]) > 1e-3


@settings(max_examples=25, deadline=None)
@given(seed=st.integers(0, 10**6), N=st.sampled_from([2, 3]))
def test_fingerprint_invariance_property(seed, N):
    rho = validate(random_density(N * N, seed=seed), N, "mixed")
    f = fingerprint(rho)
    g = fingerprint(apply_local(rho, haar_pair(N, seed + 1)))
    for name in ("J", "Omega", "Theta", "X", "Y"):
        np.testing.assert_allclose(getattr(f, name), getattr(g, name), rtol=0, atol=1e-8)
    P = np.eye(N * N, dtype=complex)
    for s in range(N * N):
        P = P @ rho.rho
        assert abs(f.J[s] - np.trace(P).real) < 1e-9


def test_canonical_serialization(wishart7):
    fp = fingerprint(wishart7)
    text = canonical_serialization(fp)
    lines = text.splitlines()
    assert [ln.split("=")[0] for ln in lines] == ["N", "n", "spectrum", "J", "Omega", "Theta",
                                                   "X", "Y"]
    assert len(lines[4].split("=")[1].split(";")) == 16
    assert len(lines[6].split("=")[1].split(";")) == 64
    assert "-0.0000000000" not in text
    assert fingerprint_key(fp) == fingerprint_key(fingerprint(wishart7))
    d = fingerprint_to_dict(fp)
    assert d["key"] == fingerprint_key(fp) and d["generic"] is True


def test_relabeled_permutes_consistently(wishart7):
    fp = fingerprint(wishart7)
    perm = [2, 0, 3, 1]
    h = fp.relabeled(perm)
    assert h.Omega[1, 2] == fp.Omega[0, 3]
    assert h.X[0, 1, 2] == fp.X[2, 0, 3]
