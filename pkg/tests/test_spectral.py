import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from oracles import sqrt_perturbation_instance, wedin_instance
from probmat.spectral import (
    ProjectionBasis,
    apply_block_projector,
    op_norm,
    spectral_norm,
    sqrt_perturbation_gap,
    truncated_svd,
    wedin_rank1_gap,
)

finite = st.floats(-10, 10, allow_nan=False, allow_infinity=False)


def _square(n):
    return arrays(np.float64, (n, n), elements=finite)


# -- truncated_svd --------------------------------------------------------------

def test_diagonal_example():
    svd = truncated_svd(np.diag([3.0, 2.0, 1.0]), 2)
    np.testing.assert_allclose(svd.S, [3, 2])


def test_full_rank_reconstructs():
    A = np.random.default_rng(0).standard_normal((20, 20))
    err = np.linalg.norm(truncated_svd(A, 20).reconstruct() - A)
    assert err <= 1e-8 * np.linalg.norm(A)


def test_rank_two_exact():
    rng = np.random.default_rng(1)
    x, y = rng.standard_normal(15), rng.standard_normal(15)
    A = np.outer(x, x) + np.outer(y, y)
    assert np.abs(truncated_svd(A, 2).reconstruct() - A).max() <= 1e-8


def test_sign_convention():
    svd = truncated_svd(np.random.default_rng(2).standard_normal((8, 6)), 4)
    for col in svd.U.T:
        assert col[np.argmax(np.abs(col))] > 0


def test_rejects_bad_input():
    with pytest.raises(ValueError):
        truncated_svd(np.array([[np.nan, 0], [0, 1]]), 1)
    with pytest.raises(ValueError):
        truncated_svd(np.eye(3), 4)


@settings(max_examples=50, deadline=None)
@given(seed=st.integers(0, 2**31), n=st.integers(3, 12), r=st.integers(1, 3), scale=st.floats(1e-3, 1.0))
def test_truncation_optimal_under_perturbation(seed, n, r, scale):
    rng = np.random.default_rng(seed)
    A = rng.standard_normal((n, n))
    svd = truncated_svd(A, r)
    base = np.linalg.norm(A - svd.reconstruct())
    U2 = svd.U + scale * rng.standard_normal(svd.U.shape)
    V2 = svd.V + scale * rng.standard_normal(svd.V.shape)
    S2 = svd.S * (1 + scale * rng.standard_normal(r))
    other = np.linalg.norm(A - (U2 * S2) @ V2.T)
    assert other >= base - 1e-8


@settings(max_examples=50, deadline=None)
@given(A=_square(6), r=st.integers(0, 6))
def test_residual_matches_tail_energy(A, r):
    s = np.linalg.svd(A, compute_uv=False)
    resid = np.linalg.norm(A - truncated_svd(A, r).reconstruct())
    assert abs(resid - np.sqrt(np.sum(s[r:] ** 2))) <= 1e-7 * (1 + s[0])


# -- block projector ----------------------------------------------------------

def _random_basis(rng, M, nbins, rmax=3):
    perm = rng.permutation(M)
    cuts = np.sort(rng.choice(np.arange(1, M), size=nbins - 1, replace=False))
    members, blocks = [], []
    for idx in np.split(perm, cuts):
        r = int(rng.integers(0, min(rmax, idx.size) + 1))
        Q, _ = np.linalg.qr(rng.standard_normal((idx.size, idx.size)))
        members.append(idx)
        blocks.append(Q[:, :r])
    return ProjectionBasis(M, members, blocks)


def test_identity_blocks_are_identity():
    M = 9
    members = [np.arange(0, 4), np.arange(4, 9)]
    basis = ProjectionBasis(M, members, [np.eye(4), np.eye(5)])
    A = np.random.default_rng(3).standard_normal((M, M))
    np.testing.assert_allclose(apply_block_projector(basis, A), A, atol=1e-12)


def test_empty_basis_gives_zero():
    A = np.ones((5, 5))
    assert not np.any(apply_block_projector(ProjectionBasis(5), A))


def test_single_bin_projection_error():
    rng = np.random.default_rng(4)
    G = rng.standard_normal((30, 30))
    A = G + G.T
    R = 3
    V = truncated_svd(A, R).U
    basis = ProjectionBasis(30, [np.arange(30)], [V])
    PAP = apply_block_projector(basis, A)
    s = np.linalg.svd(A, compute_uv=False)
    assert op_norm(PAP - A) <= 2 * s[R] + 1e-10
    # equals the best rank-R approximation of a symmetric matrix
    w, Q = np.linalg.eigh(A)
    top = np.argsort(-np.abs(w))[:R]
    np.testing.assert_allclose(PAP, (Q[:, top] * w[top]) @ Q[:, top].T, atol=1e-9)


@settings(max_examples=40, deadline=None)
@given(seed=st.integers(0, 2**31), M=st.integers(4, 20), nbins=st.integers(1, 4))
def test_projector_idempotent_and_symmetric(seed, M, nbins):
    rng = np.random.default_rng(seed)
    basis = _random_basis(rng, M, min(nbins, M - 1) or 1)
    G = rng.standard_normal((M, M))
    A = G + G.T
    once = apply_block_projector(basis, A)
    np.testing.assert_allclose(apply_block_projector(basis, once), once, atol=1e-8)
    np.testing.assert_allclose(once, once.T, atol=1e-10)


def test_projector_matches_dense_product():
    rng = np.random.default_rng(5)
    basis = _random_basis(rng, 12, 3)
    A = rng.standard_normal((12, 12))
    P = basis.projector()
    np.testing.assert_allclose(apply_block_projector(basis, A), P @ A @ P, atol=1e-12)


def test_basis_validation():
    with pytest.raises(ValueError):
        ProjectionBasis(4, [np.arange(3)], [np.eye(2)])
    with pytest.raises(ValueError):
        ProjectionBasis(4, [np.arange(2), np.arange(1, 3)], [np.eye(2), np.eye(2)])
    with pytest.raises(ValueError):
        ProjectionBasis(2, [np.arange(2)], [np.ones((2, 1))])
    with pytest.raises(ValueError):
        apply_block_projector(ProjectionBasis(3), np.eye(4))


# -- perturbation lemmas ------------------------------------------------------

def test_sqrt_gap_identity_projector():
    U = np.random.default_rng(6).standard_normal((5, 2))
    lhs, rhs = sqrt_perturbation_gap(U, np.eye(5))
    assert lhs == pytest.approx(0, abs=1e-24) and rhs == pytest.approx(0, abs=1e-12)


def test_sqrt_gap_zero_projector():
    U = np.random.default_rng(7).standard_normal((5, 2))
    lhs, rhs = sqrt_perturbation_gap(U, np.zeros((5, 5)))
    assert lhs == pytest.approx(rhs, rel=1e-12)


def test_sqrt_gap_rejects_non_projector():
    with pytest.raises(ValueError):
        sqrt_perturbation_gap(np.eye(2), np.array([[1.0, 1.0], [0.0, 0.0]]))


def test_sqrt_gap_fuzzed():
    for seed in range(1000):
        lhs, rhs = sqrt_perturbation_gap(*sqrt_perturbation_instance(seed))
        assert lhs <= rhs * (1 + 1e-9) + 1e-12, seed


def test_wedin_zero_noise():
    v = np.array([1.0, -2.0, 0.5])
    err, _, _ = wedin_rank1_gap(v, np.zeros((3, 3)))
    assert err <= 1e-12


def test_wedin_zero_signal():
    rng = np.random.default_rng(8)
    G = rng.standard_normal((6, 6))
    E = G + G.T
    err, bound_a, _ = wedin_rank1_gap(np.zeros(6), E)
    assert err <= bound_a + 1e-12
    assert err == pytest.approx(np.sqrt(np.linalg.svd(E, compute_uv=False)[0]))


def test_wedin_fuzzed_constant_ten():
    ratios = []
    for seed in range(1000):
        err, a, b = wedin_rank1_gap(*wedin_instance(seed))
        ratios.append(err / min(a, b))
    assert np.mean(np.array(ratios) <= 10) >= 0.99


# -- norms --------------------------------------------------------------------

@settings(max_examples=30, deadline=None)
@given(seed=st.integers(0, 2**31), m=st.integers(1, 15), n=st.integers(1, 15))
def test_power_iteration_matches_svd(seed, m, n):
    A = np.random.default_rng(seed).standard_normal((m, n))
    assert spectral_norm(A) == pytest.approx(op_norm(A), rel=1e-6)


def test_spectral_norm_of_zero():
    assert spectral_norm(np.zeros((3, 3))) == 0.0
