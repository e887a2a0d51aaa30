import warnings

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from mmwave_sketch.array_geom import UlaConfig, grid_angles, steering_matrix, steering_vector
from mmwave_sketch.metrics import eta, mu
from mmwave_sketch.one_shot import DenoiseConfig, atomic_denoise
from mmwave_sketch.rmmv import (
    DegenerateGeometryWarning, EigenGap, KnownRank, NoSignalError, extract_subspace, reduce_window,
    rmmv_fit, sample_covariance, subspace_ls_estimate,
)
from mmwave_sketch.sdp import project_hermitian_toeplitz
from mmwave_sketch.sketching import SketchMatrix, random_antenna_selection


def rand(rng, *shape):
    return rng.standard_normal(shape) + 1j * rng.standard_normal(shape)


def test_sample_covariance_examples(rng):
    x = rand(rng, 5)
    np.testing.assert_allclose(sample_covariance(x[:, None]), np.outer(x, x.conj()))
    np.testing.assert_array_equal(sample_covariance(np.zeros((3, 4))), 0)
    X = rand(rng, 4, 10_000) / np.sqrt(2)
    assert np.linalg.norm(sample_covariance(X) - np.eye(4), 2) < 0.05


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 2**32 - 1), st.integers(1, 8), st.integers(1, 30))
def test_reduce_window_preserves_gram(seed, m, nu):
    X = rand(np.random.default_rng(seed), m, nu)
    Xr = reduce_window(X)
    assert Xr.shape == (m, m)
    np.testing.assert_allclose(Xr @ Xr.conj().T, X @ X.conj().T, atol=1e-10 * max(1, np.linalg.norm(X) ** 2))


def test_reduce_window_rank_one(rng):
    X = np.outer(rand(rng, 4), rand(rng, 9))
    Xr = reduce_window(X)
    assert np.linalg.matrix_rank(Xr, tol=1e-10) == 1
    u = X[:, 0] / np.linalg.norm(X[:, 0])
    np.testing.assert_allclose(np.linalg.norm(Xr - np.outer(u, u.conj()) @ Xr), 0, atol=1e-10)


def test_rmmv_zero():
    C, sol = rmmv_fit(np.zeros((4, 4)), SketchMatrix(np.eye(8)[:4], "random_selection"))
    np.testing.assert_array_equal(C, 0)


@pytest.mark.parametrize("seed", range(3))
def test_rmmv_single_source_noiseless(seed):
    rng = np.random.default_rng(seed)
    M, m, nu = 16, 8, 50
    theta = np.deg2rad(17.0)
    a = steering_vector(UlaConfig(M), theta)
    Bm = random_antenna_selection(m, M, rng)
    X = Bm.B @ np.outer(a, rand(rng, nu))
    C, sol = rmmv_fit(reduce_window(X), Bm)
    assert sol.converged
    U = extract_subspace(C, KnownRank(1)).U
    assert mu(a, U) <= 1e-2
    # output structure: Hermitian Toeplitz PSD
    np.testing.assert_allclose(C, project_hermitian_toeplitz(C), atol=1e-10)
    assert np.linalg.eigvalsh(C)[0] >= -1e-8 * np.linalg.norm(C)


def test_rmmv_identity_two_sources(rng):
    M, nu = 16, 50
    cfg = UlaConfig(M)
    ang = grid_angles(cfg, 512)[[120, 360]]
    A = steering_matrix(cfg, ang)
    Bm = SketchMatrix(np.eye(M), "random_selection")
    C, sol = rmmv_fit(reduce_window(A @ rand(rng, 2, nu)), Bm)
    U = extract_subspace(C, KnownRank(2)).U
    Q, _ = np.linalg.qr(A)
    # principal-angle residual between estimated and true span
    assert np.linalg.norm(Q - U @ (U.conj().T @ Q)) <= 1e-2


def test_extract_rank_one():
    a = steering_vector(UlaConfig(8), 0.0)
    est = extract_subspace(np.outer(a, a.conj()), KnownRank(1))
    assert abs(abs(np.vdot(est.U[:, 0], a / np.sqrt(8))) - 1) < 1e-12
    assert est.eigenvalues[0] == pytest.approx(8.0)


def test_isotropic_subspace_mu_expectation(rng):
    M, p = 12, 3
    U = extract_subspace(np.eye(M), KnownRank(p)).U
    np.testing.assert_allclose(U.conj().T @ U, np.eye(p), atol=1e-12)
    vals = [mu(rand(rng, M), U) for _ in range(4000)]
    assert np.mean(vals) == pytest.approx(1 - p / M, abs=0.01)


def test_eigengap_rule():
    cfg = UlaConfig(16)
    a1, a2 = steering_matrix(cfg, np.deg2rad([-30, 25])).T
    C = 2 * np.outer(a1, a1.conj()) + np.outer(a2, a2.conj())
    w = np.linalg.eigvalsh(C)[::-1]
    assert w[1] > 0.05 * w[0] and w[2] < 1e-9 * w[0]
    est = extract_subspace(C, EigenGap(0.05))
    assert est.rank == 2
    assert np.all(np.diff(est.eigenvalues) <= 0)


def test_eigengap_empty():
    with pytest.raises(NoSignalError):
        extract_subspace(np.zeros((4, 4)), EigenGap())


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 2**32 - 1), st.integers(1, 5))
def test_subspace_frame_properties(seed, p):
    rng = np.random.default_rng(seed)
    G = rand(rng, 8, 8)
    est = extract_subspace(G @ G.conj().T, KnownRank(p))
    U = est.U
    np.testing.assert_allclose(U.conj().T @ U, np.eye(p), atol=1e-10)
    P = U @ U.conj().T
    np.testing.assert_allclose(P @ P, P, atol=1e-10)
    np.testing.assert_allclose(P, P.conj().T, atol=1e-12)


def test_ls_examples(rng):
    M = 6
    Bm = SketchMatrix(np.eye(M), "random_selection")
    U = np.eye(M)[:, :1]
    x = np.array([3, 5, 0, 0, 0, 0], dtype=complex)
    np.testing.assert_allclose(subspace_ls_estimate(x, Bm, U), [3, 0, 0, 0, 0, 0])
    Bm = random_antenna_selection(4, 10, rng)
    Q, _ = np.linalg.qr(rand(rng, 10, 2))
    h = Q @ rand(rng, 2)
    np.testing.assert_allclose(subspace_ls_estimate(Bm.B @ h, Bm, Q), h, atol=1e-10)


def test_ls_local_optimality(rng):
    Bm = random_antenna_selection(6, 12, rng)
    Q, _ = np.linalg.qr(rand(rng, 12, 3))
    x = rand(rng, 6)
    h_hat = subspace_ls_estimate(x, Bm, Q)
    w = Q.conj().T @ h_hat
    base = np.linalg.norm(x - Bm.B @ Q @ w) ** 2
    for _ in range(20):
        d = rand(rng, 3)
        d *= 1e-3 / np.linalg.norm(d)
        assert np.linalg.norm(x - Bm.B @ Q @ (w + d)) ** 2 >= base - 1e-12


def test_ls_rank_deficient_warns():
    Bm = SketchMatrix(np.eye(6)[:2], "random_selection")
    U = np.eye(6)[:, 3:5]  # invisible to the selected elements
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        h = subspace_ls_estimate(np.ones(2), Bm, U)
    assert any(issubclass(c.category, DegenerateGeometryWarning) for c in caught)
    np.testing.assert_array_equal(h, 0)


@pytest.mark.slow
def test_true_subspace_ls_beats_one_shot():
    rng = np.random.default_rng(2017)
    M, m, sigma2 = 64, 16, 1.0
    cfg = UlaConfig(M)
    A = steering_matrix(cfg, np.deg2rad([0, 20, -20]))
    Q, _ = np.linalg.qr(A)
    e_ls, e_os = [], []
    for _ in range(200):
        Bm = random_antenna_selection(m, M, rng)
        h = A @ rand(rng, 3) / np.sqrt(6)
        x = Bm.B @ (h + np.sqrt(sigma2 / 2) * rand(rng, M))
        e_ls.append(eta(h, subspace_ls_estimate(x, Bm, Q)))
        h_os = atomic_denoise(x, Bm, DenoiseConfig.from_noise(m, sigma2)).h
        e_os.append(eta(h, h_os) if np.linalg.norm(h_os) > 0 else 0.0)
    assert np.mean(e_ls) > np.mean(e_os)
