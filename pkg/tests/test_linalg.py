import numpy as np
import pytest

from binhash.linalg import (
    DegenerateMatrixError,
    gaussian_matrix,
    qr_orthogonal,
    truncated_svd,
)

from oracles import jacobi_eigenvalues, ks_statistic_vs_normal, lu_determinant


class TestTruncatedSvd:
    def test_diagonal_matrix(self):
        X = np.diag([3.0, 2.0, 1.0])
        res = truncated_svd(X, 2)
        assert np.allclose(res.S, [3.0, 2.0])
        # V columns are +-e1, +-e2
        assert np.allclose(np.abs(res.V), np.eye(3)[:, :2])

    def test_full_rank_reconstruction(self):
        rng = np.random.default_rng(3)
        X = rng.standard_normal((12, 7))
        res = truncated_svd(X, 7)
        recon = res.U @ np.diag(res.S) @ res.V.T
        assert np.linalg.norm(X - recon) <= 1e-6 * np.linalg.norm(X)

    def test_matches_gram_eigen_oracle(self):
        rng = np.random.default_rng(17)
        X = rng.standard_normal((20, 8))
        res = truncated_svd(X, 3)
        oracle = np.sqrt(np.clip(jacobi_eigenvalues(X.T @ X)[:3], 0, None))
        assert np.allclose(res.S, oracle, rtol=0, atol=1e-8 * oracle[0])

    def test_singular_values_sorted_nonnegative(self):
        rng = np.random.default_rng(5)
        X = rng.standard_normal((15, 10))
        res = truncated_svd(X, 6)
        assert np.all(np.diff(res.S) <= 0)
        assert np.all(res.S >= 0)

    def test_v_orthonormal(self):
        rng = np.random.default_rng(9)
        X = rng.standard_normal((25, 12))
        V = truncated_svd(X, 5).V
        assert np.abs(V.T @ V - np.eye(5)).max() <= 1e-8

    def test_beats_random_projections(self):
        rng = np.random.default_rng(11)
        for _ in range(5):
            n, d, k = rng.integers(5, 30), rng.integers(5, 30), 3
            X = rng.standard_normal((int(n), int(d)))
            res = truncated_svd(X, k)
            best = np.linalg.norm(X - res.U @ np.diag(res.S) @ res.V.T)
            for _ in range(100):
                P, _ = np.linalg.qr(rng.standard_normal((int(d), k)))
                err = np.linalg.norm(X - X @ P @ P.T)
                assert best <= err + 1e-9

    def test_k_out_of_range(self):
        X = np.eye(4)
        with pytest.raises(ValueError):
            truncated_svd(X, 0)
        with pytest.raises(ValueError):
            truncated_svd(X, 5)

    def test_rejects_non_finite(self):
        X = np.eye(3)
        X[1, 1] = np.nan
        with pytest.raises(ValueError):
            truncated_svd(X, 2)

    def test_deterministic(self):
        rng = np.random.default_rng(0)
        X = rng.standard_normal((10, 6))
        a = truncated_svd(X, 4)
        b = truncated_svd(X, 4)
        assert np.array_equal(a.S, b.S) and np.array_equal(a.V, b.V)


class TestGaussianMatrix:
    def test_deterministic(self):
        assert np.array_equal(gaussian_matrix(4, 0), gaussian_matrix(4, 0))

    def test_seed_sensitivity(self):
        assert not np.array_equal(gaussian_matrix(4, 0), gaussian_matrix(4, 1))

    def test_mean_within_four_standard_errors(self):
        A = gaussian_matrix(64, 1)
        assert abs(A.mean()) <= 4.0 / np.sqrt(4096)

    def test_ks_statistic(self):
        samples = gaussian_matrix(100, 123).ravel()
        assert ks_statistic_vs_normal(samples) < 0.02

    def test_rejects_bad_k(self):
        with pytest.raises(ValueError):
            gaussian_matrix(0, 1)


class TestQrOrthogonal:
    def test_identity(self):
        assert np.allclose(qr_orthogonal(np.eye(5)), np.eye(5))

    def test_sign_convention(self):
        # A = QR with diag(R) > 0 is unique: Q must absorb the negative sign
        A = np.diag([-2.0, 5.0])
        Q = qr_orthogonal(A)
        assert np.allclose(Q, np.diag([-1.0, 1.0]))
        R = Q.T @ A
        assert np.all(np.diag(R) > 0)
        assert np.allclose(Q @ R, A)

    def test_orthogonality_and_determinant(self):
        Q = qr_orthogonal(gaussian_matrix(32, 7))
        assert np.abs(Q.T @ Q - np.eye(32)).max() <= 1e-10
        assert abs(abs(lu_determinant(Q)) - 1.0) <= 1e-9

    @pytest.mark.parametrize("seed", range(6))
    def test_orthogonality_property(self, seed):
        k = 8 + 4 * seed
        Q = qr_orthogonal(gaussian_matrix(k, seed))
        assert np.abs(Q.T @ Q - np.eye(k)).max() <= 1e-10

    def test_positive_diagonal_r(self):
        A = gaussian_matrix(10, 3)
        Q = qr_orthogonal(A)
        R = Q.T @ A
        assert np.all(np.diag(R) > 0)

    def test_rank_deficient_rejected(self):
        A = np.ones((4, 4))
        with pytest.raises(DegenerateMatrixError):
            qr_orthogonal(A)

    def test_rejects_non_square(self):
        with pytest.raises(ValueError):
            qr_orthogonal(np.ones((3, 4)))
