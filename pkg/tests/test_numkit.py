"""Tests for the dense numeric kernel."""

import numpy as np
import pytest

from ciccg import numkit
from ciccg.exceptions import (
    DimensionMismatch,
    EmptyInput,
    InvalidParameter,
    NotPositiveDefinite,
)


class TestCholesky:
    def test_identity(self):
        lower = numkit.cholesky(np.eye(3))
        np.testing.assert_allclose(lower, np.eye(3))

    def test_diagonal_hand_factorization(self):
        lower = numkit.cholesky(np.array([[4.0, 0.0], [0.0, 1.0]]))
        np.testing.assert_allclose(lower, np.array([[2.0, 0.0], [0.0, 1.0]]))

    def test_indefinite_rejected(self):
        # second pivot is 1 - 4 < 0
        with pytest.raises(NotPositiveDefinite):
            numkit.cholesky(np.array([[1.0, 2.0], [2.0, 1.0]]))

    def test_asymmetric_rejected(self):
        with pytest.raises(InvalidParameter):
            numkit.cholesky(np.array([[1.0, 0.5], [0.0, 1.0]]))

    def test_reconstruction_random_spd(self):
        """L L^T reproduces random SPD matrices up to 8x8 within 1e-10."""
        rng = np.random.default_rng(0)
        for _ in range(200):
            p = int(rng.integers(1, 9))
            a = rng.normal(size=(p, p))
            m = a @ a.T + 0.1 * np.eye(p)
            lower = numkit.cholesky(m)
            rel = np.linalg.norm(lower @ lower.T - m) / np.linalg.norm(m)
            assert rel <= 1e-10


class TestSolveSpd:
    def test_identity(self):
        x = numkit.solve_spd(np.eye(3), np.array([1.0, 2.0, 3.0]))
        np.testing.assert_allclose(x, [1.0, 2.0, 3.0])

    def test_diagonal_inverse(self):
        lower = numkit.cholesky(np.diag([4.0, 1.0]))
        np.testing.assert_allclose(numkit.solve_spd(lower, np.array([2.0, 0.0])), [0.5, 0.0])

    def test_dimension_mismatch(self):
        lower = numkit.cholesky(np.eye(3))
        with pytest.raises(DimensionMismatch):
            numkit.solve_spd(lower, np.ones(2))

    def test_residual_norm(self):
        rng = np.random.default_rng(1)
        a = rng.normal(size=(6, 6))
        m = a @ a.T + np.eye(6)
        lower = numkit.cholesky(m)
        b = rng.normal(size=6)
        x = numkit.solve_spd(lower, b)
        assert np.linalg.norm(m @ x - b) <= 1e-10 * np.linalg.norm(b)


class TestStudentT:
    def test_cdf_symmetry_at_zero(self):
        for nu in (1.0, 2.2, 5.0, 30.0):
            assert numkit.student_t_cdf(0.0, nu) == pytest.approx(0.5)

    def test_cauchy_cdf_values(self):
        # 1/2 + arctan(x)/pi at x = +-1
        assert numkit.student_t_cdf(1.0, 1.0, 1.0) == pytest.approx(0.75, abs=1e-12)
        assert numkit.student_t_cdf(-1.0, 1.0, 1.0) == pytest.approx(0.25, abs=1e-12)

    def test_cauchy_density_at_mode(self):
        assert numkit.student_t_pdf(0.0, 1.0, 1.0) == pytest.approx(1.0 / np.pi, rel=1e-12)

    def test_quantile_median(self):
        assert numkit.student_t_quantile(0.5, 3.0) == pytest.approx(0.0, abs=1e-12)

    def test_quantile_roundtrip(self):
        assert numkit.student_t_cdf(numkit.student_t_quantile(0.9, 2.2), 2.2) == pytest.approx(
            0.9, abs=1e-10
        )

    def test_roundtrip_grid(self):
        """cdf o quantile is the identity to 1e-8 across the spec grid."""
        ps = np.arange(0.01, 1.0, 0.01)
        for nu in (1.0, 2.2, 5.0, 30.0):
            x = numkit.student_t_quantile(ps, nu)
            np.testing.assert_allclose(numkit.student_t_cdf(x, nu), ps, atol=1e-8)

    def test_pdf_normalization(self):
        """PDF integrates to 1 within 1e-6 on [-50, 50] for nu >= 1."""
        from scipy.integrate import quad

        for nu in (1.0, 2.2, 5.0):
            total, _ = quad(lambda x: numkit.student_t_pdf(x, nu), -50, 50, limit=200)
            tail = 2.0 * (1.0 - numkit.student_t_cdf(50.0, nu))
            assert abs(total + tail - 1.0) <= 1e-6

    def test_invalid_parameters(self):
        with pytest.raises(InvalidParameter):
            numkit.student_t_cdf(0.0, -1.0)
        with pytest.raises(InvalidParameter):
            numkit.student_t_pdf(0.0, 1.0, 0.0)
        with pytest.raises(InvalidParameter):
            numkit.student_t_quantile(1.5, 1.0)


class TestEmpiricalQuantile:
    def test_linear_interpolation(self):
        values = np.arange(0.1, 1.05, 0.1)  # 0.1 .. 1.0
        assert numkit.empirical_quantile(values, 0.9) == pytest.approx(0.91)

    def test_p_one_is_maximum(self):
        rng = np.random.default_rng(2)
        values = rng.normal(size=37)
        assert numkit.empirical_quantile(values, 1.0) == pytest.approx(values.max())

    def test_single_value(self):
        assert numkit.empirical_quantile([5.0], 0.5) == 5.0

    def test_empty_rejected(self):
        with pytest.raises(EmptyInput):
            numkit.empirical_quantile([], 0.5)

    def test_monotone_in_p(self):
        rng = np.random.default_rng(3)
        values = rng.standard_cauchy(size=200)
        qs = [numkit.empirical_quantile(values, p) for p in np.linspace(0, 1, 51)]
        assert all(a <= b for a, b in zip(qs, qs[1:]))


class TestSpawnRng:
    def test_equal_seeds_equal_streams(self):
        a = numkit.spawn_rng(42, 1, 3).standard_normal(10_000)
        b = numkit.spawn_rng(42, 1, 3).standard_normal(10_000)
        np.testing.assert_array_equal(a, b)

    def test_distinct_runs_distinct_streams(self):
        a = numkit.spawn_rng(42, 1, 0).standard_normal(100)
        b = numkit.spawn_rng(42, 1, 1).standard_normal(100)
        assert not np.allclose(a, b)
