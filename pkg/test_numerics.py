#!/usr/bin/env python3
"""
数值模块测试：J0、Toeplitz 展开、C^{-1} 的 Cholesky 因子
"""
import unittest

import numpy as np
from scipy.integrate import trapezoid

from config import CHOLESKY_RTOL
from errors import DomainError, NotPositiveDefiniteError
from numerics import (
    HermitianToeplitz,
    bessel_j0,
    cholesky_upper_of_inverse,
    is_hermitian,
    relative_frobenius,
    toeplitz_from_lags,
)


def j0_quadrature(x, points=4001):
    """积分表示 (1/π)∫_0^π cos(x sinθ) dθ，被积函数按 π 周期，梯形公式指数收敛"""
    theta = np.linspace(0.0, np.pi, points)
    return trapezoid(np.cos(np.multiply.outer(x, np.sin(theta))), theta, axis=-1) / np.pi


class TestBesselJ0(unittest.TestCase):
    def test_anchor_values(self):
        print("\nTesting J0 anchor values...")
        self.assertEqual(bessel_j0(0.0), 1.0)
        self.assertAlmostEqual(bessel_j0(2.404825557695773), 0.0, delta=1e-12)
        self.assertAlmostEqual(bessel_j0(4 * np.pi * 0.006 * 2), 0.99432, delta=5e-6)
        self.assertIsInstance(bessel_j0(1.0), float)

    def test_matches_quadrature_on_grid(self):
        """1000-point grid over [0, 50]"""
        x = np.linspace(0.0, 50.0, 1000)
        err = np.max(np.abs(bessel_j0(x) - j0_quadrature(x)))
        print(f"\n  max |J0 - quadrature| = {err:.2e}")
        self.assertLess(err, 1e-10)

    def test_even_function(self):
        x = np.linspace(0.1, 30, 50)
        np.testing.assert_array_equal(bessel_j0(x), bessel_j0(-x))

    def test_non_finite_rejected(self):
        for bad in (np.nan, np.inf, -np.inf):
            with self.assertRaises(DomainError):
                bessel_j0(bad)
        with self.assertRaises(ValueError):
            bessel_j0(np.array([1.0, np.nan]))


class TestToeplitz(unittest.TestCase):
    def test_single_lag(self):
        t = toeplitz_from_lags([1.0])
        self.assertEqual(t.dim, 1)
        np.testing.assert_array_equal(t.dense(), [[1.0]])

    def test_uncorrelated_lags_give_identity(self):
        np.testing.assert_array_equal(toeplitz_from_lags([1, 0, 0]).dense(), np.eye(3))

    def test_bands_round_trip(self):
        lags = [1.0, 0.9918, 0.9684]
        t = toeplitz_from_lags(lags)
        dense = t.dense()
        np.testing.assert_array_equal(dense, dense.T)
        for offset, value in enumerate(lags):
            np.testing.assert_array_equal(np.diagonal(dense, offset), np.full(3 - offset, value))
            np.testing.assert_array_equal(np.diagonal(dense, -offset), np.full(3 - offset, value))

    def test_invalid_lags(self):
        with self.assertRaises(DomainError):
            toeplitz_from_lags([])
        with self.assertRaises(DomainError):
            toeplitz_from_lags([0.0, 0.5])
        with self.assertRaises(DomainError):
            toeplitz_from_lags([1.0, np.nan])


class TestCholeskyOfInverse(unittest.TestCase):
    def test_identity_and_scalar(self):
        print("\nTesting Cholesky factor of C^-1...")
        np.testing.assert_allclose(cholesky_upper_of_inverse(np.eye(2)), np.eye(2), atol=1e-15)
        np.testing.assert_allclose(cholesky_upper_of_inverse(2 * np.eye(2)), np.eye(2) / np.sqrt(2), atol=1e-15)

    def test_positive_correlation_gives_negative_offdiagonal(self):
        u = cholesky_upper_of_inverse(np.array([[3.0, 2.9], [2.9, 3.0]]))
        self.assertEqual(u[1, 0], 0.0)
        self.assertGreater(u[0, 0], 0)
        self.assertGreater(u[1, 1], 0)
        self.assertLess(u[0, 1], 0)

    def test_factorization_property(self):
        rng = np.random.default_rng(7)
        for n in (1, 2, 5, 10, 20, 32):
            lags = bessel_j0(4 * np.pi * rng.uniform(0, 0.02) * np.arange(n) * 2) + np.r_[rng.uniform(0.01, 1), np.zeros(n - 1)]
            c = toeplitz_from_lags(lags)
            u = cholesky_upper_of_inverse(c)
            dense = c.dense()
            np.testing.assert_array_equal(np.tril(u, -1), 0)
            self.assertTrue(np.all(np.diag(u) > 0))
            self.assertLessEqual(relative_frobenius(u.conj().T @ u, np.linalg.inv(dense)), 1e-9)
            self.assertLessEqual(np.linalg.norm(u.conj().T @ u @ dense - np.eye(n)) / np.sqrt(n), 1e-9)

    def test_complex_hermitian_input(self):
        rng = np.random.default_rng(3)
        a = rng.standard_normal((4, 4)) + 1j * rng.standard_normal((4, 4))
        c = a @ a.conj().T + 4 * np.eye(4)
        u = cholesky_upper_of_inverse(c)
        self.assertLessEqual(relative_frobenius(u.conj().T @ u, np.linalg.inv(c)), CHOLESKY_RTOL)

    def test_not_positive_definite(self):
        with self.assertRaises(NotPositiveDefiniteError) as ctx:
            cholesky_upper_of_inverse(np.array([[1.0, 2.0], [2.0, 1.0]]))
        self.assertIsInstance(ctx.exception, np.linalg.LinAlgError)
        self.assertIn(ctx.exception.pivot, (0, 1))
        self.assertIn("not positive definite", str(ctx.exception))

    def test_non_hermitian_rejected(self):
        self.assertFalse(is_hermitian(np.array([[1.0, 2.0], [0.0, 1.0]])))
        with self.assertRaises(DomainError):
            cholesky_upper_of_inverse(np.array([[1.0, 2.0], [0.0, 1.0]]))

    def test_accepts_toeplitz_object(self):
        t = HermitianToeplitz((2.0, 0.5))
        np.testing.assert_allclose(cholesky_upper_of_inverse(t), cholesky_upper_of_inverse(t.dense()))


if __name__ == '__main__':
    unittest.main()
