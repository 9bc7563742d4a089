"""Unit tests for Gaussian process regression."""

import math
import unittest

import numpy as np

from rxlocate.errors import ConditioningError, FormatError
from rxlocate.gpr import (
    GPR_KERNELS,
    GPHyperparameters,
    GPRModel,
    factorize,
    fit_gpr,
    initial_hyperparameters,
    kernel_from_distance,
    negative_log_marginal_likelihood,
)


class TestKernels(unittest.TestCase):
    """Test suite for the covariance functions."""

    def test_zero_distance_is_signal_variance(self):
        """Test k(0) = sigma_f^2 for every kernel."""
        hp = GPHyperparameters(length_scale=0.7, sigma_f=1.5, sigma_n=0.1, alpha=2.0)
        for kernel in GPR_KERNELS:
            with self.subTest(kernel=kernel):
                value = kernel_from_distance(kernel, np.zeros((1, 1)), hp)
                self.assertAlmostEqual(float(value[0, 0]), 2.25)

    def test_decreasing_in_distance(self):
        """Test that covariance falls with distance."""
        hp = GPHyperparameters(1.0, 1.0, 0.1)
        r = np.linspace(0.0, 5.0, 20)[None, :]
        for kernel in GPR_KERNELS:
            with self.subTest(kernel=kernel):
                values = kernel_from_distance(kernel, r, hp).ravel()
                self.assertTrue(np.all(np.diff(values) < 0))

    def test_known_values(self):
        """Test closed-form values at r = length scale."""
        hp = GPHyperparameters(2.0, 1.0, 0.0, alpha=1.0)
        r = np.array([[2.0]])
        self.assertAlmostEqual(float(kernel_from_distance("squared_exponential", r, hp)[0, 0]), math.exp(-0.5))
        self.assertAlmostEqual(float(kernel_from_distance("exponential", r, hp)[0, 0]), math.exp(-1.0))
        self.assertAlmostEqual(float(kernel_from_distance("rational_quadratic", r, hp)[0, 0]), 1.0 / 1.5)
        a = math.sqrt(5.0)
        self.assertAlmostEqual(
            float(kernel_from_distance("matern52", r, hp)[0, 0]),
            (1.0 + a + a * a / 3.0) * math.exp(-a),
        )

    def test_unknown_kernel(self):
        """Test rejection of an unknown kernel."""
        with self.assertRaises(ValueError):
            kernel_from_distance("periodic", np.zeros((1, 1)), GPHyperparameters(1.0, 1.0, 0.1))


class TestFactorize(unittest.TestCase):
    """Test suite for jittered Cholesky factorization."""

    def test_well_conditioned_needs_no_extra_jitter(self):
        """Test the starting jitter on an identity kernel."""
        hp = GPHyperparameters(1.0, 1.0, 0.0)
        _, jitter = factorize(np.eye(3), hp)
        self.assertAlmostEqual(jitter, 1e-10)

    def test_indefinite_matrix_raises(self):
        """Test ConditioningError for a clearly indefinite matrix."""
        hp = GPHyperparameters(1.0, 1.0, 0.0)
        k = np.array([[1.0, 2.0], [2.0, 1.0]])
        with self.assertRaises(ConditioningError):
            factorize(k, hp)

    def test_nlml_matches_direct_formula(self):
        """Test the likelihood against a dense determinant evaluation."""
        rng = np.random.default_rng(0)
        z = rng.normal(size=(8, 2))
        y = rng.normal(size=8)
        hp = GPHyperparameters(1.2, 0.8, 0.3)
        d = np.sqrt(((z[:, None, :] - z[None, :, :]) ** 2).sum(-1))
        k = kernel_from_distance("squared_exponential", d, hp) + (0.09 + 1e-10 * 0.64) * np.eye(8)
        _, logdet = np.linalg.slogdet(k)
        expected = 0.5 * y @ np.linalg.solve(k, y) + 0.5 * logdet + 4.0 * math.log(2.0 * math.pi)
        got = negative_log_marginal_likelihood("squared_exponential", d, y, hp)
        self.assertAlmostEqual(got, expected, places=9)


class TestFitGpr(unittest.TestCase):
    """Test suite for fit_gpr."""

    def test_initial_hyperparameters(self):
        """Test the data-driven starting point."""
        z = np.array([[0.0], [1.0], [3.0]])
        y = np.array([1.0, 2.0, 3.0])
        hp = initial_hyperparameters(z, y)
        self.assertAlmostEqual(hp.length_scale, 2.0)
        self.assertAlmostEqual(hp.sigma_f, float(np.std(y)))
        self.assertAlmostEqual(hp.sigma_n, float(np.std(y)) / math.sqrt(2.0))
        self.assertEqual(hp.alpha, 1.0)

    def test_constant_target(self):
        """Test that a constant target predicts that constant everywhere."""
        z = np.random.default_rng(1).normal(size=(6, 2))
        model = fit_gpr(z, np.full(6, 0.4), "matern52")
        np.testing.assert_allclose(model.predict(np.array([[10.0, -3.0], [0.0, 0.0]])), [0.4, 0.4])

    def test_near_noiseless_interpolation(self):
        """Test that a tiny fixed noise interpolates random targets at separated points."""
        z = np.linspace(-2.0, 2.0, 6)[:, None]
        y = np.random.default_rng(2).normal(size=6)
        model = fit_gpr(z, y, "exponential", sigma_n=1e-8, max_iter=0)
        np.testing.assert_allclose(model.predict(z), y, atol=1e-5)
        self.assertEqual(model.hyper.sigma_n, 1e-8)

    def test_far_point_reverts_to_mean(self):
        """Test that predictions far from the data equal the training mean."""
        rng = np.random.default_rng(3)
        z = rng.normal(size=(15, 2))
        y = np.sin(2.0 * z[:, 0]) + 0.1 * rng.normal(size=15)
        model = fit_gpr(z, y, "squared_exponential")
        far = model.predict(np.array([[1e6, 1e6]]))
        self.assertAlmostEqual(float(far[0]), float(y.mean()), places=9)

    def test_noise_floor(self):
        """Test that the optimized noise level respects its floor."""
        z = np.linspace(0.0, 1.0, 10)[:, None]
        y = np.sin(3.0 * z[:, 0])
        model = fit_gpr(z, y, "rational_quadratic", max_iter=100)
        self.assertGreaterEqual(model.hyper.sigma_n, 1e-4 * float(np.std(y)))
        self.assertTrue(math.isfinite(model.nlml))

    def test_from_dict(self):
        """Test that a dumped model predicts identically after loading."""
        rng = np.random.default_rng(4)
        z = rng.normal(size=(10, 3))
        model = fit_gpr(z, z[:, 1], "exponential", max_iter=50)
        again = GPRModel.from_dict(model.to_dict(), 3)
        np.testing.assert_array_equal(again.predict(z), model.predict(z))
        bad = model.to_dict()
        bad["kernel"] = "periodic"
        with self.assertRaises(FormatError):
            GPRModel.from_dict(bad, 3)


if __name__ == "__main__":
    unittest.main()
