"""Unit tests for the SVR solver."""

import math
import unittest

import numpy as np

from rxlocate.errors import FormatError
from rxlocate.svr import (
    SVRKernel,
    SVRModel,
    _pair_step,
    default_box,
    default_epsilon,
    fit_svr,
    gaussian_scale,
    solve_dual,
)


class TestKernels(unittest.TestCase):
    """Test suite for SVRKernel."""

    def test_linear_and_polynomial(self):
        """Test inner-product kernels on a pair of vectors."""
        u = np.array([[1.0, 2.0]])
        v = np.array([[3.0, -1.0]])
        self.assertAlmostEqual(float(SVRKernel("linear").matrix(u, v)[0, 0]), 1.0)
        self.assertAlmostEqual(float(SVRKernel("polynomial", degree=3).matrix(u, v)[0, 0]), 8.0)

    def test_gaussian(self):
        """Test the Gaussian kernel value and its unit diagonal."""
        k = SVRKernel("gaussian", scale=2.0)
        u = np.array([[0.0, 0.0], [3.0, 4.0]])
        m = k.matrix(u, u)
        np.testing.assert_allclose(np.diag(m), [1.0, 1.0])
        self.assertAlmostEqual(float(m[0, 1]), math.exp(-25.0 / 8.0))

    def test_unknown_kernel(self):
        """Test rejection of an unknown kernel name."""
        with self.assertRaises(ValueError):
            SVRKernel("sigmoid")

    def test_gaussian_scale(self):
        """Test the feature-count scaling of the Gaussian width."""
        self.assertAlmostEqual(gaussian_scale(0.25, 16), 1.0)
        self.assertAlmostEqual(gaussian_scale(4.0, 20), 4.0 * math.sqrt(20.0))


class TestDefaults(unittest.TestCase):
    """Test suite for IQR-based defaults."""

    def test_iqr_defaults(self):
        """Test epsilon and box from the interquartile range."""
        y = np.arange(5.0)  # iqr = 2
        self.assertAlmostEqual(default_epsilon(y), 2.0 / 13.49)
        self.assertAlmostEqual(default_box(y), 2.0 / 1.349)

    def test_floors(self):
        """Test the floors for constant targets."""
        y = np.full(6, 0.3)
        self.assertEqual(default_epsilon(y), 1e-3)
        self.assertEqual(default_box(y), 1e-3)


class TestPairStep(unittest.TestCase):
    """Test suite for the exact line search."""

    def test_matches_dense_grid(self):
        """Test that the returned step minimizes the objective on a fine grid."""
        rng = np.random.default_rng(0)
        for _ in range(30):
            bi, bj = rng.uniform(-1.0, 1.0, size=2)
            gi, gj = rng.normal(size=2)
            eta = float(rng.uniform(0.1, 3.0))
            eps = float(rng.uniform(0.0, 0.5))
            t_max = min(1.0 - bi, bj + 1.0)

            def phi(t, bi=bi, bj=bj, gi=gi, gj=gj, eta=eta, eps=eps):
                return 0.5 * eta * t * t + (gi - gj) * t + eps * (abs(bi + t) + abs(bj - t))

            t = _pair_step(bi, bj, gi, gj, eta, eps, t_max)
            grid = np.linspace(0.0, t_max, 2001)
            self.assertGreaterEqual(t, 0.0)
            self.assertLessEqual(t, t_max)
            self.assertLessEqual(phi(t), min(phi(s) for s in grid) + 1e-12)


class TestSolver(unittest.TestCase):
    """Test suite for solve_dual and fit_svr."""

    def test_constant_target(self):
        """Test that a constant target gives a constant predictor."""
        z = np.random.default_rng(1).normal(size=(12, 2))
        model = fit_svr(z, np.full(12, 0.5), SVRKernel("linear"))
        self.assertTrue(model.converged)
        self.assertEqual(model.n_support, 0)
        np.testing.assert_allclose(model.predict(z), np.full(12, 0.5), atol=1e-12)

    def test_linear_tube(self):
        """Test that a linear response fits inside the epsilon tube."""
        z = np.linspace(-1.5, 1.5, 25)[:, None]
        y = 0.5 + 0.2 * z[:, 0]
        model = fit_svr(z, y, SVRKernel("linear"), epsilon=0.01, box=10.0, tol=1e-5, max_iter=50_000)
        self.assertTrue(model.converged)
        residual = np.abs(model.predict(z) - y)
        self.assertLessEqual(float(residual.max()), 0.01 + 1e-3)

    def test_dual_feasibility(self):
        """Test sum(beta) = 0 and the box constraint on a Gaussian fit."""
        rng = np.random.default_rng(2)
        z = rng.normal(size=(30, 3))
        y = np.sin(z[:, 0]) + 0.1 * rng.normal(size=30)
        kernel = SVRKernel("gaussian", scale=gaussian_scale(1.0, 3))
        box = 0.5
        sol = solve_dual(kernel.matrix(z, z), y, 0.05, box)
        self.assertAlmostEqual(float(sol.beta.sum()), 0.0, places=9)
        self.assertLessEqual(float(np.abs(sol.beta).max()), box)

    def test_iteration_limit_warns(self):
        """Test that hitting the pass limit is logged and flagged."""
        rng = np.random.default_rng(3)
        z = rng.normal(size=(20, 2))
        y = rng.normal(size=20)
        with self.assertLogs("rxlocate.svr", level="WARNING"):
            sol = solve_dual(SVRKernel("linear").matrix(z, z), y, 0.01, 1.0, tol=1e-9, max_iter=2)
        self.assertFalse(sol.converged)

    def test_from_dict(self):
        """Test that a dumped model predicts identically after loading."""
        rng = np.random.default_rng(4)
        z = rng.normal(size=(15, 2))
        model = fit_svr(z, z[:, 0] ** 2, SVRKernel("polynomial", degree=2))
        again = SVRModel.from_dict(model.to_dict(), 2)
        np.testing.assert_array_equal(again.predict(z), model.predict(z))
        with self.assertRaises(FormatError):
            SVRModel.from_dict({"kernel": {"name": "linear"}}, 2)


if __name__ == "__main__":
    unittest.main()
