"""Unit tests for the evalkit module."""

import json
import math
import unittest

import numpy as np

from rxlocate.errors import DomainError, ReportError
from rxlocate.evalkit import (
    EvalRow,
    LocationEstimate,
    best_variant,
    build_report,
    percent_error,
    rmse,
)
from rxlocate.regress import CVReport
from rxlocate.types import TABLE_ORDER, RegressorVariant, SectionKind

# (actual km, estimated km, printed error %) per test fault
OVERHEAD_ROWS = [
    (20.0, 18.47938, 0.765),
    (45.0, 46.51063, 0.755),
    (70.0, 71.05625, 0.525),
    (95.0, 95.45563, 0.225),
    (120.0, 119.5869, 0.21),
    (145.0, 143.7181, 0.645),
    (170.0, 172.4563, 1.225),
    (195.0, 194.5644, 0.22),
]

CABLE_ROWS = [
    (0.8, 0.835775, 0.357),
    (1.8, 1.707975, 0.921),
    (2.8, 2.687975, 1.121),
    (3.8, 3.7623, 0.377),
    (4.8, 4.817025, 0.17),
    (5.8, 5.7321, 0.679),
    (6.8, 6.720675, 0.794),
    (7.8, 7.757025, 0.43),
    (8.8, 8.66965, 1.304),
    (9.8, 9.755, 0.45),
]


def make_cv(scores, n=4):
    ids = tuple(f"s-{i}" for i in range(n))
    y = np.linspace(0.2, 0.8, n)
    predictions = {v: y + 0.01 * (i + 1) for i, v in enumerate(scores)}
    return CVReport(dict(scores), np.arange(n) % 2, 42, 2, y, ids, predictions)


class TestMetrics(unittest.TestCase):
    """Test suite for rmse and percent_error."""

    def test_rmse(self):
        """Test the root mean square of known differences."""
        self.assertAlmostEqual(rmse([1.0, 2.0, 3.0], [1.0, 2.0, 3.0]), 0.0)
        self.assertAlmostEqual(rmse([0.0, 0.0], [3.0, 4.0]), math.sqrt(12.5))

    def test_rmse_length_mismatch(self):
        """Test rejection of unequal or empty inputs."""
        with self.assertRaises(DomainError):
            rmse([1.0], [1.0, 2.0])
        with self.assertRaises(DomainError):
            rmse([], [])

    def test_overhead_table(self):
        """Test the overhead test faults recompute to their printed errors."""
        for actual, estimated, printed in OVERHEAD_ROWS[1:]:
            with self.subTest(actual=actual):
                self.assertAlmostEqual(percent_error(actual, estimated, 200.0), printed, delta=0.003)

    def test_overhead_first_row_recomputes(self):
        """Test the first overhead fault recomputes to 0.760, not its printed 0.765."""
        self.assertAlmostEqual(percent_error(20.0, 18.47938, 200.0), 0.760, delta=0.001)

    def test_cable_table(self):
        """Test every cable test fault recomputes to its printed error."""
        for actual, estimated, printed in CABLE_ROWS:
            with self.subTest(actual=actual):
                self.assertAlmostEqual(percent_error(actual, estimated, 10.0), printed, delta=0.003)

    def test_spot_values(self):
        """Test two single values to three decimals."""
        self.assertAlmostEqual(percent_error(45.0, 46.51063, 200.0), 0.755, delta=0.001)
        self.assertAlmostEqual(percent_error(4.8, 4.817025, 10.0), 0.170, delta=0.001)

    def test_inverse_in_length(self):
        """Test that doubling the length halves the error."""
        a = percent_error(10.0, 12.0, 50.0)
        self.assertAlmostEqual(percent_error(10.0, 12.0, 100.0), a / 2.0)

    def test_bad_length(self):
        """Test rejection of a non-positive length."""
        with self.assertRaises(DomainError):
            percent_error(1.0, 1.0, 0.0)

    def test_negative_error_row(self):
        """Test that an EvalRow refuses a negative error."""
        with self.assertRaises(DomainError):
            EvalRow("x", 1.0, 1.0, -0.1)


class TestBestVariant(unittest.TestCase):
    """Test suite for best_variant."""

    def test_argmin(self):
        """Test the smallest RMSE wins."""
        scores = [(RegressorVariant.LINEAR, 0.2), (RegressorVariant.CUBIC_SVM, 0.1)]
        self.assertIs(best_variant(scores), RegressorVariant.CUBIC_SVM)

    def test_all_equal(self):
        """Test that ties go to the first variant in report order."""
        scores = [(v, 0.5) for v in reversed(TABLE_ORDER)]
        self.assertIs(best_variant(scores), RegressorVariant.LINEAR)


class TestBuildReport(unittest.TestCase):
    """Test suite for build_report."""

    def setUp(self):
        """Set up test fixtures."""
        self.scores = {v: 0.1 + 0.001 * i for i, v in enumerate(reversed(TABLE_ORDER))}
        self.cv = make_cv(self.scores)
        self.estimates = [
            LocationEstimate(f"overhead-test-{i:03d}", a, e) for i, (a, e, _) in enumerate(OVERHEAD_ROWS, 1)
        ]
        self.report = build_report(
            self.cv, self.estimates, SectionKind.OVERHEAD, 200.0, framing="line"
        )

    def test_nineteen_rows_in_order(self):
        """Test the RMSE table lists all variants in report order."""
        self.assertEqual(len(self.report.model_rmse), 19)
        self.assertEqual(tuple(v for v, _ in self.report.model_rmse), TABLE_ORDER)

    def test_best_is_minimum(self):
        """Test the best variant carries the minimum RMSE."""
        self.assertIs(self.report.best_variant, RegressorVariant.RATIONAL_QUADRATIC_GPR)
        self.assertEqual(self.report.best_rmse, min(self.scores.values()))

    def test_rows_recompute(self):
        """Test every emitted error recomputes from its own columns."""
        for row in self.report.rows:
            expected = percent_error(row.actual_km, row.estimated_km, self.report.total_length_km)
            self.assertAlmostEqual(row.percent_error, expected, delta=1e-9)
        self.assertAlmostEqual(self.report.max_percent_error, percent_error(170.0, 172.4563, 200.0))

    def test_residuals_of_best(self):
        """Test that residual rows hold the best variant's held-out predictions."""
        best = self.cv.predictions[self.report.best_variant]
        self.assertEqual([r.predicted for r in self.report.residuals], best.tolist())
        self.assertEqual([r.scenario_id for r in self.report.residuals], list(self.cv.ids))

    def test_missing_variant(self):
        """Test a ReportError when a variant has no result."""
        partial = make_cv({RegressorVariant.LINEAR: 0.1})
        with self.assertRaises(ReportError):
            build_report(partial, [], SectionKind.CABLE, 10.0)

    def test_variant_subset(self):
        """Test a report restricted to the trained variants."""
        partial = make_cv({RegressorVariant.FINE_TREE: 0.3, RegressorVariant.LINEAR: 0.3})
        report = build_report(
            partial,
            [],
            SectionKind.CABLE,
            10.0,
            variants=[RegressorVariant.FINE_TREE, RegressorVariant.LINEAR],
        )
        self.assertEqual([v for v, _ in report.model_rmse], [RegressorVariant.LINEAR, RegressorVariant.FINE_TREE])
        self.assertIs(report.best_variant, RegressorVariant.LINEAR)
        self.assertTrue(math.isnan(report.max_percent_error))

    def test_document(self):
        """Test the structured document carries the schema and all rows."""
        document = json.loads(json.dumps(self.report.to_dict()))
        self.assertEqual(document["schema"], "rxlocate-report")
        self.assertEqual(document["version"], 1)
        self.assertEqual(len(document["models"]), 19)
        self.assertEqual(len(document["test_rows"]), 8)
        self.assertEqual(document["framing"], "line")
        self.assertEqual(document["best_variant"], "Rational Quadratic GPR")


if __name__ == "__main__":
    unittest.main()
