"""Unit tests for the regression suite, cross-validation and persistence."""

import json
import unittest

import numpy as np

from rxlocate.datasets import Dataset
from rxlocate.errors import ConfigError, DomainError, FormatError
from rxlocate.regress import (
    DEFAULT_HYPERPARAMETERS,
    CVReport,
    RegressorSpec,
    Standardizer,
    all_specs,
    assign_folds,
    cross_validate,
    dump_model,
    fit,
    load_model,
    predict,
    predict_many,
)
from rxlocate.types import TABLE_ORDER, ModelFamily, RegressorVariant

V = RegressorVariant


def make_dataset(n=40, p=4, seed=0, fn=None):
    rng = np.random.default_rng(seed)
    x = rng.uniform(0.0, 10.0, size=(n, p))
    if fn is None:
        y = 0.05 + 0.02 * x[:, 0] + 0.03 * x[:, 1] + 0.005 * rng.normal(size=n)
    else:
        y = fn(x)
    return Dataset(x, y, tuple(f"s-{i:03d}" for i in range(n)), tuple(f"f{j}" for j in range(p)))


class TestRegressorSpec(unittest.TestCase):
    """Test suite for RegressorSpec."""

    def test_nineteen_variants(self):
        """Test that every variant has defaults and a spec."""
        self.assertEqual(len(DEFAULT_HYPERPARAMETERS), 19)
        specs = all_specs()
        self.assertEqual([s.variant for s in specs], list(TABLE_ORDER))

    def test_family_mismatch(self):
        """Test rejection of a variant paired with the wrong family."""
        with self.assertRaises(ConfigError):
            RegressorSpec(ModelFamily.TREE, V.LINEAR_SVM)

    def test_unknown_hyperparameter(self):
        """Test rejection of a key the variant does not use."""
        with self.assertRaises(ConfigError):
            RegressorSpec.for_variant(V.FINE_TREE, {"learn_rate": 0.5})

    def test_override(self):
        """Test that overrides replace defaults and optional keys are accepted."""
        spec = RegressorSpec.for_variant(V.LINEAR_SVM, {"epsilon": 0.02})
        self.assertEqual(spec.param("epsilon"), 0.02)
        self.assertEqual(spec.param("tol"), 1e-3)

    def test_all_specs_subset_and_overrides(self):
        """Test that all_specs keeps report order and applies overrides by name."""
        specs = all_specs([V.BAGGED_TREES, V.LINEAR], {"Bagged Trees": {"n_trees": 5}})
        self.assertEqual([s.variant for s in specs], [V.LINEAR, V.BAGGED_TREES])
        self.assertEqual(specs[1].param("n_trees"), 5)


class TestStandardizer(unittest.TestCase):
    """Test suite for Standardizer."""

    def test_population_statistics(self):
        """Test zero mean and unit population deviation after transform."""
        x = np.array([[1.0, 5.0], [3.0, 5.0], [5.0, 5.0]])
        st = Standardizer.fit(x)
        z = st.transform(x)
        np.testing.assert_allclose(z[:, 0].mean(), 0.0, atol=1e-15)
        np.testing.assert_allclose(z[:, 0].std(), 1.0)

    def test_constant_column_scale_one(self):
        """Test that a constant column keeps scale 1."""
        st = Standardizer.fit(np.array([[1.0, 5.0], [3.0, 5.0], [5.0, 5.0]]))
        self.assertEqual(float(st.scale[1]), 1.0)
        np.testing.assert_array_equal(st.transform(np.array([[2.0, 5.0]]))[:, 1], [0.0])


class TestFitAndPredict(unittest.TestCase):
    """Test suite for the fit dispatcher and predictors."""

    @classmethod
    def setUpClass(cls):
        """Set up shared fixtures."""
        cls.ds = make_dataset()

    def test_every_variant_fits(self):
        """Test that all nineteen variants fit and predict finite values."""
        for spec in all_specs():
            with self.subTest(variant=spec.variant.value):
                model = fit(self.ds, spec, seed=1)
                out = predict_many(model, self.ds.x)
                self.assertEqual(out.shape, (self.ds.n_samples,))
                self.assertTrue(np.all(np.isfinite(out)))

    def test_planted_raw_coefficients(self):
        """Test raw-unit coefficients of an exact linear response."""
        ds = make_dataset(fn=lambda x: 0.1 + 0.02 * x[:, 0] - 0.01 * x[:, 2])
        raw = fit(ds, V.LINEAR).raw_terms()
        expected = {(): 0.1, (0,): 0.02, (1,): 0.0, (2,): -0.01, (3,): 0.0}
        for term, value in expected.items():
            self.assertAlmostEqual(raw[term], value, delta=1e-8)

    def test_interaction_raw_coefficients(self):
        """Test that y = 3 x0 x1 is recovered in raw units."""
        ds = make_dataset(p=2, fn=lambda x: 3.0 * x[:, 0] * x[:, 1])
        raw = fit(ds, V.INTERACTIONS_LINEAR).raw_terms()
        self.assertAlmostEqual(raw[(0, 1)], 3.0, delta=1e-8)
        for term in ((), (0,), (1,)):
            self.assertAlmostEqual(raw[term], 0.0, delta=1e-7)

    def test_raw_terms_only_for_linear(self):
        """Test that non-linear families have no raw coefficients."""
        with self.assertRaises(DomainError):
            fit(self.ds, V.FINE_TREE).raw_terms()

    def test_predict_errors(self):
        """Test wrong width, non-finite input and a 2-D row."""
        model = fit(self.ds, V.LINEAR)
        with self.assertRaises(DomainError):
            predict(model, [1.0, 2.0])
        with self.assertRaises(DomainError) as ctx:
            predict(model, [1.0, np.nan, 2.0, 3.0])
        self.assertIn("predictor input: non-finite value at flat index 1", str(ctx.exception))
        with self.assertRaises(DomainError):
            predict(model, self.ds.x[:2])

    def test_predict_matches_predict_many(self):
        """Test single-row prediction against the batch path."""
        model = fit(self.ds, V.MATERN52_GPR)
        batch = predict_many(model, self.ds.x[:3])
        for i in range(3):
            self.assertAlmostEqual(predict(model, self.ds.x[i]), float(batch[i]), places=12)

    def test_tree_too_few_rows(self):
        """Test that a coarse tree on fewer rows than its leaf size is one leaf."""
        ds = make_dataset(n=20)
        model = fit(ds, V.COARSE_TREE)
        self.assertEqual(model.metadata["n_leaves"], 1)
        np.testing.assert_allclose(predict_many(model, ds.x), np.full(20, ds.y.mean()))

    def test_ensemble_too_few_rows(self):
        """Test that ensembles need eight rows."""
        with self.assertRaises(DomainError):
            fit(make_dataset(n=7), V.BOOSTED_TREES)

    def test_column_permutation_invariance(self):
        """Test that permuting feature columns leaves predictions unchanged."""
        perm = np.array([2, 0, 3, 1])
        shuffled = Dataset(self.ds.x[:, perm], self.ds.y, self.ds.ids, tuple(np.array(self.ds.feature_names)[perm]))
        query = np.random.default_rng(5).uniform(0.0, 10.0, size=(6, 4))
        for variant in (V.LINEAR, V.INTERACTIONS_LINEAR, V.SQUARED_EXPONENTIAL_GPR):
            with self.subTest(variant=variant.value):
                a = predict_many(fit(self.ds, variant), query)
                b = predict_many(fit(shuffled, variant), query[:, perm])
                np.testing.assert_allclose(a, b, atol=1e-8)

    def test_column_scale_invariance(self):
        """Test that rescaling a feature column leaves predictions unchanged."""
        scale = np.array([1.0, 1000.0, 0.01, 7.0])
        scaled = Dataset(self.ds.x * scale, self.ds.y, self.ds.ids, self.ds.feature_names)
        query = np.random.default_rng(6).uniform(0.0, 10.0, size=(6, 4))
        for variant in (V.LINEAR, V.ROBUST_LINEAR, V.EXPONENTIAL_GPR):
            with self.subTest(variant=variant.value):
                a = predict_many(fit(self.ds, variant), query)
                b = predict_many(fit(scaled, variant), query * scale)
                np.testing.assert_allclose(a, b, atol=1e-6)

    def test_bagged_seed(self):
        """Test that bagging is deterministic in the seed."""
        a = predict_many(fit(self.ds, V.BAGGED_TREES, seed=3), self.ds.x)
        b = predict_many(fit(self.ds, V.BAGGED_TREES, seed=3), self.ds.x)
        np.testing.assert_array_equal(a, b)


class TestCrossValidate(unittest.TestCase):
    """Test suite for k-fold cross-validation."""

    def test_fold_sizes(self):
        """Test that 40 samples split into five folds of eight."""
        folds = assign_folds(40, 5, seed=42)
        self.assertEqual(np.bincount(folds).tolist(), [8, 8, 8, 8, 8])
        np.testing.assert_array_equal(folds, assign_folds(40, 5, seed=42))

    def test_deterministic(self):
        """Test identical reports for the same seed."""
        ds = make_dataset()
        specs = all_specs([V.LINEAR, V.BAGGED_TREES])
        a = cross_validate(ds, specs, 5, seed=7)
        b = cross_validate(ds, specs, 5, seed=7)
        self.assertEqual(a.rmse, b.rmse)
        np.testing.assert_array_equal(a.folds, b.folds)

    def test_constant_tree_rmse(self):
        """Test the single-leaf tree RMSE against a hand-computed fold-mean predictor."""
        # 64 training rows per fold: fewer than two coarse leaves
        ds = make_dataset(n=80)
        cv = cross_validate(ds, all_specs([V.COARSE_TREE]), 5, seed=3)
        expected = np.empty(ds.n_samples)
        for fold in range(5):
            held = cv.folds == fold
            expected[held] = ds.y[~held].mean()
        np.testing.assert_allclose(cv.predictions[V.COARSE_TREE], expected)
        self.assertAlmostEqual(cv.rmse[V.COARSE_TREE], float(np.sqrt(np.mean((expected - ds.y) ** 2))))

    def test_report_order(self):
        """Test that results come back in report order whatever the input order."""
        ds = make_dataset()
        cv = cross_validate(ds, all_specs([V.FINE_TREE, V.LINEAR])[::-1], 4, seed=0)
        self.assertEqual(cv.variants, (V.LINEAR, V.FINE_TREE))

    def test_bad_arguments(self):
        """Test k < 2, too few samples and repeated variants."""
        ds = make_dataset(n=6)
        specs = all_specs([V.LINEAR])
        with self.assertRaises(ConfigError):
            cross_validate(ds, specs, 1, seed=0)
        with self.assertRaises(ConfigError):
            cross_validate(ds, specs, 7, seed=0)
        with self.assertRaises(ConfigError):
            cross_validate(ds, specs + specs, 3, seed=0)

    def test_report_document(self):
        """Test that a CV report survives its JSON document."""
        ds = make_dataset()
        cv = cross_validate(ds, all_specs([V.LINEAR]), 5, seed=1)
        again = CVReport.from_dict(json.loads(json.dumps(cv.to_dict())))
        self.assertEqual(again.rmse, cv.rmse)
        self.assertEqual(again.ids, cv.ids)
        np.testing.assert_array_equal(again.predictions[V.LINEAR], cv.predictions[V.LINEAR])
        with self.assertRaises(FormatError):
            CVReport.from_dict({"seed": 1})


class TestPersistence(unittest.TestCase):
    """Test suite for dump_model and load_model."""

    def test_bit_identical_predictions(self):
        """Test that a reloaded model predicts exactly as the original."""
        ds = make_dataset()
        variants = (
            V.STEPWISE_LINEAR,
            V.MEDIUM_TREE,
            V.CUBIC_SVM,
            V.FINE_GAUSSIAN_SVM,
            V.BOOSTED_TREES,
            V.BAGGED_TREES,
            V.RATIONAL_QUADRATIC_GPR,
        )
        for variant in variants:
            with self.subTest(variant=variant.value):
                model = fit(ds, variant, seed=2)
                again = load_model(dump_model(model))
                self.assertEqual(again.variant, variant)
                self.assertEqual(again.feature_names, ds.feature_names)
                np.testing.assert_array_equal(predict_many(again, ds.x), predict_many(model, ds.x))

    def test_rejects_foreign_documents(self):
        """Test format, version and JSON checks."""
        with self.assertRaises(FormatError):
            load_model("not json")
        with self.assertRaises(FormatError):
            load_model(json.dumps({"format": "other"}))
        document = json.loads(dump_model(fit(make_dataset(), V.LINEAR)))
        document["version"] = 99
        with self.assertRaises(FormatError):
            load_model(json.dumps(document))
        document["version"] = 1
        del document["params"]["coef"]
        with self.assertRaises(FormatError):
            load_model(json.dumps(document))


if __name__ == "__main__":
    unittest.main()
