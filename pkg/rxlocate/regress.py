"""The nineteen-model regression suite behind one fit/predict interface.

Every family fits on standardized features (population mean and standard
deviation of the training rows). Family-specific learning lives in
:mod:`rxlocate.linear`, :mod:`rxlocate.trees`, :mod:`rxlocate.svr` and
:mod:`rxlocate.gpr`; this module owns the specs, the standardizer, the
dispatcher, k-fold cross-validation and model persistence.
"""

from __future__ import annotations

import json
import logging
import time
from collections.abc import Mapping, Sequence
from dataclasses import dataclass, field
from multiprocessing import Pool
from typing import Any, Optional, Union

import numpy as np

from . import gpr, linear, svr, trees
from .datasets import Dataset
from .errors import ConfigError, DomainError, FormatError
from .evalkit import rmse
from .types import ModelFamily, RegressorVariant
from .utils import NumericUtils

logger = logging.getLogger(__name__)

MODEL_FORMAT = "rxlocate-model"
MODEL_FORMAT_VERSION = 1

V = RegressorVariant

DEFAULT_HYPERPARAMETERS: dict[RegressorVariant, dict[str, float]] = {
    V.LINEAR: {},
    V.INTERACTIONS_LINEAR: {},
    V.ROBUST_LINEAR: {"tuning": linear.BISQUARE_TUNING, "max_iter": 50, "tol": 1e-8},
    V.STEPWISE_LINEAR: {"p_enter": 0.05, "p_remove": 0.10, "max_steps": 200},
    V.FINE_TREE: {"min_leaf": 4},
    V.MEDIUM_TREE: {"min_leaf": 12},
    V.COARSE_TREE: {"min_leaf": 36},
    V.LINEAR_SVM: {"tol": 1e-3, "max_iter": 10_000},
    V.QUADRATIC_SVM: {"degree": 2, "tol": 1e-3, "max_iter": 10_000},
    V.CUBIC_SVM: {"degree": 3, "tol": 1e-3, "max_iter": 10_000},
    V.FINE_GAUSSIAN_SVM: {"scale_factor": 0.25, "tol": 1e-3, "max_iter": 10_000},
    V.MEDIUM_GAUSSIAN_SVM: {"scale_factor": 1.0, "tol": 1e-3, "max_iter": 10_000},
    V.COARSE_GAUSSIAN_SVM: {"scale_factor": 4.0, "tol": 1e-3, "max_iter": 10_000},
    V.BOOSTED_TREES: {"n_trees": 30, "learn_rate": 0.1, "min_leaf": 8},
    V.BAGGED_TREES: {"n_trees": 30, "min_leaf": 8},
    V.SQUARED_EXPONENTIAL_GPR: {"max_iter": 400},
    V.MATERN52_GPR: {"max_iter": 400},
    V.EXPONENTIAL_GPR: {"max_iter": 400},
    V.RATIONAL_QUADRATIC_GPR: {"max_iter": 400},
}

# keys accepted as overrides although they have no default value
OPTIONAL_HYPERPARAMETERS: dict[ModelFamily, tuple[str, ...]] = {
    ModelFamily.LINEAR: (),
    ModelFamily.TREE: (),
    ModelFamily.SVM: ("epsilon", "box"),
    ModelFamily.ENSEMBLE: ("max_features",),
    ModelFamily.GPR: ("sigma_n",),
}

GPR_KERNEL_OF: dict[RegressorVariant, str] = {
    V.SQUARED_EXPONENTIAL_GPR: "squared_exponential",
    V.MATERN52_GPR: "matern52",
    V.EXPONENTIAL_GPR: "exponential",
    V.RATIONAL_QUADRATIC_GPR: "rational_quadratic",
}

ENSEMBLE_MIN_SAMPLES = 8


@dataclass(frozen=True)
class RegressorSpec:
    """A model variant with its full hyperparameter set.

    Attributes:
        family: Model family; must match ``variant.family``
        variant: One of the nineteen variants
        hyperparameters: Complete named parameter map (defaults plus overrides)

    """

    family: ModelFamily
    variant: RegressorVariant
    hyperparameters: Mapping[str, float] = field(default_factory=dict, hash=False)

    def __post_init__(self) -> None:
        if self.variant.family is not self.family:
            raise ConfigError(
                f"variant {self.variant.value!r} belongs to family {self.variant.family.value!r}, "
                f"not {self.family.value!r}"
            )
        allowed = set(DEFAULT_HYPERPARAMETERS[self.variant]) | set(OPTIONAL_HYPERPARAMETERS[self.family])
        unknown = sorted(set(self.hyperparameters) - allowed)
        if unknown:
            raise ConfigError(
                f"unknown hyperparameter {unknown[0]!r} for {self.variant.value}; "
                f"allowed: {', '.join(sorted(allowed)) or 'none'}"
            )

    @classmethod
    def for_variant(
        cls, variant: RegressorVariant, overrides: Optional[Mapping[str, float]] = None
    ) -> RegressorSpec:
        """Spec with default hyperparameters, updated by ``overrides``.

        Example:
            >>> RegressorSpec.for_variant(RegressorVariant.FINE_TREE).hyperparameters
            {'min_leaf': 4}

        """
        params = dict(DEFAULT_HYPERPARAMETERS[variant])
        params.update(overrides or {})
        return cls(variant.family, variant, params)

    def param(self, name: str, default: Any = None) -> Any:
        return self.hyperparameters.get(name, default)

    def to_dict(self) -> dict[str, Any]:
        return {
            "family": self.family.value,
            "variant": self.variant.value,
            "hyperparameters": dict(self.hyperparameters),
        }


def all_specs(
    variants: Sequence[RegressorVariant] = tuple(RegressorVariant),
    overrides: Optional[Mapping[str, Mapping[str, float]]] = None,
) -> list[RegressorSpec]:
    """Specs for ``variants`` in report order, with per-variant overrides by name."""
    overrides = overrides or {}
    chosen = set(variants)
    return [
        RegressorSpec.for_variant(v, overrides.get(v.value))
        for v in RegressorVariant
        if v in chosen
    ]


@dataclass(frozen=True, eq=False)
class Standardizer:
    """Per-feature centring and scaling; degenerate columns get scale 1."""

    mean: np.ndarray
    scale: np.ndarray

    @classmethod
    def fit(cls, x: np.ndarray) -> Standardizer:
        mean = x.mean(axis=0)
        std = x.std(axis=0)
        degenerate = std <= 1e-12 * (np.abs(mean) + std)
        return cls(mean, np.where(degenerate, 1.0, std))

    def transform(self, x: np.ndarray) -> np.ndarray:
        return (x - self.mean) / self.scale

    def to_dict(self) -> dict[str, list[float]]:
        return {"mean": self.mean.tolist(), "scale": self.scale.tolist()}


Params = Union[linear.LinearModel, trees.RegressionTree, trees.TreeEnsemble, svr.SVRModel, gpr.GPRModel]


@dataclass(frozen=True, eq=False)
class FittedModel:
    """A spec, its training standardizer and the learned parameters."""

    spec: RegressorSpec
    standardizer: Standardizer
    params: Params
    feature_names: tuple[str, ...]
    metadata: Mapping[str, Any] = field(default_factory=dict)

    @property
    def variant(self) -> RegressorVariant:
        return self.spec.variant

    @property
    def n_features(self) -> int:
        return len(self.feature_names)

    def raw_terms(self) -> dict[tuple[int, ...], float]:
        """Linear coefficients in raw feature units (linear family only)."""
        if not isinstance(self.params, linear.LinearModel):
            raise DomainError(f"{self.variant.value} has no linear coefficients")
        return self.params.raw_terms(self.standardizer.mean, self.standardizer.scale)


SpecLike = Union[RegressorSpec, RegressorVariant]


def _as_spec(spec: SpecLike, family: ModelFamily) -> RegressorSpec:
    if isinstance(spec, RegressorVariant):
        spec = RegressorSpec.for_variant(spec)
    if spec.family is not family:
        raise ConfigError(f"{spec.variant.value} is not a {family.value} model")
    return spec


def _prepare(ds: Dataset) -> tuple[Standardizer, np.ndarray]:
    standardizer = Standardizer.fit(ds.x)
    return standardizer, standardizer.transform(ds.x)


def fit_linear(ds: Dataset, spec: SpecLike) -> FittedModel:
    """Plain, interactions, robust (bisquare IRLS) or stepwise least squares."""
    spec = _as_spec(spec, ModelFamily.LINEAR)
    standardizer, z = _prepare(ds)
    metadata: dict[str, Any] = {}
    if spec.variant is V.LINEAR:
        params = linear.fit_ols(z, ds.y)
    elif spec.variant is V.INTERACTIONS_LINEAR:
        params = linear.fit_ols(z, ds.y, interactions=True)
    elif spec.variant is V.ROBUST_LINEAR:
        params, iterations = linear.fit_robust(
            z,
            ds.y,
            tuning=float(spec.param("tuning")),
            max_iter=int(spec.param("max_iter")),
            tol=float(spec.param("tol")),
        )
        metadata["iterations"] = iterations
    else:
        params = linear.fit_stepwise(
            z,
            ds.y,
            p_enter=float(spec.param("p_enter")),
            p_remove=float(spec.param("p_remove")),
            max_steps=int(spec.param("max_steps")),
        )
    metadata["n_terms"] = len(params.terms)
    return FittedModel(spec, standardizer, params, ds.feature_names, metadata)


def fit_tree(ds: Dataset, spec: SpecLike) -> FittedModel:
    """A single CART tree with the variant's minimum leaf size.

    With fewer than ``min_leaf`` rows the tree is a single leaf predicting
    the mean, as it is for any dataset too small to split.
    """
    spec = _as_spec(spec, ModelFamily.TREE)
    min_leaf = int(spec.param("min_leaf"))
    if ds.n_samples < min_leaf:
        logger.info(
            "%s: %d rows are fewer than min_leaf %d; fitting a single leaf",
            spec.variant.value,
            ds.n_samples,
            min_leaf,
        )
    standardizer, z = _prepare(ds)
    tree = trees.grow_tree(z, ds.y, min_leaf)
    return FittedModel(spec, standardizer, tree, ds.feature_names, {"n_leaves": tree.n_leaves})


def svr_kernel(spec: RegressorSpec, p: int) -> svr.SVRKernel:
    if spec.variant is V.LINEAR_SVM:
        return svr.SVRKernel("linear")
    if "degree" in spec.hyperparameters:
        return svr.SVRKernel("polynomial", degree=int(spec.param("degree")))
    return svr.SVRKernel("gaussian", scale=svr.gaussian_scale(float(spec.param("scale_factor")), p))


def fit_svr(ds: Dataset, spec: SpecLike) -> FittedModel:
    """Epsilon-insensitive SVR; non-convergence is flagged in the metadata."""
    spec = _as_spec(spec, ModelFamily.SVM)
    standardizer, z = _prepare(ds)
    eps = spec.param("epsilon")
    box = spec.param("box")
    model = svr.fit_svr(
        z,
        ds.y,
        svr_kernel(spec, ds.n_features),
        epsilon=None if eps is None else float(eps),
        box=None if box is None else float(box),
        tol=float(spec.param("tol")),
        max_iter=int(spec.param("max_iter")),
    )
    metadata = {"converged": model.converged, "iterations": model.iterations, "n_support": model.n_support}
    return FittedModel(spec, standardizer, model, ds.feature_names, metadata)


def fit_ensemble(ds: Dataset, spec: SpecLike, seed: int = 0) -> FittedModel:
    """Least-squares boosted or bootstrap-bagged trees, deterministic in ``seed``.

    Raises:
        DomainError: If the dataset has fewer than 8 rows

    """
    spec = _as_spec(spec, ModelFamily.ENSEMBLE)
    if ds.n_samples < ENSEMBLE_MIN_SAMPLES:
        raise DomainError(
            f"{spec.variant.value} needs at least {ENSEMBLE_MIN_SAMPLES} rows, got {ds.n_samples}"
        )
    standardizer, z = _prepare(ds)
    n_trees = int(spec.param("n_trees"))
    min_leaf = int(spec.param("min_leaf"))
    if spec.variant is V.BOOSTED_TREES:
        model = trees.fit_boosted(z, ds.y, n_trees, float(spec.param("learn_rate")), min_leaf)
    else:
        max_features = spec.param("max_features")
        model = trees.fit_bagged(
            z,
            ds.y,
            seed,
            n_trees,
            min_leaf,
            None if max_features is None else int(max_features),
        )
    return FittedModel(spec, standardizer, model, ds.feature_names, {"seed": seed})


def fit_gpr(ds: Dataset, spec: SpecLike) -> FittedModel:
    """Gaussian process with likelihood-optimized hyperparameters.

    Raises:
        ConditioningError: If the kernel matrix cannot be factorized

    """
    spec = _as_spec(spec, ModelFamily.GPR)
    standardizer, z = _prepare(ds)
    sigma_n = spec.param("sigma_n")
    model = gpr.fit_gpr(
        z,
        ds.y,
        GPR_KERNEL_OF[spec.variant],
        sigma_n=None if sigma_n is None else float(sigma_n),
        max_iter=int(spec.param("max_iter")),
    )
    metadata = {"jitter": model.jitter, **model.hyper.to_dict()}
    return FittedModel(spec, standardizer, model, ds.feature_names, metadata)


def fit(ds: Dataset, spec: SpecLike, seed: int = 0) -> FittedModel:
    """Fit any of the nineteen variants; the seed only matters for bagging."""
    if isinstance(spec, RegressorVariant):
        spec = RegressorSpec.for_variant(spec)
    started = time.perf_counter()
    if spec.family is ModelFamily.LINEAR:
        model = fit_linear(ds, spec)
    elif spec.family is ModelFamily.TREE:
        model = fit_tree(ds, spec)
    elif spec.family is ModelFamily.SVM:
        model = fit_svr(ds, spec)
    elif spec.family is ModelFamily.ENSEMBLE:
        model = fit_ensemble(ds, spec, seed)
    else:
        model = fit_gpr(ds, spec)
    logger.debug(
        "fitted %s on %d rows in %.3f s", spec.variant.value, ds.n_samples, time.perf_counter() - started
    )
    return model


def predict_many(model: FittedModel, x: np.ndarray) -> np.ndarray:
    """Predictions for the rows of ``x``.

    Raises:
        DomainError: If ``x`` has the wrong width or a non-finite entry

    """
    x = np.atleast_2d(np.asarray(x, dtype=float))
    if x.shape[1] != model.n_features:
        raise DomainError(f"expected {model.n_features} features, got {x.shape[1]}")
    x = NumericUtils.require_finite(x, "predictor input")
    return np.asarray(model.params.predict(model.standardizer.transform(x)), dtype=float)


def predict(model: FittedModel, x_row: Sequence[float] | np.ndarray) -> float:
    """Normalized location predicted for one feature row (not clamped)."""
    row = np.asarray(x_row, dtype=float)
    if row.ndim != 1:
        raise DomainError(f"expected one feature row, got shape {row.shape}")
    return float(predict_many(model, row[None, :])[0])


@dataclass(frozen=True, eq=False)
class CVReport:
    """Pooled held-out results of k-fold cross-validation.

    Attributes:
        rmse: RMSE per variant, in report order
        folds: Validation fold of every sample
        seed: Seed of the fold permutation and ensemble sampling
        k: Number of folds
        y: Targets in dataset order
        ids: Scenario ids in dataset order
        predictions: Held-out predictions per variant, in dataset order

    """

    rmse: dict[RegressorVariant, float]
    folds: np.ndarray
    seed: int
    k: int
    y: np.ndarray
    ids: tuple[str, ...]
    predictions: dict[RegressorVariant, np.ndarray]

    @property
    def variants(self) -> tuple[RegressorVariant, ...]:
        return tuple(self.rmse)

    def to_dict(self) -> dict[str, Any]:
        return {
            "seed": self.seed,
            "k": self.k,
            "ids": list(self.ids),
            "y": self.y.tolist(),
            "folds": self.folds.tolist(),
            "rmse": {v.value: r for v, r in self.rmse.items()},
            "predictions": {v.value: p.tolist() for v, p in self.predictions.items()},
        }

    @classmethod
    def from_dict(cls, data: Mapping[str, Any]) -> CVReport:
        """Inverse of :meth:`to_dict`.

        Raises:
            FormatError: If a field is missing or malformed

        """
        try:
            ids = tuple(str(i) for i in data["ids"])
            y = np.array(data["y"], dtype=float)
            folds = np.array(data["folds"], dtype=np.int64)
            scores = {RegressorVariant(v): float(r) for v, r in data["rmse"].items()}
            predictions = {
                RegressorVariant(v): np.array(p, dtype=float) for v, p in data["predictions"].items()
            }
            report = cls(scores, folds, int(data["seed"]), int(data["k"]), y, ids, predictions)
        except (KeyError, TypeError, ValueError, AttributeError) as exc:
            raise FormatError(f"bad cross-validation document: {exc}") from None
        if folds.shape != (len(ids),) or y.shape != (len(ids),):
            raise FormatError("cross-validation arrays do not match the scenario ids")
        return report


def assign_folds(n: int, k: int, seed: int) -> np.ndarray:
    """Fold of each sample: a seeded permutation dealt round-robin into k folds."""
    order = np.random.default_rng(seed).permutation(n)
    folds = np.empty(n, dtype=np.int64)
    folds[order] = np.arange(n) % k
    return folds


def _held_out_predictions(args: tuple[Dataset, RegressorSpec, np.ndarray, int, int]) -> np.ndarray:
    ds, spec, folds, k, seed = args
    out = np.empty(ds.n_samples)
    started = time.perf_counter()
    for fold in range(k):
        held = folds == fold
        model = fit(ds.subset(~held), spec, seed)
        out[held] = predict_many(model, ds.x[held])
    logger.info("cross-validated %s in %.2f s", spec.variant.value, time.perf_counter() - started)
    return out


def cross_validate(
    ds: Dataset,
    specs: Sequence[RegressorSpec],
    k: int,
    seed: int,
    processes: Optional[int] = None,
) -> CVReport:
    """k-fold cross-validation of every spec on a shared fold assignment.

    Args:
        ds: Training dataset
        specs: One spec per variant
        k: Number of folds, at least 2 and at most ``len(ds)``
        seed: Seed for the fold permutation (and bagging)
        processes: Fit specs in a process pool of this size when above 1

    Raises:
        ConfigError: If ``k`` is out of range or a variant repeats

    """
    if k < 2:
        raise ConfigError(f"cross-validation needs k >= 2, got {k}")
    if ds.n_samples < k:
        raise ConfigError(f"cannot split {ds.n_samples} samples into {k} folds")
    variants = [s.variant for s in specs]
    if len(set(variants)) != len(variants):
        raise ConfigError("each variant may appear only once in a cross-validation")

    specs = sorted(specs, key=lambda s: s.variant.table_index)
    folds = assign_folds(ds.n_samples, k, seed)
    jobs = [(ds, spec, folds, k, seed) for spec in specs]
    if processes and processes > 1 and len(jobs) > 1:
        with Pool(processes=processes) as pool:
            results = pool.map(_held_out_predictions, jobs)
    else:
        results = [_held_out_predictions(job) for job in jobs]

    scores: dict[RegressorVariant, float] = {}
    predictions: dict[RegressorVariant, np.ndarray] = {}
    for spec, pred in zip(specs, results):
        predictions[spec.variant] = pred
        scores[spec.variant] = rmse(pred, ds.y)
        logger.info("%-26s CV RMSE %.6g", spec.variant.value, scores[spec.variant])
    return CVReport(scores, folds, seed, k, ds.y.copy(), ds.ids, predictions)


def dump_model(model: FittedModel) -> str:
    """Versioned JSON text of a fitted model."""
    document = {
        "format": MODEL_FORMAT,
        "version": MODEL_FORMAT_VERSION,
        "spec": model.spec.to_dict(),
        "feature_names": list(model.feature_names),
        "standardizer": model.standardizer.to_dict(),
        "params": model.params.to_dict(),
        "metadata": dict(model.metadata),
    }
    return json.dumps(document, indent=2, sort_keys=True) + "\n"


def load_model(text: str) -> FittedModel:
    """Rebuild a model written by :func:`dump_model`.

    Raises:
        FormatError: If the text is not a supported model document

    """
    try:
        document = json.loads(text)
    except json.JSONDecodeError as exc:
        raise FormatError(f"model is not valid JSON: {exc.msg}", line=exc.lineno) from None
    if not isinstance(document, dict) or document.get("format") != MODEL_FORMAT:
        raise FormatError(f"not an {MODEL_FORMAT} document")
    if document.get("version") != MODEL_FORMAT_VERSION:
        raise FormatError(f"unsupported model version {document.get('version')!r}")
    try:
        s = document["spec"]
        spec = RegressorSpec(
            ModelFamily(s["family"]),
            RegressorVariant(s["variant"]),
            {str(k): v for k, v in s["hyperparameters"].items()},
        )
        names = tuple(str(n) for n in document["feature_names"])
        st = document["standardizer"]
        standardizer = Standardizer(np.array(st["mean"], dtype=float), np.array(st["scale"], dtype=float))
        raw = document["params"]
        metadata = dict(document.get("metadata", {}))
    except (KeyError, TypeError, ValueError, ConfigError) as exc:
        raise FormatError(f"bad model document: {exc}") from None
    if standardizer.mean.shape != (len(names),) or standardizer.scale.shape != (len(names),):
        raise FormatError("standardizer does not match the feature names")

    params: Params
    try:
        if spec.family is ModelFamily.LINEAR:
            params = linear.LinearModel.from_dict(raw)
        elif spec.family is ModelFamily.TREE:
            params = trees.RegressionTree.from_dict(raw)
        elif spec.family is ModelFamily.ENSEMBLE:
            params = trees.TreeEnsemble.from_dict(raw)
        elif spec.family is ModelFamily.SVM:
            params = svr.SVRModel.from_dict(raw, len(names))
        else:
            params = gpr.GPRModel.from_dict(raw, len(names))
    except (KeyError, TypeError, ValueError) as exc:
        if isinstance(exc, FormatError):
            raise
        raise FormatError(f"bad {spec.family.value} parameters: {exc}") from None
    return FittedModel(spec, standardizer, params, names, metadata)
