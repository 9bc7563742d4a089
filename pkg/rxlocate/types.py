"""Type definitions and enumerations for rxlocate.

This module contains the enumerations shared by the simulation, imaging,
regression and reporting layers. Enumerations that are written to files
inherit from ``str`` so they serialize as their value.
"""

from __future__ import annotations

from enum import Enum


class SectionKind(str, Enum):
    """Construction of a line section."""

    OVERHEAD = "overhead"
    CABLE = "cable"


class FaultType(str, Enum):
    """Supported fault types."""

    AG = "AG"  # phase A to ground


class ModelFamily(str, Enum):
    """Regression model families, in report order."""

    LINEAR = "linear"
    TREE = "tree"
    SVM = "svm"
    ENSEMBLE = "ensemble"
    GPR = "gpr"


class RegressorVariant(str, Enum):
    """The nineteen model configurations of the comparison table.

    Member order is the report order (families, then variants).
    """

    LINEAR = "Linear"
    INTERACTIONS_LINEAR = "Interactions Linear"
    ROBUST_LINEAR = "Robust Linear"
    STEPWISE_LINEAR = "Stepwise Linear"

    FINE_TREE = "Fine Tree"
    MEDIUM_TREE = "Medium Tree"
    COARSE_TREE = "Coarse Tree"

    LINEAR_SVM = "Linear SVM"
    QUADRATIC_SVM = "Quadratic SVM"
    CUBIC_SVM = "Cubic SVM"
    FINE_GAUSSIAN_SVM = "Fine Gaussian SVM"
    MEDIUM_GAUSSIAN_SVM = "Medium Gaussian SVM"
    COARSE_GAUSSIAN_SVM = "Coarse Gaussian SVM"

    BOOSTED_TREES = "Boosted Trees"
    BAGGED_TREES = "Bagged Trees"

    SQUARED_EXPONENTIAL_GPR = "Squared Exponential GPR"
    MATERN52_GPR = "Matern 5/2 GPR"
    EXPONENTIAL_GPR = "Exponential GPR"
    RATIONAL_QUADRATIC_GPR = "Rational Quadratic GPR"

    @property
    def family(self) -> ModelFamily:
        """Return the family this variant belongs to."""
        return VARIANT_FAMILY[self]

    @property
    def table_index(self) -> int:
        """Return the zero-based position of this variant in report order."""
        return TABLE_ORDER.index(self)


VARIANT_FAMILY: dict[RegressorVariant, ModelFamily] = {
    RegressorVariant.LINEAR: ModelFamily.LINEAR,
    RegressorVariant.INTERACTIONS_LINEAR: ModelFamily.LINEAR,
    RegressorVariant.ROBUST_LINEAR: ModelFamily.LINEAR,
    RegressorVariant.STEPWISE_LINEAR: ModelFamily.LINEAR,
    RegressorVariant.FINE_TREE: ModelFamily.TREE,
    RegressorVariant.MEDIUM_TREE: ModelFamily.TREE,
    RegressorVariant.COARSE_TREE: ModelFamily.TREE,
    RegressorVariant.LINEAR_SVM: ModelFamily.SVM,
    RegressorVariant.QUADRATIC_SVM: ModelFamily.SVM,
    RegressorVariant.CUBIC_SVM: ModelFamily.SVM,
    RegressorVariant.FINE_GAUSSIAN_SVM: ModelFamily.SVM,
    RegressorVariant.MEDIUM_GAUSSIAN_SVM: ModelFamily.SVM,
    RegressorVariant.COARSE_GAUSSIAN_SVM: ModelFamily.SVM,
    RegressorVariant.BOOSTED_TREES: ModelFamily.ENSEMBLE,
    RegressorVariant.BAGGED_TREES: ModelFamily.ENSEMBLE,
    RegressorVariant.SQUARED_EXPONENTIAL_GPR: ModelFamily.GPR,
    RegressorVariant.MATERN52_GPR: ModelFamily.GPR,
    RegressorVariant.EXPONENTIAL_GPR: ModelFamily.GPR,
    RegressorVariant.RATIONAL_QUADRATIC_GPR: ModelFamily.GPR,
}

TABLE_ORDER: tuple[RegressorVariant, ...] = tuple(RegressorVariant)


class PipelineStage(str, Enum):
    """Stages of the experiment pipeline, used to tag diagnostics."""

    CONFIG = "config"
    SIMULATE = "simulate"
    RENDER = "render"
    FEATURIZE = "featurize"
    TRAIN = "train"
    EVALUATE = "evaluate"
    REPORT = "report"
