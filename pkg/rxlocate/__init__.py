"""rxlocate: fault location on mixed overhead/cable transmission lines.

A fully synthetic pipeline that simulates phase-A-to-ground faults on a
mixed line, draws the distance relay's R-X impedance trajectory as a
grayscale image, describes the image with GLCM texture statistics and
estimates the fault location with a suite of nineteen regression models.

Main Modules:
    netmodel: Line model and fault solution in sequence components
    relaysim: Relay records, phasor estimation and impedance trajectories
    rxplot: R-X canvases, rasterization and PGM files
    texture: Quantization and GLCM features
    regress: Model suite, cross-validation and persistence
    evalkit: RMSE, percentage error and reports
    pipeline: The config-driven experiment

Example:
    >>> from rxlocate import percent_error
    >>> round(percent_error(45.0, 46.51063, 200.0), 3)
    0.755

"""

from .config import ExperimentConfig, load_config
from .datasets import Dataset, read_dataset_csv, write_dataset_csv
from .errors import (
    ConditioningError,
    ConfigError,
    DomainError,
    EmptyTrajectoryError,
    FormatError,
    ReportError,
    RxLocateError,
    SingularImpedanceError,
    SingularNetworkError,
    StageError,
)
from .evalkit import EvalReport, EvalRow, build_report, percent_error, rmse
from .pipeline import run_experiment
from .regress import (
    CVReport,
    FittedModel,
    RegressorSpec,
    cross_validate,
    dump_model,
    fit,
    load_model,
    predict,
)
from .types import ModelFamily, PipelineStage, RegressorVariant, SectionKind

__version__ = "0.1.0"

__all__ = [
    # Configuration and runner
    "ExperimentConfig",
    "load_config",
    "run_experiment",
    # Data and models
    "Dataset",
    "read_dataset_csv",
    "write_dataset_csv",
    "RegressorSpec",
    "FittedModel",
    "CVReport",
    "fit",
    "predict",
    "cross_validate",
    "dump_model",
    "load_model",
    # Evaluation
    "EvalReport",
    "EvalRow",
    "build_report",
    "percent_error",
    "rmse",
    # Enums
    "SectionKind",
    "ModelFamily",
    "RegressorVariant",
    "PipelineStage",
    # Errors
    "RxLocateError",
    "DomainError",
    "SingularImpedanceError",
    "SingularNetworkError",
    "EmptyTrajectoryError",
    "ConfigError",
    "FormatError",
    "ConditioningError",
    "ReportError",
    "StageError",
]
