"""Accuracy metrics and per-section evaluation reports.

A report collects the cross-validated RMSE of every model variant, picks
the best one, and tabulates its estimates on fresh test scenarios as
percentage errors of the section length.
"""

from __future__ import annotations

import math
from collections.abc import Sequence
from dataclasses import dataclass
from typing import TYPE_CHECKING, Any

import numpy as np

from .errors import DomainError, ReportError
from .types import TABLE_ORDER, RegressorVariant, SectionKind

if TYPE_CHECKING:
    from .regress import CVReport

REPORT_SCHEMA = "rxlocate-report"
REPORT_SCHEMA_VERSION = 1

REFIT_PROTOCOL = (
    "best variant refit on the full training grid; test faults simulated as fresh scenarios"
)


def rmse(x: Sequence[float] | np.ndarray, y: Sequence[float] | np.ndarray) -> float:
    """Root mean square difference of two equal-length sequences.

    Raises:
        DomainError: If the lengths differ or are zero

    Example:
        >>> round(rmse([0.0, 0.0], [3.0, 4.0]), 5)
        3.53553

    """
    a = np.asarray(x, dtype=float).ravel()
    b = np.asarray(y, dtype=float).ravel()
    if a.size != b.size:
        raise DomainError(f"rmse needs equal lengths, got {a.size} and {b.size}")
    if a.size == 0:
        raise DomainError("rmse of empty sequences")
    return float(np.sqrt(np.mean((a - b) ** 2)))


def percent_error(actual_km: float, estimated_km: float, total_length_km: float) -> float:
    """``|actual - estimated| / total_length * 100``.

    Raises:
        DomainError: If ``total_length_km`` is not positive

    """
    if not total_length_km > 0:
        raise DomainError(f"total length must be positive, got {total_length_km}")
    return abs(actual_km - estimated_km) / total_length_km * 100.0


@dataclass(frozen=True)
class LocationEstimate:
    """A test scenario's true and estimated location within its section."""

    scenario_id: str
    actual_km: float
    estimated_km: float
    fault_section: int = 0


@dataclass(frozen=True)
class EvalRow:
    scenario_id: str
    actual_km: float
    estimated_km: float
    percent_error: float
    fault_section: int = 0

    def __post_init__(self) -> None:
        if not self.percent_error >= 0:
            raise DomainError(f"percent error must be non-negative, got {self.percent_error}")

    def to_dict(self) -> dict[str, Any]:
        return {
            "scenario_id": self.scenario_id,
            "actual_km": self.actual_km,
            "estimated_km": self.estimated_km,
            "percent_error": self.percent_error,
            "fault_section": self.fault_section,
        }


@dataclass(frozen=True)
class ResidualRow:
    """Held-out cross-validation prediction of one training scenario."""

    scenario_id: str
    actual: float
    predicted: float

    @property
    def residual(self) -> float:
        return self.actual - self.predicted

    def to_dict(self) -> dict[str, Any]:
        return {
            "scenario_id": self.scenario_id,
            "actual": self.actual,
            "predicted": self.predicted,
            "residual": self.residual,
        }


@dataclass(frozen=True)
class EvalReport:
    """Evaluation of one section experiment.

    Attributes:
        section: Section kind of the experiment
        model_rmse: (variant, CV RMSE) pairs in report order
        best_variant: Variant with the smallest RMSE (ties to report order)
        rows: Test estimates of the best variant
        total_length_km: Section length used for percentage errors
        section_start_km: Absolute distance of the section start from the relay
        residuals: Held-out CV predictions of the best variant
        cv_k: Number of folds
        seed: Experiment seed
        framing: Canvas framing of the section's images
        protocol: How the test rows were produced

    """

    section: SectionKind
    model_rmse: tuple[tuple[RegressorVariant, float], ...]
    best_variant: RegressorVariant
    rows: tuple[EvalRow, ...]
    total_length_km: float
    section_start_km: float = 0.0
    residuals: tuple[ResidualRow, ...] = ()
    cv_k: int = 0
    seed: int = 0
    framing: str = ""
    protocol: str = REFIT_PROTOCOL

    @property
    def best_rmse(self) -> float:
        return dict(self.model_rmse)[self.best_variant]

    @property
    def max_percent_error(self) -> float:
        return max((r.percent_error for r in self.rows), default=math.nan)

    def to_dict(self) -> dict[str, Any]:
        return {
            "schema": REPORT_SCHEMA,
            "version": REPORT_SCHEMA_VERSION,
            "section": self.section.value,
            "section_start_km": self.section_start_km,
            "total_length_km": self.total_length_km,
            "framing": self.framing,
            "cv_k": self.cv_k,
            "seed": self.seed,
            "protocol": self.protocol,
            "models": [{"variant": v.value, "family": v.family.value, "rmse": r} for v, r in self.model_rmse],
            "best_variant": self.best_variant.value,
            "best_rmse": self.best_rmse,
            "test_rows": [r.to_dict() for r in self.rows],
            "max_percent_error": self.max_percent_error if self.rows else None,
            "residuals": [r.to_dict() for r in self.residuals],
        }


def best_variant(scores: Sequence[tuple[RegressorVariant, float]]) -> RegressorVariant:
    """Argmin of RMSE; the earliest in report order wins a tie."""
    ordered = sorted(scores, key=lambda vr: vr[0].table_index)
    return min(ordered, key=lambda vr: vr[1])[0]


def build_report(
    cv: CVReport,
    test_rows: Sequence[LocationEstimate],
    section: SectionKind,
    total_length_km: float,
    *,
    variants: Sequence[RegressorVariant] = TABLE_ORDER,
    section_start_km: float = 0.0,
    framing: str = "",
    protocol: str = REFIT_PROTOCOL,
) -> EvalReport:
    """Assemble the RMSE table, best variant and test rows of one section.

    Args:
        cv: Cross-validation results of the section
        test_rows: Best-variant estimates on the test scenarios
        section: Section kind
        total_length_km: Section length for percentage errors
        variants: Variants the report must list (all nineteen by default)
        section_start_km: Absolute start of the section
        framing: Canvas framing recorded in the header
        protocol: Test protocol recorded in the header

    Raises:
        ReportError: If a required variant has no cross-validation result

    """
    missing = [v for v in variants if v not in cv.rmse]
    if missing:
        raise ReportError(f"no cross-validation result for {', '.join(v.value for v in missing)}")
    wanted = set(variants)
    scores = tuple((v, float(cv.rmse[v])) for v in TABLE_ORDER if v in wanted)
    if not scores:
        raise ReportError("a report needs at least one model variant")
    best = best_variant(scores)

    rows = tuple(
        EvalRow(
            t.scenario_id,
            t.actual_km,
            t.estimated_km,
            percent_error(t.actual_km, t.estimated_km, total_length_km),
            t.fault_section,
        )
        for t in test_rows
    )
    predicted = cv.predictions.get(best)
    residuals: tuple[ResidualRow, ...] = ()
    if predicted is not None:
        residuals = tuple(
            ResidualRow(sid, float(a), float(p)) for sid, a, p in zip(cv.ids, cv.y, predicted)
        )
    return EvalReport(
        section=section,
        model_rmse=scores,
        best_variant=best,
        rows=rows,
        total_length_km=total_length_km,
        section_start_km=section_start_km,
        residuals=residuals,
        cv_k=cv.k,
        seed=cv.seed,
        framing=framing,
        protocol=protocol,
    )
