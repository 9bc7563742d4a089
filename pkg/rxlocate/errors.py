"""Exception hierarchy for rxlocate."""

from __future__ import annotations

from typing import TYPE_CHECKING

if TYPE_CHECKING:
    from .types import PipelineStage


class RxLocateError(Exception):
    """Base class for every error raised by rxlocate."""


class DomainError(RxLocateError, ValueError):
    """An input violates an operation's precondition."""


class SingularImpedanceError(DomainError):
    """A zero impedance was used where a division by it is required."""


class SingularNetworkError(DomainError):
    """The fault loop has zero total impedance."""


class EmptyTrajectoryError(DomainError):
    """Every window of a record was skipped; no impedance point remains."""


class ConfigError(RxLocateError, ValueError):
    """Invalid configuration or parameter value."""


class FormatError(RxLocateError, ValueError):
    """Malformed file content (PGM, CSV or model dump)."""

    def __init__(
        self, message: str, line: int | None = None, column: str | None = None
    ) -> None:
        self.line = line
        self.column = column
        where = []
        if line is not None:
            where.append(f"line {line}")
        if column is not None:
            where.append(f"column {column!r}")
        if where:
            message = f"{message} ({', '.join(where)})"
        super().__init__(message)


class ConditioningError(RxLocateError, ArithmeticError):
    """A kernel matrix could not be factorized even with maximum jitter."""


class ReportError(RxLocateError):
    """A report could not be assembled from the given results."""


class StageError(RxLocateError):
    """A pipeline stage failed for a given scenario.

    Attributes:
        stage: The pipeline stage that failed
        scenario_id: Identifier of the scenario being processed, if any

    """

    def __init__(
        self, stage: PipelineStage, scenario_id: str | None, cause: BaseException
    ) -> None:
        self.stage = stage
        self.scenario_id = scenario_id
        self.cause = cause
        target = f" {scenario_id}" if scenario_id else ""
        super().__init__(f"[{stage.value}]{target}: {cause}")

    def __reduce__(self) -> tuple:
        return (type(self), (self.stage, self.scenario_id, self.cause))
