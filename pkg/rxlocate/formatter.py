"""Output formatter for rxlocate evaluation reports.

This module renders :class:`~rxlocate.evalkit.EvalReport` objects as
aligned plain-text tables and as versioned JSON documents. Text output
shows six significant digits; JSON keeps full precision.
"""

from __future__ import annotations

import json
from collections.abc import Sequence

from .evalkit import EvalReport
from .utils import NumericUtils

RULE_WIDTH = 70


def _fmt(value: float) -> str:
    return NumericUtils.format_sig(value, 6)


def _table(header: Sequence[str], rows: Sequence[Sequence[str]], right: Sequence[bool]) -> list[str]:
    widths = [max(len(h), *(len(r[i]) for r in rows)) if rows else len(h) for i, h in enumerate(header)]

    def line(cells: Sequence[str]) -> str:
        parts = [c.rjust(w) if r else c.ljust(w) for c, w, r in zip(cells, widths, right)]
        return "  ".join(parts).rstrip()

    out = [line(header), line(["-" * w for w in widths])]
    out.extend(line(r) for r in rows)
    return out


class OutputFormatter:
    """Formats evaluation reports into text and JSON."""

    @staticmethod
    def to_json(report: EvalReport) -> str:
        """Convert an EvalReport to a JSON string.

        Args:
            report: Report to convert

        Returns:
            JSON text with sorted keys and a trailing newline

        """
        return json.dumps(report.to_dict(), indent=2, sort_keys=True) + "\n"

    @staticmethod
    def format_text(report: EvalReport, show_residuals: bool = True) -> str:
        """Format a report as aligned plain-text tables.

        Args:
            report: Report to format
            show_residuals: Whether to append the held-out prediction table

        Returns:
            Formatted text ending in a newline

        """
        lines = []
        lines.append("=" * RULE_WIDTH)
        lines.append(f"FAULT LOCATION REPORT: {report.section.value} section")
        lines.append("=" * RULE_WIDTH)
        lines.append(f"Section start: {_fmt(report.section_start_km)} km")
        lines.append(f"Section length: {_fmt(report.total_length_km)} km")
        lines.append(f"Canvas framing: {report.framing or 'unspecified'}")
        lines.append(f"Cross-validation: {report.cv_k} folds, seed {report.seed}")
        lines.append(f"Test protocol: {report.protocol}")

        lines.append("")
        lines.append("Model RMSE (normalized location)")
        rows = [
            [v.family.value, v.value, _fmt(r), "*" if v is report.best_variant else ""]
            for v, r in report.model_rmse
        ]
        lines.extend(_table(["Family", "Model", "RMSE", "Best"], rows, [False, False, True, False]))

        lines.append("")
        lines.append(f"Best model: {report.best_variant.value} (RMSE {_fmt(report.best_rmse)})")

        if report.rows:
            lines.append("")
            lines.append("Test faults")
            rows = [
                [r.scenario_id, _fmt(r.actual_km), _fmt(r.estimated_km), _fmt(r.percent_error)]
                for r in report.rows
            ]
            lines.extend(
                _table(
                    ["Scenario", "Actual (km)", "Estimated (km)", "Error (%)"],
                    rows,
                    [False, True, True, True],
                )
            )
            lines.append(f"Maximum error: {_fmt(report.max_percent_error)} %")

        if show_residuals and report.residuals:
            lines.append("")
            lines.append(f"Held-out predictions of {report.best_variant.value}")
            rows = [
                [r.scenario_id, _fmt(r.actual), _fmt(r.predicted), _fmt(r.residual)]
                for r in report.residuals
            ]
            lines.extend(
                _table(["Scenario", "Actual", "Predicted", "Residual"], rows, [False, True, True, True])
            )

        return "\n".join(lines) + "\n"

    @staticmethod
    def format_comparison(reports: Sequence[EvalReport]) -> str:
        """Side-by-side RMSE columns of several section reports.

        Variants missing from a report are shown as ``-``.
        """
        if not reports:
            return ""
        variants = sorted(
            {v for report in reports for v, _ in report.model_rmse}, key=lambda v: v.table_index
        )
        scores = [dict(r.model_rmse) for r in reports]
        rows = [
            [v.value, *(_fmt(s[v]) if v in s else "-" for s in scores)] for v in variants
        ]
        header = ["Model", *(f"RMSE {r.section.value}" for r in reports)]
        lines = _table(header, rows, [False, *([True] * len(reports))])
        lines.append("")
        for report in reports:
            lines.append(f"Best {report.section.value}: {report.best_variant.value}")
        return "\n".join(lines) + "\n"
