"""Feature datasets and their CSV representation.

A dataset row is one simulated scenario: the texture features of its R-X
image, the normalized fault location and the scenario identifier. The CSV
header is the feature names followed by ``target`` and ``scenario_id``;
values are written with 17 significant digits so a read gives back the
written floats exactly.
"""

from __future__ import annotations

import io
import logging
import re
from collections.abc import Sequence
from dataclasses import dataclass

import numpy as np
import pandas as pd

from .errors import DomainError, FormatError

logger = logging.getLogger(__name__)

TARGET_COLUMN = "target"
ID_COLUMN = "scenario_id"
FLOAT_FORMAT = "%.17g"
_TOO_MANY_FIELDS = re.compile(r"Expected (\d+) fields in line (\d+), saw (\d+)")


@dataclass(frozen=True, eq=False)
class Dataset:
    """Feature matrix, targets and scenario ids.

    Attributes:
        x: Feature matrix of shape (n, p)
        y: Targets of shape (n,)
        ids: Scenario labels, one per row
        feature_names: Column names, one per feature

    """

    x: np.ndarray
    y: np.ndarray
    ids: tuple[str, ...]
    feature_names: tuple[str, ...]

    def __post_init__(self) -> None:
        x = np.asarray(self.x, dtype=float)
        y = np.asarray(self.y, dtype=float)
        if x.ndim != 2:
            raise DomainError(f"feature matrix must be 2-D, got shape {x.shape}")
        n, p = x.shape
        if y.shape != (n,):
            raise DomainError(f"expected {n} targets, got shape {y.shape}")
        if len(self.ids) != n:
            raise DomainError(f"expected {n} scenario ids, got {len(self.ids)}")
        if len(self.feature_names) != p:
            raise DomainError(f"expected {p} feature names, got {len(self.feature_names)}")
        if n < 2:
            raise DomainError(f"a dataset needs at least 2 rows, got {n}")
        if not np.all(np.isfinite(x)):
            row, col = np.argwhere(~np.isfinite(x))[0]
            raise DomainError(
                f"non-finite feature {self.feature_names[col]} in row {self.ids[row]}"
            )
        if not np.all(np.isfinite(y)):
            row = int(np.flatnonzero(~np.isfinite(y))[0])
            raise DomainError(f"non-finite target in row {self.ids[row]}")
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "y", y)
        object.__setattr__(self, "ids", tuple(str(i) for i in self.ids))
        object.__setattr__(self, "feature_names", tuple(self.feature_names))

    @property
    def n_samples(self) -> int:
        return int(self.x.shape[0])

    @property
    def n_features(self) -> int:
        return int(self.x.shape[1])

    def __len__(self) -> int:
        return self.n_samples

    def subset(self, rows: np.ndarray | Sequence[int]) -> Dataset:
        """Rows selected by index array or boolean mask, in the given order."""
        index = np.asarray(rows)
        if index.dtype == bool:
            index = np.flatnonzero(index)
        return Dataset(
            self.x[index],
            self.y[index],
            tuple(self.ids[i] for i in index.tolist()),
            self.feature_names,
        )

    def check_normalized_targets(self) -> Dataset:
        """Return self, raising unless every target lies in (0, 1].

        Raises:
            DomainError: If a target is outside (0, 1]

        """
        bad = np.flatnonzero((self.y <= 0.0) | (self.y > 1.0))
        if bad.size:
            i = int(bad[0])
            raise DomainError(
                f"target {self.y[i]!r} of {self.ids[i]} is outside (0, 1]"
            )
        return self


def write_dataset_csv(ds: Dataset) -> bytes:
    """Serialize ``ds`` to CSV bytes (LF line endings, UTF-8)."""
    frame = pd.DataFrame(ds.x, columns=list(ds.feature_names))
    frame[TARGET_COLUMN] = ds.y
    frame[ID_COLUMN] = list(ds.ids)
    text = frame.to_csv(index=False, float_format=FLOAT_FORMAT, lineterminator="\n")
    return text.encode("utf-8")


def _numeric_column(cells: pd.Series, name: str) -> np.ndarray:
    try:
        values = cells.to_numpy(dtype=str).astype(float)
    except ValueError:
        parsed = pd.to_numeric(cells, errors="coerce")
        first = parsed.index[parsed.isna()][0]
        raise FormatError(
            f"cannot parse {cells[first]!r} as a number", int(first) + 1, name
        ) from None
    bad = np.flatnonzero(~np.isfinite(values))
    if bad.size:
        first = cells.index[bad[0]]
        raise FormatError(f"non-finite value {cells[first]!r}", int(first) + 1, name)
    return values


def read_dataset_csv(data: bytes) -> Dataset:
    """Parse CSV bytes written by :func:`write_dataset_csv`.

    Raises:
        FormatError: On a bad header, a wrong column count, an unparseable or
            non-finite cell, or too few rows; the message names the line

    """
    try:
        data.decode("utf-8")
    except UnicodeDecodeError as exc:
        raise FormatError(f"dataset is not UTF-8: {exc}") from None

    try:
        raw = pd.read_csv(
            io.BytesIO(data),
            header=None,
            dtype=str,
            keep_default_na=False,
            na_values=[""],
            skip_blank_lines=False,
            encoding="utf-8",
        )
    except pd.errors.EmptyDataError:
        raise FormatError("empty dataset file", line=1) from None
    except pd.errors.ParserError as exc:
        found = _TOO_MANY_FIELDS.search(str(exc))
        if found is None:
            raise FormatError(f"unreadable dataset: {exc}") from None
        expected, lineno, seen = (int(g) for g in found.groups())
        raise FormatError(f"expected {expected} columns, found {seen}", line=lineno) from None
    # row i is line i + 1
    raw.index = pd.RangeIndex(len(raw))

    header = raw.iloc[0].tolist()
    if len(header) < 3 or header[-2:] != [TARGET_COLUMN, ID_COLUMN]:
        raise FormatError(
            f"header must end with {TARGET_COLUMN!r}, {ID_COLUMN!r}", line=1
        )
    names = tuple(str(h) for h in header[:-2])
    width = len(header)

    body = raw.iloc[1:]
    body = body[~body.isna().all(axis=1)]
    short = body.isna().any(axis=1)
    if short.any():
        first = short.index[short][0]
        found_cells = int(body.loc[first].notna().sum())
        raise FormatError(
            f"expected {width} non-empty columns, found {found_cells}", line=int(first) + 1
        )

    columns = [
        _numeric_column(body[i], name) for i, name in enumerate((*names, TARGET_COLUMN))
    ]
    try:
        ds = Dataset(
            np.column_stack(columns[:-1]).reshape(len(body), len(names)),
            columns[-1],
            tuple(body[width - 1].tolist()),
            names,
        )
    except DomainError as exc:
        raise FormatError(str(exc)) from None
    logger.debug("read dataset with %d rows and %d features", ds.n_samples, ds.n_features)
    return ds
