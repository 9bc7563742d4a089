"""Numeric helpers shared by the simulation, imaging and regression modules."""

from __future__ import annotations

import math
from collections.abc import Iterable

import numpy as np
from scipy import stats

from .errors import DomainError


class NumericUtils:
    """Small numeric helpers with fixed conventions."""

    # 0 * log2(0) is taken as 0
    @staticmethod
    def entropy_bits(p: np.ndarray) -> float:
        """Shannon entropy in bits of a probability array (any shape)."""
        q = np.asarray(p, dtype=float).ravel()
        q = q[q > 0]
        if q.size == 0:
            return 0.0
        return float(-np.sum(q * np.log2(q)))

    @staticmethod
    def round_half_up(value: float) -> int:
        """Round to the nearest integer, halves toward +inf."""
        return int(math.floor(value + 0.5))

    @staticmethod
    def iqr(values: np.ndarray) -> float:
        """Interquartile range with linear interpolation."""
        return float(stats.iqr(np.asarray(values, dtype=float)))

    @staticmethod
    def require_finite(values: np.ndarray | Iterable[float], what: str) -> np.ndarray:
        """Return ``values`` as a float array, raising if any entry is not finite.

        Raises:
            DomainError: If a NaN or infinity is present

        """
        arr = np.asarray(values, dtype=float)
        if not np.all(np.isfinite(arr)):
            bad = int(np.flatnonzero(~np.isfinite(arr.ravel()))[0])
            raise DomainError(f"{what}: non-finite value at flat index {bad}")
        return arr

    @staticmethod
    def is_finite_complex(z: complex) -> bool:
        return math.isfinite(z.real) and math.isfinite(z.imag)

    @staticmethod
    def parallel(a: complex, b: complex) -> complex:
        """Parallel combination of two impedances; an infinite branch is ignored."""
        if not NumericUtils.is_finite_complex(a):
            return b
        if not NumericUtils.is_finite_complex(b):
            return a
        total = a + b
        if total == 0:
            return 0j
        return a * b / total

    @staticmethod
    def format_sig(value: float, digits: int = 6) -> str:
        """Format ``value`` with ``digits`` significant digits."""
        if value == 0:
            return "0"
        return f"{value:.{digits}g}"
