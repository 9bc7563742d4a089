"""Gray-level co-occurrence matrices and the 1x20 texture feature vector.

The first fourteen features are GLCM statistics averaged over four unit
offsets; the last six are whole-image statistics chosen by name from
:data:`GLOBAL_STATISTICS`.
"""

from __future__ import annotations

import logging
from collections.abc import Callable, Sequence
from dataclasses import dataclass

import numpy as np
from scipy import stats

from .config import FeatureConfig
from .errors import ConfigError, DomainError
from .rxplot import GrayImage
from .utils import NumericUtils

logger = logging.getLogger(__name__)

MAX_GLCM_LEVELS = 64
FEATURE_COUNT = 20

GLCM_STATISTICS: tuple[str, ...] = (
    "mean",
    "entropy",
    "variance",
    "dissimilarity",
    "contrast",
    "inverse_difference_moment",
    "energy",
    "correlation",
    "cluster_shade",
    "cluster_prominence",
    "sum_entropy",
    "sum_mean",
    "difference_entropy",
    "sum_variance",
)


@dataclass(frozen=True, eq=False)
class GLCM:
    """Normalized co-occurrence matrix for one offset."""

    levels: int
    p: np.ndarray
    offset: tuple[int, int]
    symmetric: bool


@dataclass(frozen=True, eq=False)
class FeatureVector:
    """Twenty named texture features in fixed order."""

    values: np.ndarray
    names: tuple[str, ...]

    def __post_init__(self) -> None:
        if self.values.shape != (FEATURE_COUNT,) or len(self.names) != FEATURE_COUNT:
            raise DomainError(f"a feature vector has exactly {FEATURE_COUNT} entries")
        if not np.all(np.isfinite(self.values)):
            bad = self.names[int(np.flatnonzero(~np.isfinite(self.values))[0])]
            raise DomainError(f"feature {bad} is not finite")

    def as_dict(self) -> dict[str, float]:
        return dict(zip(self.names, self.values.tolist()))


def compute_glcm(img: GrayImage, offset: tuple[int, int], symmetric: bool = True) -> GLCM:
    """Co-occurrence matrix of (img[r, c], img[r + dr, c + dc]).

    Raises:
        DomainError: If the image has more than 64 levels or no pixel pair
            fits the offset

    """
    if img.levels > MAX_GLCM_LEVELS:
        raise DomainError(f"GLCM needs at most {MAX_GLCM_LEVELS} levels, image has {img.levels}")
    dr, dc = offset
    h, w = img.pixels.shape
    r0, r1 = max(0, -dr), min(h, h - dr)
    c0, c1 = max(0, -dc), min(w, w - dc)
    if r1 <= r0 or c1 <= c0:
        raise DomainError(f"offset {offset} leaves no pixel pairs in a {h}x{w} image")

    levels = img.levels
    first = img.pixels[r0:r1, c0:c1].astype(np.int64)
    second = img.pixels[r0 + dr : r1 + dr, c0 + dc : c1 + dc].astype(np.int64)
    counts = np.bincount((first * levels + second).ravel(), minlength=levels * levels)
    counts = counts.reshape(levels, levels).astype(float)
    if symmetric:
        counts = counts + counts.T
    return GLCM(levels, counts / counts.sum(), (dr, dc), symmetric)


def glcm_statistics(g: GLCM) -> dict[str, float]:
    """The fourteen GLCM statistics, keyed in :data:`GLCM_STATISTICS` order."""
    p = g.p
    n = g.levels
    i, j = np.indices((n, n), dtype=float)
    px = p.sum(axis=1)
    py = p.sum(axis=0)
    levels = np.arange(n, dtype=float)
    mu_x = float(levels @ px)
    mu_y = float(levels @ py)
    sigma_x = float(np.sqrt(((levels - mu_x) ** 2) @ px))
    sigma_y = float(np.sqrt(((levels - mu_y) ** 2) @ py))

    k_sum = (i + j).astype(np.int64).ravel()
    k_diff = np.abs(i - j).astype(np.int64).ravel()
    p_sum = np.bincount(k_sum, weights=p.ravel(), minlength=2 * n - 1)
    p_diff = np.bincount(k_diff, weights=p.ravel(), minlength=n)
    sums = np.arange(2 * n - 1, dtype=float)
    sum_mean = float(sums @ p_sum)

    if sigma_x <= 1e-12 or sigma_y <= 1e-12:
        correlation = 0.0
    else:
        correlation = float(np.sum((i - mu_x) * (j - mu_y) * p) / (sigma_x * sigma_y))
        correlation = min(1.0, max(-1.0, correlation))

    centred = i + j - mu_x - mu_y
    values = {
        "mean": float(np.sum(i * p)),
        "entropy": NumericUtils.entropy_bits(p),
        "variance": float(np.sum((i - mu_x) ** 2 * p)),
        "dissimilarity": float(np.sum(np.abs(i - j) * p)),
        "contrast": float(np.sum((i - j) ** 2 * p)),
        "inverse_difference_moment": float(np.sum(p / (1.0 + (i - j) ** 2))),
        "energy": float(np.sum(p**2)),
        "correlation": correlation,
        "cluster_shade": float(np.sum(centred**3 * p)),
        "cluster_prominence": float(np.sum(centred**4 * p)),
        "sum_entropy": NumericUtils.entropy_bits(p_sum),
        "sum_mean": sum_mean,
        "difference_entropy": NumericUtils.entropy_bits(p_diff),
        "sum_variance": float(((sums - sum_mean) ** 2) @ p_sum),
    }
    return {name: values[name] for name in GLCM_STATISTICS}


# ---------------------------------------------------------------------------
# whole-image statistics
#
# Each statistic takes the (height, width) pixel array and the level count.


def _moment_or_zero(fn: Callable[[np.ndarray], float]) -> Callable[[np.ndarray, int], float]:
    def wrapped(x: np.ndarray, levels: int) -> float:
        flat = x.ravel()
        if float(np.std(flat)) == 0.0:
            return 0.0
        return float(fn(flat))

    return wrapped


def _histogram(x: np.ndarray, levels: int) -> np.ndarray:
    return np.bincount(x.ravel().astype(np.int64), minlength=levels) / x.size


def _top_level_centroid(axis: int) -> Callable[[np.ndarray, int], float]:
    """Mean row (axis 0) or column (axis 1) of the brightest level, scaled to [0, 1]; 0 if absent."""

    def centroid(x: np.ndarray, levels: int) -> float:
        where = np.nonzero(x == levels - 1)[axis]
        if where.size == 0:
            return 0.0
        return float(np.mean(where)) / max(x.shape[axis] - 1, 1)

    return centroid


GLOBAL_STATISTICS: dict[str, Callable[[np.ndarray, int], float]] = {
    "intensity_mean": lambda x, levels: float(np.mean(x)),
    "intensity_std": lambda x, levels: float(np.std(x)),
    "intensity_skewness": _moment_or_zero(lambda x: stats.skew(x, bias=True)),
    "intensity_kurtosis": _moment_or_zero(lambda x: stats.kurtosis(x, fisher=True, bias=True)),
    "histogram_energy": lambda x, levels: float(np.sum(_histogram(x, levels) ** 2)),
    "histogram_entropy": lambda x, levels: NumericUtils.entropy_bits(_histogram(x, levels)),
    "intensity_median": lambda x, levels: float(np.median(x)),
    "intensity_range": lambda x, levels: float(np.max(x) - np.min(x)),
    "top_level_fraction": lambda x, levels: float(np.mean(x == levels - 1)),
    "nonzero_fraction": lambda x, levels: float(np.mean(x > 0)),
    "top_level_row_centroid": _top_level_centroid(0),
    "top_level_col_centroid": _top_level_centroid(1),
}


def feature_names(cfg: FeatureConfig) -> tuple[str, ...]:
    """Column names of the feature vector for ``cfg``.

    Raises:
        ConfigError: If the global statistics are unknown or not six

    """
    extra = FEATURE_COUNT - len(GLCM_STATISTICS)
    if len(cfg.global_statistics) != extra:
        raise ConfigError(
            f"features.global_statistics must name {extra} statistics, got {len(cfg.global_statistics)}"
        )
    unknown = [s for s in cfg.global_statistics if s not in GLOBAL_STATISTICS]
    if unknown:
        raise ConfigError(
            f"unknown global statistic {unknown[0]!r}; choose from {', '.join(sorted(GLOBAL_STATISTICS))}"
        )
    return GLCM_STATISTICS + tuple(cfg.global_statistics)


def averaged_glcm_statistics(
    img: GrayImage, offsets: Sequence[tuple[int, int]], symmetric: bool = True
) -> np.ndarray:
    """GLCM statistics per offset, averaged slotwise."""
    if not offsets:
        raise ConfigError("at least one GLCM offset is required")
    table = np.array(
        [list(glcm_statistics(compute_glcm(img, o, symmetric)).values()) for o in offsets]
    )
    return table.mean(axis=0)


def extract_features(img: GrayImage, cfg: FeatureConfig) -> FeatureVector:
    """Build the 20-entry feature vector of a quantized image.

    Raises:
        DomainError: If the image is not quantized to ``cfg.levels`` or an
            offset has no pixel pairs

    """
    names = feature_names(cfg)
    if img.levels != cfg.levels:
        raise DomainError(f"image has {img.levels} levels, features expect {cfg.levels}")
    glcm_part = averaged_glcm_statistics(img, cfg.offsets, cfg.symmetric)
    x = img.pixels.astype(float)
    global_part = [GLOBAL_STATISTICS[name](x, img.levels) for name in cfg.global_statistics]
    return FeatureVector(np.concatenate([glcm_part, np.array(global_part, dtype=float)]), names)
