"""CART regression trees and the boosted and bagged tree ensembles.

Trees are stored as flat node arrays. A node with ``feature == -1`` is a
leaf; otherwise samples with ``z[feature] <= threshold`` go to ``left``.
"""

from __future__ import annotations

import logging
import math
from collections.abc import Iterator
from dataclasses import dataclass
from typing import Any, Optional

import numpy as np

from .errors import FormatError

logger = logging.getLogger(__name__)

LEAF = -1


@dataclass(frozen=True, eq=False)
class RegressionTree:
    """Binary regression tree in array form."""

    feature: np.ndarray
    threshold: np.ndarray
    left: np.ndarray
    right: np.ndarray
    value: np.ndarray

    @property
    def n_nodes(self) -> int:
        return int(self.feature.shape[0])

    @property
    def n_leaves(self) -> int:
        return int(np.count_nonzero(self.feature == LEAF))

    def apply(self, z: np.ndarray) -> np.ndarray:
        """Leaf index reached by each row of ``z``."""
        node = np.zeros(z.shape[0], dtype=np.int64)
        while True:
            f = self.feature[node]
            rows = np.flatnonzero(f != LEAF)
            if rows.size == 0:
                return node
            at = node[rows]
            go_left = z[rows, f[rows]] <= self.threshold[at]
            node[rows] = np.where(go_left, self.left[at], self.right[at])

    def predict(self, z: np.ndarray) -> np.ndarray:
        return self.value[self.apply(z)]

    def to_dict(self) -> dict[str, Any]:
        return {
            "feature": self.feature.tolist(),
            "threshold": self.threshold.tolist(),
            "left": self.left.tolist(),
            "right": self.right.tolist(),
            "value": self.value.tolist(),
        }

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> RegressionTree:
        try:
            tree = cls(
                np.array(data["feature"], dtype=np.int64),
                np.array(data["threshold"], dtype=float),
                np.array(data["left"], dtype=np.int64),
                np.array(data["right"], dtype=np.int64),
                np.array(data["value"], dtype=float),
            )
        except (KeyError, TypeError, ValueError) as exc:
            raise FormatError(f"bad tree parameters: {exc}") from None
        n = tree.n_nodes
        if n == 0 or any(a.shape != (n,) for a in (tree.threshold, tree.left, tree.right, tree.value)):
            raise FormatError("tree node arrays have inconsistent lengths")
        return tree


def _best_split(
    z: np.ndarray, y: np.ndarray, features: np.ndarray, min_leaf: int
) -> Optional[tuple[int, float]]:
    """Feature and midpoint threshold minimizing the children's squared error."""
    n = y.shape[0]
    total = float(y.sum())
    parent = total * total / n
    tol = 1e-12 * max(1.0, float(y @ y))
    best_score = parent + tol
    best: Optional[tuple[int, float]] = None

    counts = np.arange(1, n)
    allowed = (counts >= min_leaf) & (n - counts >= min_leaf)
    if not np.any(allowed):
        return None
    for f in features.tolist():
        order = np.argsort(z[:, f], kind="stable")
        xs = z[order, f]
        left_sum = np.cumsum(y[order])[:-1]
        score = left_sum**2 / counts + (total - left_sum) ** 2 / (n - counts)
        valid = allowed & (xs[:-1] < xs[1:])
        if not np.any(valid):
            continue
        score = np.where(valid, score, -np.inf)
        top = float(score.max())
        if top <= best_score:
            continue
        k = int(np.flatnonzero(score >= top - tol)[0])
        best_score = top + tol
        best = (f, 0.5 * (float(xs[k]) + float(xs[k + 1])))
    return best


def grow_tree(
    z: np.ndarray,
    y: np.ndarray,
    min_leaf: int,
    max_features: Optional[int] = None,
    rng: Optional[np.random.Generator] = None,
) -> RegressionTree:
    """Grow a CART tree that splits while both children keep ``min_leaf`` rows.

    Args:
        z: Standardized features (n, p)
        y: Targets (n,)
        min_leaf: Minimum number of rows per leaf
        max_features: Features drawn (without replacement) per split; all if None
        rng: Generator for feature subsampling

    """
    n, p = z.shape
    if min_leaf < 1:
        raise ValueError("min_leaf must be at least 1")
    all_features = np.arange(p)
    feature: list[int] = []
    threshold: list[float] = []
    left: list[int] = []
    right: list[int] = []
    value: list[float] = []

    def new_node(rows: np.ndarray) -> int:
        feature.append(LEAF)
        threshold.append(0.0)
        left.append(LEAF)
        right.append(LEAF)
        value.append(float(np.mean(y[rows])))
        return len(feature) - 1

    stack = [(new_node(np.arange(n)), np.arange(n))]
    while stack:
        node, rows = stack.pop()
        if rows.size < 2 * min_leaf:
            continue
        if max_features is not None and max_features < p and rng is not None:
            features = np.sort(rng.choice(p, size=max_features, replace=False))
        else:
            features = all_features
        split = _best_split(z[rows], y[rows], features, min_leaf)
        if split is None:
            continue
        f, t = split
        mask = z[rows, f] <= t
        lo, hi = rows[mask], rows[~mask]
        feature[node], threshold[node] = f, t
        left[node] = new_node(lo)
        right[node] = new_node(hi)
        stack.append((right[node], hi))
        stack.append((left[node], lo))

    return RegressionTree(
        np.array(feature, dtype=np.int64),
        np.array(threshold, dtype=float),
        np.array(left, dtype=np.int64),
        np.array(right, dtype=np.int64),
        np.array(value, dtype=float),
    )


@dataclass(frozen=True, eq=False)
class TreeEnsemble:
    """Boosted (``init + rate * sum``) or bagged (mean) collection of trees."""

    kind: str
    trees: tuple[RegressionTree, ...]
    init: float = 0.0
    learn_rate: float = 1.0

    def predict(self, z: np.ndarray) -> np.ndarray:
        if self.kind == "bagged":
            return np.mean([t.predict(z) for t in self.trees], axis=0)
        out = np.full(z.shape[0], self.init)
        for tree in self.trees:
            out = out + self.learn_rate * tree.predict(z)
        return out

    def staged_predict(self, z: np.ndarray) -> Iterator[np.ndarray]:
        """Boosted predictions after each successive tree."""
        out = np.full(z.shape[0], self.init)
        for tree in self.trees:
            out = out + self.learn_rate * tree.predict(z)
            yield out

    def to_dict(self) -> dict[str, Any]:
        return {
            "kind": self.kind,
            "init": self.init,
            "learn_rate": self.learn_rate,
            "trees": [t.to_dict() for t in self.trees],
        }

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> TreeEnsemble:
        try:
            kind = str(data["kind"])
            trees = tuple(RegressionTree.from_dict(t) for t in data["trees"])
            init = float(data["init"])
            rate = float(data["learn_rate"])
        except (KeyError, TypeError, ValueError) as exc:
            raise FormatError(f"bad ensemble parameters: {exc}") from None
        if kind not in ("boosted", "bagged"):
            raise FormatError(f"unknown ensemble kind {kind!r}")
        return cls(kind, trees, init, rate)


def fit_boosted(
    z: np.ndarray, y: np.ndarray, n_trees: int = 30, learn_rate: float = 0.1, min_leaf: int = 8
) -> TreeEnsemble:
    """Least-squares boosting: every tree fits the current residuals."""
    init = float(np.mean(y))
    current = np.full(y.shape[0], init)
    trees = []
    for _ in range(n_trees):
        tree = grow_tree(z, y - current, min_leaf)
        current = current + learn_rate * tree.predict(z)
        trees.append(tree)
    return TreeEnsemble("boosted", tuple(trees), init, learn_rate)


def fit_bagged(
    z: np.ndarray,
    y: np.ndarray,
    seed: int,
    n_trees: int = 30,
    min_leaf: int = 8,
    max_features: Optional[int] = None,
) -> TreeEnsemble:
    """Bootstrap-aggregated trees with per-split feature subsampling.

    ``max_features`` defaults to ``ceil(p / 3)``. Each tree draws from its
    own child of ``SeedSequence(seed)``.
    """
    n, p = z.shape
    m = max_features if max_features is not None else max(1, math.ceil(p / 3))
    trees = []
    for child in np.random.SeedSequence(seed).spawn(n_trees):
        rng = np.random.default_rng(child)
        rows = rng.integers(0, n, size=n)
        trees.append(grow_tree(z[rows], y[rows], min_leaf, max_features=m, rng=rng))
    return TreeEnsemble("bagged", tuple(trees))
