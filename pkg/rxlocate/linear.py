"""Linear regression family: plain, interactions, robust and stepwise fits.

All fits work on standardized features ``z``. A model is a list of terms
and one coefficient per term; a term is a tuple of feature indices whose
product forms the design column (``()`` is the intercept, ``(i,)`` a main
effect, ``(i, j)`` a pairwise interaction).
"""

from __future__ import annotations

import itertools
import logging
from collections.abc import Sequence
from dataclasses import dataclass
from typing import Any

import numpy as np
from scipy import linalg, stats

from .errors import FormatError

logger = logging.getLogger(__name__)

Term = tuple[int, ...]

BISQUARE_TUNING = 4.685
MAD_TO_SIGMA = 0.6745


def main_terms(p: int) -> tuple[Term, ...]:
    return tuple((i,) for i in range(p))


def interaction_terms(p: int) -> tuple[Term, ...]:
    return tuple(itertools.combinations(range(p), 2))


def design_matrix(z: np.ndarray, terms: Sequence[Term]) -> np.ndarray:
    """Columns ``prod(z[:, i] for i in term)`` for each term."""
    a = np.ones((z.shape[0], len(terms)))
    for col, term in enumerate(terms):
        for i in term:
            a[:, col] *= z[:, i]
    return a


@dataclass(frozen=True, eq=False)
class LinearModel:
    """Terms and coefficients of a fitted linear model (standardized units)."""

    terms: tuple[Term, ...]
    coef: np.ndarray

    def predict(self, z: np.ndarray) -> np.ndarray:
        return design_matrix(z, self.terms) @ self.coef

    def raw_terms(self, mean: np.ndarray, scale: np.ndarray) -> dict[Term, float]:
        """Coefficients in raw feature units.

        Each standardized term ``prod((x_i - m_i) / s_i)`` is expanded into
        raw monomials; the result maps a monomial (sorted feature indices,
        ``()`` for the intercept) to its coefficient.

        Example:
            >>> m = LinearModel(((), (0,)), np.array([2.0, 1.0]))
            >>> m.raw_terms(np.array([0.5]), np.array([0.5]))
            {(): 1.0, (0,): 2.0}

        """
        raw: dict[Term, float] = {}
        for term, beta in zip(self.terms, self.coef.tolist()):
            factor = beta / float(np.prod([scale[i] for i in term])) if term else beta
            for size in range(len(term) + 1):
                for kept in itertools.combinations(term, size):
                    rest = [i for i in term if i not in kept]
                    value = factor * float(np.prod([-mean[i] for i in rest]))
                    raw[kept] = raw.get(kept, 0.0) + value
        return {k: raw[k] for k in sorted(raw, key=lambda t: (len(t), t))}

    def to_dict(self) -> dict[str, Any]:
        return {"terms": [list(t) for t in self.terms], "coef": self.coef.tolist()}

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> LinearModel:
        try:
            terms = tuple(tuple(int(i) for i in t) for t in data["terms"])
            coef = np.array(data["coef"], dtype=float)
        except (KeyError, TypeError, ValueError) as exc:
            raise FormatError(f"bad linear model parameters: {exc}") from None
        if coef.shape != (len(terms),):
            raise FormatError("linear model has mismatched terms and coefficients")
        return cls(terms, coef)


def least_squares(a: np.ndarray, y: np.ndarray) -> np.ndarray:
    """Minimum-norm least-squares solution of ``a @ coef ~ y``."""
    coef, _, rank, _ = linalg.lstsq(a, y, lapack_driver="gelsd")
    if rank < a.shape[1]:
        logger.warning(
            "rank-deficient design (%d of %d columns); using the minimum-norm solution",
            rank,
            a.shape[1],
        )
    return np.asarray(coef, dtype=float)


def fit_ols(z: np.ndarray, y: np.ndarray, interactions: bool = False) -> LinearModel:
    """Least squares on ``[1, z]``, plus pairwise products if ``interactions``."""
    p = z.shape[1]
    terms: tuple[Term, ...] = ((),) + main_terms(p)
    if interactions:
        terms += interaction_terms(p)
    return LinearModel(terms, least_squares(design_matrix(z, terms), y))


def bisquare_weights(u: np.ndarray) -> np.ndarray:
    w = (1.0 - u**2) ** 2
    w[np.abs(u) >= 1.0] = 0.0
    return w


def fit_robust(
    z: np.ndarray,
    y: np.ndarray,
    tuning: float = BISQUARE_TUNING,
    max_iter: int = 50,
    tol: float = 1e-8,
) -> tuple[LinearModel, int]:
    """Iteratively reweighted least squares with bisquare weights.

    Starts from the ordinary fit; each pass rescales residuals by
    ``median(|r|) / 0.6745`` and refits with bisquare weights. Stops after
    ``max_iter`` passes, when no coefficient moves by ``tol`` or more, or
    when the residual scale collapses to zero.

    Returns:
        The model and the number of reweighting passes performed

    """
    terms: tuple[Term, ...] = ((),) + main_terms(z.shape[1])
    a = design_matrix(z, terms)
    coef = least_squares(a, y)
    floor = 1e-12 * (1.0 + float(np.max(np.abs(y))))
    iterations = 0
    for iterations in range(1, max_iter + 1):
        r = y - a @ coef
        s = float(np.median(np.abs(r))) / MAD_TO_SIGMA
        if s <= floor:
            break
        root_w = np.sqrt(bisquare_weights(r / (tuning * s)))
        updated = least_squares(a * root_w[:, None], y * root_w)
        change = float(np.max(np.abs(updated - coef)))
        coef = updated
        if change < tol:
            break
    return LinearModel(terms, coef), iterations


def _qr(a: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    q, r = linalg.qr(a, mode="economic")
    return q, r


def fit_stepwise(
    z: np.ndarray,
    y: np.ndarray,
    p_enter: float = 0.05,
    p_remove: float = 0.10,
    max_steps: int = 200,
) -> LinearModel:
    """Forward/backward stepwise selection over main and pairwise terms.

    Each step first tries to add the candidate with the smallest partial
    F-test p-value (if below ``p_enter``); failing that, it removes the
    selected term with the largest p-value (if above ``p_remove``). Ties go
    to the lower term index. The intercept is always kept.
    """
    n, p = z.shape
    candidates = main_terms(p) + interaction_terms(p)
    columns = design_matrix(z, candidates)
    column_norms = np.sum(columns**2, axis=0)
    tss = float(np.sum((y - y.mean()) ** 2))
    selected: list[int] = []

    for step in range(max_steps):
        a = np.column_stack([np.ones(n), columns[:, selected]])
        k = a.shape[1]
        q, r = _qr(a)
        coef = linalg.solve_triangular(r, q.T @ y)
        resid = y - a @ coef
        rss = float(resid @ resid)

        changed = False
        df_add = n - k - 1
        if df_add > 0 and rss > 1e-20 * tss:
            proj = columns - q @ (q.T @ columns)
            den = np.sum(proj**2, axis=0)
            usable = den > 1e-10 * np.maximum(column_norms, 1e-300)
            usable[selected] = False
            if np.any(usable):
                gain = np.zeros(len(candidates))
                gain[usable] = (proj[:, usable].T @ resid) ** 2 / den[usable]
                remaining = np.maximum(rss - gain, 1e-300)
                f_stat = gain / (remaining / df_add)
                pvals = np.where(usable, stats.f.sf(f_stat, 1, df_add), np.inf)
                best = int(np.argmin(pvals))
                if pvals[best] < p_enter:
                    selected.append(best)
                    logger.debug("stepwise step %d: add %s (p=%.3g)", step, candidates[best], pvals[best])
                    changed = True

        if not changed and selected:
            df = n - k
            r_inv = linalg.solve_triangular(r, np.eye(k))
            var_diag = np.sum(r_inv**2, axis=1)[1:]
            sigma2 = max(rss / df, 1e-300)
            f_stat = coef[1:] ** 2 / (var_diag * sigma2)
            pvals = stats.f.sf(f_stat, 1, df)
            order = np.array(selected)
            # largest p first, then lowest term index
            worst = min(range(len(selected)), key=lambda i: (-pvals[i], order[i]))
            if pvals[worst] > p_remove:
                logger.debug(
                    "stepwise step %d: remove %s (p=%.3g)", step, candidates[selected[worst]], pvals[worst]
                )
                del selected[worst]
                changed = True

        if not changed:
            break
    else:
        logger.info("stepwise selection stopped at the %d-step limit", max_steps)

    terms: tuple[Term, ...] = ((),) + tuple(candidates[i] for i in selected)
    return LinearModel(terms, least_squares(design_matrix(z, terms), y))
