"""Epsilon-insensitive support-vector regression solved by SMO.

The dual is written in ``beta = alpha - alpha*``::

    minimize  0.5 * beta' K beta - y' beta + eps * sum(|beta|)
    subject to  sum(beta) = 0,  -C <= beta <= C

Each SMO step picks the maximal violating pair and minimizes the
piecewise-quadratic objective exactly along ``beta_i += t, beta_j -= t``.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from typing import Any

import numpy as np
from scipy.spatial.distance import cdist

from .errors import FormatError
from .utils import NumericUtils

logger = logging.getLogger(__name__)

KERNEL_NAMES = ("linear", "polynomial", "gaussian")


@dataclass(frozen=True)
class SVRKernel:
    """Kernel function on standardized features.

    Attributes:
        name: ``linear``, ``polynomial`` or ``gaussian``
        degree: Polynomial degree, ``(1 + <u, v>) ** degree``
        scale: Gaussian scale ``s`` in ``exp(-|u - v|^2 / (2 s^2))``

    """

    name: str
    degree: int = 1
    scale: float = 1.0

    def __post_init__(self) -> None:
        if self.name not in KERNEL_NAMES:
            raise ValueError(f"unknown SVR kernel {self.name!r}")
        if self.scale <= 0:
            raise ValueError("kernel scale must be positive")

    def matrix(self, a: np.ndarray, b: np.ndarray) -> np.ndarray:
        if self.name == "linear":
            return a @ b.T
        if self.name == "polynomial":
            return (1.0 + a @ b.T) ** self.degree
        return np.exp(-cdist(a, b, "sqeuclidean") / (2.0 * self.scale**2))

    def to_dict(self) -> dict[str, Any]:
        return {"name": self.name, "degree": self.degree, "scale": self.scale}


@dataclass(frozen=True)
class DualSolution:
    beta: np.ndarray
    bias: float
    converged: bool
    iterations: int


@dataclass(frozen=True, eq=False)
class SVRModel:
    """Support vectors, their dual weights and the bias."""

    kernel: SVRKernel
    support: np.ndarray
    beta: np.ndarray
    bias: float
    epsilon: float
    box: float
    converged: bool
    iterations: int

    @property
    def n_support(self) -> int:
        return int(self.beta.shape[0])

    def predict(self, z: np.ndarray) -> np.ndarray:
        if self.n_support == 0:
            return np.full(z.shape[0], self.bias)
        return self.kernel.matrix(z, self.support) @ self.beta + self.bias

    def to_dict(self) -> dict[str, Any]:
        return {
            "kernel": self.kernel.to_dict(),
            "support": self.support.tolist(),
            "beta": self.beta.tolist(),
            "bias": self.bias,
            "epsilon": self.epsilon,
            "box": self.box,
            "converged": self.converged,
            "iterations": self.iterations,
        }

    @classmethod
    def from_dict(cls, data: dict[str, Any], n_features: int) -> SVRModel:
        try:
            k = data["kernel"]
            kernel = SVRKernel(str(k["name"]), int(k["degree"]), float(k["scale"]))
            beta = np.array(data["beta"], dtype=float)
            support = np.array(data["support"], dtype=float).reshape(beta.shape[0], n_features)
            return cls(
                kernel,
                support,
                beta,
                float(data["bias"]),
                float(data["epsilon"]),
                float(data["box"]),
                bool(data["converged"]),
                int(data["iterations"]),
            )
        except (KeyError, TypeError, ValueError) as exc:
            raise FormatError(f"bad SVR parameters: {exc}") from None


def default_epsilon(y: np.ndarray) -> float:
    return max(NumericUtils.iqr(y) / 13.49, 1e-3)


def default_box(y: np.ndarray) -> float:
    return max(NumericUtils.iqr(y) / 1.349, 1e-3)


def gaussian_scale(factor: float, p: int) -> float:
    return factor * math.sqrt(p)


def _pair_step(
    beta_i: float, beta_j: float, g_i: float, g_j: float, eta: float, eps: float, t_max: float
) -> float:
    """Exact minimizer on [0, t_max] of the objective along the pair direction."""

    def phi(t: float) -> float:
        return 0.5 * eta * t * t + (g_i - g_j) * t + eps * (abs(beta_i + t) + abs(beta_j - t))

    knots = sorted({0.0, t_max, *(b for b in (-beta_i, beta_j) if 0.0 < b < t_max)})
    candidates = list(knots)
    if eta > 1e-12:
        for a, b in zip(knots[:-1], knots[1:]):
            mid = 0.5 * (a + b)
            slope = (g_i - g_j) + eps * (math.copysign(1.0, beta_i + mid) - math.copysign(1.0, beta_j - mid))
            candidates.append(min(b, max(a, -slope / eta)))
    return min(candidates, key=lambda t: (phi(t), t))


def _bias(beta: np.ndarray, u: np.ndarray, eps: float, box: float) -> float:
    tiny = 1e-12 * box
    free = (np.abs(beta) > tiny) & (np.abs(beta) < box - tiny)
    if np.any(free):
        return float(np.mean(u[free] - eps * np.sign(beta[free])))
    upper = np.where(beta >= box - tiny, u - eps, np.where(beta <= -box + tiny, np.inf, u + eps))
    lower = np.where(beta <= -box + tiny, u + eps, np.where(beta >= box - tiny, -np.inf, u - eps))
    lo, hi = float(lower.max()), float(upper.min())
    if math.isinf(lo):
        return hi
    if math.isinf(hi):
        return lo
    return 0.5 * (lo + hi)


def solve_dual(
    K: np.ndarray, y: np.ndarray, eps: float, box: float, tol: float = 1e-3, max_iter: int = 10_000
) -> DualSolution:
    """SMO on the epsilon-insensitive dual with maximal-violating-pair selection."""
    n = y.shape[0]
    beta = np.zeros(n)
    grad = -y.astype(float)
    converged = False
    iteration = 0
    for iteration in range(max_iter):
        d_up = grad + eps * np.where(beta >= 0.0, 1.0, -1.0)
        d_down = grad + eps * np.where(beta > 0.0, 1.0, -1.0)
        up = np.where(beta < box, d_up, np.inf)
        down = np.where(beta > -box, d_down, -np.inf)
        i = int(np.argmin(up))
        j = int(np.argmax(down))
        if down[j] - up[i] < tol:
            converged = True
            break
        eta = K[i, i] + K[j, j] - 2.0 * K[i, j]
        t_max = min(box - beta[i], beta[j] + box)
        t = _pair_step(beta[i], beta[j], grad[i], grad[j], eta, eps, t_max)
        if t <= 0.0:
            break
        beta[i] = box if abs(beta[i] + t - box) <= 1e-12 * box else beta[i] + t
        beta[j] = -box if abs(beta[j] - t + box) <= 1e-12 * box else beta[j] - t
        grad += t * (K[:, i] - K[:, j])
    if not converged:
        logger.warning("SMO stopped after %d iterations without meeting tolerance %g", iteration + 1, tol)
    return DualSolution(beta, _bias(beta, -grad, eps, box), converged, iteration)


def fit_svr(
    z: np.ndarray,
    y: np.ndarray,
    kernel: SVRKernel,
    epsilon: float | None = None,
    box: float | None = None,
    tol: float = 1e-3,
    max_iter: int = 10_000,
) -> SVRModel:
    """Fit an SVR model; ``epsilon`` and ``box`` default to IQR-based values."""
    eps = default_epsilon(y) if epsilon is None else float(epsilon)
    c = default_box(y) if box is None else float(box)
    sol = solve_dual(kernel.matrix(z, z), y, eps, c, tol, max_iter)
    keep = sol.beta != 0.0
    return SVRModel(kernel, z[keep].copy(), sol.beta[keep].copy(), sol.bias, eps, c, sol.converged, sol.iterations)
