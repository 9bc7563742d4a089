"""Gaussian process regression with isotropic kernels.

The model subtracts the training mean, places a zero-mean GP on the
standardized features and picks the kernel hyperparameters by maximizing
the log marginal likelihood with a Nelder-Mead search in log space.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Any, Optional

import numpy as np
from scipy import linalg, optimize
from scipy.spatial.distance import cdist, pdist

from .errors import ConditioningError, FormatError

logger = logging.getLogger(__name__)

GPR_KERNELS = ("squared_exponential", "matern52", "exponential", "rational_quadratic")

JITTER_START = 1e-10
JITTER_LIMIT = 1e-4
# free noise level never drops below this fraction of std(y)
NOISE_FLOOR = 1e-4
LOG_BOUND = 30.0


@dataclass(frozen=True)
class GPHyperparameters:
    """Kernel length scale, signal and noise standard deviations, RQ shape."""

    length_scale: float
    sigma_f: float
    sigma_n: float
    alpha: float = 1.0

    def to_dict(self) -> dict[str, float]:
        return {
            "length_scale": self.length_scale,
            "sigma_f": self.sigma_f,
            "sigma_n": self.sigma_n,
            "alpha": self.alpha,
        }


def kernel_from_distance(kernel: str, r: np.ndarray, hp: GPHyperparameters) -> np.ndarray:
    """Evaluate ``kernel`` on a matrix of Euclidean distances."""
    s2 = hp.sigma_f**2
    ell = hp.length_scale
    if kernel == "squared_exponential":
        return s2 * np.exp(-0.5 * (r / ell) ** 2)
    if kernel == "matern52":
        a = math.sqrt(5.0) * r / ell
        return s2 * (1.0 + a + a * a / 3.0) * np.exp(-a)
    if kernel == "exponential":
        return s2 * np.exp(-r / ell)
    if kernel == "rational_quadratic":
        return s2 * (1.0 + r**2 / (2.0 * hp.alpha * ell**2)) ** (-hp.alpha)
    raise ValueError(f"unknown GPR kernel {kernel!r}")


def factorize(
    K: np.ndarray, hp: GPHyperparameters, quiet: bool = False
) -> tuple[tuple[np.ndarray, bool], float]:
    """Cholesky factor of ``K + (sigma_n^2 + jitter) I``, escalating jitter.

    Raises:
        ConditioningError: If the factorization fails at the largest jitter

    """
    s2 = hp.sigma_f**2
    jitter = JITTER_START * s2
    limit = JITTER_LIMIT * s2 * (1.0 + 1e-9)
    eye = np.eye(K.shape[0])
    while True:
        try:
            factor = linalg.cho_factor(K + (hp.sigma_n**2 + jitter) * eye, lower=True)
            if not np.all(np.isfinite(factor[0])):
                raise linalg.LinAlgError("non-finite Cholesky factor")
            if not quiet and jitter > JITTER_START * s2:
                logger.warning("GPR factorization needed jitter %.3g", jitter)
            return factor, jitter
        except linalg.LinAlgError:
            jitter *= 10.0
            if jitter > limit:
                raise ConditioningError(
                    f"kernel matrix not positive definite with jitter up to {JITTER_LIMIT:g}*sigma_f^2"
                ) from None


def negative_log_marginal_likelihood(
    kernel: str, distances: np.ndarray, yc: np.ndarray, hp: GPHyperparameters
) -> float:
    factor, _ = factorize(kernel_from_distance(kernel, distances, hp), hp, quiet=True)
    weights = linalg.cho_solve(factor, yc)
    n = yc.shape[0]
    return float(
        0.5 * yc @ weights + np.sum(np.log(np.diag(factor[0]))) + 0.5 * n * math.log(2.0 * math.pi)
    )


@dataclass(frozen=True, eq=False)
class GPRModel:
    """Training inputs, posterior weights and the fitted hyperparameters."""

    kernel: str
    hyper: GPHyperparameters
    x_train: np.ndarray
    weights: np.ndarray
    mean: float
    jitter: float
    nlml: float = field(default=math.nan)

    def predict(self, z: np.ndarray) -> np.ndarray:
        k = kernel_from_distance(self.kernel, cdist(z, self.x_train), self.hyper)
        return self.mean + k @ self.weights

    def to_dict(self) -> dict[str, Any]:
        return {
            "kernel": self.kernel,
            "hyper": self.hyper.to_dict(),
            "x_train": self.x_train.tolist(),
            "weights": self.weights.tolist(),
            "mean": self.mean,
            "jitter": self.jitter,
            "nlml": self.nlml,
        }

    @classmethod
    def from_dict(cls, data: dict[str, Any], n_features: int) -> GPRModel:
        try:
            kernel = str(data["kernel"])
            if kernel not in GPR_KERNELS:
                raise ValueError(f"unknown kernel {kernel!r}")
            hyper = GPHyperparameters(**{k: float(v) for k, v in data["hyper"].items()})
            weights = np.array(data["weights"], dtype=float)
            x_train = np.array(data["x_train"], dtype=float).reshape(weights.shape[0], n_features)
            return cls(
                kernel,
                hyper,
                x_train,
                weights,
                float(data["mean"]),
                float(data["jitter"]),
                float(data["nlml"]),
            )
        except (KeyError, TypeError, ValueError) as exc:
            raise FormatError(f"bad GPR parameters: {exc}") from None


def initial_hyperparameters(z: np.ndarray, y: np.ndarray) -> GPHyperparameters:
    """Mean pairwise distance, std(y) and std(y)/sqrt(2); RQ shape 1."""
    d = pdist(z)
    ell = float(d.mean()) if d.size and d.mean() > 0 else 1.0
    sd = float(np.std(y))
    sigma_f = sd if sd > 0 else 1.0
    return GPHyperparameters(ell, sigma_f, sigma_f / math.sqrt(2.0), 1.0)


def fit_gpr(
    z: np.ndarray,
    y: np.ndarray,
    kernel: str,
    sigma_n: Optional[float] = None,
    max_iter: int = 400,
) -> GPRModel:
    """Fit a GP, optimizing hyperparameters unless the targets are constant.

    Args:
        z: Standardized features (n, p)
        y: Targets (n,)
        kernel: One of :data:`GPR_KERNELS`
        sigma_n: Fixed noise standard deviation; optimized when None
        max_iter: Nelder-Mead iteration limit

    Raises:
        ConditioningError: If the final factorization fails at maximum jitter

    """
    if kernel not in GPR_KERNELS:
        raise ValueError(f"unknown GPR kernel {kernel!r}")
    mean = float(np.mean(y))
    yc = y - mean
    distances = cdist(z, z)
    start = initial_hyperparameters(z, y)
    if sigma_n is not None:
        start = GPHyperparameters(start.length_scale, start.sigma_f, float(sigma_n), start.alpha)
    noise_floor = NOISE_FLOOR * float(np.std(y))
    with_alpha = kernel == "rational_quadratic"

    def unpack(theta: np.ndarray) -> GPHyperparameters:
        v = np.exp(np.clip(theta, -LOG_BOUND, LOG_BOUND))
        noise = start.sigma_n if sigma_n is not None else max(float(v[2]), noise_floor)
        shape = float(v[-1]) if with_alpha else 1.0
        return GPHyperparameters(float(v[0]), float(v[1]), noise, shape)

    theta0 = [math.log(start.length_scale), math.log(start.sigma_f)]
    if sigma_n is None:
        theta0.append(math.log(start.sigma_n))
    if with_alpha:
        theta0.append(math.log(start.alpha))

    hp = start
    if np.any(yc != 0.0):

        def objective(theta: np.ndarray) -> float:
            try:
                return negative_log_marginal_likelihood(kernel, distances, yc, unpack(theta))
            except ConditioningError:
                return 1e300

        result = optimize.minimize(
            objective,
            np.array(theta0),
            method="Nelder-Mead",
            options={"maxiter": max_iter, "xatol": 1e-6, "fatol": 1e-10},
        )
        hp = unpack(result.x)
        logger.debug("GPR %s hyperparameters %s after %d iterations", kernel, hp, result.nit)

    factor, jitter = factorize(kernel_from_distance(kernel, distances, hp), hp)
    weights = linalg.cho_solve(factor, yc)
    nlml = float(
        0.5 * yc @ weights + np.sum(np.log(np.diag(factor[0]))) + 0.5 * len(y) * math.log(2.0 * math.pi)
    )
    return GPRModel(kernel, hp, z.copy(), weights, mean, jitter, nlml)
