"""Shared value types: 2x2 covariances, correlations and bound reports.

All information quantities carried here are in nats.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

EPS_PSD = 1e-12


class DegenerateCovarianceError(ValueError):
    """A covariance is singular (or has a zero variance) where a proper one is needed."""


@dataclass(frozen=True)
class Covariance2:
    """Symmetric 2x2 covariance ``[[var_x, cov_xy], [cov_xy, var_y]]``."""

    var_x: float
    var_y: float
    cov_xy: float

    @classmethod
    def from_correlation(cls, rho: float, var_x: float = 1.0, var_y: float = 1.0) -> "Covariance2":
        return cls(var_x, var_y, rho * math.sqrt(var_x * var_y))

    @property
    def det(self) -> float:
        return self.var_x * self.var_y - self.cov_xy ** 2

    @property
    def trace(self) -> float:
        return self.var_x + self.var_y

    def as_matrix(self):
        import numpy as np

        return np.array([[self.var_x, self.cov_xy], [self.cov_xy, self.var_y]])

    def eigenvalues(self) -> tuple[float, float]:
        half_tr = 0.5 * self.trace
        disc = math.hypot(0.5 * (self.var_x - self.var_y), self.cov_xy)
        return half_tr - disc, half_tr + disc


@dataclass(frozen=True)
class Correlation:
    rho: float

    def __post_init__(self):
        if not (-1.0 <= self.rho <= 1.0) or math.isnan(self.rho):
            raise ValueError(f"correlation must lie in [-1, 1], got {self.rho!r}")

    def __float__(self) -> float:
        return float(self.rho)


@dataclass(frozen=True)
class Gamma:
    """Slack allowed on the conditional mutual information, in nats."""

    gamma: float

    def __post_init__(self):
        if not self.gamma >= 0.0:
            raise ValueError(f"gamma must be >= 0, got {self.gamma!r}")

    def __float__(self) -> float:
        return float(self.gamma)


@dataclass
class BoundReport:
    """Bounds and supporting entropies for one parameter point (nats).

    ``lower_unclamped`` keeps the raw bound expression before the
    ``max{., 0}`` floor, which can be negative for strongly non-Gaussian
    sources.
    """

    lower_bound: float
    lower_unclamped: float
    mutual_information: float
    joint_entropy: float
    gaussian_joint_entropy: float
    gaussian_wyner: float
    upper_bound: Optional[float] = None
    exact: Optional[float] = None
    gamma: Optional[float] = None
    mutual_information_raw: Optional[float] = None
    joint_entropy_method: str = "closed_form"
    joint_entropy_error: float = 0.0

    def __post_init__(self):
        if self.lower_bound < 0:
            raise ValueError("lower bound is floored at zero")

    def as_dict(self) -> dict:
        return {k: v for k, v in self.__dict__.items()}


def correlation_of(k: Covariance2) -> Correlation:
    """Correlation coefficient ``cov_xy / sqrt(var_x var_y)``."""
    if not (k.var_x > 0 and k.var_y > 0):
        raise DegenerateCovarianceError("correlation undefined for a zero-variance coordinate")
    rho = k.cov_xy / math.sqrt(k.var_x * k.var_y)
    # round-off at the PSD boundary can push |rho| a hair above 1
    if 1.0 < abs(rho) <= 1.0 + 1e-12:
        rho = math.copysign(1.0, rho)
    return Correlation(rho)


def psd_check(k: Covariance2, eps: float = EPS_PSD) -> bool:
    """True if ``k`` is positive semidefinite up to ``eps`` relative to the trace."""
    if k.var_x < 0 or k.var_y < 0:
        return False
    scale = max(k.trace, 1.0)
    return k.det >= -eps * scale * scale
