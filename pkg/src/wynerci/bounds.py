"""Closed-form Wyner common information quantities and bounds (nats).

Every bound takes the joint entropy ``h(X, Y)`` as an argument; computing
it is the expensive step and callers share one value across the lower,
upper and exact expressions at a parameter point.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Union

from .core import Correlation, Covariance2, DegenerateCovarianceError, Gamma, correlation_of
from .entropy import LOG_2PIE, gaussian_joint_entropy
from .models import AdditiveGaussianChannelModel

Number = Union[float, Correlation, Gamma]


class InfiniteCommonInformationError(ArithmeticError):
    """|rho| = 1: the Gaussian common information is unbounded."""


def _rho(rho: Number) -> float:
    value = float(rho)
    if not -1.0 <= value <= 1.0:
        raise ValueError(f"correlation must lie in [-1, 1], got {value!r}")
    if abs(value) == 1.0:
        raise InfiniteCommonInformationError("common information is infinite for |rho| = 1")
    return value


def _gamma(gamma: Number) -> float:
    value = float(gamma)
    if not value >= 0:
        raise ValueError(f"gamma must be >= 0, got {value!r}")
    return value


def gaussian_wyner(rho: Number) -> float:
    """``C(X_g; Y_g) = 1/2 ln((1 + |rho|) / (1 - |rho|))``."""
    a = abs(_rho(rho))
    return 0.5 * (math.log1p(a) - math.log1p(-a))


def gaussian_mutual_information(rho: Number) -> float:
    r = _rho(rho)
    return -0.5 * math.log1p(-r * r)


@dataclass(frozen=True)
class RelaxationParams:
    """Optimal dual multiplier for the relaxed bound.

    ``mu_star = 1/sqrt(1 - exp(-2 gamma))`` (infinite at ``gamma = 0``).
    ``valid_mu_condition`` records whether ``mu_star >= 1/|rho|``, the
    condition under which the derivation of the relaxed bound goes through.
    """

    gamma: float
    rho: float
    mu_star: float
    valid_mu_condition: bool


def relaxation_params(rho: Number, gamma: Number) -> RelaxationParams:
    g = _gamma(gamma)
    r = abs(_rho(rho))
    mu = math.inf if g == 0 else 1.0 / math.sqrt(-math.expm1(-2 * g))
    valid = r > 0 and mu >= 1.0 / r
    return RelaxationParams(g, r, mu, valid)


def relaxed_gaussian_wyner(rho: Number, gamma: Number) -> float:
    """``C_gamma(X_g; Y_g) = 1/2 log+((1+|rho|)/(1-|rho|) * (1-s)/(1+s))``, ``s = sqrt(1 - e^{-2 gamma})``."""
    a = abs(_rho(rho))
    s = math.sqrt(-math.expm1(-2 * _gamma(gamma)))
    value = 0.5 * (math.log1p(a) - math.log1p(-a) + math.log1p(-s) - math.log1p(s))
    return max(value, 0.0)


def _thm1_term(joint_entropy: float, k: Covariance2) -> float:
    if not k.det > 0:
        raise DegenerateCovarianceError("bound needs a nondegenerate covariance")
    return gaussian_wyner(correlation_of(k)) + joint_entropy - gaussian_joint_entropy(k)


def theorem1_lower_unclamped(joint_entropy: float, k: Covariance2) -> float:
    """``C(X_g; Y_g) + h(X, Y) - h(X_g, Y_g)`` without the floor at zero."""
    return _thm1_term(joint_entropy, k)


def theorem1_lower(joint_entropy: float, k: Covariance2) -> float:
    """``max{C(X_g; Y_g) + h(X, Y) - h(X_g, Y_g), 0}``."""
    return max(_thm1_term(joint_entropy, k), 0.0)


def theorem3_lower_unclamped(joint_entropy: float, k: Covariance2, gamma: Number) -> float:
    if not k.det > 0:
        raise DegenerateCovarianceError("bound needs a nondegenerate covariance")
    rho = correlation_of(k)
    return relaxed_gaussian_wyner(rho, gamma) + joint_entropy - gaussian_joint_entropy(k)


def theorem3_lower(joint_entropy: float, k: Covariance2, gamma: Number) -> float:
    """Lower bound on the relaxed common information ``C_gamma(X; Y)``."""
    return max(theorem3_lower_unclamped(joint_entropy, k, gamma), 0.0)


def kl_form_lower(gaussian_wyner_value: float, kl: float) -> float:
    """``C(X_g; Y_g) - D(p || p_g)``; deliberately not clamped."""
    if kl < 0:
        raise ValueError("KL divergence must be nonnegative")
    return gaussian_wyner_value - kl


def _noise_scale_and_r(model: AdditiveGaussianChannelModel) -> tuple[float, float]:
    saa, sbb, sab = model.noise.second_moments()
    if not math.isclose(saa, sbb, rel_tol=1e-12, abs_tol=1e-15):
        raise ValueError("closed-form channel bounds assume sigma_A = sigma_B")
    if saa == 0:
        return 0.0, 1.0
    return math.sqrt(saa), sab / saa


def agc_lower(model: AdditiveGaussianChannelModel, joint_entropy: float) -> float:
    """``h(X, Y) - ln(2 pi e (1 - rho_hat + (1 - r) sigma_A^2))`` (unclamped).

    Equals ``theorem1_lower_unclamped`` when ``rho_hat + r sigma_A^2 >= 0``;
    for a negative overall correlation it is a weaker, still valid bound.
    """
    sigma_a, r = _noise_scale_and_r(model)
    arg = 1.0 - model.rho_hat + (1.0 - r) * sigma_a ** 2
    if not arg > 0:
        raise ValueError("log argument of the channel lower bound is not positive")
    return joint_entropy - LOG_2PIE - math.log(arg)


def agc_upper(model: AdditiveGaussianChannelModel, joint_entropy: float) -> float:
    """``h(X, Y) - ln(2 pi e (1 - rho_hat))``, from the auxiliary ``W = (sqrt(rho_hat) V + A, sqrt(rho_hat) V + B)``."""
    if not -1.0 < model.rho_hat < 1.0:
        raise InfiniteCommonInformationError("|rho_hat| = 1")
    if model.rho_hat < 0:
        raise ValueError("the upper-bound construction needs rho_hat >= 0")
    return joint_entropy - LOG_2PIE - math.log1p(-model.rho_hat)


def lemma1_exact(model: AdditiveGaussianChannelModel, joint_entropy: float) -> float:
    """Exact ``C(X; Y)`` when ``A = B`` on every atom: the two bounds coincide."""
    if not model.noise.is_equal:
        raise ValueError("exact common information is only known for A = B (r = 1)")
    return agc_upper(model, joint_entropy)


def vector_lower(pairs: Iterable[tuple[float, Covariance2]]) -> float:
    """Lower bound for independent pairs: sum of unclamped per-pair terms, floored once."""
    terms = [_thm1_term(h, k) for h, k in pairs]
    if not terms:
        raise ValueError("need at least one pair")
    return max(math.fsum(terms), 0.0)
