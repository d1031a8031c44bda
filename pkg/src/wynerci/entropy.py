"""Differential entropies, mutual information and divergences (nats).

Closed forms are used for Gaussian pairs.  Mixture models are integrated on
a Cartesian box with adaptive cubature; the bivariate Laplace law is
whitened so its density becomes radial and then integrated in polar
coordinates, which also absorbs the logarithmic peak at the origin.
A Monte Carlo estimator of ``-E[ln p]`` is provided as an independent check.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .core import Covariance2, DegenerateCovarianceError, correlation_of
from .models import (
    AdditiveGaussianChannelModel,
    BivariateLaplace,
    BivariateModel,
    GaussianPair,
)
from .quadrature import (
    DEFAULT_CONFIG,
    QuadratureConfig,
    integrate_1d,
    integrate_2d,
    integrate_polar,
    mc_expectation,
)

LOG_2PIE = math.log(2 * math.pi * math.e)

CLOSED_FORM = "closed_form"
QUADRATURE = "quadrature"
MONTE_CARLO = "monte_carlo"


@dataclass(frozen=True)
class EntropyResult:
    value: float
    method: str
    error_estimate: float = 0.0

    def __float__(self) -> float:
        return self.value


def gaussian_joint_entropy(k: Covariance2) -> float:
    """``1/2 ln((2 pi e)^2 det K)``."""
    det = k.det
    if not det > 0:
        raise DegenerateCovarianceError("Gaussian joint entropy needs det K > 0")
    return LOG_2PIE + 0.5 * math.log(det)


def gaussian_entropy_1d(var: float) -> float:
    if not var > 0:
        raise DegenerateCovarianceError("variance must be positive")
    return 0.5 * (LOG_2PIE + math.log(var))


def _neg_plogp_from_log(logp: np.ndarray) -> np.ndarray:
    # 0 ln 0 := 0 once the density underflows
    p = np.exp(logp)
    return np.where(p > 0, -p * logp, 0.0)


def _mixture_box(model: AdditiveGaussianChannelModel, cfg: QuadratureConfig):
    pts = model.noise.points
    w = cfg.domain_sigmas
    return (pts[:, 0].min() - w, pts[:, 0].max() + w, pts[:, 1].min() - w, pts[:, 1].max() + w)


def _laplace_r_max(cfg: QuadratureConfig) -> float:
    # radial density decays like exp(-sqrt(2) r); 5x the Gaussian width keeps
    # the truncated entropy tail far below tolerance
    return 5.0 * cfg.domain_sigmas


def _gaussian_quadrature(model: GaussianPair, cfg: QuadratureConfig) -> EntropyResult:
    k = model.k
    sx = cfg.domain_sigmas * math.sqrt(k.var_x)
    sy = cfg.domain_sigmas * math.sqrt(k.var_y)
    val, err = integrate_2d(lambda x, y: _neg_plogp_from_log(model.log_density(x, y)),
                            (-sx, sx, -sy, sy), cfg, x_points=(0.0,), y_points=(0.0,),
                            return_error=True)
    return EntropyResult(val, QUADRATURE, err)


def joint_entropy(model: BivariateModel, cfg: QuadratureConfig = DEFAULT_CONFIG,
                  method: str = "auto") -> EntropyResult:
    """``h(X, Y) = -int p ln p``.

    ``method="auto"`` uses the closed form whenever the law is Gaussian;
    ``method="quadrature"`` always integrates numerically.
    """
    if method not in ("auto", QUADRATURE):
        raise ValueError(f"unknown method {method!r}")
    numeric = method == QUADRATURE
    if isinstance(model, GaussianPair):
        if numeric:
            return _gaussian_quadrature(model, cfg)
        return EntropyResult(gaussian_joint_entropy(model.k), CLOSED_FORM)
    if isinstance(model, AdditiveGaussianChannelModel):
        if model.is_gaussian:
            if numeric:
                # a zero-mean single atom sits at the origin
                return _gaussian_quadrature(GaussianPair(model.covariance()), cfg)
            return EntropyResult(gaussian_joint_entropy(model.covariance()), CLOSED_FORM)
        pts = model.noise.points
        val, err = integrate_2d(
            lambda x, y: _neg_plogp_from_log(model.log_density(x, y)),
            _mixture_box(model, cfg), cfg,
            x_points=np.unique(pts[:, 0]), y_points=np.unique(pts[:, 1]),
            return_error=True,
        )
        return EntropyResult(val, QUADRATURE, err)
    if isinstance(model, BivariateLaplace):
        val, err = integrate_polar(
            lambda r: -BivariateLaplace.whitened_radial_density(r)
            * BivariateLaplace.whitened_radial_log_density(r),
            _laplace_r_max(cfg), cfg, return_error=True,
        )
        # undo the whitening: h(X, Y) = h(U) + 1/2 ln det K
        return EntropyResult(val + 0.5 * math.log(1 - model.rho_l ** 2), QUADRATURE, err)
    raise TypeError(f"unsupported model {type(model).__name__}")


def marginal_entropy(model: BivariateModel, which: int = 0,
                     cfg: QuadratureConfig = DEFAULT_CONFIG) -> EntropyResult:
    """Differential entropy of the X (``which=0``) or Y (``which=1``) marginal."""
    if isinstance(model, GaussianPair):
        var = model.k.var_x if which == 0 else model.k.var_y
        return EntropyResult(gaussian_entropy_1d(var), CLOSED_FORM)
    if isinstance(model, AdditiveGaussianChannelModel):
        centres = np.unique(model.noise.points[:, which])
        if len(centres) == 1:
            return EntropyResult(gaussian_entropy_1d(1.0), CLOSED_FORM)
        w = cfg.domain_sigmas
        val, err = integrate_1d(
            lambda t: _neg_plogp_from_log(model.marginal_log_density(t, which)),
            centres.min() - w, centres.max() + w, cfg, points=centres, return_error=True,
        )
        return EntropyResult(val, QUADRATURE, err)
    if isinstance(model, BivariateLaplace):
        # the marginal is symmetric about 0 with a kink there
        def integrand(t):
            p = model.marginal_density(t, which, cfg)
            safe = np.where(p > 0, p, 1.0)
            return np.where(p > 0, -p * np.log(safe), 0.0)

        val, err = integrate_1d(integrand, 0.0, _laplace_r_max(cfg), cfg,
                                points=[0.5, 1.0, 2.0, 4.0, 8.0],
                                abs_tol=0.5 * cfg.abs_tol, return_error=True)
        return EntropyResult(2 * val, QUADRATURE, 2 * err)
    raise TypeError(f"unsupported model {type(model).__name__}")


def mutual_information_raw(model: BivariateModel, cfg: QuadratureConfig = DEFAULT_CONFIG,
                           joint: EntropyResult | None = None) -> tuple[float, float]:
    """Unclamped ``h(X) + h(Y) - h(X, Y)`` and its error estimate."""
    if isinstance(model, GaussianPair):
        rho = correlation_of(model.k).rho
        if abs(rho) >= 1:
            raise DegenerateCovarianceError("perfectly correlated Gaussian pair")
        return -0.5 * math.log1p(-rho * rho), 0.0
    if joint is None:
        joint = joint_entropy(model, cfg)
    hx = marginal_entropy(model, 0, cfg)
    if isinstance(model, BivariateLaplace):
        hy = hx  # exchangeable coordinates
    else:
        hy = marginal_entropy(model, 1, cfg)
    err = hx.error_estimate + hy.error_estimate + joint.error_estimate
    return hx.value + hy.value - joint.value, err


def mutual_information(model: BivariateModel, cfg: QuadratureConfig = DEFAULT_CONFIG,
                       joint: EntropyResult | None = None) -> float:
    """``I(X;Y)`` in nats; tiny negative round-off is clamped to 0."""
    value, err = mutual_information_raw(model, cfg, joint)
    if value < 0 and value >= -max(err, 2 * cfg.abs_tol):
        return 0.0
    return value


def entropy_power_2d(joint_entropy_nats: float) -> float:
    """``N(X, Y) = exp(h) / (2 pi e)``."""
    return math.exp(joint_entropy_nats - LOG_2PIE)


def kl_to_gaussian(model: BivariateModel, cfg: QuadratureConfig = DEFAULT_CONFIG) -> EntropyResult:
    """``D(p || p_g)`` against the zero-mean Gaussian with the same covariance.

    Integrated directly from ``p ln(p / p_g)``, not via entropies.
    """
    if isinstance(model, GaussianPair):
        return EntropyResult(0.0, CLOSED_FORM)
    k = model.covariance()
    gauss = GaussianPair(k)
    if isinstance(model, AdditiveGaussianChannelModel):
        if model.is_gaussian:
            return EntropyResult(0.0, CLOSED_FORM)
        pts = model.noise.points

        def integrand(x, y):
            lp = model.log_density(x, y)
            p = np.exp(lp)
            return np.where(p > 0, p * (lp - gauss.log_density(x, y)), 0.0)

        val, err = integrate_2d(integrand, _mixture_box(model, cfg), cfg,
                                x_points=np.unique(pts[:, 0]), y_points=np.unique(pts[:, 1]),
                                return_error=True)
        return EntropyResult(val, QUADRATURE, err)
    if isinstance(model, BivariateLaplace):
        # divergence is invariant under the whitening map; the matched
        # Gaussian becomes the standard bivariate normal
        def integrand(r):
            lp = BivariateLaplace.whitened_radial_log_density(r)
            lg = -math.log(2 * math.pi) - 0.5 * r * r
            return np.exp(lp) * (lp - lg)

        val, err = integrate_polar(integrand, _laplace_r_max(cfg), cfg, return_error=True)
        return EntropyResult(val, QUADRATURE, err)
    raise TypeError(f"unsupported model {type(model).__name__}")


def mc_joint_entropy(model: BivariateModel, cfg: QuadratureConfig = DEFAULT_CONFIG) -> EntropyResult:
    """Monte Carlo estimate of ``-E[ln p(X, Y)]``; the error is one standard error."""
    mean, se = mc_expectation(lambda x, y: -model.log_density(x, y),
                              lambda n, rng: model.sample(n, rng), cfg)
    return EntropyResult(mean, MONTE_CARLO, se)
