"""One-call evaluation of every bound at a single parameter point."""
from __future__ import annotations

import math
from typing import Optional

from . import bounds
from .core import BoundReport, correlation_of
from .entropy import gaussian_joint_entropy, joint_entropy, mutual_information_raw
from .models import AdditiveGaussianChannelModel, BivariateModel, GaussianPair
from .quadrature import DEFAULT_CONFIG, QuadratureConfig


def evaluate_bounds(model: BivariateModel, gamma: Optional[float] = None,
                    cfg: QuadratureConfig = DEFAULT_CONFIG) -> BoundReport:
    """Lower bound (relaxed if ``gamma`` is given), upper/exact where known, and MI."""
    k = model.covariance()
    h = joint_entropy(model, cfg)
    h_g = gaussian_joint_entropy(k)
    rho = correlation_of(k)
    c_g = bounds.gaussian_wyner(rho)

    if gamma is None:
        lower_raw = bounds.theorem1_lower_unclamped(h.value, k)
    else:
        lower_raw = bounds.theorem3_lower_unclamped(h.value, k, gamma)

    mi_raw, mi_err = mutual_information_raw(model, cfg, joint=h)
    mi = 0.0 if -max(mi_err, 2 * cfg.abs_tol) <= mi_raw < 0 else mi_raw

    upper = exact = None
    if isinstance(model, GaussianPair):
        upper = exact = c_g
    elif isinstance(model, AdditiveGaussianChannelModel) and model.rho_hat >= 0:
        upper = bounds.agc_upper(model, h.value)
        if model.noise.is_equal:
            exact = bounds.lemma1_exact(model, h.value)
    if gamma is not None:
        # the upper and exact values above are for gamma = 0 only
        upper = exact = None

    return BoundReport(
        lower_bound=max(lower_raw, 0.0),
        lower_unclamped=lower_raw,
        mutual_information=mi,
        joint_entropy=h.value,
        gaussian_joint_entropy=h_g,
        gaussian_wyner=c_g,
        upper_bound=upper,
        exact=exact,
        gamma=gamma,
        mutual_information_raw=mi_raw,
        joint_entropy_method=h.method,
        joint_entropy_error=h.error_estimate,
    )


def report_lines(report: BoundReport) -> list[str]:
    def fmt(v):
        return "n/a" if v is None else f"{v:.9f}"

    lines = [
        f"lower_bound            {fmt(report.lower_bound)} nats"
        + ("" if report.gamma is None else f"  (relaxed, gamma={report.gamma:g})"),
        f"lower_unclamped        {fmt(report.lower_unclamped)} nats",
        f"upper_bound            {fmt(report.upper_bound)} nats",
        f"exact                  {fmt(report.exact)} nats",
        f"mutual_information     {fmt(report.mutual_information)} nats",
        f"joint_entropy          {fmt(report.joint_entropy)} nats"
        f"  [{report.joint_entropy_method}, err<={report.joint_entropy_error:.1e}]",
        f"gaussian_joint_entropy {fmt(report.gaussian_joint_entropy)} nats",
        f"gaussian_wyner         {fmt(report.gaussian_wyner)} nats",
    ]
    if math.isfinite(report.joint_entropy):
        n = math.exp(report.joint_entropy) / (2 * math.pi * math.e)
        lines.append(f"entropy_power          {n:.9f}")
    return lines
