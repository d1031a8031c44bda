"""Acceptance suite: one PASS/FAIL line per criterion in the terminal summary."""
import math
import time

import numpy as np
import pytest

from wynerci import bounds, envelope
from wynerci.core import Covariance2
from wynerci.entropy import (
    gaussian_joint_entropy,
    joint_entropy,
    kl_to_gaussian,
    mc_joint_entropy,
    mutual_information,
)
from wynerci.fixtures import load_fixture
from wynerci.models import AdditiveGaussianChannelModel, BivariateLaplace, GaussianPair
from wynerci.quadrature import DEFAULT_CONFIG

ABS_TOL = DEFAULT_CONFIG.abs_tol
ABS_TOL_2D = DEFAULT_CONFIG.abs_tol_2d


def max_abs_diff(got, expected):
    return float(np.max(np.abs(np.asarray(got) - np.asarray(expected))))


# 1 -------------------------------------------------------------------------

FIG1_SIGMAS = [0.0, 0.5, 1.0, 2.0, 3.0, 5.0]
FIG1_EXACT = [0.549306144, 0.692758022, 0.953037698, 1.213877697, 1.241680215, 1.242453313]
FIG1_MI = [0.143841036, 0.223232122, 0.413771123, 0.744709871, 0.830062831, 0.836986502]


def test_criterion1_figure1(criterion):
    title = "Figure 1 reproduction (rho_hat=0.5, r=1)"
    t0 = time.perf_counter()
    exact, mi = [], []
    for s in FIG1_SIGMAS:
        m = AdditiveGaussianChannelModel.example1(0.5, s)
        h = joint_entropy(m)
        exact.append(bounds.lemma1_exact(m, h.value))
        mi.append(mutual_information(m, joint=h))
    elapsed = time.perf_counter() - t0
    d_exact = max_abs_diff(exact, FIG1_EXACT)
    d_mi = max_abs_diff(mi, FIG1_MI)
    ok = [
        criterion(1, title, "exact", d_exact <= 1e-3, f"max |diff| {d_exact:.2e} <= 1e-3"),
        criterion(1, title, "mutual information", d_mi <= 1e-3, f"max |diff| {d_mi:.2e} <= 1e-3"),
        criterion(1, title, "runtime", elapsed < 30, f"{elapsed:.2f} s < 30 s"),
    ]
    assert all(ok)


# 2 -------------------------------------------------------------------------

FIG2_SIGMAS = [0.5, 1.0, 2.0]
FIG2_LOWER = [0.632460751, 0.751400238, 0.557722996]
FIG2_UPPER = [0.727770931, 1.087872474, 1.513234441]
FIG2_MI = [0.188219214, 0.278936347, 0.445353127]


def figure2_values(r):
    lower, upper, mi = [], [], []
    for s in FIG2_SIGMAS:
        m = AdditiveGaussianChannelModel.example2(0.5, r, s)
        h = joint_entropy(m)
        lower.append(bounds.theorem1_lower_unclamped(h.value, m.covariance()))
        upper.append(bounds.agc_upper(m, h.value))
        mi.append(mutual_information(m, joint=h))
    return lower, upper, mi


def test_criterion2_figure2(criterion):
    title = "Figure 2 reproduction (rho_hat=0.5, r=0.9)"
    lower, upper, mi = figure2_values(0.9)
    ok = []
    for part, got, ref in (("unclamped lower", lower, FIG2_LOWER),
                           ("upper", upper, FIG2_UPPER),
                           ("mutual information", mi, FIG2_MI)):
        d = max_abs_diff(got, ref)
        ok.append(criterion(2, title, part, d <= 1e-3,
                            f"max |diff| {d:.2e} <= 1e-3; got {', '.join(f'{v:.9f}' for v in got)}"))
    assert all(ok)


def test_figure2_values_match_r08():
    # the published numbers are reproduced by the four-atom law at r = 0.8
    lower, upper, mi = figure2_values(0.8)
    assert max_abs_diff(lower, FIG2_LOWER) <= 1e-6
    assert max_abs_diff(upper, FIG2_UPPER) <= 1e-6
    assert max_abs_diff(mi, FIG2_MI) <= 1e-6


# 3 -------------------------------------------------------------------------

FIG3_RHOS = [0.2, 0.5, 0.9, 0.99]
FIG3_LOWER = [0.013591707, 0.360165302, 1.283078661, 2.457511586]
FIG3_MI = [0.064821958, 0.188251992, 0.874776546, 2.002928714]


def test_criterion3_figure3(criterion):
    title = "Figure 3 reproduction (bivariate Laplace)"
    t0 = time.perf_counter()
    lower, mi = [], []
    for rho in FIG3_RHOS:
        m = BivariateLaplace(rho)
        h = joint_entropy(m)
        lower.append(bounds.theorem1_lower(h.value, m.covariance()))
        mi.append(mutual_information(m, joint=h))
    elapsed = time.perf_counter() - t0
    d_lower = max_abs_diff(lower, FIG3_LOWER)
    d_mi = max_abs_diff(mi, FIG3_MI)
    ok = [
        criterion(3, title, "lower", d_lower <= 5e-3, f"max |diff| {d_lower:.2e} <= 5e-3"),
        criterion(3, title, "mutual information", d_mi <= 5e-3, f"max |diff| {d_mi:.2e} <= 5e-3"),
        criterion(3, title, "runtime", elapsed < 120, f"{elapsed:.2f} s < 120 s"),
    ]
    assert all(ok)


# 4 -------------------------------------------------------------------------

def test_criterion4_closed_forms(criterion):
    title = "Closed-form exactness"
    rng = np.random.default_rng(4)
    rhos = rng.uniform(-0.99, 0.99, 20)
    d_half = abs(bounds.gaussian_wyner(0.5) - 0.5 * math.log(3))
    d_gamma0 = max(abs(bounds.relaxed_gaussian_wyner(r, 0.0) - bounds.gaussian_wyner(r)) for r in rhos)
    d_zero = max(abs(bounds.relaxed_gaussian_wyner(r, -0.5 * math.log(1 - r * r))) for r in rhos)
    ok = [
        criterion(4, title, "C_g(0.5) = ln3/2", d_half <= 1e-12, f"|diff| {d_half:.1e} <= 1e-12"),
        criterion(4, title, "gamma = 0 reduction", d_gamma0 == 0.0,
                  f"max |diff| {d_gamma0:.1e} over 20 rho (exact equality)"),
        criterion(4, title, "vanishes at Gaussian MI", d_zero <= 1e-12, f"max {d_zero:.1e} <= 1e-12"),
    ]
    assert all(ok)


# 5 -------------------------------------------------------------------------

BUILTIN_POINTS = {
    "gaussian": [GaussianPair.from_correlation(r) for r in (-0.8, -0.2, 0.3, 0.6, 0.95)],
    "agc": [AdditiveGaussianChannelModel.example1(0.5, s) for s in (0.25, 0.5, 1.0, 2.0, 5.0)],
    "agc4": [AdditiveGaussianChannelModel.example2(0.5, 0.9, s) for s in (0.25, 0.5, 1.0, 2.0, 5.0)],
    "laplace": [BivariateLaplace(r) for r in (0.0, 0.2, 0.5, 0.9, 0.99)],
}


def test_criterion5_entropy_calibration(criterion):
    title = "Entropy engine calibration"
    rng = np.random.default_rng(5)
    worst = 0.0
    for _ in range(10):
        var_x, var_y = rng.uniform(0.2, 4.0, 2)
        rho = rng.uniform(-0.95, 0.95)
        k = Covariance2.from_correlation(rho, var_x, var_y)
        q = joint_entropy(GaussianPair(k), method="quadrature").value
        worst = max(worst, abs(q - gaussian_joint_entropy(k)))
    ok = [criterion(5, title, "Gaussian quadrature", worst <= 1e-6,
                    f"max |diff| {worst:.2e} <= 1e-6 over 10 random pairs")]

    z_max, failures = 0.0, []
    for family, points in BUILTIN_POINTS.items():
        for m in points:
            quad = joint_entropy(m, method="quadrature").value
            mc = mc_joint_entropy(m)
            z = abs(mc.value - quad) / mc.error_estimate
            z_max = max(z_max, z)
            if z > 3:
                failures.append(f"{family}{m.to_spec()}")
    ok.append(criterion(5, title, "Monte Carlo vs quadrature", not failures,
                        f"max |z| {z_max:.2f} <= 3 over 20 points" + (f"; over: {failures}" if failures else "")))
    assert all(ok)


# 6 -------------------------------------------------------------------------

def lemma2_points():
    rng = np.random.default_rng(6)
    rho = rng.uniform(0.05, 0.95, 20)
    lam = rho * rng.uniform(0.05, 1.0, 20)
    return list(zip(rho, lam))


def test_criterion6_oracle_gap(criterion):
    title = "Envelope grid oracle vs closed form"
    worst = 0.0
    below = 0.0
    for rho, lam in lemma2_points():
        gap = envelope.lemma2_grid_oracle(rho, lam, envelope.A_RHO, 400).min_value \
            - envelope.lemma2_closed_form(rho, lam)
        worst = max(worst, gap / (5 * envelope.grid_step_variation(rho, lam, 400)))
        below = min(below, gap)
    ok = below >= -1e-12 and worst <= 1.0
    criterion(6, title, "oracle gap at 400", ok,
              f"max gap / (5 grid steps) = {worst:.3f} <= 1; min gap {below:.1e} >= 0")
    assert ok


def test_criterion6_kkt(criterion):
    title = "Envelope grid oracle vs closed form"
    worst = 0.0
    for rho, lam in lemma2_points():
        sol = envelope.lemma2_kkt_point(rho, lam)
        worst = max(worst, *map(abs, envelope.kkt_residuals(rho, lam, sol.q_star, sol.sigma2_star, sol.mu_star)))
    criterion(6, title, "KKT residuals", worst <= 1e-10, f"max {worst:.1e} <= 1e-10")
    assert worst <= 1e-10


def test_criterion6_gap_halving(criterion):
    title = "Envelope grid oracle vs closed form"
    ratios = []
    for rho, lam in lemma2_points():
        exact = envelope.lemma2_closed_form(rho, lam)
        g400 = envelope.lemma2_grid_oracle(rho, lam, envelope.A_RHO, 400).min_value - exact
        g800 = envelope.lemma2_grid_oracle(rho, lam, envelope.A_RHO, 800).min_value - exact
        ratios.append(g400 / g800 if g800 > 0 else math.inf)
    ratios = np.array(ratios)
    inside = np.abs(ratios - 2.0) <= 0.5
    ok = bool(np.all(inside))
    finite = ratios[np.isfinite(ratios)]
    criterion(6, title, "gap halves on doubling", ok,
              f"{int(inside.sum())}/20 ratios in [1.5, 2.5]; range {finite.min():.2f}-{finite.max():.2f}, "
              f"geometric mean {math.exp(np.mean(np.log(finite))):.2f}")
    assert ok


# 7 -------------------------------------------------------------------------

def test_criterion7_identities(criterion):
    title = "Identity and ordering properties"
    grid = load_fixture("fig1_exact").params
    worst_id, worst_order = 0.0, -math.inf
    for s in grid:
        for m in (AdditiveGaussianChannelModel.example1(0.5, s),
                  AdditiveGaussianChannelModel.example2(0.5, 0.9, s)):
            h = joint_entropy(m).value
            lo = bounds.agc_lower(m, h)
            worst_id = max(worst_id, abs(bounds.theorem1_lower_unclamped(h, m.covariance()) - lo))
            worst_order = max(worst_order, lo - bounds.agc_upper(m, h))
    worst_kl = 0.0
    for points in BUILTIN_POINTS.values():
        for m in points:
            k = m.covariance()
            lhs = bounds.kl_form_lower(bounds.gaussian_wyner(k.cov_xy / math.sqrt(k.var_x * k.var_y)),
                                       kl_to_gaussian(m).value)
            worst_kl = max(worst_kl, abs(lhs - bounds.theorem1_lower_unclamped(joint_entropy(m).value, k)))
    ok = [
        criterion(7, title, "theorem1 unclamped = channel form", worst_id <= 1e-12,
                  f"max |diff| {worst_id:.1e} <= 1e-12 over {2 * len(grid)} grid points"),
        criterion(7, title, "lower <= upper", worst_order <= 0, f"max(lower - upper) = {worst_order:.3e} <= 0"),
        criterion(7, title, "KL form", worst_kl <= 2 * ABS_TOL,
                  f"max |diff| {worst_kl:.1e} <= {2 * ABS_TOL:.0e} over 20 models"),
    ]
    assert all(ok)


# 8 -------------------------------------------------------------------------

def test_criterion8_g_mu(criterion):
    title = "g(mu) verification"
    h = 2.6
    d_mu = d_val = 0.0
    for gamma in (0.01, 0.1, 0.5, 1.0):
        m_num, v_num = envelope.maximize_g_numeric(0.5, gamma, h)
        m_cf = 1 / math.sqrt(1 - math.exp(-2 * gamma))
        d_mu = max(d_mu, abs(m_num - m_cf))
        d_val = max(d_val, abs(v_num - envelope.g_mu(0.5, gamma, h, m_cf)))
    worst_rel = 0.0
    for gamma in (0.01, 0.1, 0.5, 1.0):
        for mu in np.geomspace(1.05, 200, 30):
            e = 1e-5 * mu
            fd = (envelope.g_mu(0.5, gamma, h, mu + e) - envelope.g_mu(0.5, gamma, h, mu - e)) / (2 * e)
            an = envelope.g_mu_derivative(gamma, mu)
            worst_rel = max(worst_rel, abs(an - fd) / abs(an))
    ok = [
        criterion(8, title, "argmax", d_mu <= 1e-6, f"max |mu - mu*| {d_mu:.1e} <= 1e-6"),
        criterion(8, title, "max value", d_val <= 1e-8, f"max |g diff| {d_val:.1e} <= 1e-8"),
        criterion(8, title, "derivative", worst_rel <= 1e-6, f"max rel diff {worst_rel:.1e} <= 1e-6"),
    ]
    assert all(ok)
