"""Gaussian convex-envelope minimisation behind the lower bound.

The quantity of interest is

    min  h(X') + h(Y') - (1 + lam) h(X', Y')   over  0 <= K' <= [[1, rho], [rho, 1]]

for Gaussian ``(X', Y') ~ N(0, K')``.  Writing
``K' = [[sx^2, q sx sy], [q sx sy, sy^2]]`` the feasible set is ``A_rho``;
relaxing ``sx^2 + sy^2 <= 2`` to ``sx sy <= 1`` gives ``B_rho``, which in
the variables ``(sigma2 = sx sy, q)`` is ``D_rho``.  On ``D_rho`` the
minimiser for ``lam <= rho`` has the closed form
``q* = lam, sigma2* = (1 - rho)/(1 - lam)`` with multiplier
``mu* = lam/(1 - rho)``.

:func:`lemma2_grid_oracle` recomputes the minimum by brute force on a grid
and shares nothing with the closed form except :func:`objective_f`.

The second half of the module handles the dual function ``g(mu)`` whose
maximiser yields the relaxed bound.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .bounds import _gamma, _rho
from .entropy import LOG_2PIE

A_RHO = "A_rho"
B_RHO = "B_rho"
D_RHO = "D_rho"
SET_KINDS = (A_RHO, B_RHO, D_RHO)

BRANCH_RHO_GE_Q = "rho_ge_q"
BRANCH_RHO_LT_Q = "rho_lt_q"

# grid bounds for sx, sy
SIGMA_MAX = 1.2


class UnboundedMultiplierError(ArithmeticError):
    """gamma = 0: the optimal multiplier is infinite."""


@dataclass(frozen=True)
class EnvelopeSolution:
    q_star: float
    sigma2_star: float
    mu_star: float
    min_value: float
    branch: str
    sigma_x: float = math.nan
    sigma_y: float = math.nan


def objective_f(lam, sigma2, q):
    """``1/2 ln((2 pi e)^2 sigma2^2) - (1+lam)/2 ln((2 pi e)^2 sigma2^2 (1 - q^2))``.

    Vectorised over numpy arrays.
    """
    sigma2 = np.asarray(sigma2, dtype=float)
    q = np.asarray(q, dtype=float)
    if np.any(sigma2 <= 0) or np.any(np.abs(q) >= 1):
        raise ValueError("objective needs sigma2 > 0 and |q| < 1")
    log_s = LOG_2PIE + np.log(sigma2)   # 1/2 ln((2 pi e)^2 sigma2^2)
    out = log_s - (1 + lam) * (log_s + 0.5 * np.log1p(-q * q))
    return float(out) if out.ndim == 0 else out


def lemma2_closed_form(rho: float, lam: float) -> float:
    """Minimum of :func:`objective_f` over ``D_rho`` for ``0 <= lam <= rho < 1``."""
    rho = float(rho)
    if not 0 <= rho < 1:
        raise ValueError("closed form needs 0 <= rho < 1")
    if not 0 <= lam <= rho:
        raise ValueError(f"closed form holds only for 0 <= lam <= rho (got lam={lam}, rho={rho})")
    return (-0.5 * math.log1p(-lam * lam)
            - 0.5 * lam * (2 * LOG_2PIE + 2 * math.log1p(-rho) + math.log1p(lam) - math.log1p(-lam)))


def lemma2_kkt_point(rho: float, lam: float) -> EnvelopeSolution:
    """KKT point ``(q*, sigma2*, mu*)`` of the ``rho >= q`` branch."""
    value = lemma2_closed_form(rho, lam)
    s2 = (1 - rho) / (1 - lam)
    return EnvelopeSolution(lam, s2, lam / (1 - rho), value, BRANCH_RHO_GE_Q,
                            math.sqrt(s2), math.sqrt(s2))


def kkt_residuals(rho, lam, q, sigma2, mu) -> tuple[float, float, float]:
    """Stationarity in ``sigma2`` and ``q`` and complementary slackness."""
    r1 = -lam / sigma2 + mu * (1 - q)
    r2 = (1 + lam) * q / (1 - q * q) - mu * sigma2
    r3 = mu * (sigma2 * (1 - q) - 1 + rho)
    return r1, r2, r3


# feasible sets ------------------------------------------------------------

def in_a_rho(rho, sx, sy, q):
    """``[[sx^2 - 1, q sx sy - rho], [q sx sy - rho, sy^2 - 1]]`` is negative semidefinite."""
    sx2 = sx * sx
    sy2 = sy * sy
    off = q * sx * sy - rho
    return (sx2 <= 1) & (sy2 <= 1) & ((1 - sx2) * (1 - sy2) - off * off >= 0)


def in_a_rho_expanded(rho, sx, sy, q):
    """The same set written as two scalar inequalities."""
    sx2 = sx * sx
    sy2 = sy * sy
    p = sx * sy
    return (sx2 + sy2 <= 2) & ((1 - q * q) * sx2 * sy2 + 2 * rho * q * p + 1 - rho * rho - (sx2 + sy2) >= 0)


def in_b_rho(rho, sx, sy, q):
    p = sx * sy
    return (p <= 1) & ((1 - q * q) * p * p + 2 * rho * q * p + 1 - rho * rho - 2 * p >= 0)


def in_d_rho(rho, sigma2, q):
    """Branch form: ``sigma2 (1-q) <= 1-rho`` if ``rho >= q``, else ``sigma2 (1+q) <= 1+rho``."""
    lo = sigma2 * (1 - q) <= 1 - rho
    hi = sigma2 * (1 + q) <= 1 + rho
    return (sigma2 <= 1) & np.where(rho >= q, lo, hi)


def in_d_rho_product(rho, sigma2, q):
    """Product form ``(sigma2(1-q) - 1 + rho)(sigma2(1+q) - 1 - rho) >= 0`` with ``sigma2 <= 1``."""
    return (sigma2 <= 1) & ((sigma2 * (1 - q) - 1 + rho) * (sigma2 * (1 + q) - 1 - rho) >= 0)


# grid oracle ----------------------------------------------------------------

def oracle_grids(resolution: int):
    """Grids used by the oracle: ``(sigma, sigma2, q)``.

    ``sigma`` covers ``(0, 1.2]``, ``sigma2`` covers ``(0, 1]`` and ``q``
    takes cell midpoints of ``(-1, 1)``.
    """
    n = int(resolution)
    k = np.arange(1, n + 1)
    sigma = SIGMA_MAX * k / n
    sigma2 = k / n
    q = -1 + (2 * k - 1) / n
    return sigma, sigma2, q


def _pick(values, q_of, s_of):
    """Index of the minimum; ties go to the smallest q, then smallest sigma2."""
    vmin = np.min(values)
    cand = np.flatnonzero(values == vmin)
    if cand.size > 1:
        order = np.lexsort((s_of[cand], q_of[cand]))
        return int(cand[order[0]])
    return int(cand[0])


def _oracle_d(rho, lam, resolution, region=None):
    _, s2, q = oracle_grids(resolution)
    S, Q = np.meshgrid(s2, q, indexing="ij")
    feas = in_d_rho(rho, S, Q)
    if region == BRANCH_RHO_LT_Q:
        feas &= Q > rho
    elif region == BRANCH_RHO_GE_Q:
        feas &= Q <= rho
    vals = np.where(feas, objective_f(lam, S, Q), np.inf)
    flat = vals.ravel()
    idx = _pick(flat, Q.ravel(), S.ravel())
    return float(S.flat[idx]), float(Q.flat[idx]), float(flat[idx]), math.nan, math.nan


def _oracle_a_exhaustive(rho, lam, resolution, set_pred=in_a_rho):
    sigma, _, q = oracle_grids(resolution)
    best = (math.inf, math.inf, math.inf, 0.0, 0.0)   # value, q, sigma2, sx, sy
    SX, SY = np.meshgrid(sigma, sigma, indexing="ij")
    P = SX * SY
    for qj in q:
        feas = set_pred(rho, SX, SY, qj)
        if not np.any(feas):
            continue
        vals = np.where(feas, objective_f(lam, P, np.full_like(P, qj)), np.inf)
        i = _pick(vals.ravel(), np.full(P.size, qj), P.ravel())
        cand = (float(vals.flat[i]), float(qj), float(P.flat[i]), float(SX.flat[i]), float(SY.flat[i]))
        if cand[:3] < best[:3]:
            best = cand
    value, qv, s2, sx, sy = best
    return s2, qv, value, sx, sy


def _oracle_a_fast(rho, lam, resolution):
    """Exact grid minimum over ``A_rho`` for ``lam > 0`` in O(resolution^2).

    For ``lam > 0`` the objective strictly decreases in ``sy`` at fixed
    ``(sx, q)``, and the feasible ``sy`` form an interval, so only the largest
    feasible grid ``sy`` can win.  It is located from the quadratic's root and
    then confirmed with the exact membership test.
    """
    sigma, _, q = oracle_grids(resolution)
    n = len(sigma)
    SX, Q = np.meshgrid(sigma, q, indexing="ij")
    c = 1 - SX * SX
    a = c + Q * Q * SX * SX
    b = Q * rho * SX
    disc = b * b + a * (c - rho * rho)
    with np.errstate(invalid="ignore", divide="ignore"):
        y_hi = np.where(disc >= 0, (b + np.sqrt(np.maximum(disc, 0))) / a, -1.0)
    y_hi = np.minimum(y_hi, 1.0)
    k = np.floor(y_hi * n / SIGMA_MAX + 1e-9).astype(int)   # 1-based grid index
    k = np.clip(k, 0, n)
    # confirm with the exact predicate, walking down/up past round-off
    for _ in range(3):
        sy = SIGMA_MAX * np.maximum(k, 1) / n
        ok = (k >= 1) & in_a_rho(rho, SX, sy, Q)
        k = np.where(ok | (k == 0), k, k - 1)
    up = np.minimum(k + 1, n)
    sy_up = SIGMA_MAX * up / n
    k = np.where((up > k) & in_a_rho(rho, SX, sy_up, Q), up, k)
    sy = SIGMA_MAX * np.maximum(k, 1) / n
    valid = (k >= 1) & in_a_rho(rho, SX, sy, Q)
    P = SX * sy
    vals = np.where(valid, objective_f(lam, np.where(valid, P, 1.0), Q), np.inf)
    idx = _pick(vals.ravel(), Q.ravel(), P.ravel())
    return float(P.flat[idx]), float(Q.flat[idx]), float(vals.flat[idx]), float(SX.flat[idx]), float(sy.flat[idx])


def lemma2_grid_oracle(rho: float, lam: float, set_kind: str = D_RHO,
                       resolution: int = 400, exhaustive: bool = False,
                       region: str | None = None) -> EnvelopeSolution:
    """Brute-force grid minimum of :func:`objective_f` over a feasible set.

    ``D_rho`` is gridded in ``(sigma2, q)``; ``A_rho``/``B_rho`` in
    ``(sx, sy, q)`` over ``(0, 1.2]^2 x (-1, 1)``.  The multiplier is not
    identified by a grid search and is reported as NaN.  ``region``
    (``D_rho`` only) restricts the search to one branch, ``q <= rho`` or
    ``q > rho``.
    """
    if resolution < 2:
        raise ValueError("resolution must be >= 2")
    if set_kind not in SET_KINDS:
        raise ValueError(f"unknown set {set_kind!r}")
    rho = float(rho)
    if set_kind == D_RHO:
        s2, qv, value, sx, sy = _oracle_d(rho, lam, resolution, region)
    elif set_kind == B_RHO:
        s2, qv, value, sx, sy = _oracle_a_exhaustive(rho, lam, resolution, in_b_rho)
    elif exhaustive or lam <= 0:
        s2, qv, value, sx, sy = _oracle_a_exhaustive(rho, lam, resolution)
    else:
        s2, qv, value, sx, sy = _oracle_a_fast(rho, lam, resolution)
    branch = BRANCH_RHO_GE_Q if rho >= qv else BRANCH_RHO_LT_Q
    return EnvelopeSolution(qv, s2, math.nan, value, branch, sx, sy)


def grid_step_variation(rho: float, lam: float, resolution: int) -> float:
    """Objective change produced by one grid step in every coordinate at the KKT point."""
    sol = lemma2_kkt_point(rho, lam)
    d_sigma = SIGMA_MAX / resolution
    d_q = 2.0 / resolution
    s = math.sqrt(sol.sigma2_star)
    # d f / d sx = d f / d sy = -lam / s;  d f / d q = (1+lam) q / (1-q^2)
    return 2 * lam / s * d_sigma + (1 + lam) * abs(sol.q_star) / (1 - sol.q_star ** 2) * d_q


# dual function g(mu) ----------------------------------------------------------

def g_mu(rho: float, gamma: float, joint_entropy: float, mu):
    """``h - mu gamma + mu/2 ln(mu^2/(mu^2-1)) - 1/2 ln((2 pi e)^2 (1-rho)^2 (mu+1)/(mu-1))``."""
    mu = np.asarray(mu, dtype=float)
    if np.any(mu <= 1):
        raise ValueError("g(mu) is defined for mu > 1")
    r = abs(_rho(rho))
    gam = _gamma(gamma)
    val = (joint_entropy - mu * gam - 0.5 * mu * np.log1p(-1.0 / (mu * mu))
           - LOG_2PIE - math.log1p(-r) - 0.5 * (np.log1p(mu) - np.log(mu - 1)))
    return float(val) if val.ndim == 0 else val


def g_mu_derivative(gamma: float, mu):
    """``dg/dmu = -1/2 ln((mu^2-1)/mu^2) - gamma``."""
    mu = np.asarray(mu, dtype=float)
    val = -0.5 * np.log1p(-1.0 / (mu * mu)) - _gamma(gamma)
    return float(val) if val.ndim == 0 else val


def g_mu_second_derivative(mu):
    """``d^2 g/dmu^2 = -1/(mu (mu^2 - 1))``."""
    mu = np.asarray(mu, dtype=float)
    val = -1.0 / (mu * (mu * mu - 1))
    return float(val) if val.ndim == 0 else val


def mu_star(gamma: float) -> float:
    g = _gamma(gamma)
    if g == 0:
        raise UnboundedMultiplierError("mu* is infinite at gamma = 0; use the gamma = 0 bound")
    return 1.0 / math.sqrt(-math.expm1(-2 * g))


_INV_PHI = (math.sqrt(5) - 1) / 2


def golden_section_max(fun, lo: float, hi: float, tol: float = 1e-10, max_iter: int = 500):
    """Maximiser of a unimodal ``fun`` on ``[lo, hi]``."""
    a, b = lo, hi
    c = b - _INV_PHI * (b - a)
    d = a + _INV_PHI * (b - a)
    fc, fd = fun(c), fun(d)
    for _ in range(max_iter):
        if b - a <= tol * max(1.0, abs(a) + abs(b)):
            break
        if fc >= fd:
            b, d, fd = d, c, fc
            c = b - _INV_PHI * (b - a)
            fc = fun(c)
        else:
            a, c, fc = c, d, fd
            d = a + _INV_PHI * (b - a)
            fd = fun(d)
    x = 0.5 * (a + b)
    return x, fun(x)


def maximize_g_numeric(rho: float, gamma: float, joint_entropy: float,
                       tol: float = 1e-12, mu_max: float = 1e6) -> tuple[float, float]:
    """Golden-section maximisation of ``g`` with a doubling bracket search."""
    fun = lambda m: g_mu(rho, gamma, joint_entropy, m)
    lo = 1.0 + 1e-12
    hi = 2.0
    # g is concave, so the first point with dg/dmu <= 0 closes the bracket
    while hi < mu_max and g_mu_derivative(gamma, hi) > 0:
        lo, hi = hi, min(2 * hi, mu_max)
    return golden_section_max(fun, lo, hi, tol)


def maximize_g(rho: float, gamma: float, joint_entropy: float) -> tuple[float, float]:
    """Closed-form maximiser ``mu* = 1/sqrt(1 - e^{-2 gamma})`` and ``g(mu*)``."""
    r = abs(_rho(rho))
    if not 0 < r < 1:
        raise ValueError("maximize_g needs 0 < |rho| < 1")
    m = mu_star(gamma)
    return m, g_mu(r, gamma, joint_entropy, m)
