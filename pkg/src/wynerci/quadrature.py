"""Deterministic adaptive quadrature and seeded Monte Carlo.

Integrands are vectorised: they receive numpy arrays of nodes and must
return an array of the same shape.  The 1D and 2D integrators are globally
adaptive Gauss-Kronrod (7/15) schemes; the panel with the largest
``|K15 - G7|`` is refined first, and the run stops once the summed error
estimate drops below the tolerance.
"""
from __future__ import annotations

import heapq
import math
from dataclasses import dataclass, replace
from typing import Callable, Optional, Sequence

import numpy as np

# QUADPACK qk15 abscissae (non-negative half) and weights
_XGK = np.array([
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144845693013,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.000000000000000000000000000000000,
])
_WGK = np.array([
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
])
_WG = np.array([
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
])

NODES = np.concatenate([-_XGK[:-1], _XGK[::-1]])
KRONROD_WEIGHTS = np.concatenate([_WGK[:-1], _WGK[::-1]])
GAUSS_WEIGHTS = np.zeros(15)
# Gauss nodes are the odd-indexed Kronrod nodes: +-xgk[1], +-xgk[3], +-xgk[5], 0
for _i, _w in zip((1, 3, 5), _WG[:3]):
    GAUSS_WEIGHTS[_i] = _w
    GAUSS_WEIGHTS[14 - _i] = _w
GAUSS_WEIGHTS[7] = _WG[3]


class QuadratureError(RuntimeError):
    """Tolerance not met; carries the best estimate and its error estimate."""

    def __init__(self, message: str, estimate: float, error: float):
        super().__init__(f"{message} (estimate={estimate!r}, error={error!r})")
        self.estimate = estimate
        self.error = error


@dataclass(frozen=True)
class QuadratureConfig:
    """Integration settings.

    ``abs_tol`` applies to 1D integrals and ``abs_tol_2d`` to 2D ones.
    ``domain_sigmas`` is the truncation half-width in marginal standard
    deviations.
    """

    abs_tol: float = 1e-7
    abs_tol_2d: float = 1e-6
    max_depth: int = 60
    max_panels: int = 20000
    domain_sigmas: float = 8.0
    mc_samples: int = 200_000
    mc_seed: int = 0

    def __post_init__(self):
        if not (self.abs_tol > 0 and self.abs_tol_2d > 0):
            raise ValueError("tolerances must be positive")
        if self.max_depth < 1:
            raise ValueError("max_depth must be >= 1")
        if self.domain_sigmas < 4:
            raise ValueError("domain_sigmas must be >= 4")
        if self.mc_samples < 1000:
            raise ValueError("mc_samples must be >= 1000")

    def with_(self, **changes) -> "QuadratureConfig":
        return replace(self, **changes)


DEFAULT_CONFIG = QuadratureConfig()


def _panel_1d(f, a: float, b: float):
    half = 0.5 * (b - a)
    mid = 0.5 * (a + b)
    vals = np.asarray(f(mid + half * NODES), dtype=float)
    k = half * float(vals @ KRONROD_WEIGHTS)
    g = half * float(vals @ GAUSS_WEIGHTS)
    err = abs(k - g)
    if not math.isfinite(k):
        raise QuadratureError("non-finite integrand value", k, math.inf)
    return k, err


def integrate_1d(
    f: Callable[[np.ndarray], np.ndarray],
    a: float,
    b: float,
    cfg: QuadratureConfig = DEFAULT_CONFIG,
    points: Sequence[float] = (),
    abs_tol: Optional[float] = None,
    return_error: bool = False,
):
    """Integrate ``f`` over ``[a, b]``.

    ``points`` are interior breakpoints (kinks, peaks, singularities) used to
    seed the initial panels.  Raises :class:`QuadratureError` if the
    tolerance is not met within ``cfg.max_depth`` bisections of any panel.
    """
    if not a < b:
        raise ValueError("integration requires a < b")
    tol = cfg.abs_tol if abs_tol is None else abs_tol
    edges = sorted({a, b, *[p for p in points if a < p < b]})

    heap = []
    total = 0.0
    total_err = 0.0
    for order, (lo, hi) in enumerate(zip(edges[:-1], edges[1:])):
        k, err = _panel_1d(f, lo, hi)
        total += k
        total_err += err
        # order breaks error ties deterministically
        heap.append((-err, order, lo, hi, k, 0))
    heapq.heapify(heap)
    counter = len(heap)

    while total_err > tol:
        neg_err, _, lo, hi, k, depth = heapq.heappop(heap)
        if depth >= cfg.max_depth or counter >= cfg.max_panels:
            raise QuadratureError("1D tolerance not reached", total, total_err)
        mid = 0.5 * (lo + hi)
        k1, e1 = _panel_1d(f, lo, mid)
        k2, e2 = _panel_1d(f, mid, hi)
        total += k1 + k2 - k
        total_err += e1 + e2 + neg_err
        heapq.heappush(heap, (-e1, counter, lo, mid, k1, depth + 1))
        heapq.heappush(heap, (-e2, counter + 1, mid, hi, k2, depth + 1))
        counter += 2
        if total_err <= tol:
            # recompute from panels to shed accumulated round-off
            total = math.fsum(item[4] for item in heap)
            total_err = math.fsum(-item[0] for item in heap)

    if return_error:
        return total, total_err
    return total


_WK2 = np.outer(KRONROD_WEIGHTS, KRONROD_WEIGHTS)
_WG2 = np.outer(GAUSS_WEIGHTS, GAUSS_WEIGHTS)
_WGX = np.outer(GAUSS_WEIGHTS, KRONROD_WEIGHTS)   # Gauss along x only
_WGY = np.outer(KRONROD_WEIGHTS, GAUSS_WEIGHTS)   # Gauss along y only


def _panel_2d(f, x0, x1, y0, y1):
    hx, hy = 0.5 * (x1 - x0), 0.5 * (y1 - y0)
    xs = 0.5 * (x0 + x1) + hx * NODES
    ys = 0.5 * (y0 + y1) + hy * NODES
    gx, gy = np.meshgrid(xs, ys, indexing="ij")
    vals = np.asarray(f(gx, gy), dtype=float)
    area = hx * hy
    k = area * float(np.sum(vals * _WK2))
    if not math.isfinite(k):
        raise QuadratureError("non-finite integrand value", k, math.inf)
    err = abs(k - area * float(np.sum(vals * _WG2)))
    ex = abs(k - area * float(np.sum(vals * _WGX)))
    ey = abs(k - area * float(np.sum(vals * _WGY)))
    return k, err, 0 if ex >= ey else 1


def integrate_2d(
    f: Callable[[np.ndarray, np.ndarray], np.ndarray],
    box: tuple[float, float, float, float],
    cfg: QuadratureConfig = DEFAULT_CONFIG,
    x_points: Sequence[float] = (),
    y_points: Sequence[float] = (),
    abs_tol: Optional[float] = None,
    return_error: bool = False,
):
    """Integrate ``f(x, y)`` over ``box = (x0, x1, y0, y1)``.

    Panels are split in half along whichever axis shows the larger
    Kronrod/Gauss discrepancy.  ``x_points``/``y_points`` seed the initial
    panel grid, e.g. to put a singular point on a panel corner.
    """
    x0, x1, y0, y1 = box
    if not (x0 < x1 and y0 < y1):
        raise ValueError("degenerate integration box")
    tol = cfg.abs_tol_2d if abs_tol is None else abs_tol
    xe = sorted({x0, x1, *[p for p in x_points if x0 < p < x1]})
    ye = sorted({y0, y1, *[p for p in y_points if y0 < p < y1]})

    heap = []
    total = 0.0
    total_err = 0.0
    counter = 0
    for xa, xb in zip(xe[:-1], xe[1:]):
        for ya, yb in zip(ye[:-1], ye[1:]):
            k, err, axis = _panel_2d(f, xa, xb, ya, yb)
            total += k
            total_err += err
            heap.append((-err, counter, (xa, xb, ya, yb), k, axis, 0))
            counter += 1
    heapq.heapify(heap)

    while total_err > tol:
        neg_err, _, (xa, xb, ya, yb), k, axis, depth = heapq.heappop(heap)
        if depth >= cfg.max_depth or counter >= cfg.max_panels:
            raise QuadratureError("2D tolerance not reached", total, total_err)
        if axis == 0:
            xm = 0.5 * (xa + xb)
            children = [(xa, xm, ya, yb), (xm, xb, ya, yb)]
        else:
            ym = 0.5 * (ya + yb)
            children = [(xa, xb, ya, ym), (xa, xb, ym, yb)]
        total -= k
        total_err += neg_err
        for child in children:
            ck, ce, cax = _panel_2d(f, *child)
            total += ck
            total_err += ce
            heapq.heappush(heap, (-ce, counter, child, ck, cax, depth + 1))
            counter += 1
        if total_err <= tol:
            total = math.fsum(item[3] for item in heap)
            total_err = math.fsum(-item[0] for item in heap)

    if return_error:
        return total, total_err
    return total


def integrate_polar(
    g: Callable[[np.ndarray], np.ndarray],
    r_max: float,
    cfg: QuadratureConfig = DEFAULT_CONFIG,
    abs_tol: Optional[float] = None,
    return_error: bool = False,
):
    """``2 pi int_0^r_max g(r) r dr`` for a radially symmetric integrand.

    The Jacobian ``r`` tames a logarithmic singularity of ``g`` at the
    origin; geometric breakpoints towards 0 keep the adaptive pass short.
    """
    if not r_max > 0:
        raise ValueError("r_max must be positive")
    tol = cfg.abs_tol if abs_tol is None else abs_tol
    points = [r_max * 2.0 ** -k for k in range(1, 12)]
    val, err = integrate_1d(
        lambda r: g(r) * r, 0.0, r_max, cfg, points=points,
        abs_tol=tol / (2 * math.pi), return_error=True,
    )
    if return_error:
        return 2 * math.pi * val, 2 * math.pi * err
    return 2 * math.pi * val


def mc_expectation(
    f: Callable[[np.ndarray, np.ndarray], np.ndarray],
    sampler: Callable[[int, np.random.Generator], tuple[np.ndarray, np.ndarray]],
    cfg: QuadratureConfig = DEFAULT_CONFIG,
) -> tuple[float, float]:
    """Sample mean of ``f`` and its standard error.

    ``sampler(n, rng)`` must return ``(x, y)`` arrays of ``n`` i.i.d. draws.
    A fresh generator seeded from ``cfg.mc_seed`` is used on every call.
    """
    rng = np.random.default_rng(cfg.mc_seed)
    x, y = sampler(cfg.mc_samples, rng)
    vals = np.asarray(f(x, y), dtype=float)
    n = vals.size
    mean = float(np.mean(vals))
    if n < 2:
        return mean, 0.0
    return mean, float(np.std(vals, ddof=1) / math.sqrt(n))


def xlogx(p: np.ndarray) -> np.ndarray:
    """``p ln p`` with ``0 ln 0 = 0``."""
    p = np.asarray(p, dtype=float)
    safe = np.where(p > 0, p, 1.0)
    return np.where(p > 0, p * np.log(safe), 0.0)
