"""The three bivariate source families used throughout the package.

* :class:`GaussianPair` - zero-mean jointly Gaussian pair.
* :class:`AdditiveGaussianChannelModel` - a correlated Gaussian pair plus an
  independent, finitely supported noise pair ``(A, B)``; its density is a
  Gaussian mixture with one component per noise atom.
* :class:`BivariateLaplace` - the symmetric bivariate Laplace law whose
  density is a Bessel-K0 function of the Mahalanobis radius.

Models are immutable.  Densities and samplers are vectorised over numpy
arrays.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Union

import numpy as np

from .core import Covariance2, psd_check
from .quadrature import DEFAULT_CONFIG, QuadratureConfig, integrate_1d
from .specfun import bessel_k0, log_bessel_k0, log_sum_exp

LOG_2PI = math.log(2 * math.pi)


class SingularPointError(ValueError):
    """Density evaluated exactly where it diverges."""


def _gaussian_logpdf(dx, dy, k: Covariance2):
    det = k.det
    q = (k.var_y * dx * dx - 2 * k.cov_xy * dx * dy + k.var_x * dy * dy) / det
    return -LOG_2PI - 0.5 * math.log(det) - 0.5 * q


def _normal_logpdf(t, mean=0.0, var=1.0):
    return -0.5 * (LOG_2PI + math.log(var)) - 0.5 * (t - mean) ** 2 / var


@dataclass(frozen=True)
class GaussianPair:
    k: Covariance2
    family = "gaussian"

    def __post_init__(self):
        if not psd_check(self.k):
            raise ValueError("covariance is not positive semidefinite")

    @classmethod
    def from_correlation(cls, rho: float) -> "GaussianPair":
        return cls(Covariance2.from_correlation(rho))

    def log_density(self, x, y):
        if self.k.det <= 0:
            raise ValueError("degenerate Gaussian has no density")
        return _gaussian_logpdf(np.asarray(x, float), np.asarray(y, float), self.k)

    def density(self, x, y):
        return np.exp(self.log_density(x, y))

    def marginal_density(self, t, axis: int = 0, cfg: QuadratureConfig = DEFAULT_CONFIG):
        var = self.k.var_x if axis == 0 else self.k.var_y
        return np.exp(_normal_logpdf(np.asarray(t, float), 0.0, var))

    def covariance(self) -> Covariance2:
        return self.k

    def sample(self, n: int, seed=None):
        rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
        z = rng.multivariate_normal([0.0, 0.0], self.k.as_matrix(), size=n, method="cholesky")
        return z[:, 0], z[:, 1]

    def to_spec(self) -> dict:
        return {"family": "gaussian", "var_x": self.k.var_x, "var_y": self.k.var_y,
                "cov_xy": self.k.cov_xy}


@dataclass(frozen=True)
class DiscretePair:
    """Finitely supported zero-mean noise pair ``(A, B)``.

    ``atoms`` holds ``(a, b, weight)`` triples; zero-weight atoms are dropped
    and coincident atoms merged.
    """

    atoms: tuple

    def __post_init__(self):
        merged: dict = {}
        for a, b, w in self.atoms:
            if w < 0:
                raise ValueError("atom weights must be nonnegative")
            if w == 0:
                continue
            key = (float(a), float(b))
            merged[key] = merged.get(key, 0.0) + float(w)
        if not merged:
            raise ValueError("noise distribution has no mass")
        total = sum(merged.values())
        if abs(total - 1.0) > 1e-12:
            raise ValueError(f"atom weights sum to {total!r}, expected 1")
        atoms = tuple((a, b, w) for (a, b), w in merged.items())
        mean_a = sum(w * a for a, _, w in atoms)
        mean_b = sum(w * b for _, b, w in atoms)
        scale = max(1.0, max(abs(a) + abs(b) for a, b, _ in atoms))
        if abs(mean_a) > 1e-12 * scale or abs(mean_b) > 1e-12 * scale:
            raise ValueError("noise pair must have mean zero")
        object.__setattr__(self, "atoms", atoms)

    @classmethod
    def equal(cls, sigma_a: float) -> "DiscretePair":
        """``A = B = +-sigma_a`` with equal probability."""
        return cls(((sigma_a, sigma_a, 0.5), (-sigma_a, -sigma_a, 0.5)))

    @classmethod
    def doubly_symmetric(cls, sigma_a: float, r: float) -> "DiscretePair":
        """Four-atom law with ``P(A=B=+-s) = (1+r)/4`` and ``P(A=-B=+-s) = (1-r)/4``."""
        if not -1.0 <= r <= 1.0:
            raise ValueError("r must lie in [-1, 1]")
        s = sigma_a
        return cls((
            (s, s, (1 + r) / 4), (-s, -s, (1 + r) / 4),
            (s, -s, (1 - r) / 4), (-s, s, (1 - r) / 4),
        ))

    @property
    def weights(self) -> np.ndarray:
        return np.array([w for _, _, w in self.atoms])

    @property
    def points(self) -> np.ndarray:
        return np.array([[a, b] for a, b, _ in self.atoms])

    def second_moments(self) -> tuple[float, float, float]:
        """``(E[A^2], E[B^2], E[AB])``."""
        return (
            math.fsum(w * a * a for a, _, w in self.atoms),
            math.fsum(w * b * b for _, b, w in self.atoms),
            math.fsum(w * a * b for a, b, w in self.atoms),
        )

    @property
    def sigma_a(self) -> float:
        return math.sqrt(self.second_moments()[0])

    @property
    def sigma_b(self) -> float:
        return math.sqrt(self.second_moments()[1])

    @property
    def r(self) -> float:
        saa, sbb, sab = self.second_moments()
        if saa == 0 or sbb == 0:
            return 1.0 if all(a == b for a, b, _ in self.atoms) else 0.0
        return sab / math.sqrt(saa * sbb)

    @property
    def is_equal(self) -> bool:
        """True when ``A = B`` on every atom."""
        return all(a == b for a, b, _ in self.atoms)


@dataclass(frozen=True)
class AdditiveGaussianChannelModel:
    """``(X, Y) = (Xh, Yh) + (A, B)`` with ``(Xh, Yh) ~ N(0, [[1, rho_hat], [rho_hat, 1]])``."""

    rho_hat: float
    noise: DiscretePair
    family = "agc"
    _component: Covariance2 = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if not -1.0 < self.rho_hat < 1.0:
            raise ValueError("rho_hat must lie strictly inside (-1, 1)")
        object.__setattr__(self, "_component", Covariance2(1.0, 1.0, self.rho_hat))

    @classmethod
    def example1(cls, rho_hat: float, sigma_a: float) -> "AdditiveGaussianChannelModel":
        """Binary noise ``A = B = +-sigma_a``."""
        return cls(rho_hat, DiscretePair.equal(sigma_a))

    @classmethod
    def example2(cls, rho_hat: float, r: float, sigma_a: float) -> "AdditiveGaussianChannelModel":
        """Doubly symmetric binary noise with correlation ``r``."""
        return cls(rho_hat, DiscretePair.doubly_symmetric(sigma_a, r))

    @property
    def component_covariance(self) -> Covariance2:
        return self._component

    @property
    def is_gaussian(self) -> bool:
        return len(self.noise.atoms) == 1

    def log_density(self, x, y):
        x = np.asarray(x, float)
        y = np.asarray(y, float)
        pts = self.noise.points
        logw = np.log(self.noise.weights)
        terms = np.stack([
            lw + _gaussian_logpdf(x - a, y - b, self._component)
            for (a, b), lw in zip(pts, logw)
        ])
        return log_sum_exp(terms, axis=0)

    def density(self, x, y):
        return np.exp(self.log_density(x, y))

    def marginal_log_density(self, t, axis: int = 0):
        t = np.asarray(t, float)
        centres = self.noise.points[:, axis]
        logw = np.log(self.noise.weights)
        terms = np.stack([lw + _normal_logpdf(t, c) for c, lw in zip(centres, logw)])
        return log_sum_exp(terms, axis=0)

    def marginal_density(self, t, axis: int = 0, cfg: QuadratureConfig = DEFAULT_CONFIG):
        return np.exp(self.marginal_log_density(t, axis))

    def covariance(self) -> Covariance2:
        saa, sbb, sab = self.noise.second_moments()
        return Covariance2(1.0 + saa, 1.0 + sbb, self.rho_hat + sab)

    def sample(self, n: int, seed=None):
        rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
        idx = rng.choice(len(self.noise.atoms), size=n, p=self.noise.weights)
        z = rng.multivariate_normal([0.0, 0.0], self._component.as_matrix(), size=n,
                                    method="cholesky")
        pts = self.noise.points[idx]
        return z[:, 0] + pts[:, 0], z[:, 1] + pts[:, 1]

    def to_spec(self) -> dict:
        return {
            "family": "agc_atoms", "rho_hat": self.rho_hat,
            "atoms": [list(atom) for atom in self.noise.atoms],
        }


@dataclass(frozen=True)
class BivariateLaplace:
    """Unit-variance bivariate Laplace with correlation ``rho_l``.

    ``p(x, y) = K0(sqrt(2 Q)) / (pi sqrt(1 - rho_l^2))`` where
    ``Q = (x^2 - 2 rho_l x y + y^2) / (1 - rho_l^2)``.
    """

    rho_l: float
    family = "laplace"

    def __post_init__(self):
        if not -1.0 < self.rho_l < 1.0:
            raise ValueError("rho_l must lie strictly inside (-1, 1)")

    def _quad_form(self, x, y):
        r = self.rho_l
        # grouped so that swapping or negating (x, y) is bit-exact
        return ((x * x + y * y) - 2 * r * (x * y)) / (1 - r * r)

    def log_density(self, x, y):
        x = np.asarray(x, float)
        y = np.asarray(y, float)
        q = self._quad_form(x, y)
        if np.any(q <= 0):
            raise SingularPointError("bivariate Laplace density diverges at the origin")
        return log_bessel_k0(np.sqrt(2 * q)) - math.log(math.pi * math.sqrt(1 - self.rho_l ** 2))

    def density(self, x, y):
        x = np.asarray(x, float)
        y = np.asarray(y, float)
        q = self._quad_form(x, y)
        if np.any(q <= 0):
            raise SingularPointError("bivariate Laplace density diverges at the origin")
        return bessel_k0(np.sqrt(2 * q)) / (math.pi * math.sqrt(1 - self.rho_l ** 2))

    @staticmethod
    def whitened_radial_density(r):
        """Density of the whitened pair as a function of its radius."""
        return bessel_k0(math.sqrt(2) * np.asarray(r, float)) / math.pi

    @staticmethod
    def whitened_radial_log_density(r):
        return log_bessel_k0(math.sqrt(2) * np.asarray(r, float)) - math.log(math.pi)

    def marginal_density(self, t, axis: int = 0, cfg: QuadratureConfig = DEFAULT_CONFIG):
        """Marginal density by numerically integrating out the other coordinate.

        Substituting ``y = rho t + s sqrt(1 - rho^2)`` turns the quadratic
        form into ``s^2 + t^2``, so the marginal is
        ``(2/pi) int_0^inf K0(sqrt(2 (s^2 + t^2))) ds`` for either axis.
        """
        arr = np.atleast_1d(np.asarray(t, float))
        out = np.empty_like(arr)
        s_max = 5 * cfg.domain_sigmas
        for i, ti in enumerate(arr.ravel()):
            t2 = ti * ti
            scale = abs(ti)
            points = [scale * 2.0 ** k for k in range(-4, 6)] if scale > 0 else \
                [2.0 ** -k for k in range(1, 20)]

            def integrand(s, t2=t2):
                z = np.sqrt(2 * (s * s + t2))
                return bessel_k0(z)

            val = integrate_1d(integrand, 0.0, s_max, cfg, points=points,
                               abs_tol=cfg.abs_tol * 1e-3)
            out.flat[i] = 2 * val / math.pi
        if np.ndim(t) == 0:
            return float(out[0])
        return out.reshape(np.shape(t))

    def covariance(self) -> Covariance2:
        return Covariance2(1.0, 1.0, self.rho_l)

    def sample(self, n: int, seed=None):
        """Gaussian scale mixture: ``sqrt(E) * G`` with ``E ~ Exp(1)``."""
        rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
        e = rng.standard_exponential(n)
        g = rng.multivariate_normal([0.0, 0.0], [[1.0, self.rho_l], [self.rho_l, 1.0]],
                                    size=n, method="cholesky")
        s = np.sqrt(e)
        return s * g[:, 0], s * g[:, 1]

    def to_spec(self) -> dict:
        return {"family": "laplace", "rho_l": self.rho_l}


BivariateModel = Union[GaussianPair, AdditiveGaussianChannelModel, BivariateLaplace]

FAMILIES = ("gaussian", "agc", "agc4", "agc_atoms", "laplace")


def model_from_spec(spec: Union[dict, str]) -> BivariateModel:
    """Build a model from a ``{"family": ..., <params>}`` mapping or its JSON text.

    Families: ``gaussian`` (``rho`` or ``var_x``/``var_y``/``cov_xy``),
    ``agc`` (``rho_hat``, ``sigma_a``; noise ``A = B``), ``agc4``
    (``rho_hat``, ``r``, ``sigma_a``), ``agc_atoms`` (``rho_hat``,
    ``atoms``) and ``laplace`` (``rho_l``).
    """
    if isinstance(spec, str):
        spec = json.loads(spec)
    spec = dict(spec)
    family = spec.pop("family", None)
    try:
        if family == "gaussian":
            if "rho" in spec:
                return GaussianPair(Covariance2.from_correlation(
                    float(spec["rho"]), float(spec.get("var_x", 1.0)), float(spec.get("var_y", 1.0))))
            return GaussianPair(Covariance2(float(spec["var_x"]), float(spec["var_y"]),
                                            float(spec["cov_xy"])))
        if family == "agc":
            r = float(spec.get("r", 1.0))
            if r != 1.0:
                raise ValueError("family 'agc' has A = B (r = 1); use 'agc4' for r != 1")
            return AdditiveGaussianChannelModel.example1(float(spec["rho_hat"]), float(spec["sigma_a"]))
        if family == "agc4":
            return AdditiveGaussianChannelModel.example2(
                float(spec["rho_hat"]), float(spec["r"]), float(spec["sigma_a"]))
        if family == "agc_atoms":
            atoms = tuple(tuple(float(v) for v in atom) for atom in spec["atoms"])
            return AdditiveGaussianChannelModel(float(spec["rho_hat"]), DiscretePair(atoms))
        if family == "laplace":
            return BivariateLaplace(float(spec["rho_l"]))
    except KeyError as exc:
        raise ValueError(f"model spec for {family!r} is missing parameter {exc.args[0]!r}") from None
    raise ValueError(f"unknown model family {family!r}; expected one of {FAMILIES}")


# functional aliases
def density(model: BivariateModel, x, y):
    return model.density(x, y)


def marginal_density(model: BivariateModel, which: int, t, cfg: QuadratureConfig = DEFAULT_CONFIG):
    return model.marginal_density(t, which, cfg)


def covariance(model: BivariateModel) -> Covariance2:
    return model.covariance()


def sample(model: BivariateModel, n: int, seed=None):
    if n < 1:
        raise ValueError("n must be >= 1")
    return model.sample(n, seed)
