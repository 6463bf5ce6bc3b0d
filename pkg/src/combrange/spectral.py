"""Spectral intensity profiles of a single comb mode and their frequency moments.

Detunings are measured from the carrier, ``nu = omega - omega0``. The
shapes are unit-agnostic: whatever unit the width is given in, the moments
come back in powers of that unit. The ranging pipeline works with the
dimensionless detuning ``u = nu / omega0`` and converts at the boundary
with :meth:`MomentSet.rescaled`.
"""

from __future__ import annotations

import enum
import math
import warnings
from dataclasses import dataclass

import numpy as np
from scipy import integrate, optimize, special

SQRT_2_OVER_PI = math.sqrt(2.0 / math.pi)

# Half-widths of the quadrature domain in units of ``scale``; chosen so the
# discarded tail mass, weighted by nu**4, stays below 1e-14.
_GAUSS_CUT = 12.0
_LOGISTIC_CUT = 60.0
_QUAD_TOL = 1e-13
_MAX_DELTA = 1.0 - 1e-9


class Family(str, enum.Enum):
    GAUSSIAN = "gaussian"
    SECH_SQUARED = "sech2"
    SKEW_NORMAL = "skewnormal"
    TABULATED = "tabulated"


class Centering(str, enum.Enum):
    MEAN_AT_CARRIER = "mean"
    MODE_AT_CARRIER = "mode"


class QuadratureError(RuntimeError):
    """Adaptive quadrature did not reach the requested tolerance."""

    def __init__(self, message: str, error_estimate: float):
        super().__init__(f"{message} (achieved error estimate {error_estimate:.3e})")
        self.error_estimate = error_estimate


@dataclass(frozen=True)
class SpectralShape:
    """Normalized spectral intensity ``|A(nu)|**2``.

    ``scale`` is the standard deviation for Gaussian, the logistic scale for
    sech-squared (intensity ``sech(nu / 2s)**2 / 4s``) and the skew-normal
    scale ``omega``. Tabulated shapes interpolate linearly between samples
    and vanish outside them.
    """

    family: Family
    scale: float = 1.0
    shape_a: float = 0.0
    location: float = 0.0
    samples: tuple[tuple[float, float], ...] | None = None

    def __post_init__(self):
        object.__setattr__(self, "family", Family(self.family))
        if self.family is Family.TABULATED:
            if self.samples is None or len(self.samples) < 2:
                raise ValueError("tabulated shape needs at least two samples")
            nodes, weights = np.asarray(self.samples, dtype=float).T
            if np.any(np.diff(nodes) <= 0):
                raise ValueError("tabulated detunings must be strictly increasing")
            if np.any(weights < 0):
                raise ValueError("tabulated weights must be non-negative")
            if _trapezoid(weights, nodes) <= 0:
                raise ValueError("tabulated weights integrate to zero")
            return
        if not self.scale > 0:
            raise ValueError(f"scale must be positive, got {self.scale}")
        if self.family is Family.SKEW_NORMAL and abs(self.delta) > _MAX_DELTA:
            raise ValueError(f"skew-normal shape a={self.shape_a} is numerically degenerate")

    @property
    def delta(self) -> float:
        """Skew-normal asymmetry ``a / sqrt(1 + a**2)`` (0 for other families)."""
        if self.family is not Family.SKEW_NORMAL:
            return 0.0
        a = self.shape_a
        return a / math.sqrt(1.0 + a * a)

    def _tabulated(self):
        nodes, weights = np.asarray(self.samples, dtype=float).T
        return nodes, weights / _trapezoid(weights, nodes)

    def density(self, nu):
        """Evaluate the normalized intensity at detuning(s) ``nu``."""
        nu = np.asarray(nu, dtype=float)
        if self.family is Family.TABULATED:
            nodes, weights = self._tabulated()
            return np.interp(nu, nodes, weights, left=0.0, right=0.0)
        s = self.scale
        z = (nu - self.location) / s
        if self.family is Family.GAUSSIAN:
            return np.exp(-0.5 * z * z) / (s * math.sqrt(2.0 * math.pi))
        if self.family is Family.SECH_SQUARED:
            e = np.exp(-np.abs(z))
            return e / (s * (1.0 + e) ** 2)
        phi = np.exp(-0.5 * z * z) / math.sqrt(2.0 * math.pi)
        return 2.0 * phi * special.ndtr(self.shape_a * z) / s

    def breakpoints(self) -> np.ndarray:
        """Ordered points splitting the support into smooth pieces."""
        if self.family is Family.TABULATED:
            return np.asarray(self.samples, dtype=float)[:, 0]
        cut = _LOGISTIC_CUT if self.family is Family.SECH_SQUARED else _GAUSS_CUT
        # chunks of two widths keep each adaptive sub-integral well resolved
        n = int(cut)
        return self.location + self.scale * np.linspace(-cut, cut, n + 1)


@dataclass(frozen=True)
class MomentSet:
    """Moments ``mu_k = int nu**k |A(nu)|**2 dnu`` about the carrier."""

    mu1: float
    mu2: float
    mu3: float
    mu4: float

    def __post_init__(self):
        if not self.mu2 > 0:
            raise ValueError(f"second moment must be positive, got {self.mu2}")

    @property
    def beta(self) -> float:
        return self.mu4 / self.mu2**2

    @property
    def skewness(self) -> float:
        return self.mu3 / self.mu2**1.5

    def rescaled(self, unit: float) -> "MomentSet":
        """Moments with the detuning axis multiplied by ``unit``."""
        return MomentSet(
            self.mu1 * unit,
            self.mu2 * unit**2,
            self.mu3 * unit**3,
            self.mu4 * unit**4,
        )

    def is_symmetric(self, rtol: float = 1e-9) -> bool:
        return (
            abs(self.mu1) <= rtol * math.sqrt(self.mu2)
            and abs(self.mu3) <= rtol * self.mu2**1.5
        )

    @classmethod
    def symmetric(cls, mu2: float, beta: float) -> "MomentSet":
        """Symmetric spectrum specified only by its width and kurtosis."""
        if beta < 1:
            raise ValueError(f"kurtosis must be >= 1, got {beta}")
        return cls(0.0, mu2, 0.0, beta * mu2 * mu2)


def _trapezoid(y, x) -> float:
    return float(np.sum(0.5 * (y[1:] + y[:-1]) * np.diff(x)))


def skew_normal_mode(a: float) -> float:
    """Mode of the standard skew-normal density with shape ``a``."""
    if a == 0:
        return 0.0

    def slope(z, a=abs(a)):
        return -z * special.ndtr(a * z) + a * math.exp(-0.5 * (a * z) ** 2) / math.sqrt(2 * math.pi)

    z = optimize.brentq(slope, 0.0, 2.0, xtol=1e-15, rtol=4 * np.finfo(float).eps)
    return math.copysign(z, a)


def make_shape(
    family,
    target_mu2: float,
    shape_a: float = 0.0,
    centering=Centering.MEAN_AT_CARRIER,
) -> SpectralShape:
    """Build a shape whose second moment about the carrier is ``target_mu2``.

    ``shape_a`` only matters for the skew-normal family; ``centering`` picks
    whether its mean or its mode sits on the carrier.
    """
    family = Family(family)
    centering = Centering(centering)
    if not target_mu2 > 0:
        raise ValueError(f"target_mu2 must be positive, got {target_mu2}")
    if family is Family.GAUSSIAN:
        return SpectralShape(family, scale=math.sqrt(target_mu2))
    if family is Family.SECH_SQUARED:
        return SpectralShape(family, scale=math.sqrt(3.0 * target_mu2) / math.pi)
    if family is Family.TABULATED:
        raise ValueError("tabulated shapes are built from samples, not from moments")

    delta = shape_a / math.sqrt(1.0 + shape_a * shape_a)
    if abs(delta) > _MAX_DELTA:
        raise ValueError(f"skew-normal shape a={shape_a} is numerically degenerate")
    if delta == 0:
        return SpectralShape(family, scale=math.sqrt(target_mu2), shape_a=0.0)
    m = delta * SQRT_2_OVER_PI
    if centering is Centering.MEAN_AT_CARRIER:
        s = math.sqrt(target_mu2 / (1.0 - m * m))
        return SpectralShape(family, scale=s, shape_a=shape_a, location=-m * s)
    # mode on the carrier: E[(Z - z*)^2] = 1 - 2 z* m + z*^2
    z_mode = skew_normal_mode(shape_a)
    s = math.sqrt(target_mu2 / (1.0 - 2.0 * z_mode * m + z_mode * z_mode))
    return SpectralShape(family, scale=s, shape_a=shape_a, location=-z_mode * s)


def _standard_moments(shape: SpectralShape) -> tuple[float, float, float, float]:
    # raw moments E[Z^k], k = 1..4, of the family's standardized variable
    if shape.family is Family.GAUSSIAN:
        return 0.0, 1.0, 0.0, 3.0
    if shape.family is Family.SECH_SQUARED:
        return 0.0, math.pi**2 / 3.0, 0.0, 7.0 * math.pi**4 / 15.0
    d = shape.delta
    return d * SQRT_2_OVER_PI, 1.0, SQRT_2_OVER_PI * d * (3.0 - d * d), 3.0


def moments_analytic(shape: SpectralShape) -> MomentSet:
    """Closed-form moments about the carrier for the parametric families."""
    if shape.family is Family.TABULATED:
        raise ValueError("tabulated shapes have no closed-form moments; use moments_quadrature")
    z1, z2, z3, z4 = _standard_moments(shape)
    xi, s = shape.location, shape.scale
    # binomial expansion of E[(xi + s Z)^k]
    return MomentSet(
        xi + s * z1,
        xi**2 + 2 * xi * s * z1 + s**2 * z2,
        xi**3 + 3 * xi**2 * s * z1 + 3 * xi * s**2 * z2 + s**3 * z3,
        xi**4 + 4 * xi**3 * s * z1 + 6 * xi**2 * s**2 * z2 + 4 * xi * s**3 * z3 + s**4 * z4,
    )


def _integrate(shape: SpectralShape, power: int) -> float:
    points = shape.breakpoints()
    if shape.family is Family.TABULATED:
        # piecewise-linear density: 3-point Gauss-Legendre is exact per segment
        x, w = np.polynomial.legendre.leggauss(3)
        a, b = points[:-1, None], points[1:, None]
        nu = 0.5 * (b - a) * x + 0.5 * (a + b)
        vals = nu**power * shape.density(nu) * (0.5 * (b - a)) * w
        return float(vals.sum())
    scale = (shape.scale + abs(shape.location)) ** power
    total, error = 0.0, 0.0
    with warnings.catch_warnings():
        # sign cancellation in odd moments trips quadpack's roundoff flag;
        # the accumulated error estimate is checked below instead
        warnings.simplefilter("ignore", integrate.IntegrationWarning)
        for a, b in zip(points[:-1], points[1:]):
            val, err = integrate.quad(
                lambda nu: nu**power * float(shape.density(nu)),
                a, b, epsabs=1e-3 * _QUAD_TOL * scale, epsrel=_QUAD_TOL, limit=200,
            )
            total += val
            error += err
    if error > 1e-10 * scale:
        raise QuadratureError(f"moment {power} of {shape.family.value} did not converge", error)
    return total


def normalization(shape: SpectralShape) -> float:
    """Integrated intensity by quadrature; 1 for a valid shape."""
    return _integrate(shape, 0)


def moments_quadrature(shape: SpectralShape) -> MomentSet:
    """Moments about the carrier by numerical integration of the density."""
    return MomentSet(*(_integrate(shape, k) for k in (1, 2, 3, 4)))


def moments(shape: SpectralShape) -> MomentSet:
    """Closed form where available, quadrature otherwise."""
    if shape.family is Family.TABULATED:
        return moments_quadrature(shape)
    return moments_analytic(shape)
