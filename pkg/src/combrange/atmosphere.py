"""Edlén–Bönsch refractive index of air and the dispersion times of a path.

All public inputs and outputs are SI (m, s, Pa, degrees Celsius). The
wavenumber ``nu_tilde`` entering the index formula is in inverse microns,
as in the original Edlén fits.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

SPEED_OF_LIGHT = 299_792_458.0
STANDARD_ATMOSPHERE_PA = 101_325.0

# dry-air dispersion term: 1e-8 * (A + B / (C - s) + D / (E - s)) * X, s = nu_tilde**2
EDLEN_DRY = (8091.37, 2333983.0, 130.0, 15518.0, 38.9)
# water term: -1e-10 * (F - G * s) * P_w
EDLEN_WATER = (3.802, 0.0384)
# X = P / P0 * (1 + 1e-8 (a - b T) P) / (1 + c T) * (1 + d (x - x0))
EDLEN_DENSITY = (93214.60, 0.5953, 0.009876, 0.0036610, 0.5327, 0.0004)

# keep clear of the 38.9 um^-2 resonance (lambda ~ 160 nm)
_POLE_MARGIN = 1.0

ROWS = ("L", "X", "P_w")
COLUMNS = ("t_phi", "t_g", "t_gvd")


@dataclass(frozen=True)
class AmbientConditions:
    temperature_c: float
    pressure_pa: float
    co2_fraction: float = 0.0004
    water_partial_pa: float = 0.0

    def __post_init__(self):
        if self.pressure_pa < 0:
            raise ValueError(f"pressure must be non-negative, got {self.pressure_pa}")
        if self.water_partial_pa < 0:
            raise ValueError(f"water partial pressure must be non-negative, got {self.water_partial_pa}")
        if self.water_partial_pa > self.pressure_pa:
            raise ValueError("water partial pressure exceeds total pressure")
        if not 0 <= self.co2_fraction <= 0.01:
            raise ValueError(f"CO2 mole fraction must lie in [0, 0.01], got {self.co2_fraction}")


@dataclass(frozen=True)
class DispersionTimes:
    t_phi: float
    t_g: float
    t_gvd: float

    def as_array(self) -> np.ndarray:
        return np.array([self.t_phi, self.t_g, self.t_gvd])


@dataclass(frozen=True, eq=False)
class JacobianB:
    """``matrix[i, j] = d t_j / d c_i`` with rows (L, X, P_w) and columns (t_phi, t_g, t_gvd)."""

    matrix: np.ndarray
    rows: tuple[str, ...] = ROWS
    columns: tuple[str, ...] = COLUMNS

    def __post_init__(self):
        m = np.array(self.matrix, dtype=float)
        if m.shape != (len(self.rows), len(self.columns)):
            raise ValueError(f"jacobian shape {m.shape} does not match labels")
        m.setflags(write=False)
        object.__setattr__(self, "matrix", m)

    def entry(self, row: str, column: str) -> float:
        return float(self.matrix[self.rows.index(row), self.columns.index(column)])


class IndexTerms(NamedTuple):
    """Index and its dimensionless spectral derivatives at one frequency.

    ``first = omega dn/domega`` and ``second = omega**2 d2n/domega2``; since
    the wavenumber is proportional to omega these equal the same
    combinations taken in ``nu_tilde``.
    """

    n: float
    first: float
    second: float


def omega_from_wavelength(lambda0_m: float) -> float:
    return 2.0 * math.pi * SPEED_OF_LIGHT / lambda0_m


def wavenumber_from_omega(omega0: float) -> float:
    """Vacuum wavenumber in inverse microns."""
    return omega0 / (2.0 * math.pi * SPEED_OF_LIGHT) * 1e-6


def parameter_x(cond: AmbientConditions) -> float:
    """Air density factor X from the ambient conditions."""
    p0, a, b, c, d, x0 = EDLEN_DENSITY
    p, t = cond.pressure_pa, cond.temperature_c
    return (
        p / p0
        * (1.0 + 1e-8 * (a - b * t) * p)
        / (1.0 + c * t)
        * (1.0 + d * (cond.co2_fraction - x0))
    )


def _check_window(nu_tilde: float) -> float:
    s = nu_tilde * nu_tilde
    if not nu_tilde > 0:
        raise ValueError(f"wavenumber must be positive, got {nu_tilde}")
    if EDLEN_DRY[4] - s <= _POLE_MARGIN:
        raise ValueError(
            f"wavenumber {nu_tilde:.4g} um^-1 (lambda = {1e3 / nu_tilde:.4g} nm) is outside "
            "the validity window of the dispersion formula"
        )
    return s


def _dry_terms(s: float) -> tuple[float, float, float]:
    # f(s), f'(s), f''(s) of the dry-air bracket, scaled by 1e-8
    a, b, c, d, e = EDLEN_DRY
    f = a + b / (c - s) + d / (e - s)
    f1 = b / (c - s) ** 2 + d / (e - s) ** 2
    f2 = 2.0 * b / (c - s) ** 3 + 2.0 * d / (e - s) ** 3
    return 1e-8 * f, 1e-8 * f1, 1e-8 * f2


def _water_terms(s: float) -> tuple[float, float, float]:
    g0, g1 = EDLEN_WATER
    return -1e-10 * (g0 - g1 * s), 1e-10 * g1, 0.0


def _as_spectral(terms: tuple[float, float, float], s: float) -> np.ndarray:
    # (h, nu dh/dnu, nu^2 d2h/dnu2) from derivatives in s = nu^2
    h, h1, h2 = terms
    return np.array([h, 2.0 * s * h1, 2.0 * s * h1 + 4.0 * s * s * h2])


def index_sensitivities(nu_tilde: float) -> tuple[np.ndarray, np.ndarray]:
    """Per-unit-X and per-Pa contributions to ``(n - 1, first, second)``.

    The index is exactly affine in both X and P_w, so these two vectors
    determine every index quantity at this wavenumber.
    """
    s = _check_window(nu_tilde)
    return _as_spectral(_dry_terms(s), s), _as_spectral(_water_terms(s), s)


def refractive_index(nu_tilde: float, X: float, P_w: float) -> float:
    """Phase index of air at wavenumber ``nu_tilde`` (inverse microns)."""
    return index_spectral_derivatives(nu_tilde, X, P_w).n


def index_spectral_derivatives(nu_tilde: float, X: float, P_w: float) -> IndexTerms:
    dry, water = index_sensitivities(nu_tilde)
    n1, first, second = dry * X + water * P_w
    return IndexTerms(1.0 + n1, first, second)


def _times_per_length(terms: IndexTerms) -> np.ndarray:
    n, first, second = terms
    return np.array([n, n + first, first + 0.5 * second]) / SPEED_OF_LIGHT


def dispersion_times_xp(L: float, X: float, P_w: float, omega0: float) -> DispersionTimes:
    """Dispersion times for a path given directly in (L, X, P_w)."""
    if L < 0:
        raise ValueError(f"distance must be non-negative, got {L}")
    terms = index_spectral_derivatives(wavenumber_from_omega(omega0), X, P_w)
    return DispersionTimes(*(L * _times_per_length(terms)))


def dispersion_times(L: float, cond: AmbientConditions, omega0: float) -> DispersionTimes:
    """Phase delay, group delay and GVD time accumulated over ``L`` metres.

    The dispersion term is evaluated at the carrier,
    ``t_gvd = (omega0 n' + omega0**2 n'' / 2) L / c``.
    """
    return dispersion_times_xp(L, parameter_x(cond), cond.water_partial_pa, omega0)


def jacobian_analytic(L: float, X: float, P_w: float, omega0: float) -> JacobianB:
    dry, water = index_sensitivities(wavenumber_from_omega(omega0))
    row_l = _times_per_length(IndexTerms(*(np.array([1.0, 0.0, 0.0]) + dry * X + water * P_w)))
    # t is linear in (n, first, second) and those are linear in X and P_w
    row_x = L * np.array([dry[0], dry[0] + dry[1], dry[1] + 0.5 * dry[2]]) / SPEED_OF_LIGHT
    row_w = L * np.array([water[0], water[0] + water[1], water[1] + 0.5 * water[2]]) / SPEED_OF_LIGHT
    return JacobianB(np.vstack([row_l, row_x, row_w]))


# step floors used when a parameter sits at zero (vacuum, empty path)
_FD_FLOORS = (1.0, 1.0, 1000.0)


def jacobian_finite_difference(
    L: float, cond: AmbientConditions, omega0: float, rel_step: float = 1e-3
) -> JacobianB:
    """Central-difference Jacobian of :func:`dispersion_times` in (L, X, P_w)."""
    if not 1e-8 <= rel_step <= 1e-3:
        raise ValueError(f"rel_step must lie in [1e-8, 1e-3], got {rel_step}")
    base = np.array([L, parameter_x(cond), cond.water_partial_pa])
    rows = []
    for i, floor in enumerate(_FD_FLOORS):
        h = rel_step * max(abs(base[i]), floor)
        if base[i] + h == base[i]:
            raise ValueError(f"finite-difference step underflows for {ROWS[i]}")
        up, down = base.copy(), base.copy()
        up[i] += h
        down[i] -= h
        if i == 0 and down[0] < 0:
            down[0] = 0.0
        span = up[i] - down[i]
        t_up = dispersion_times_xp(up[0], up[1], up[2], omega0).as_array()
        t_down = dispersion_times_xp(down[0], down[1], down[2], omega0).as_array()
        rows.append((t_up - t_down) / span)
    return JacobianB(np.vstack(rows))


def jacobian_constants(omega0: float) -> dict[str, float]:
    """Jacobian constants k0..k6 in ns/m with P_w in Pa.

    Row L of the Jacobian is ``(k0 + k1 X + k2 P_w, k0 + k3 X + k4 P_w,
    k5 X + k6 P_w)``; rows X and P_w are those constants times L.
    """
    dry, water = index_sensitivities(wavenumber_from_omega(omega0))
    per_x = np.array([dry[0], dry[0] + dry[1], dry[1] + 0.5 * dry[2]])
    per_w = np.array([water[0], water[0] + water[1], water[1] + 0.5 * water[2]])
    to_ns = 1e9 / SPEED_OF_LIGHT
    return {
        "k0": to_ns,
        "k1": per_x[0] * to_ns,
        "k2": per_w[0] * to_ns,
        "k3": per_x[1] * to_ns,
        "k4": per_w[1] * to_ns,
        "k5": per_x[2] * to_ns,
        "k6": per_w[2] * to_ns,
    }
