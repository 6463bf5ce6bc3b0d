"""Quantum Fisher information for comb ranging and the resulting Cramér–Rao bounds.

The dispersion phase ``phi(nu) = omega0 t_phi + nu t_g + nu**2 / omega0 t_gvd``
is linear in the three native times, with gradient
``g(nu) = (omega0, nu, nu**2 / omega0)``. The Fisher matrix combines
spectral averages of ``g`` with the photon statistics of the mode::

    F_jk = <g_j><g_k> F_Q + 4 (<g_j g_k> - <g_j><g_k>) N

which for a pure state (``F_Q = 4 Var N``) gives the familiar moment form.
"""

from __future__ import annotations

import enum
import math
import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy import integrate

from .atmosphere import COLUMNS, ROWS, DispersionTimes, JacobianB
from .spectral import MomentSet, SpectralShape

TIME_LABELS = COLUMNS
PATH_LABELS = ROWS

MAX_CONDITION = 1e12


class FisherError(ValueError):
    """Information matrix cannot be inverted reliably."""

    def __init__(self, message: str, smallest_eigenvalue: float | None = None):
        if smallest_eigenvalue is not None:
            message = f"{message} (smallest eigenvalue of rescaled matrix {smallest_eigenvalue:.3e})"
        super().__init__(message)
        self.smallest_eigenvalue = smallest_eigenvalue


class Regime(str, enum.Enum):
    FULL_NUISANCE = "full"
    KNOWN_NUISANCE = "known"


@dataclass(frozen=True, eq=False)
class OverlapSet:
    """Spectral averages of the phase gradient, in SI angular-frequency units."""

    g_mean: np.ndarray
    g_gram: np.ndarray

    def __post_init__(self):
        for name in ("g_mean", "g_gram"):
            arr = np.array(getattr(self, name), dtype=float)
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)

    @property
    def covariance(self) -> np.ndarray:
        return self.g_gram - np.outer(self.g_mean, self.g_mean)


@dataclass(frozen=True, eq=False)
class FisherMatrix:
    """Symmetric information matrix with named parameters.

    ``unit_scale`` holds ``sqrt(diag)``, the scaling used before inversion.
    A matrix produced by :func:`reparametrize` keeps its factors
    ``(jacobian, native)`` so the inverse can be taken through them.
    """

    matrix: np.ndarray
    labels: tuple[str, ...] = TIME_LABELS
    unit_scale: np.ndarray | None = field(default=None)
    factors: tuple[JacobianB, "FisherMatrix"] | None = field(default=None, repr=False)

    def __post_init__(self):
        m = np.array(self.matrix, dtype=float)
        if m.shape != (len(self.labels), len(self.labels)):
            raise ValueError(f"matrix shape {m.shape} does not match {len(self.labels)} labels")
        m = 0.5 * (m + m.T)
        m.setflags(write=False)
        object.__setattr__(self, "matrix", m)
        scale = np.sqrt(np.clip(np.diag(m), 0.0, None)) if self.unit_scale is None else np.asarray(self.unit_scale, float)
        object.__setattr__(self, "unit_scale", scale)

    def index(self, parameter: str) -> int:
        try:
            return self.labels.index(parameter)
        except ValueError:
            raise KeyError(f"unknown parameter {parameter!r}; have {self.labels}") from None

    def entry(self, row: str, column: str) -> float:
        return float(self.matrix[self.index(row), self.index(column)])


@dataclass(frozen=True)
class Bound:
    parameter: str
    sigma: float
    regime: Regime


def overlaps_from_moments(moments: MomentSet, omega0: float) -> OverlapSet:
    """Averages of ``g`` and ``g g^T`` over the normalized spectrum."""
    w = omega0
    m1, m2, m3, m4 = moments.mu1, moments.mu2, moments.mu3, moments.mu4
    mean = np.array([w, m1, m2 / w])
    gram = np.array(
        [
            [w * w, w * m1, m2],
            [w * m1, m2, m3 / w],
            [m2, m3 / w, m4 / (w * w)],
        ]
    )
    return OverlapSet(mean, gram)


def fim_native(overlaps: OverlapSet, n_mean: float, f_q: float) -> FisherMatrix:
    """Fisher matrix over ``(t_phi, t_g, t_gvd)``.

    ``n_mean`` is the mean photon number of the state actually detected (after
    any loss) and ``f_q`` its phase Fisher factor for ``a^dag a``.
    """
    if n_mean < 0 or f_q < 0:
        raise ValueError("photon number and F_Q must be non-negative")
    g = overlaps.g_mean
    cov = overlaps.g_gram - np.outer(g, g)
    # the g's are real, so the real part of the cross term is the term itself
    return FisherMatrix(np.outer(g, g) * f_q + 4.0 * cov * n_mean, TIME_LABELS)


def fim_from_moments(moments: MomentSet, omega0: float, n_mean: float, f_q: float) -> FisherMatrix:
    return fim_native(overlaps_from_moments(moments, omega0), n_mean, f_q)


def mode_overlaps(
    shape: SpectralShape,
    omega0: float,
    detuning_unit: float = 1.0,
    times: DispersionTimes | None = None,
) -> tuple[np.ndarray, np.ndarray]:
    """Inner products ``(A, A_k)`` and ``(A_j, A_k)`` by direct quadrature.

    The propagated mode is ``A(nu) = sqrt(I(nu)) exp(i phi(nu))`` and
    ``A_k = d A / d t_k``. ``detuning_unit`` converts the shape's detuning
    axis to rad/s.
    """
    t = np.zeros(3) if times is None else times.as_array()

    def integrand(x):
        nu = detuning_unit * x
        amp = np.sqrt(shape.density(x) / detuning_unit)
        phase = omega0 * t[0] + nu * t[1] + nu * nu / omega0 * t[2]
        mode = amp * np.exp(1j * phase)
        grad = np.array([omega0, nu, nu * nu / omega0], dtype=complex)
        derivs = 1j * grad * mode
        first = np.conj(mode) * derivs
        second = np.conj(derivs)[:, None] * derivs[None, :]
        flat = np.concatenate([first, second.ravel()])
        # d nu = detuning_unit * d x
        return detuning_unit * np.concatenate([flat.real, flat.imag])

    points = shape.breakpoints()
    total = np.zeros(24)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", integrate.IntegrationWarning)
        for a, b in zip(points[:-1], points[1:]):
            val, _ = integrate.quad_vec(integrand, a, b, epsabs=1e-300, epsrel=1e-13, norm="max")
            total += val
    values = total[:12] + 1j * total[12:]
    return values[:3], values[3:].reshape(3, 3)


def fim_overlap_oracle(
    shape: SpectralShape,
    omega0: float,
    n_mean: float,
    f_q: float,
    detuning_unit: float = 1.0,
    times: DispersionTimes | None = None,
) -> FisherMatrix:
    """Fisher matrix assembled from numerically integrated mode overlaps."""
    first, second = mode_overlaps(shape, omega0, detuning_unit, times)
    # (A_i, A) (A, A_j) = conj((A, A_i)) (A, A_j)
    outer = np.conj(first)[:, None] * first[None, :]
    matrix = outer.real * f_q + 4.0 * np.real(second - outer) * n_mean
    return FisherMatrix(matrix, TIME_LABELS)


def closed_form_variances(
    moments: MomentSet, omega0: float, n_mean: float, n_var: float
) -> tuple[float, float, float]:
    """Cramér–Rao variances of (t_phi, t_g, t_gvd) for a symmetric spectrum and a pure state."""
    if not moments.is_symmetric():
        raise ValueError("closed-form variances need a symmetric spectrum")
    beta = moments.beta
    if beta <= 1:
        raise ValueError(f"kurtosis must exceed 1, got {beta}")
    mu2 = moments.mu2
    var_phi = (1.0 / ((beta - 1.0) * n_mean) + 1.0 / n_var) / (4.0 * omega0**2)
    var_g = 1.0 / (4.0 * mu2 * n_mean)
    var_gvd = omega0**2 / (4.0 * mu2**2 * (beta - 1.0) * n_mean)
    return var_phi, var_g, var_gvd


def reparametrize(fim: FisherMatrix, jacobian: JacobianB) -> FisherMatrix:
    """Fisher matrix over the Jacobian's row parameters, ``B F B^T``."""
    if tuple(jacobian.columns) != tuple(fim.labels):
        raise ValueError(f"label mismatch: jacobian columns {jacobian.columns} vs fisher {fim.labels}")
    b = jacobian.matrix
    return FisherMatrix(b @ fim.matrix @ b.T, tuple(jacobian.rows), factors=(jacobian, fim))


def _adjugate_inverse(m: np.ndarray) -> np.ndarray:
    adj = np.empty((3, 3))
    for i in range(3):
        for j in range(3):
            rows = [r for r in range(3) if r != j]
            cols = [c for c in range(3) if c != i]
            minor = m[np.ix_(rows, cols)]
            adj[i, j] = (-1) ** (i + j) * (minor[0, 0] * minor[1, 1] - minor[0, 1] * minor[1, 0])
    det = float(m[0] @ adj[:, 0])
    return adj / det


def _equilibrated_inverse(b: np.ndarray) -> np.ndarray:
    rows = np.linalg.norm(b, axis=1)
    if np.any(rows == 0):
        raise FisherError("jacobian has an all-zero row; the path parameters are not identifiable")
    scaled = b / rows[:, None]
    cols = np.linalg.norm(scaled, axis=0)
    scaled = scaled / cols[None, :]
    cond = np.linalg.cond(scaled)
    if not cond <= MAX_CONDITION:
        raise FisherError(f"jacobian is singular to working precision (equilibrated condition number {cond:.3e})")
    return np.linalg.inv(scaled) / cols[:, None] / rows[None, :]


def covariance_bound(fim: FisherMatrix) -> np.ndarray:
    """``F^{-1}`` computed on the diagonally rescaled matrix.

    For a reparametrized matrix the inverse is ``B^-T F^-1 B^-1``, which
    avoids forming and inverting ``B F B^T``: the atmosphere makes that
    product far worse conditioned than either factor.

    Raises :class:`FisherError` when a matrix to invert is indefinite,
    singular or has condition number above ``MAX_CONDITION``.
    """
    if fim.factors is not None:
        jacobian, native = fim.factors
        b_inv = _equilibrated_inverse(jacobian.matrix)
        return b_inv.T @ covariance_bound(native) @ b_inv
    m = fim.matrix
    d = np.sqrt(np.diag(m)) if np.all(np.diag(m) > 0) else None
    if d is None:
        raise FisherError("information matrix has a non-positive diagonal entry", float(np.min(np.diag(m))))
    scaled = m / np.outer(d, d)
    eig = np.linalg.eigvalsh(scaled)
    if eig[0] < -1e-10 * eig[-1]:
        raise FisherError("information matrix is indefinite", float(eig[0]))
    if eig[0] <= 0 or eig[-1] / eig[0] > MAX_CONDITION:
        raise FisherError(
            f"information matrix is singular to working precision "
            f"(rescaled condition number {eig[-1] / max(eig[0], 1e-300):.3e})",
            float(eig[0]),
        )
    inv = _adjugate_inverse(scaled) if m.shape == (3, 3) else np.linalg.inv(scaled)
    return inv / np.outer(d, d)


def bound(fim: FisherMatrix, parameter: str, regime=Regime.FULL_NUISANCE) -> Bound:
    """Standard deviation floor for one parameter.

    ``FULL_NUISANCE`` treats all other parameters as unknown, ``(F^-1)_ii``;
    ``KNOWN_NUISANCE`` assumes them known, ``1 / F_ii``.
    """
    regime = Regime(regime)
    i = fim.index(parameter)
    if regime is Regime.KNOWN_NUISANCE:
        fii = fim.matrix[i, i]
        if not fii > 0:
            raise FisherError(f"no information on {parameter}", float(fii))
        return Bound(parameter, 1.0 / math.sqrt(fii), regime)
    return Bound(parameter, math.sqrt(covariance_bound(fim)[i, i]), regime)
