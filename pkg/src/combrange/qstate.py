"""Single-mode Gaussian states, their photon statistics and phase sensitivity.

Quadratures are ``x = (a + a^dag) / sqrt(2)`` and ``p = (a - a^dag) / (i sqrt(2))``,
so the vacuum covariance is ``I / 2``. Every formula below is written in
that convention.

The Fock-space routines are an exact, small-scale oracle for the Gaussian
formulas and are not meant to run at realistic photon numbers.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import linalg, optimize, special

# generator of phase-space rotations: d/dtheta R(theta) at theta = 0
_J = np.array([[0.0, -1.0], [1.0, 0.0]])

SPECTRAL_CUT = 1e-12
MAX_TRACE_DEFICIT = 1e-8


def _rotation(theta: float) -> np.ndarray:
    c, s = math.cos(theta), math.sin(theta)
    return np.array([[c, -s], [s, c]])


@dataclass(frozen=True, eq=False)
class GaussianState:
    """Mean quadrature vector ``(<x>, <p>)`` and symmetric covariance."""

    mean: np.ndarray
    covariance: np.ndarray

    def __post_init__(self):
        mean = np.array(self.mean, dtype=float).reshape(2)
        cov = np.array(self.covariance, dtype=float).reshape(2, 2)
        if not np.allclose(cov, cov.T, rtol=1e-12, atol=0):
            raise ValueError("covariance must be symmetric")
        if np.linalg.det(cov) < 0.25 * (1 - 1e-10) or cov[0, 0] <= 0:
            raise ValueError("covariance violates the uncertainty relation")
        mean.setflags(write=False)
        cov.setflags(write=False)
        object.__setattr__(self, "mean", mean)
        object.__setattr__(self, "covariance", cov)

    @property
    def purity(self) -> float:
        return 1.0 / (2.0 * math.sqrt(np.linalg.det(self.covariance)))

    @classmethod
    def vacuum(cls) -> "GaussianState":
        return cls(np.zeros(2), 0.5 * np.eye(2))


@dataclass(frozen=True)
class PhotonStatistics:
    n_mean: float
    n_var: float
    f_q: float | None = None


def optimal_antisqueezing_phase(alpha_arg: float) -> float:
    """Squeezing phase that anti-squeezes the amplitude quadrature."""
    return (math.pi + 2.0 * alpha_arg) % (2.0 * math.pi)


def displaced_squeezed_vacuum(
    alpha_mag: float, alpha_arg: float, r: float, squeeze_phase: float
) -> GaussianState:
    """State ``D(alpha) S(r e^{i phase}) |0>`` with ``S = exp((xi* a^2 - xi a^dag^2) / 2)``.

    With this sign convention ``phase = 0`` squeezes ``x`` and
    ``phase = pi + 2 arg(alpha)`` anti-squeezes the amplitude quadrature.
    """
    if r < 0:
        raise ValueError(f"squeezing parameter must be non-negative, got {r}")
    mean = math.sqrt(2.0) * alpha_mag * np.array([math.cos(alpha_arg), math.sin(alpha_arg)])
    rot = _rotation(0.5 * (squeeze_phase - math.pi))
    cov = rot @ np.diag([math.exp(2 * r), math.exp(-2 * r)]) @ rot.T / 2.0
    return GaussianState(mean, 0.5 * (cov + cov.T))


def apply_loss(state: GaussianState, eta: float) -> GaussianState:
    """Pure-loss channel with transmittance ``eta``."""
    if not 0.0 <= eta <= 1.0:
        raise ValueError(f"transmittance must lie in [0, 1], got {eta}")
    return GaussianState(
        math.sqrt(eta) * state.mean,
        eta * state.covariance + (1.0 - eta) * 0.5 * np.eye(2),
    )


def photon_statistics(state: GaussianState) -> PhotonStatistics:
    """Mean and variance of ``a^dag a``."""
    cov, d = state.covariance, state.mean
    n_mean = 0.5 * (np.trace(cov) - 1.0) + 0.5 * float(d @ d)
    n_var = 0.5 * (float(np.sum(cov * cov)) - 0.5) + float(d @ cov @ d)
    return PhotonStatistics(float(n_mean), float(n_var))


def qfi_number_gaussian(state: GaussianState) -> float:
    """Quantum Fisher information for a phase imprinted by ``a^dag a``.

    A phase shift rotates phase space, so ``cov' = J cov - cov J`` and
    ``mean' = J mean``; purity is rotation invariant and drops out::

        F = tr[(cov^-1 cov')^2] / (2 (1 + P^2)) + mean'^T cov^-1 mean'
    """
    cov, d = state.covariance, state.mean
    if np.linalg.det(cov) <= 0:
        raise ValueError("singular covariance")
    inv = np.linalg.inv(cov)
    dcov = _J @ cov - cov @ _J
    dmean = _J @ d
    m = inv @ dcov
    purity = state.purity
    return float(np.trace(m @ m) / (2.0 * (1.0 + purity**2)) + dmean @ inv @ dmean)


def statistics(state: GaussianState) -> PhotonStatistics:
    stats = photon_statistics(state)
    return PhotonStatistics(stats.n_mean, stats.n_var, qfi_number_gaussian(state))


def _noise_ratio(r: float, n: float) -> float:
    # Delta^2 N / N along the optimal-phase family, signed r (r < 0 squeezes amplitude)
    alpha2 = n - math.sinh(r) ** 2
    return (math.exp(2 * r) * alpha2 + 0.5 * math.sinh(2 * r) ** 2) / n


def calibrate_noise_ratio(n_target: float, noise_db: float) -> tuple[float, float]:
    """Find ``(|alpha|, r)`` with mean ``n_target`` and ``Delta^2 N / N = 10**(dB/10)``.

    ``r`` is signed: positive values anti-squeeze the amplitude quadrature
    (super-Poissonian light), negative values squeeze it.
    """
    if not n_target > 0:
        raise ValueError(f"photon number must be positive, got {n_target}")
    if noise_db == 0:
        return math.sqrt(n_target), 0.0
    target = 10.0 ** (noise_db / 10.0)
    r_max = math.asinh(math.sqrt(n_target))

    def residual(r):
        return _noise_ratio(r, n_target) - target

    if noise_db > 0:
        if residual(r_max) < 0:
            raise ValueError(f"{noise_db} dB is not reachable with {n_target} photons")
        lo, hi = 0.0, r_max
    else:
        # the noise ratio has a single minimum on the amplitude-squeezed side
        best = optimize.minimize_scalar(
            lambda r: _noise_ratio(r, n_target), bounds=(-r_max, 0.0), method="bounded",
            options={"xatol": 1e-12},
        )
        if best.fun > target:
            raise ValueError(
                f"{noise_db} dB is below the minimum noise ratio "
                f"{10 * math.log10(best.fun):.3f} dB reachable with {n_target} photons"
            )
        lo, hi = best.x, 0.0
    r = optimize.brentq(residual, lo, hi, xtol=1e-300, rtol=4 * np.finfo(float).eps, maxiter=500)
    return math.sqrt(n_target - math.sinh(r) ** 2), r


def prepare_state(n_target: float, noise_db: float, eta: float = 1.0, alpha_arg: float = 0.0) -> GaussianState:
    """Displaced squeezed vacuum at the requested intensity noise, sent through loss."""
    alpha_mag, r = calibrate_noise_ratio(n_target, noise_db)
    phase = optimal_antisqueezing_phase(alpha_arg)
    if r < 0:
        phase = (phase + math.pi) % (2.0 * math.pi)
    return apply_loss(displaced_squeezed_vacuum(alpha_mag, alpha_arg, abs(r), phase), eta)


@dataclass(frozen=True, eq=False)
class FockDensity:
    cutoff: int
    matrix: np.ndarray
    trace_deficit: float


def _annihilation(dim: int) -> np.ndarray:
    return np.diag(np.sqrt(np.arange(1, dim, dtype=float)), 1)


def _squeezed_vacuum_vector(r: float, phase: float, dim: int) -> np.ndarray:
    vec = np.zeros(dim, dtype=complex)
    if r == 0:
        vec[0] = 1.0
        return vec
    k = np.arange((dim + 1) // 2)
    t = -np.exp(1j * phase) * math.tanh(r)
    # amplitude of |2k>: t^k sqrt((2k)!) / (2^k k!) / sqrt(cosh r), via logs
    log_mag = 0.5 * special.gammaln(2 * k + 1) - special.gammaln(k + 1) - k * math.log(2.0)
    vec[2 * k] = np.exp(log_mag) * t**k / math.sqrt(math.cosh(r))
    return vec


def _loss_channel(rho: np.ndarray, eta: float) -> np.ndarray:
    # Kraus operators K_k = sqrt((1-eta)^k / k!) eta^(n/2) a^k
    if eta == 1.0:
        return rho.copy()
    dim = rho.shape[0]
    n = np.arange(dim)
    out = np.zeros_like(rho)
    log_fact = special.gammaln(np.arange(dim) + 1)
    for k in range(dim):
        m = n[: dim - k]
        # <m|K_k|m+k> = sqrt(C(m+k, k)) eta^(m/2) (1-eta)^(k/2)
        if eta == 0.0:
            amp = np.where(m == 0, 1.0, 0.0)
        else:
            log_amp = 0.5 * (log_fact[m + k] - log_fact[m] - log_fact[k]) + 0.5 * m * math.log(eta)
            amp = np.exp(log_amp)
        amp = amp * (1.0 - eta) ** (0.5 * k)
        block = rho[k:, k:]
        out[: dim - k, : dim - k] += amp[:, None] * block * amp[None, :]
    return out


def fock_oracle_state(
    alpha: complex, r: float, squeeze_phase: float, eta: float = 1.0, cutoff: int = 150
) -> FockDensity:
    """Density matrix of the (lossy) displaced squeezed vacuum in the number basis."""
    if not 0.0 <= eta <= 1.0:
        raise ValueError(f"transmittance must lie in [0, 1], got {eta}")
    expected = abs(alpha) ** 2 + math.sinh(r) ** 2
    if expected > cutoff / 6:
        raise ValueError(f"mean photon number {expected:.3g} too large for cutoff {cutoff}")
    # displace in a padded space so truncation only touches the far tail
    work = cutoff + 60
    a = _annihilation(work)
    vec = _squeezed_vacuum_vector(r, squeeze_phase, work)
    if alpha != 0:
        vec = linalg.expm(alpha * a.T - np.conj(alpha) * a) @ vec
    vec = vec[:cutoff]
    deficit = max(0.0, 1.0 - float(np.vdot(vec, vec).real))
    if deficit > MAX_TRACE_DEFICIT:
        raise ValueError(f"trace deficit {deficit:.2e} exceeds {MAX_TRACE_DEFICIT}; raise the cutoff")
    rho = _loss_channel(np.outer(vec, vec.conj()), eta)
    return FockDensity(cutoff, 0.5 * (rho + rho.conj().T), deficit)


def fock_photon_statistics(rho: FockDensity) -> PhotonStatistics:
    n = np.arange(rho.cutoff, dtype=float)
    p = np.real(np.diag(rho.matrix))
    mean = float(p @ n)
    return PhotonStatistics(mean, float(p @ n**2) - mean**2)


def fock_oracle_qfi(rho: FockDensity, eps: float = SPECTRAL_CUT) -> float:
    """Mixed-state QFI for the generator ``a^dag a`` from the eigendecomposition.

    ``F = 4 <N^2> - 8 sum_{a,b} p_a p_b / (p_a + p_b) |<a|N|b>|^2`` over all
    eigenvector pairs with ``p_a + p_b > eps``.
    """
    p, vecs = np.linalg.eigh(rho.matrix)
    if np.min(p) < -1e-10:
        raise ValueError(f"density matrix has eigenvalue {np.min(p):.3e}")
    p = np.clip(p, 0.0, None)
    n = np.arange(rho.cutoff, dtype=float)
    number = vecs.conj().T @ (n[:, None] * vecs)
    total = p[:, None] + p[None, :]
    keep = total > eps
    weight = np.where(keep, np.outer(p, p) / np.where(keep, total, 1.0), 0.0)
    second = float(np.real(np.trace(rho.matrix @ np.diag(n * n))))
    return 4.0 * second - 8.0 * float(np.sum(weight * np.abs(number) ** 2))
