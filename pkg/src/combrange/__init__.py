"""Quantum precision limits for frequency-comb ranging through dispersive air."""

from .atmosphere import (
    AmbientConditions,
    DispersionTimes,
    JacobianB,
    dispersion_times,
    jacobian_analytic,
    parameter_x,
    refractive_index,
)
from .fisher import Bound, FisherMatrix, Regime, bound, fim_native, reparametrize
from .pipeline import RunConfig, evaluate
from .qstate import GaussianState, PhotonStatistics, prepare_state
from .spectral import Family, MomentSet, SpectralShape, make_shape, moments_analytic

__version__ = "0.1.0"
