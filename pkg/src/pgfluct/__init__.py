"""Energy-density fluctuations of a hot spin-1/2 gas under four pseudo-gauges."""

__version__ = "0.1.0"

from .core import (ALL_GAUGES, DomainError, FluctuationResult, MassRequiredForGauge,  # noqa: E402
                   PseudoGauge, SystemParams, energy_density, fermi_dirac, on_shell_energy)
from .kernels import VarianceKernel, reduced_integrand, sigma_normalized, variance  # noqa: E402
from .quadrature import (AngularMode, NonConvergence, QuadratureConfig, QuadResult,  # noqa: E402
                         angular_moments_scaled, integrate_radial, integrate_variance_3d)

__all__ = [
    "ALL_GAUGES", "AngularMode", "DomainError", "FluctuationResult", "MassRequiredForGauge",
    "NonConvergence", "PseudoGauge", "QuadResult", "QuadratureConfig", "SystemParams",
    "VarianceKernel", "angular_moments_scaled", "energy_density", "fermi_dirac",
    "integrate_radial", "integrate_variance_3d", "on_shell_energy", "reduced_integrand",
    "sigma_normalized", "variance",
]
