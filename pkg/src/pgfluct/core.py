"""Physical parameters, kinematics, Fermi-Dirac statistics and the energy density.

Natural units (hbar = c = k_B = 1) are used throughout: mass and temperature
carry one power of energy, the smearing radius one inverse power.
"""
from __future__ import annotations

import dataclasses
import enum
import math

import numpy as np
from scipy.special import expit

from .quadrature import NonConvergence, QuadratureConfig, integrate_radial

DEFAULT_DEGENERACY = 4.0


class DomainError(ValueError):
    """An argument lies outside the domain of an operation."""


class MassRequiredForGauge(DomainError):
    """GLW and HW variances carry a 1/m^2 prefactor and need m > 0."""


class PseudoGauge(str, enum.Enum):
    CANONICAL = "can"
    BELINFANTE_ROSENFELD = "br"
    GLW = "glw"
    HW = "hw"

    @property
    def kernel_gauge(self):
        """Gauge whose T^00 kernel is used; BR shares the canonical T^00."""
        if self is PseudoGauge.BELINFANTE_ROSENFELD:
            return PseudoGauge.CANONICAL
        return self

    @property
    def needs_mass(self):
        return self.kernel_gauge in (PseudoGauge.GLW, PseudoGauge.HW)

    @classmethod
    def parse(cls, name):
        """Accept short codes (``can``) and long names (``Canonical``)."""
        if isinstance(name, cls):
            return name
        key = str(name).strip().lower().replace("-", "").replace("_", "")
        aliases = {
            "can": cls.CANONICAL, "canonical": cls.CANONICAL,
            "br": cls.BELINFANTE_ROSENFELD, "belinfanterosenfeld": cls.BELINFANTE_ROSENFELD,
            "glw": cls.GLW, "hw": cls.HW,
        }
        try:
            return aliases[key]
        except KeyError:
            raise ValueError(f"unknown pseudo-gauge {name!r}") from None


ALL_GAUGES = (PseudoGauge.CANONICAL, PseudoGauge.BELINFANTE_ROSENFELD,
              PseudoGauge.GLW, PseudoGauge.HW)


@dataclasses.dataclass(frozen=True)
class SystemParams:
    """Inputs of one parameter point.

    Parameters
    ----------
    mass : float
        Particle mass, >= 0.
    temperature : float
        Temperature, > 0.
    radius_a : float
        Width of the Gaussian subsystem profile, > 0.
    degeneracy : float
        Internal degeneracy; 4 counts spin and particle/antiparticle.
    """

    mass: float
    temperature: float
    radius_a: float = 1.0
    degeneracy: float = DEFAULT_DEGENERACY

    def __post_init__(self):
        for name in ("mass", "temperature", "radius_a", "degeneracy"):
            value = getattr(self, name)
            if not math.isfinite(value):
                raise DomainError(f"{name} must be finite, got {value}")
        if self.temperature <= 0:
            raise DomainError(f"temperature must be positive, got {self.temperature}")
        if self.radius_a <= 0:
            raise DomainError(f"radius_a must be positive, got {self.radius_a}")
        if self.mass < 0:
            raise DomainError(f"mass must be non-negative, got {self.mass}")
        if self.degeneracy < 1:
            raise DomainError(f"degeneracy must be >= 1, got {self.degeneracy}")

    def scaled(self, lam):
        """Rescale every dimensionful input by ``lam`` in energy units."""
        return dataclasses.replace(self, mass=self.mass * lam, temperature=self.temperature * lam,
                                   radius_a=self.radius_a / lam)


@dataclasses.dataclass(frozen=True)
class FluctuationResult:
    """Mean, variance and normalised spread of the smeared energy density."""

    epsilon: float
    sigma2: float
    sigma_n: float
    epsilon_err: float
    sigma2_err: float
    evaluations: int
    converged: bool
    tail_fraction: float = 0.0

    def as_dict(self):
        return dataclasses.asdict(self)


def fermi_dirac(omega, temperature):
    """Fermi-Dirac occupation 1/(exp(omega/T) + 1) without overflow.

    Parameters
    ----------
    omega : float or ndarray
        Energy, >= 0.
    temperature : float
        Temperature, > 0.

    Returns
    -------
    float or ndarray
        Occupation in (0, 1/2]; underflows to 0 for omega/T beyond ~745.
    """
    return expit(-np.asarray(omega, dtype=float) / temperature)


def fermi_dirac_complement(omega, temperature):
    """1 - f(omega), evaluated directly so it never cancels."""
    return expit(np.asarray(omega, dtype=float) / temperature)


def on_shell_energy(k, mass):
    """Relativistic energy sqrt(k^2 + m^2), computed with hypot."""
    return np.hypot(k, mass)


def energy_density_integrand(params):
    """Radial integrand g/(2 pi^2) k^2 omega f(omega) of the energy density."""
    pref = params.degeneracy / (2.0 * math.pi**2)
    m, T = params.mass, params.temperature

    def integrand(k):
        w = on_shell_energy(k, m)
        return pref * k * k * w * fermi_dirac(w, T)
    return integrand


def energy_density(params, cfg=None, strict=True):
    """Thermal energy density, the same for every pseudo-gauge.

    Parameters
    ----------
    params : SystemParams
        Only mass, temperature and degeneracy enter.
    cfg : QuadratureConfig, optional
    strict : bool
        Raise :class:`NonConvergence` when the tolerance is not met.

    Returns
    -------
    QuadResult
        ``(value, error, evaluations, converged, tail)``.
    """
    cfg = cfg or QuadratureConfig()
    res = integrate_radial(energy_density_integrand(params), cfg, temperature=params.temperature,
                           mass=params.mass)
    if strict and not res.converged:
        raise NonConvergence(
            f"energy density did not reach rel_tol={cfg.rel_tol} "
            f"(estimate {res.value:.6g} +- {res.error:.2g}, tail {res.tail:.2g})", res)
    return res
