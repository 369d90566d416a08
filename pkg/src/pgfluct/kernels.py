"""Reduced variance integrands for the four pseudo-gauges.

Each variance is a double momentum integral over ``dK dK'`` with
``dK = d^3k / ((2 pi)^3 2 omega)``. The bracket depends on the two momenta
only through ``k``, ``k'`` and ``u = cos(theta)``, so the two azimuthal
angles and the overall orientation integrate out:

    dK dK' -> (4 pi)(2 pi) k^2 k'^2 dk dk' du / ((2 pi)^6 4 omega omega')
            = k^2 k'^2 dk dk' du / (32 pi^4 omega omega')

and ``k . k'`` becomes ``k k' u`` in the polynomial weights. The Gaussian
arguments are regrouped as

    (k -+ k')^2 = (k - k')^2 + 2 k k' (1 -+ u)

which is a sum of non-negative terms, so the exponentials never overflow.
"""
from __future__ import annotations

import dataclasses
import math
import warnings

import numpy as np

from .core import (DEFAULT_DEGENERACY, DomainError, FluctuationResult, MassRequiredForGauge,
                   PseudoGauge, SystemParams, energy_density, fermi_dirac,
                   fermi_dirac_complement, on_shell_energy)
from .quadrature import NonConvergence, QuadratureConfig, integrate_variance_3d

MEASURE = 1.0 / (32.0 * math.pi**4)
SMALL_MASS_RATIO = 1e-3


def gauge_prefactor(gauge, mass):
    """Numeric prefactor in front of the variance integral."""
    g = PseudoGauge.parse(gauge).kernel_gauge
    if g is PseudoGauge.CANONICAL:
        return 2.0
    if mass <= 0:
        raise MassRequiredForGauge(
            f"{g.name} variance carries a 1/m^2 prefactor and needs mass > 0")
    if g is PseudoGauge.GLW:
        return 1.0 / (2.0 * mass**2)
    return 2.0 / mass**2


def _safe_ratio(num, den):
    num, den = np.broadcast_arrays(np.asarray(num, dtype=float), np.asarray(den, dtype=float))
    return np.divide(num, den, out=np.zeros(num.shape), where=den > 0)


@dataclasses.dataclass(frozen=True)
class VarianceKernel:
    """Reduced 3D integrand of one gauge at one parameter point.

    ``weight(k, kp, u)`` integrated over ``k, kp >= 0`` and ``u`` in
    ``[-1, 1]`` gives the variance of the smeared energy density.
    """

    gauge: PseudoGauge
    params: SystemParams

    def __post_init__(self):
        g = PseudoGauge.parse(self.gauge)
        object.__setattr__(self, "gauge", g)
        if g.needs_mass:
            m, T = self.params.mass, self.params.temperature
            if m <= 0:
                gauge_prefactor(g, m)
            if m / T < SMALL_MASS_RATIO:
                warnings.warn(f"m/T = {m / T:.3g} is tiny; the {g.name} variance grows as 1/m^2",
                              RuntimeWarning, stacklevel=3)

    @property
    def prefactor(self):
        return gauge_prefactor(self.gauge, self.params.mass)

    def _energies(self, k, kp):
        m = self.params.mass
        return on_shell_energy(k, m), on_shell_energy(kp, m)

    def _factors(self, k, kp):
        """Cancellation-free building blocks of the polynomial weights.

        With ``E = omega omega' - k k' - m^2``, which equals
        ``m^2 [(omega - omega')^2 + (k - k')^2] / (2 (omega omega' + k k'))``,
        every factor below is a sum of non-negative terms.
        """
        m2 = self.params.mass**2
        w, wp = self._energies(k, kp)
        b = k * kp
        wsum = w + wp
        wdiff = _safe_ratio((k - kp) * (k + kp), wsum)
        e = m2 * 0.5 * _safe_ratio(wdiff**2 + (k - kp) ** 2, w * wp + b)
        return wsum, wdiff, b, e, m2

    def direct_poly(self, k, kp, u):
        """Weight of the exp(-(a^2/2)(k - k')^2) term, vector dot product k k' u."""
        wsum, _, b, e, m2 = self._factors(k, kp)
        x = e + 2.0 * m2 + b * (1.0 + u)   # omega omega' + k k' u + m^2
        y = e + 2.0 * m2 + b * (1.0 - u)   # omega omega' - k k' u + m^2
        g = self.gauge.kernel_gauge
        if g is PseudoGauge.CANONICAL:
            return wsum**2 * x
        if g is PseudoGauge.GLW:
            return wsum**4 * y
        return x * x * y

    def exchange_poly(self, k, kp, u):
        """Weight of the exp(-(a^2/2)(k + k')^2) term."""
        _, wdiff, b, e, _ = self._factors(k, kp)
        x = e + b * (1.0 + u)   # omega omega' + k k' u - m^2
        y = e + b * (1.0 - u)   # omega omega' - k k' u - m^2
        g = self.gauge.kernel_gauge
        if g is PseudoGauge.CANONICAL:
            return wdiff**2 * x
        if g is PseudoGauge.GLW:
            return wdiff**4 * y
        return x * x * y

    def measure(self, k, kp):
        """Jacobian, thermal factors and constants shared by both terms, without the gauge prefactor."""
        p = self.params
        w, wp = self._energies(k, kp)
        scale = MEASURE * p.degeneracy / DEFAULT_DEGENERACY
        return (scale * _safe_ratio(k * k, w) * _safe_ratio(kp * kp, wp)
                * fermi_dirac(w, p.temperature) * fermi_dirac_complement(wp, p.temperature))

    def angular_scale(self, k, kp):
        return self.params.radius_a**2 * k * kp

    def bracket(self, k, kp, u):
        """Prefactor times direct minus exchange term, Gaussians included."""
        half_a2 = 0.5 * self.params.radius_a**2
        base = (k - kp) ** 2
        cross = 2.0 * k * kp
        direct = self.direct_poly(k, kp, u) * np.exp(-half_a2 * (base + cross * (1.0 - u)))
        exchange = self.exchange_poly(k, kp, u) * np.exp(-half_a2 * (base + cross * (1.0 + u)))
        return self.prefactor * (direct - exchange)

    def weight(self, k, kp, u):
        return self.measure(k, kp) * self.bracket(k, kp, u)

    def u_coefficients(self, k, kp):
        """Expand both polynomial weights in powers of u.

        Returns
        -------
        common : ndarray
            ``prefactor * measure * exp(-(a^2/2)(k - k')^2)``.
        plus, minus : ndarray
            Shape ``(4,) + shape(k)``: coefficients of ``u**0 .. u**3`` of the
            direct and exchange weights.
        """
        wsum, wdiff, b, e, m2 = self._factors(k, kp)
        A = e + 2.0 * m2 + b   # omega omega' + m^2
        C = e + b              # omega omega' - m^2
        zero = np.zeros_like(b)
        g = self.gauge.kernel_gauge
        if g is PseudoGauge.CANONICAL:
            s2, d2 = wsum**2, wdiff**2
            plus = [s2 * A, s2 * b, zero, zero]
            minus = [d2 * C, d2 * b, zero, zero]
        elif g is PseudoGauge.GLW:
            s4, d4 = wsum**4, wdiff**4
            plus = [s4 * A, -s4 * b, zero, zero]
            minus = [d4 * C, -d4 * b, zero, zero]
        else:
            # (X + b u)^2 (X - b u) = X^3 + X^2 b u - X b^2 u^2 - b^3 u^3
            b2, b3 = b * b, b * b * b
            plus = [A**3, A * A * b, -A * b2, -b3]
            minus = [C**3, C * C * b, -C * b2, -b3]
        half_a2 = 0.5 * self.params.radius_a**2
        common = self.prefactor * self.measure(k, kp) * np.exp(-half_a2 * (k - kp) ** 2)
        return common, np.array(plus), np.array(minus)


def reduced_integrand(gauge, k, kp, u, params):
    """Reduced variance integrand W(k, k', u) of one gauge.

    Parameters
    ----------
    gauge : PseudoGauge or str
    k, kp : float or ndarray
        Momentum magnitudes, >= 0.
    u : float or ndarray
        Cosine of the angle between the momenta.
    params : SystemParams

    Returns
    -------
    ndarray
        Integrand density; its integral over k, k' in [0, inf) and u in
        [-1, 1] is the variance.

    Raises
    ------
    MassRequiredForGauge
        For GLW or HW at zero mass.
    DomainError
        If ``|u| > 1`` or a momentum is negative.
    """
    u = np.asarray(u, dtype=float)
    if np.any(np.abs(u) > 1.0):
        raise DomainError("u must lie in [-1, 1]")
    k = np.asarray(k, dtype=float)
    kp = np.asarray(kp, dtype=float)
    if np.any(k < 0) or np.any(kp < 0):
        raise DomainError("momenta must be non-negative")
    return VarianceKernel(gauge, params).weight(k, kp, u)


def variance(gauge, params, cfg=None):
    """Variance of the Gaussian-smeared energy density for one gauge.

    Returns
    -------
    QuadResult
        Best estimate with its error; ``converged`` is False rather than
        raising when the budget runs out.
    """
    cfg = cfg or QuadratureConfig()
    gauge = PseudoGauge.parse(gauge)
    kernel = VarianceKernel(gauge.kernel_gauge, params)
    if params.temperature <= 0:
        raise DomainError("temperature must be positive")
    return integrate_variance_3d(kernel, params, cfg)


def sigma_normalized(gauge, params, cfg=None):
    """Energy density, variance and their ratio sqrt(sigma2)/epsilon."""
    cfg = cfg or QuadratureConfig()
    var = variance(gauge, params, cfg)
    try:
        eps = energy_density(params, cfg)
    except NonConvergence as exc:
        eps = exc.result
    if eps.value > 0 and var.value >= 0:
        sigma_n = math.sqrt(var.value) / eps.value
    else:
        sigma_n = math.nan
    tail = abs(var.tail) / abs(var.value) if var.value else 0.0
    return FluctuationResult(
        epsilon=eps.value, sigma2=var.value, sigma_n=sigma_n,
        epsilon_err=eps.error, sigma2_err=var.error,
        evaluations=var.evaluations + eps.evaluations,
        converged=bool(var.converged and eps.converged and var.value >= 0),
        tail_fraction=tail,
    )
