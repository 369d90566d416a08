"""Slow, independent reference calculations.

Nothing in here imports the kernels module: the variance brackets are
written out again with explicit 3-vectors so that the reduced kernels can be
checked against them.

Energy density as a Bessel series
---------------------------------
Expanding f = sum_n (-1)^(n+1) exp(-n omega / T) and using

    int_0^inf k^2 exp(-x omega) dk = m^2 K_2(m x) / x

differentiated in x (with K_2' = -K_1 - 2 K_2 / z) gives

    int_0^inf k^2 omega exp(-x omega) dk = m^3 K_1(m x) / x + 3 m^2 K_2(m x) / x^2

so that with z = m / T

    eps = g / (2 pi^2) sum_n (-1)^(n+1) [m^3 T K_1(n z) / n + 3 m^2 T^2 K_2(n z) / n^2].
"""
from __future__ import annotations

import dataclasses
import itertools
import math
import warnings

import numpy as np
from scipy.special import kve

from .core import DomainError, MassRequiredForGauge, PseudoGauge


class BudgetExceeded(RuntimeError):
    """The lattice is larger than the configured budget."""


class LatticeResolutionWarning(UserWarning):
    """Mode spacing is coarse compared to the temperature."""


def epsilon_massless(params):
    """Closed form 7 pi^2 T^4 / 60 * (g / 4) of the massless energy density."""
    return 7.0 * math.pi**2 * params.temperature**4 / 60.0 * params.degeneracy / 4.0


def epsilon_bessel_series(params, terms=60):
    """Energy density from the alternating Boltzmann series in K_1, K_2.

    Parameters
    ----------
    params : SystemParams
        Needs ``mass > 0``.
    terms : int
        Number of series terms, at least 10.

    Returns
    -------
    float
    """
    if params.mass <= 0:
        raise DomainError("Bessel series needs mass > 0; use epsilon_massless instead")
    if terms < 10:
        raise ValueError("use at least 10 terms")
    m, T = params.mass, params.temperature
    z = m / T
    n = np.arange(1, terms + 1, dtype=float)
    x = n * z
    # kve(v, x) = K_v(x) exp(x); undo the scaling term by term
    k1 = kve(1, x) * np.exp(-x)
    k2 = kve(2, x) * np.exp(-x)
    sign = np.where(n % 2 == 1, 1.0, -1.0)
    series = sign * (m**3 * T * k1 / n + 3.0 * m**2 * T**2 * k2 / n**2)
    return params.degeneracy / (2.0 * math.pi**2) * math.fsum(series)


_PREFACTOR = {
    PseudoGauge.CANONICAL: lambda m: 2.0,
    PseudoGauge.GLW: lambda m: 1.0 / (2.0 * m * m),
    PseudoGauge.HW: lambda m: 2.0 / (m * m),
}


def _resolve(gauge, mass):
    gauge = PseudoGauge.parse(gauge)
    if gauge is PseudoGauge.BELINFANTE_ROSENFELD:
        gauge = PseudoGauge.CANONICAL
    if gauge is not PseudoGauge.CANONICAL and mass <= 0:
        raise MassRequiredForGauge(f"{gauge.name} needs mass > 0 (1/m^2 prefactor)")
    return gauge


def bracket_transcription(gauge, kvec, kpvec, params):
    """Prefactor times the variance bracket, with explicit 3-vectors.

    Parameters
    ----------
    gauge : PseudoGauge or str
    kvec, kpvec : array_like
        Momenta, last axis of length 3.
    params : SystemParams

    Returns
    -------
    ndarray
        ``prefactor * [P+ exp(-a^2 |k - k'|^2 / 2) - P- exp(-a^2 |k + k'|^2 / 2)]``

    Notes
    -----
    Evaluated in extended precision (``np.longdouble``) because the straight
    form ``omega omega' - k.k' + m^2`` cancels badly when ``k >> m``.
    """
    gauge = _resolve(gauge, params.mass)
    m = np.longdouble(params.mass)
    k = np.asarray(kvec, dtype=np.longdouble)
    kp = np.asarray(kpvec, dtype=np.longdouble)
    w = np.sqrt(np.sum(k * k, axis=-1) + m * m)
    wp = np.sqrt(np.sum(kp * kp, axis=-1) + m * m)
    dot = np.sum(k * kp, axis=-1)
    diff2 = np.sum((k - kp) ** 2, axis=-1)
    summ2 = np.sum((k + kp) ** 2, axis=-1)
    half_a2 = np.longdouble(0.5) * np.longdouble(params.radius_a) ** 2
    if gauge is PseudoGauge.CANONICAL:
        plus = (w + wp) ** 2 * (w * wp + dot + m * m)
        minus = (w - wp) ** 2 * (w * wp + dot - m * m)
    elif gauge is PseudoGauge.GLW:
        plus = (w + wp) ** 4 * (w * wp - dot + m * m)
        minus = (w - wp) ** 4 * (w * wp - dot - m * m)
    else:
        plus = (w * wp + dot + m * m) ** 2 * (w * wp - dot + m * m)
        minus = (w * wp + dot - m * m) ** 2 * (w * wp - dot - m * m)
    out = _PREFACTOR[gauge](m) * (plus * np.exp(-half_a2 * diff2) - minus * np.exp(-half_a2 * summ2))
    return out.astype(float)


@dataclasses.dataclass(frozen=True)
class LatticeSpec:
    """Periodic box of side ``box_length`` with modes ``k = 2 pi n / L``, ``|n|_inf <= n_max``."""

    box_length: float
    n_max: int

    @property
    def spacing(self):
        return 2.0 * math.pi / self.box_length

    def validate(self, params):
        T, m = params.temperature, params.mass
        corner = math.sqrt(3.0) * self.n_max * self.spacing
        if 1.0 / (math.exp(min(math.hypot(corner, m) / T, 700.0)) + 1.0) >= 1e-10:
            raise DomainError(f"n_max={self.n_max} too small: corner occupation is not < 1e-10")
        if self.spacing >= T / 4:
            warnings.warn(f"mode spacing {self.spacing:.3g} is not below T/4 = {T / 4:.3g}",
                          LatticeResolutionWarning, stacklevel=3)

    @classmethod
    def for_params(cls, params, box_length, thermal_reach=25.0, gauss_reach=9.0):
        """Smallest cube whose inscribed sphere holds the thermal momenta
        plus the width of the smearing Gaussian."""
        reach = thermal_reach * params.temperature + gauss_reach / params.radius_a
        spacing = 2.0 * math.pi / box_length
        return cls(box_length, int(math.ceil(reach / spacing)))


def _fermi(omega, T):
    return np.exp(-np.logaddexp(0.0, omega / T))


def _fermi_bar(omega, T):
    return np.exp(-np.logaddexp(0.0, -omega / T))


def variance_lattice_brute(gauge, params, spec, max_pairs=5e7):
    """Finite-box variance as a plain double sum over mode pairs.

    Only practical for small lattices; used to validate
    :func:`variance_lattice_sum`.
    """
    _resolve(gauge, params.mass)
    n = np.arange(-spec.n_max, spec.n_max + 1)
    modes = spec.spacing * np.array(list(itertools.product(n, n, n)), dtype=float)
    if len(modes) ** 2 > max_pairs:
        raise BudgetExceeded(f"{len(modes) ** 2:.3g} pairs exceed the budget of {max_pairs:.3g}")
    m, T = params.mass, params.temperature
    w = np.sqrt(np.sum(modes**2, axis=1) + m * m)
    with np.errstate(divide="ignore", invalid="ignore"):
        a = np.where(w > 0, _fermi(w, T) / (2.0 * w), 0.0)
        b = np.where(w > 0, _fermi_bar(w, T) / (2.0 * w), 0.0)
    total = 0.0
    for i in range(len(modes)):
        if a[i] == 0.0:
            continue
        br = bracket_transcription(gauge, modes[i][None, :], modes, params)
        total += a[i] * float(np.dot(b, br))
    return total * params.degeneracy / 4.0 / spec.box_length**6


class _Poly(dict):
    """Polynomial in (omega, omega', k.k') keyed by exponent triples."""

    def __mul__(self, other):
        out = _Poly()
        for (p1, q1, r1), c1 in self.items():
            for (p2, q2, r2), c2 in other.items():
                key = (p1 + p2, q1 + q2, r1 + r2)
                out[key] = out.get(key, 0.0) + c1 * c2
        return out

    def __pow__(self, n):
        out = _Poly({(0, 0, 0): 1.0})
        for _ in range(n):
            out = out * self
        return out


def _bracket_polys(gauge, m):
    """Direct and exchange weights as polynomials in (omega, omega', k.k')."""
    m2 = m * m
    w, wp, s, one = (_Poly({(1, 0, 0): 1.0}), _Poly({(0, 1, 0): 1.0}),
                     _Poly({(0, 0, 1): 1.0}), _Poly({(0, 0, 0): 1.0}))

    def lin(*terms):
        out = _Poly()
        for coef, poly in terms:
            for key, c in poly.items():
                out[key] = out.get(key, 0.0) + coef * c
        return out

    wwp = w * wp
    if gauge is PseudoGauge.CANONICAL:
        plus = lin((1, w), (1, wp)) ** 2 * lin((1, wwp), (1, s), (m2, one))
        minus = lin((1, w), (-1, wp)) ** 2 * lin((1, wwp), (1, s), (-m2, one))
    elif gauge is PseudoGauge.GLW:
        plus = lin((1, w), (1, wp)) ** 4 * lin((1, wwp), (-1, s), (m2, one))
        minus = lin((1, w), (-1, wp)) ** 4 * lin((1, wwp), (-1, s), (-m2, one))
    else:
        plus = lin((1, wwp), (1, s), (m2, one)) ** 2 * lin((1, wwp), (-1, s), (m2, one))
        minus = lin((1, wwp), (1, s), (-m2, one)) ** 2 * lin((1, wwp), (-1, s), (-m2, one))
    return plus, minus


def _multi_indices(r):
    for i in range(r + 1):
        for j in range(r + 1 - i):
            alpha = (i, j, r - i - j)
            mult = math.factorial(r) // (math.factorial(alpha[0]) * math.factorial(alpha[1])
                                         * math.factorial(alpha[2]))
            yield alpha, mult


def variance_lattice_sum(gauge, params, spec, max_modes=2e7, validate=True):
    """Finite-box variance from the discrete double sum over lattice modes.

    Replaces ``int d^3k / (2 pi)^3`` by ``(1/L^3) sum_k`` for both momenta.

    Notes
    -----
    The double sum is evaluated exactly but without visiting mode pairs.
    The brackets are polynomials in ``omega``, ``omega'`` and
    ``k . k' = sum_i k_i k'_i``; expanding ``(k . k')^r`` into products of
    Cartesian components makes every term a product of a function of ``k``,
    a function of ``k'`` and the Gaussian, which itself factorises over the
    three axes. The inner sum over ``k'`` is then three matrix products per
    term. The exchange Gaussian ``exp(-a^2 |k + k'|^2 / 2)`` maps onto the
    same convolution after ``k' -> -k'``, which only flips the sign of the
    odd components.

    Parameters
    ----------
    gauge : PseudoGauge or str
    params : SystemParams
    spec : LatticeSpec
    max_modes : float
        Budget on the number of lattice modes.

    Returns
    -------
    float
    """
    gauge = _resolve(gauge, params.mass)
    if validate:
        spec.validate(params)
    side = 2 * spec.n_max + 1
    if side**3 > max_modes:
        raise BudgetExceeded(f"{side**3:.3g} modes exceed the budget of {max_modes:.3g}")
    m, T, a = params.mass, params.temperature, params.radius_a
    comp = spec.spacing * np.arange(-spec.n_max, spec.n_max + 1)
    kx, ky, kz = np.meshgrid(comp, comp, comp, indexing="ij", sparse=True)
    w = np.sqrt(kx**2 + ky**2 + kz**2 + m * m)
    with np.errstate(divide="ignore", invalid="ignore"):
        # the k = 0 mode is dropped at m = 0 (0/0 in the measure)
        ak = np.where(w > 0, _fermi(w, T) / (2.0 * w), 0.0)
        bk = np.where(w > 0, _fermi_bar(w, T) / (2.0 * w), 0.0)
    diff = comp[:, None] - comp[None, :]
    gmat = np.exp(-0.5 * a * a * diff * diff)

    def convolve(x):
        for axis in range(3):
            x = np.moveaxis(np.tensordot(gmat, x, axes=(1, axis)), 0, axis)
        return x

    plus, minus = _bracket_polys(gauge, m)
    # group by the k'-side factor (q, r)
    keys = sorted({(q, r) for (_, q, r) in list(plus) + list(minus)})
    comps = (kx, ky, kz)
    terms = []
    for q, r in keys:
        wq = w**q
        kside = np.zeros_like(w)
        for p in {p for (p, qq, rr) in list(plus) + list(minus) if qq == q and rr == r}:
            coef = plus.get((p, q, r), 0.0) - (-1.0) ** r * minus.get((p, q, r), 0.0)
            if coef:
                kside = kside + coef * w**p
        if not np.any(kside):
            continue
        for alpha, mult in _multi_indices(r):
            mono = comps[0] ** alpha[0] * comps[1] ** alpha[1] * comps[2] ** alpha[2]
            conv = convolve(bk * wq * mono)
            terms.append(mult * float(np.sum(ak * kside * mono * conv)))
    total = math.fsum(terms)
    return _PREFACTOR[gauge](m) * total * params.degeneracy / 4.0 / spec.box_length**6
