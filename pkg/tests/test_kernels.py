import math

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from pgfluct import (DomainError, PseudoGauge, QuadratureConfig, SystemParams, reduced_integrand,
                     sigma_normalized, variance)
from pgfluct.core import MassRequiredForGauge
from pgfluct.kernels import VarianceKernel, gauge_prefactor

GAUGES = ["can", "glw", "hw"]


def mp_reduced(gauge, k, kp, u, m, T, a):
    """Reduced integrand written out in mpmath, straight from the vector form."""
    mpmath.mp.dps = 50
    k, kp, u, m, T, a = map(mpmath.mpf, (k, kp, u, m, T, a))
    w, wp = mpmath.sqrt(k**2 + m**2), mpmath.sqrt(kp**2 + m**2)
    s = k * kp * u
    f = 1 / (mpmath.exp(w / T) + 1)
    fbar = 1 - 1 / (mpmath.exp(wp / T) + 1)
    if gauge == "can":
        pref, plus, minus = 2, (w + wp)**2 * (w * wp + s + m**2), (w - wp)**2 * (w * wp + s - m**2)
    elif gauge == "glw":
        pref = 1 / (2 * m**2)
        plus, minus = (w + wp)**4 * (w * wp - s + m**2), (w - wp)**4 * (w * wp - s - m**2)
    else:
        pref = 2 / m**2
        plus = (w * wp + s + m**2)**2 * (w * wp - s + m**2)
        minus = (w * wp + s - m**2)**2 * (w * wp - s - m**2)
    diff2, sum2 = k**2 + kp**2 - 2 * s, k**2 + kp**2 + 2 * s
    bracket = pref * (plus * mpmath.exp(-a**2 * diff2 / 2) - minus * mpmath.exp(-a**2 * sum2 / 2))
    return k**2 * kp**2 / (32 * mpmath.pi**4 * w * wp) * f * fbar * bracket


@pytest.mark.parametrize("gauge", GAUGES)
@pytest.mark.parametrize("point", [(1.0, 2.0, 0.3, 1.0, 1.0, 1.0), (0.2, 5.0, -0.9, 0.5, 1.0, 2.0),
                                   (7.0, 6.5, 0.99, 3.0, 2.0, 0.5)])
def test_reduced_integrand_matches_mpmath(gauge, point):
    k, kp, u, m, T, a = point
    got = reduced_integrand(gauge, k, kp, u, SystemParams(m, T, a))
    assert got == pytest.approx(float(mp_reduced(gauge, *point)), rel=1e-13)


@settings(max_examples=50)
@given(st.floats(0, 10), st.floats(0, 10), st.floats(-1, 1), st.floats(0.1, 10),
       st.sampled_from(GAUGES))
def test_polys_symmetric_under_swap(k, kp, u, m, gauge):
    kern = VarianceKernel(gauge, SystemParams(m, 1.0, 1.0))
    assert kern.direct_poly(k, kp, u) == pytest.approx(kern.direct_poly(kp, k, u), rel=1e-13)
    assert kern.exchange_poly(k, kp, u) == pytest.approx(kern.exchange_poly(kp, k, u),
                                                         rel=1e-12, abs=1e-300)


@settings(max_examples=50)
@given(st.floats(0, 10), st.floats(0, 10), st.floats(-1, 1), st.floats(0.1, 10),
       st.sampled_from(GAUGES))
def test_polys_non_negative(k, kp, u, m, gauge):
    kern = VarianceKernel(gauge, SystemParams(m, 1.0, 1.0))
    assert kern.direct_poly(k, kp, u) > 0
    assert kern.exchange_poly(k, kp, u) >= 0


@settings(max_examples=30)
@given(st.floats(0, 10), st.floats(0, 10), st.floats(0.1, 10), st.sampled_from(GAUGES))
def test_u_coefficients_reproduce_polys(k, kp, m, gauge):
    kern = VarianceKernel(gauge, SystemParams(m, 1.0, 1.0))
    _, plus, minus = kern.u_coefficients(np.array(k), np.array(kp))
    for u in (-1.0, -0.3, 0.4, 1.0):
        powers = u ** np.arange(4)
        scale = np.sum(np.abs(plus) * np.abs(powers))
        assert abs(np.dot(plus, powers) - kern.direct_poly(k, kp, u)) <= 1e-13 * scale
        scale = np.sum(np.abs(minus) * np.abs(powers)) + 1e-300
        assert abs(np.dot(minus, powers) - kern.exchange_poly(k, kp, u)) <= 1e-13 * scale


@pytest.mark.parametrize("gauge", ["glw", "hw"])
def test_mass_required(gauge):
    with pytest.raises(MassRequiredForGauge, match="m"):
        gauge_prefactor(gauge, 0.0)
    with pytest.raises(MassRequiredForGauge):
        variance(gauge, SystemParams(0.0, 1.0, 1.0))


def test_canonical_allows_zero_mass():
    assert variance("can", SystemParams(0.0, 1.0, 1.0)).value > 0


def test_small_mass_warns():
    with pytest.warns(RuntimeWarning, match="tiny"):
        VarianceKernel("glw", SystemParams(1e-4, 1.0, 1.0))


@pytest.mark.parametrize("k,kp,u", [(1.0, 1.0, 1.5), (-1.0, 1.0, 0.0), (1.0, -0.1, 0.0)])
def test_reduced_integrand_domain(k, kp, u):
    with pytest.raises(DomainError):
        reduced_integrand("can", k, kp, u, SystemParams(1.0, 1.0, 1.0))


def test_reduced_integrand_vectorised():
    k = np.linspace(0, 5, 7)
    out = reduced_integrand("hw", k[:, None], k[None, :], 0.2, SystemParams(1.0, 1.0, 1.0))
    assert out.shape == (7, 7) and np.all(np.isfinite(out))


def test_br_is_bitwise_canonical():
    p = SystemParams(2.0, 1.5, 0.7)
    assert variance("br", p) == variance(PseudoGauge.CANONICAL, p)
    assert sigma_normalized("br", p) == sigma_normalized("can", p)


@pytest.mark.parametrize("gauge", GAUGES)
@pytest.mark.parametrize("a", [0.5, 1.0, 5.0])
def test_variance_positive_and_sigma_identity(gauge, a):
    res = sigma_normalized(gauge, SystemParams(1.0, 1.0, a))
    assert res.converged and res.sigma2 > 0
    assert res.sigma_n == pytest.approx(math.sqrt(res.sigma2) / res.epsilon, rel=1e-15)
    assert res.sigma2_err <= 1e-6 * res.sigma2


def test_variance_scales_with_degeneracy():
    a = variance("hw", SystemParams(1.0, 1.0, 1.0)).value
    b = variance("hw", SystemParams(1.0, 1.0, 1.0, degeneracy=2.0)).value
    assert b == pytest.approx(a / 2, rel=1e-14)


def test_tolerance_changes_error_not_answer():
    p = SystemParams(1.0, 1.0, 1.0)
    loose = variance("glw", p, QuadratureConfig(rel_tol=1e-4))
    tight = variance("glw", p, QuadratureConfig(rel_tol=1e-10))
    assert loose.value == pytest.approx(tight.value, rel=1e-4)


@pytest.mark.parametrize("z", [0.05, 0.5, 1.0, 5.0, 20.0])
@pytest.mark.parametrize("a", [0.1, 0.5, 1.0, 2.0, 5.0, 10.0, 30.0])
def test_hw_variance_positive_on_grid(z, a):
    # positivity is not guaranteed analytically; this pins it on a wide grid
    res = variance("hw", SystemParams(z, 1.0, a))
    assert res.converged and res.value > 0
