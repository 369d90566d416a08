import math

import mpmath
import numpy as np
import pytest

from pgfluct import (NonConvergence, QuadratureConfig, SystemParams, angular_moments_scaled,
                     energy_density, integrate_radial, integrate_variance_3d)
from pgfluct.kernels import VarianceKernel
from pgfluct.quadrature import adaptive_cubature, angular_rule


@pytest.mark.parametrize("func,exact,kmax", [
    (lambda k: k**3 / (np.exp(k) + 1), 7 * math.pi**4 / 120, 60.0),
    (lambda k: np.exp(-k * k), math.sqrt(math.pi) / 2, 40.0),
    (lambda k: k * k * np.exp(-k), 2.0, 100.0),
])
def test_radial_known_integrals(func, exact, kmax):
    res = integrate_radial(func, QuadratureConfig(rel_tol=1e-12), k_max=kmax)
    assert res.converged
    assert res.value == pytest.approx(exact, rel=1e-11)


def test_radial_error_estimate_is_honest():
    res = integrate_radial(lambda k: k**3 / (np.exp(k) + 1), QuadratureConfig(rel_tol=1e-6))
    assert abs(res.value - 7 * math.pi**4 / 120) <= max(res.error, 1e-15)


def test_radial_tail_flag():
    # a heavy tail that the cutoff discards must not be reported as converged
    res = integrate_radial(lambda k: 1 / (1 + k) ** 2, QuadratureConfig(), k_max=10.0)
    assert not res.converged and res.tail > 0


def test_cubature_2d_product():
    res = adaptive_cubature(lambda x, y: np.exp(-x) * np.cos(y), [((0, 0), (5, 1))], 1e-12)
    assert res.value == pytest.approx((1 - math.exp(-5)) * math.sin(1), rel=1e-12)


def test_3d_constant_kernel():
    res = integrate_variance_3d(lambda k, kp, u: np.ones_like(k * kp * u), k_max=1.0)
    assert res.value == pytest.approx(2.0, rel=1e-12)


def test_3d_separable_kernel():
    res = integrate_variance_3d(lambda k, kp, u: np.exp(-k) * np.exp(-kp) * u * u,
                                QuadratureConfig(rel_tol=1e-10), k_max=50.0)
    assert res.value == pytest.approx(2.0 / 3.0, rel=1e-9)


@pytest.mark.parametrize("c", [0.0, 1e-6, 1e-3, 0.5, 1.0, 1.999, 2.0, 10.0, 1e4])
def test_angular_moments_against_mpmath(c):
    got = angular_moments_scaled(c)
    mpmath.mp.dps = 40
    for n in range(4):
        exact = mpmath.quad(lambda u: u**n * mpmath.exp(c * (u - 1)), [-1, 0, 1])
        assert got[n] == pytest.approx(float(exact), rel=1e-14, abs=1e-300)


def test_angular_moments_vectorised_and_validated():
    c = np.array([[0.1, 3.0], [50.0, 0.0]])
    assert angular_moments_scaled(c).shape == (4, 2, 2)
    with pytest.raises(ValueError):
        angular_moments_scaled(-1.0)
    with pytest.raises(ValueError):
        angular_moments_scaled(1.0, n_max=4)


@pytest.mark.parametrize("c", [0.0, 1.0, 30.0, 1e3])
def test_angular_rule_integrates_exponential(c):
    u, w = angular_rule(np.array([c]))
    got = np.sum(np.exp(c * (u - 1)) * w)
    assert got == pytest.approx(angular_moments_scaled(c, 0)[0], rel=1e-13)


def test_variance_is_deterministic():
    kern = VarianceKernel("hw", SystemParams(1.0, 1.0, 1.0))
    p = SystemParams(1.0, 1.0, 1.0)
    assert integrate_variance_3d(kern, p) == integrate_variance_3d(kern, p)


def test_variance_cutoff_doubling_is_stable():
    p = SystemParams(1.0, 1.0, 1.0)
    kern = VarianceKernel("can", p)
    cfg = QuadratureConfig(rel_tol=1e-9)
    a = integrate_variance_3d(kern, p, cfg)
    b = integrate_variance_3d(kern, p, QuadratureConfig(rel_tol=1e-9, cutoff_multiplier=70))
    assert a.converged and b.converged
    assert a.value == pytest.approx(b.value, rel=1e-8)


def test_variance_error_estimate_is_honest():
    p = SystemParams(1.0, 1.0, 2.0)
    kern = VarianceKernel("glw", p)
    rough = integrate_variance_3d(kern, p, QuadratureConfig(rel_tol=1e-4))
    ref = integrate_variance_3d(kern, p, QuadratureConfig(rel_tol=1e-11)).value
    assert abs(rough.value - ref) <= rough.error


def test_budget_exhaustion_is_reported():
    res = adaptive_cubature(lambda x: np.sqrt(np.abs(x - 0.3)), [((0.0,), (1.0,))], 1e-13,
                            max_evals=10_000)
    assert not res.converged and res.evaluations >= 10_000


def test_variance_budget_exhaustion_is_reported():
    p = SystemParams(1.0, 1.0, 1.0)
    res = integrate_variance_3d(VarianceKernel("can", p), p,
                                QuadratureConfig(rel_tol=1e-12, max_evals=10_000))
    assert not res.converged


def test_energy_density_strict_raises(monkeypatch):
    import pgfluct.core as core
    from pgfluct.quadrature import QuadResult
    monkeypatch.setattr(core, "integrate_radial", lambda *a, **k: QuadResult(1.0, 1.0, 10, False))
    with pytest.raises(NonConvergence) as info:
        energy_density(SystemParams(1.0, 1.0))
    assert not info.value.result.converged
    assert not energy_density(SystemParams(1.0, 1.0), strict=False).converged


@pytest.mark.parametrize("kwargs", [dict(rel_tol=0.1), dict(rel_tol=1e-16), dict(max_evals=10),
                                    dict(abs_tol=-1.0)])
def test_config_validation(kwargs):
    with pytest.raises(ValueError):
        QuadratureConfig(**kwargs)


def test_config_digest_tracks_settings():
    assert QuadratureConfig().digest() == QuadratureConfig().digest()
    assert QuadratureConfig().digest() != QuadratureConfig(rel_tol=1e-8).digest()
