"""
Energy density of a hot spin-1/2 gas
====================================

The energy density does not care which pseudo-gauge is used. Here it is
checked against two closed forms: the massless Fermi integral and the
alternating Bessel series.
"""
import math

import numpy as np

from pgfluct import QuadratureConfig, SystemParams, energy_density
from pgfluct.oracle import epsilon_bessel_series, epsilon_massless

cfg = QuadratureConfig(rel_tol=1e-12)

# massless gas: eps = 7 pi^2 T^4 / 60 for g = 4
p0 = SystemParams(mass=0.0, temperature=1.0)
print(f"m = 0      quadrature {energy_density(p0, cfg).value:.15f}"
      f"   closed form {epsilon_massless(p0):.15f}")

# massive gas against the Bessel series
for z in (0.5, 1.0, 2.0, 5.0):
    p = SystemParams(mass=z, temperature=1.0)
    q = energy_density(p, cfg).value
    b = epsilon_bessel_series(p)
    print(f"m/T = {z:<4} quadrature {q:.15f}   Bessel {b:.15f}   rel diff {abs(q / b - 1):.1e}")

# eps / T^4 is a function of m/T only
T = np.array([0.5, 1.0, 2.0])
ratios = [energy_density(SystemParams(t, t), cfg).value / t**4 for t in T]
print("eps/T^4 at m/T = 1 for T =", T, "->", np.round(ratios, 14))

# heavy particles are Boltzmann suppressed like exp(-m/T)
for z in (5, 10, 20):
    eps = energy_density(SystemParams(float(z), 1.0), cfg).value
    print(f"m/T = {z:<3} eps = {eps:.3e}   eps * exp(m/T) / (m/T)^2.5 = "
          f"{eps * math.exp(z) / z**2.5:.4f}")
print(f"Boltzmann limit g sqrt(pi/2) / (2 pi^2) = {4 * math.sqrt(math.pi / 2) / (2 * math.pi**2):.4f}")
