"""
Reduced kernels against independent oracles
============================================

The variance is evaluated from a three-dimensional reduced integrand in
(k, k', u). Three independent routes check it:

* the bracket written with explicit 3-vectors,
* a finite periodic box where momentum integrals become mode sums,
* two ways of doing the angular integral.
"""
import time
import warnings

import numpy as np

from pgfluct import AngularMode, QuadratureConfig, SystemParams, variance
from pgfluct.kernels import VarianceKernel
from pgfluct.oracle import LatticeResolutionWarning, LatticeSpec, bracket_transcription, \
    variance_lattice_sum

p = SystemParams(mass=1.0, temperature=1.0, radius_a=1.0)

# the reduced bracket against the vector transcription
k, kp, u = 1.3, 0.8, -0.4
kvec = np.array([k, 0.0, 0.0])
kpvec = kp * np.array([u, np.sqrt(1 - u * u), 0.0])
for g in ("can", "glw", "hw"):
    reduced = VarianceKernel(g, p).bracket(k, kp, u)
    vector = bracket_transcription(g, kvec, kpvec, p)
    print(f"{g:>4}: reduced {reduced:.16e}  vector {vector:.16e}")

# at k' = k, u = 1 every gauge gives 16 omega^4
kern = VarianceKernel("hw", p)
w = np.hypot(2.0, 1.0)
print("\nprefactor * P+ / (16 omega^4) =",
      kern.prefactor * kern.direct_poly(2.0, 2.0, 1.0) / (16 * w**4))

# numeric angular quadrature vs closed-form angular moments
# (same outer (k, k') nodes; only the u integral differs)
print()
for g in ("can", "glw", "hw"):
    out = {}
    for mode in (AngularMode.NUMERIC, AngularMode.ANALYTIC_MOMENTS):
        t0 = time.perf_counter()
        out[mode] = (variance(g, p, QuadratureConfig(angular_mode=mode)).value,
                     time.perf_counter() - t0)
    (num, tn), (ana, ta) = out.values()
    print(f"{g:>4}: numeric {num:.12e} ({tn:.2f}s)   analytic {ana:.12e} ({ta:.2f}s)")

# a finite box converges to the continuum result as the box grows
ref = variance("can", p, QuadratureConfig(rel_tol=1e-10)).value
print(f"\ncontinuum  {ref:.12e}")
with warnings.catch_warnings():
    warnings.simplefilter("ignore", LatticeResolutionWarning)
    for L in (4.0, 8.0, 12.0):
        spec = LatticeSpec.for_params(p, L)
        box = variance_lattice_sum("can", p, spec)
        side = 2 * spec.n_max + 1
        print(f"L = {L:<5} {box:.12e}   rel dev {abs(box / ref - 1):.2e}   ({side}^3 modes)")
