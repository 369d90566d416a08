"""Deterministic adaptive quadrature for the radial and reduced variance integrals.

All integrators use tensor-product Gauss-Kronrod (7, 15) rules with a
largest-error-first worklist. Region sums are combined with :func:`math.fsum`,
so the reported value does not depend on the order in which regions were
refined.
"""
from __future__ import annotations

import dataclasses
import enum
import hashlib
import heapq
import json
import math
from typing import NamedTuple

import numpy as np


class NonConvergence(RuntimeError):
    """Raised when a quadrature cannot reach its tolerance within budget.

    The best available estimate is attached as ``result``.
    """

    def __init__(self, message, result=None):
        super().__init__(message)
        self.result = result


class AngularMode(str, enum.Enum):
    NUMERIC = "numeric"
    ANALYTIC_MOMENTS = "analytic"


@dataclasses.dataclass(frozen=True)
class QuadratureConfig:
    """Tolerances and budgets for every integral in the package.

    Parameters
    ----------
    rel_tol : float
        Target relative error of each integral.
    abs_tol : float
        Absolute error floor, only relevant for results close to zero.
    max_evals : int
        Budget of integrand evaluations per integral (one evaluation is one
        outer node, whatever the angular mode).
    cutoff_multiplier : float
        Momentum cutoff is ``(cutoff_multiplier + 30) * T``.
    angular_mode : AngularMode
        How the angular integral of the variance kernel is done.
    """

    rel_tol: float = 1e-6
    abs_tol: float = 0.0
    max_evals: int = 20_000_000
    cutoff_multiplier: float = 20.0
    angular_mode: AngularMode = AngularMode.ANALYTIC_MOMENTS

    def __post_init__(self):
        if not 1e-14 < self.rel_tol < 1e-2:
            raise ValueError(f"rel_tol must lie in (1e-14, 1e-2), got {self.rel_tol}")
        if self.abs_tol < 0:
            raise ValueError("abs_tol must be non-negative")
        if self.max_evals < 10_000:
            raise ValueError("max_evals must be at least 1e4")
        if self.cutoff_multiplier < 0:
            raise ValueError("cutoff_multiplier must be non-negative")
        object.__setattr__(self, "angular_mode", AngularMode(self.angular_mode))

    def k_max(self, temperature, mass=0.0):
        """Momentum cutoff where the kinetic energy omega - m reaches (c + 30) T.

        Measuring the cutoff from the rest energy keeps the relative tail
        bound independent of m/T; at m = 0 this is k_max = (c + 30) T.
        """
        reach = (self.cutoff_multiplier + 30.0) * temperature
        return math.sqrt(reach * (reach + 2.0 * mass))

    def digest(self):
        """Stable short hash of the configuration, for run records."""
        payload = dataclasses.asdict(self)
        payload["angular_mode"] = self.angular_mode.value
        blob = json.dumps(payload, sort_keys=True).encode()
        return hashlib.sha256(blob).hexdigest()[:16]


class QuadResult(NamedTuple):
    value: float
    error: float
    evaluations: int
    converged: bool
    tail: float = 0.0


# Gauss-Kronrod (7, 15) abscissae and weights, QUADPACK values.
_XGK = np.array([
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144845693013,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.000000000000000000000000000000000,
])
_WGK = np.array([
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
])
_WG = np.array([
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
])

NODES = np.concatenate([-_XGK[:-1], [0.0], _XGK[-2::-1]])
KRONROD = np.concatenate([_WGK[:-1], [_WGK[-1]], _WGK[-2::-1]])
GAUSS = np.zeros(15)
GAUSS[1::2] = np.concatenate([_WG[:-1], [_WG[-1]], _WG[-2::-1]])


class _Region(NamedTuple):
    lo: tuple
    hi: tuple
    value: float
    error: float
    split_dim: int


def _evaluate_regions(func, los, his):
    """Apply the tensor GK15 rule to a batch of boxes.

    Returns Kronrod estimates, error estimates and the preferred split axis.
    """
    los = np.asarray(los, dtype=float)
    his = np.asarray(his, dtype=float)
    nbox, dim = los.shape
    centre = 0.5 * (los + his)
    half = 0.5 * (his - los)
    # coords[b, d, i] = node i along axis d of box b
    coords = centre[:, :, None] + half[:, :, None] * NODES[None, None, :]
    if dim == 1:
        vals = func(coords[:, 0, :].reshape(-1)).reshape(nbox, 15)
        kk = vals @ KRONROD
        gg = vals @ GAUSS
        jac = half[:, 0]
        value = kk * jac
        error = np.abs(kk - gg) * jac
        return value, error, np.zeros(nbox, dtype=int)
    if dim != 2:
        raise ValueError("only 1D and 2D regions are supported")
    x = np.broadcast_to(coords[:, 0, :, None], (nbox, 15, 15))
    y = np.broadcast_to(coords[:, 1, None, :], (nbox, 15, 15))
    vals = func(x.reshape(-1), y.reshape(-1)).reshape(nbox, 15, 15)
    jac = half[:, 0] * half[:, 1]
    kk = np.einsum("bij,i,j->b", vals, KRONROD, KRONROD)
    gk = np.einsum("bij,i,j->b", vals, GAUSS, KRONROD)
    kg = np.einsum("bij,i,j->b", vals, KRONROD, GAUSS)
    gg = np.einsum("bij,i,j->b", vals, GAUSS, GAUSS)
    value = kk * jac
    error = np.abs(kk - gg) * jac
    split = np.where(np.abs(kk - gk) >= np.abs(kk - kg), 0, 1)
    return value, error, split


def adaptive_cubature(func, boxes, rel_tol, abs_tol=0.0, max_evals=10**7, batch=16):
    """Globally adaptive cubature over a union of 1D or 2D boxes.

    Parameters
    ----------
    func : callable
        Vectorised integrand. Called as ``func(x)`` in 1D and ``func(x, y)``
        in 2D with flat arrays of nodes.
    boxes : sequence of (lo, hi)
        Disjoint boxes; ``lo`` and ``hi`` are tuples of equal length.
    rel_tol, abs_tol : float
        Stop when the summed error estimate is below
        ``max(rel_tol * |I|, abs_tol)``.
    max_evals : int
        Evaluation budget.
    batch : int
        Number of worst regions bisected per sweep.

    Returns
    -------
    QuadResult
    """
    boxes = [(tuple(map(float, lo)), tuple(map(float, hi))) for lo, hi in boxes]
    dim = len(boxes[0][0])
    per_box = 15**dim
    value, error, split = _evaluate_regions(func, [b[0] for b in boxes], [b[1] for b in boxes])
    regions = {}
    heap = []
    counter = 0
    for (lo, hi), v, e, s in zip(boxes, value, error, split):
        regions[counter] = _Region(lo, hi, float(v), float(e), int(s))
        heapq.heappush(heap, (-float(e), counter))
        counter += 1
    evals = per_box * len(boxes)

    def totals():
        vals = [r.value for r in regions.values()]
        errs = [r.error for r in regions.values()]
        return math.fsum(vals), math.fsum(errs)

    total, total_err = totals()
    while total_err > max(rel_tol * abs(total), abs_tol):
        if evals >= max_evals or not np.isfinite(total_err):
            return QuadResult(total, total_err, evals, False)
        take = min(batch, len(heap))
        parents = [regions.pop(heapq.heappop(heap)[1]) for _ in range(take)]
        los, his = [], []
        for reg in parents:
            d = reg.split_dim
            mid = 0.5 * (reg.lo[d] + reg.hi[d])
            left_hi = reg.hi[:d] + (mid,) + reg.hi[d + 1:]
            right_lo = reg.lo[:d] + (mid,) + reg.lo[d + 1:]
            los += [reg.lo, right_lo]
            his += [left_hi, reg.hi]
        value, error, split = _evaluate_regions(func, los, his)
        evals += per_box * len(los)
        for lo, hi, v, e, s in zip(los, his, value, error, split):
            regions[counter] = _Region(lo, hi, float(v), float(e), int(s))
            heapq.heappush(heap, (-float(e), counter))
            counter += 1
        total, total_err = totals()
    return QuadResult(total, total_err, evals, True)


def _initial_panels(lo, hi, n):
    edges = np.linspace(lo, hi, n + 1)
    return [((float(a),), (float(b),)) for a, b in zip(edges[:-1], edges[1:])]


def integrate_radial(integrand, cfg=None, k_max=None, temperature=1.0, tail_check=True, mass=0.0):
    """Integrate a function of one momentum variable over ``[0, inf)``.

    The half line is truncated at ``k_max`` (by default ``cfg.k_max(T)``);
    one extra GK pass over ``[k_max, 2 k_max]`` measures the discarded tail.

    Parameters
    ----------
    integrand : callable
        Vectorised function of the momentum.
    cfg : QuadratureConfig, optional
    k_max : float, optional
        Explicit cutoff; overrides the config policy.
    temperature, mass : float
        Thermal scale and rest mass used by the default cutoff policy.

    Returns
    -------
    QuadResult
        ``converged`` is False if the tolerance was not met or the tail
        exceeds a tenth of the tolerance.
    """
    cfg = cfg or QuadratureConfig()
    kmax = cfg.k_max(temperature, mass) if k_max is None else float(k_max)
    res = adaptive_cubature(integrand, _initial_panels(0.0, kmax, 8), cfg.rel_tol,
                            cfg.abs_tol, cfg.max_evals)
    tail = 0.0
    converged = res.converged
    if tail_check:
        tv, _, _ = _evaluate_regions(integrand, [(kmax,)], [(2.0 * kmax,)])
        tail = float(tv[0])
        if abs(tail) > max(0.1 * cfg.rel_tol * abs(res.value), cfg.abs_tol):
            converged = False
    return QuadResult(res.value, res.error, res.evaluations + 15 * tail_check, converged, tail)


def angular_moments_scaled(c, n_max=3):
    """Scaled angular moments ``exp(-c) * int_{-1}^{1} u**n exp(c u) du``.

    Parameters
    ----------
    c : float or ndarray
        Non-negative exponent scale.
    n_max : int
        Highest moment, at most 3.

    Returns
    -------
    ndarray
        Shape ``(n_max + 1,) + shape(c)``.

    Notes
    -----
    For ``c >= 2`` the upward integration-by-parts recurrence is used, which
    is stable there because the amplification factor ``n / c`` stays below
    one. Below that a power series with positive terms is summed instead;
    the recurrence would lose about ``n * log10(1/c)`` digits.
    """
    if n_max not in (0, 1, 2, 3):
        raise ValueError("n_max must be 0, 1, 2 or 3")
    c = np.asarray(c, dtype=float)
    if np.any(c < 0):
        raise ValueError("c must be non-negative")
    out = np.empty((n_max + 1,) + c.shape)
    small = c < 2.0
    large = ~small

    if np.any(small):
        cs = c[small]
        acc = np.zeros((n_max + 1,) + cs.shape)
        term = np.ones_like(cs)
        for j in range(40):
            for n in range(n_max + 1):
                if (n + j) % 2 == 0:
                    acc[n] += term * (2.0 / (n + j + 1))
            term = term * cs / (j + 1)
        out[:, small] = acc * np.exp(-cs)

    if np.any(large):
        cl = c[large]
        e2 = np.exp(-2.0 * cl)
        prev = -np.expm1(-2.0 * cl) / cl
        out[0, large] = prev
        for n in range(1, n_max + 1):
            sign = -1.0 if n % 2 else 1.0
            prev = (1.0 - sign * e2) / cl - n * prev / cl
            out[n, large] = prev
    return out


# Panel edges for the numeric angular rule, in units of 1/c from each endpoint.
_ANGULAR_STEPS = np.array([0.0, 0.5, 1.5, 3.5, 7.5, 15.5, 31.5, 63.5])
_GL_X, _GL_W = np.polynomial.legendre.leggauss(16)


def angular_rule(c):
    """Composite Gauss-Legendre nodes on ``[-1, 1]`` graded towards both ends.

    The grading follows the width ``1/c`` of the peaks of ``exp(-c (1 -+ u))``.

    Parameters
    ----------
    c : ndarray
        Exponent scale per outer node.

    Returns
    -------
    u, w : ndarray
        Nodes and weights, shape ``shape(c) + (npanel * 16,)``.
    """
    c = np.asarray(c, dtype=float)[..., None]
    with np.errstate(divide="ignore", invalid="ignore"):
        s = np.minimum(1.0, np.where(c > 0, _ANGULAR_STEPS / c, 1.0))
    s[..., 0] = 0.0
    lower_a, lower_b = -1.0 + s[..., :-1], -1.0 + s[..., 1:]
    upper_a, upper_b = 1.0 - s[..., 1:], 1.0 - s[..., :-1]
    mid_a, mid_b = -1.0 + s[..., -1:], 1.0 - s[..., -1:]
    a = np.concatenate([lower_a, mid_a, upper_a], axis=-1)
    b = np.concatenate([lower_b, np.maximum(mid_a, mid_b), upper_b], axis=-1)
    half = 0.5 * (b - a)
    centre = 0.5 * (b + a)
    u = centre[..., :, None] + half[..., :, None] * _GL_X
    w = half[..., :, None] * _GL_W
    shape = u.shape[:-2] + (-1,)
    return u.reshape(shape), w.reshape(shape)


def _band_boxes(k_max, band):
    """Boxes in (k, t) covering {0 <= k <= k_max, -band <= k - k' <= min(band, k)}.

    For ``k < band`` the offset is mapped as ``d = -band + t (k + band)`` with
    ``t`` in [0, 1]; for ``k >= band`` the box is the plain strip in ``d``.
    """
    lo_split = min(band, k_max)
    inner = [((a, 0.0), (b, 1.0)) for a, b in
             zip(np.linspace(0.0, lo_split, 5)[:-1], np.linspace(0.0, lo_split, 5)[1:])]
    outer = []
    if k_max > band:
        edges = np.linspace(band, k_max, 9)
        outer = [((a, -band), (b, band)) for a, b in zip(edges[:-1], edges[1:])]
    return inner, outer


def _outer_integrand(kernel, mode):
    """Return h(k, k') = int du W(k, k', u) for the requested angular mode."""
    if mode is AngularMode.ANALYTIC_MOMENTS:
        def h(k, kp):
            common, plus, minus = kernel.u_coefficients(k, kp)
            mom = angular_moments_scaled(kernel.angular_scale(k, kp))
            signs = np.array([1.0, -1.0, 1.0, -1.0])[:, None]
            return common * (np.sum(plus * mom, axis=0) - np.sum(minus * signs * mom, axis=0))
        return h

    def h(k, kp):
        out = np.empty_like(k)
        # chunk to bound memory: 16 panels x 16 nodes per outer node
        step = 4096
        for i in range(0, k.size, step):
            ks, kps = k[i:i + step], kp[i:i + step]
            u, w = angular_rule(kernel.angular_scale(ks, kps))
            vals = kernel.weight(ks[:, None], kps[:, None], u)
            out[i:i + step] = np.sum(vals * w, axis=-1)
        return out
    return h


def integrate_variance_3d(kernel, params=None, cfg=None, *, k_max=None, kp_max=None):
    """Integrate a reduced variance kernel over k, k' >= 0 and u in [-1, 1].

    Parameters
    ----------
    kernel : VarianceKernel or callable
        A :class:`pgfluct.kernels.VarianceKernel` is integrated over the
        diagonal band ``|k - k'| <= 12 / a`` in which its Gaussian smearing
        factors are non-negligible. A plain callable ``W(k, k', u)`` is
        integrated over the rectangle ``[0, k_max] x [0, kp_max]`` with the
        numeric angular rule.
    params : SystemParams, optional
        Needed for band kernels (temperature sets the cutoff).
    cfg : QuadratureConfig, optional
    k_max, kp_max : float, optional
        Explicit cutoffs.

    Returns
    -------
    QuadResult
    """
    cfg = cfg or QuadratureConfig()
    if callable(kernel) and not hasattr(kernel, "u_coefficients"):
        kmax = 1.0 if k_max is None else float(k_max)
        kpmax = kmax if kp_max is None else float(kp_max)

        def h(k, kp):
            u, w = angular_rule(np.zeros_like(k))
            return np.sum(kernel(k[:, None], kp[:, None], u) * w, axis=-1)

        edges_k = np.linspace(0.0, kmax, 3)
        edges_kp = np.linspace(0.0, kpmax, 3)
        boxes = [((a, c), (b, d)) for a, b in zip(edges_k[:-1], edges_k[1:])
                 for c, d in zip(edges_kp[:-1], edges_kp[1:])]
        return adaptive_cubature(h, boxes, cfg.rel_tol, cfg.abs_tol, cfg.max_evals)

    kmax = cfg.k_max(params.temperature, params.mass) if k_max is None else float(k_max)
    band = 12.0 / params.radius_a
    h = _outer_integrand(kernel, cfg.angular_mode)

    def inner(k, t):
        span = k + band
        kp = k - (-band + t * span)
        return h(k, kp) * span

    def outer(k, d):
        return h(k, k - d)

    inner_boxes, outer_boxes = _band_boxes(kmax, band)
    # both pieces share one worklist through a combined 2D map: the inner
    # piece lives at k < band with t in [0, 1], the outer one at k >= band.
    def combined(k, y):
        out = np.empty_like(k)
        m = k < band
        if np.any(m):
            out[m] = inner(k[m], y[m])
        if np.any(~m):
            out[~m] = outer(k[~m], y[~m])
        return out

    res = adaptive_cubature(combined, inner_boxes + outer_boxes, cfg.rel_tol,
                            cfg.abs_tol, cfg.max_evals)
    tail_v, _, _ = _evaluate_regions(outer, [(kmax, -band)], [(2.0 * kmax, min(band, kmax))])
    tail = float(tail_v[0])
    converged = res.converged and abs(tail) <= max(0.1 * cfg.rel_tol * abs(res.value), cfg.abs_tol)
    return QuadResult(res.value, res.error, res.evaluations + 225, converged, tail)
