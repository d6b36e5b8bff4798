"""Numerical plumbing: adaptive quadrature, Gaussian averages, seeded draws, fits."""
from __future__ import annotations

import heapq
import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError, QuadratureError

__all__ = [
    "QuadratureOptions",
    "FitResult",
    "adaptive_quadrature",
    "gaussian_expectation",
    "GaussianStream",
    "gaussian_sampler",
    "normal_cdf",
    "loglog_slope_fit",
    "plateau_crossover",
]

# 7-point Gauss / 15-point Kronrod nodes and weights on [-1, 1]
_XK = np.array([
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144845693013,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.000000000000000000000000000000000,
])
_WK = np.array([
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
_NODES = np.concatenate([-_XK[:-1], _XK[::-1]])
_EPS = np.finfo(float).eps


@dataclass(frozen=True)
class QuadratureOptions:
    abs_tol: float = 1e-13
    rel_tol: float = 1e-12
    max_subdivisions: int = 2000
    tail_mass_tol: float = 1e-12

    def __post_init__(self):
        if not (self.abs_tol > 0 and self.rel_tol > 0 and self.tail_mass_tol > 0):
            raise DomainError("quadrature tolerances must be positive")
        if self.max_subdivisions < 8:
            raise DomainError("max_subdivisions must be at least 8")


@dataclass(frozen=True)
class FitResult:
    slope: float
    intercept: float
    r_squared: float

    def predict(self, x):
        """Power law ``exp(intercept) * x**slope``."""
        return math.exp(self.intercept) * np.asarray(x, dtype=float) ** self.slope


def _evaluate(f, x, vectorized):
    if vectorized:
        y = np.asarray(f(x), dtype=float)
        if y.shape != x.shape:
            y = np.broadcast_to(y, x.shape)
    else:
        y = np.fromiter((f(float(t)) for t in x), dtype=float, count=x.size)
    if not np.all(np.isfinite(y)):
        raise QuadratureError("integrand returned a non-finite value")
    return y


def _gk15(f, a, b, vectorized):
    centre = 0.5 * (a + b)
    half = 0.5 * (b - a)
    y = _evaluate(f, centre + half * _NODES, vectorized)
    # y is ordered -x_0 .. -x_6, 0, x_6 .. x_0
    left = y[:7]
    right = y[8:][::-1]
    mid = y[7]
    pair = left + right
    kronrod = half * (np.dot(_WK[:-1], pair) + _WK[-1] * mid)
    gauss = half * (np.dot(_WG[:-1], pair[1::2]) + _WG[-1] * mid)
    absval = abs(half) * (np.dot(_WK[:-1], np.abs(left) + np.abs(right)) + _WK[-1] * abs(mid))
    err = max(abs(kronrod - gauss), 50.0 * _EPS * absval)
    return float(kronrod), float(err)


def adaptive_quadrature(f, a: float, b: float, opts: QuadratureOptions | None = None,
                        vectorized: bool = False) -> tuple[float, float]:
    """Globally adaptive Gauss-Kronrod (7/15) integration of ``f`` over ``[a, b]``.

    The interval with the largest error estimate is bisected until the summed
    estimate drops below ``max(abs_tol, rel_tol * |value|)``.

    Parameters
    ----------
    f : callable
        Integrand. With ``vectorized=True`` it receives a numpy array of nodes.
    a, b : float
        Finite limits with ``a < b``.

    Returns
    -------
    (value, error_bound)

    Raises
    ------
    QuadratureError
        If the target is not reached within ``opts.max_subdivisions`` intervals.
    """
    opts = opts or QuadratureOptions()
    a = float(a)
    b = float(b)
    if not (math.isfinite(a) and math.isfinite(b)):
        raise DomainError("adaptive_quadrature needs finite limits")
    if not a < b:
        raise DomainError(f"need a < b, got a={a!r}, b={b!r}")

    value, err = _gk15(f, a, b, vectorized)
    heap = [(-err, a, b, value)]
    total, total_err = value, err
    count = 1
    while total_err > max(opts.abs_tol, opts.rel_tol * abs(total)):
        if count >= opts.max_subdivisions:
            raise QuadratureError(
                f"no convergence on [{a}, {b}] after {count} subdivisions "
                f"(estimate {total!r}, error {total_err:.3g})")
        neg_err, lo, hi, v = heapq.heappop(heap)
        mid = 0.5 * (lo + hi)
        if not lo < mid < hi:
            # interval below floating-point resolution: stop with an honest estimate
            heapq.heappush(heap, (neg_err, lo, hi, v))
            break
        v1, e1 = _gk15(f, lo, mid, vectorized)
        v2, e2 = _gk15(f, mid, hi, vectorized)
        heapq.heappush(heap, (-e1, lo, mid, v1))
        heapq.heappush(heap, (-e2, mid, hi, v2))
        count += 1
        total += v1 + v2 - v
        total_err += e1 + e2 + neg_err
    total = math.fsum(item[3] for item in heap)
    total_err = math.fsum(-item[0] for item in heap)
    return total, total_err


def normal_cdf(z: float) -> float:
    return 0.5 * math.erfc(-z / math.sqrt(2.0))


def gaussian_expectation(g, mean: float, variance: float, lower_cutoff: float = -math.inf,
                         opts: QuadratureOptions | None = None,
                         vectorized: bool = False) -> tuple[float, float, float]:
    """``int_{lower_cutoff}^inf g(x) N(x; mean, variance) dx``.

    The core ``mean +- 8 sigma`` is integrated first; the infinite ends are then
    extended by doubling in units of sigma until the Gaussian mass beyond the
    current limit, weighted by ``|g|`` there, is below ``opts.tail_mass_tol``.

    Returns
    -------
    (value, error_bound, truncated_mass)
        ``truncated_mass`` is the normal probability below ``lower_cutoff``.
    """
    opts = opts or QuadratureOptions()
    if not variance > 0:
        raise DomainError(f"variance must be positive, got {variance!r}")
    sigma = math.sqrt(variance)
    norm = 1.0 / (sigma * math.sqrt(2.0 * math.pi))

    if vectorized:
        def weighted(x):
            return np.asarray(g(x), dtype=float) * norm * np.exp(-0.5 * ((x - mean) / sigma) ** 2)
    else:
        def weighted(x):
            return g(x) * norm * math.exp(-0.5 * ((x - mean) / sigma) ** 2)

    truncated = normal_cdf((lower_cutoff - mean) / sigma) if math.isfinite(lower_cutoff) else 0.0

    def gmag(x):
        return abs(float(np.asarray(g(np.array([x])) if vectorized else g(x)).ravel()[0]))

    # breakpoints of the core region, clipped to the cutoff
    core = [mean - 8 * sigma, mean, mean + 8 * sigma]
    points = [p for p in core if p > lower_cutoff]
    start = lower_cutoff if math.isfinite(lower_cutoff) else None
    if start is not None:
        points = [start] + (points or [start + 8 * sigma])

    value = 0.0
    err = 0.0
    for lo, hi in zip(points[:-1], points[1:]):
        v, e = adaptive_quadrature(weighted, lo, hi, opts, vectorized)
        value += v
        err += e

    # upper tail: widen by doubling until the neglected mass is negligible
    upper = points[-1]
    while normal_cdf(-(upper - mean) / sigma) * max(1.0, gmag(upper)) > opts.tail_mass_tol:
        nxt = mean + 2.0 * (upper - mean)
        v, e = adaptive_quadrature(weighted, upper, nxt, opts, vectorized)
        value += v
        err += e
        upper = nxt

    if start is None:
        lower = points[0]
        while normal_cdf((lower - mean) / sigma) * max(1.0, gmag(lower)) > opts.tail_mass_tol:
            nxt = mean - 2.0 * (mean - lower)
            v, e = adaptive_quadrature(weighted, nxt, lower, opts, vectorized)
            value += v
            err += e
            lower = nxt
    return value, err, truncated


_BLOCK = 4096


class GaussianStream:
    """Counter-based stream of normal draws.

    Draw ``i`` depends only on ``(seed, key, i)``: draws are generated in blocks
    of 4096 and block ``b`` is seeded from ``SeedSequence(seed, spawn_key=key + (b,))``.
    Any consumer can therefore read any index range independently, and
    distinct ``key`` tuples give independent streams under one base seed.
    """

    def __init__(self, seed: int, mean: float = 0.0, variance: float = 1.0, key: tuple = ()):
        if not variance >= 0:
            raise DomainError(f"variance must be non-negative, got {variance!r}")
        self.seed = int(seed)
        self.key = tuple(int(k) for k in key)
        self.mean = float(mean)
        self.variance = float(variance)
        self._sigma = math.sqrt(self.variance)
        self._pos = 0

    def _block(self, b: int) -> np.ndarray:
        ss = np.random.SeedSequence(self.seed, spawn_key=self.key + (b,))
        return np.random.Generator(np.random.PCG64(ss)).standard_normal(_BLOCK)

    def standard(self, start: int, n: int) -> np.ndarray:
        """Standard-normal draws ``start .. start+n-1``."""
        if n <= 0:
            return np.empty(0)
        first = start // _BLOCK
        last = (start + n - 1) // _BLOCK
        z = np.concatenate([self._block(b) for b in range(first, last + 1)])
        off = start - first * _BLOCK
        return z[off:off + n]

    def draws(self, start: int, n: int) -> np.ndarray:
        if self.variance == 0.0:
            return np.full(n, self.mean)
        return self.mean + self._sigma * self.standard(start, n)

    def take(self, n: int) -> np.ndarray:
        """Next ``n`` draws of the sequential view of the stream."""
        out = self.draws(self._pos, n)
        self._pos += n
        return out

    def __iter__(self):
        while True:
            yield from self.take(_BLOCK)


def gaussian_sampler(seed: int, mean: float = 0.0, variance: float = 1.0,
                     key: tuple = ()) -> GaussianStream:
    return GaussianStream(seed, mean, variance, key)


def loglog_slope_fit(points) -> FitResult:
    """Ordinary least squares of ``log f`` against ``log T``."""
    pts = np.asarray(points, dtype=float)
    if pts.ndim != 2 or pts.shape[1] != 2:
        raise DomainError("points must be a sequence of (T, f) pairs")
    if len(pts) < 3:
        raise DomainError("need at least 3 points for a fit")
    if np.any(pts <= 0) or not np.all(np.isfinite(pts)):
        raise DomainError("log-log fit requires positive finite coordinates")
    x = np.log(pts[:, 0])
    y = np.log(pts[:, 1])
    xm, ym = x.mean(), y.mean()
    sxx = np.sum((x - xm) ** 2)
    if sxx == 0:
        raise DomainError("abscissae are all equal")
    slope = float(np.sum((x - xm) * (y - ym)) / sxx)
    intercept = float(ym - slope * xm)
    ss_tot = float(np.sum((y - ym) ** 2))
    ss_res = float(np.sum((y - (intercept + slope * x)) ** 2))
    r2 = 1.0 if ss_tot == 0.0 else min(1.0, max(0.0, 1.0 - ss_res / ss_tot))
    return FitResult(slope, intercept, r2)


def plateau_crossover(fit: FitResult, plateau: float) -> float:
    """Abscissa where the fitted power law meets a constant ``plateau``."""
    if fit.slope == 0:
        raise DomainError("a flat fit never crosses a plateau")
    return math.exp((math.log(plateau) - fit.intercept) / fit.slope)
