# circle_quad.py
import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .config import CHUNK_SIZE, MAX_GRID, MIN_ADAPTIVE_GRID, QUAD_ABS_TOL, QUAD_REL_TOL
from .errors import DomainError, PreconditionError
from .inner_core import iterates_at

logger = logging.getLogger(__name__)

TWO_PI = 2.0 * math.pi


@dataclass(frozen=True)
class CircleGrid:
    M: int
    offset: float = 0.0

    @cached_property
    def points(self):
        j = np.arange(self.M, dtype=float)
        return np.exp(1j * (TWO_PI * j / self.M + self.offset))


@dataclass(frozen=True)
class MCSampler:
    seed: int
    count: int


@dataclass(frozen=True)
class QuadratureResult:
    value: complex
    M: int
    converged: bool
    error_estimate: float
    method: str = "grid"


def uniform_grid(M, offset=0.0):
    if M < 1:
        raise DomainError(f"grid needs at least one point, got M={M}")
    return CircleGrid(M=int(M), offset=float(offset) % TWO_PI)


def integrate(values):
    """Mean of the values; numpy's add.reduce sums contiguous arrays pairwise."""
    values = np.ascontiguousarray(values)
    if values.size == 0:
        raise PreconditionError("cannot integrate an empty list of values")
    return complex(np.sum(values) / values.size)


def _chunk_bounds(count, chunk_size=CHUNK_SIZE):
    return [(start, min(start + chunk_size, count)) for start in range(0, count, chunk_size)]


def _philox_uniforms(seed, chunk, size):
    bitgen = np.random.Philox(key=int(seed) & (2 ** 64 - 1), counter=[0, 0, 0, chunk])
    return np.random.Generator(bitgen).random(size)


def index_uniforms(seed, start, stop):
    """Uniforms for global indices start..stop-1 of the (seed, chunk)-keyed stream."""
    first, last = start // CHUNK_SIZE, (stop - 1) // CHUNK_SIZE
    flat = np.concatenate([_philox_uniforms(seed, c, CHUNK_SIZE) for c in range(first, last + 1)])
    base = first * CHUNK_SIZE
    return flat[start - base:stop - base]


def mc_points(sampler, threads=1):
    """Uniform i.i.d. circle points; point j depends only on (seed, j)."""
    if sampler.count < 1:
        raise DomainError(f"sampler count must be positive, got {sampler.count}")
    bounds = _chunk_bounds(sampler.count)

    def draw(item):
        chunk, (start, stop) = item
        return np.exp(1j * TWO_PI * _philox_uniforms(sampler.seed, chunk, stop - start))

    with ThreadPoolExecutor(max_workers=max(1, threads)) as pool:
        parts = list(pool.map(draw, enumerate(bounds)))
    return np.concatenate(parts)


def evaluate_chunked(integrand, points, threads=1):
    """Applies a vectorised integrand over fixed-size chunks of points.

    Chunk boundaries do not depend on `threads`, and the pieces are stitched
    back in chunk order, so the returned array is the same for any worker count.
    """
    points = np.asarray(points)
    bounds = _chunk_bounds(points.size)
    if threads <= 1 or len(bounds) == 1:
        parts = [integrand(points[start:stop]) for start, stop in bounds]
    else:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            parts = list(pool.map(lambda b: integrand(points[b[0]:b[1]]), bounds))
    return np.concatenate(parts)


def _check_signs(indices, signs):
    if len(indices) < 1:
        raise PreconditionError("a correlation needs at least one factor")
    if len(indices) != len(signs):
        raise PreconditionError("indices and signs must have the same length")
    if any(s not in (1, -1) for s in signs):
        raise PreconditionError("signs must be +1 or -1")
    if any(n < 1 for n in indices) or any(b <= a for a, b in zip(indices, indices[1:])):
        raise PreconditionError("indices must be strictly increasing positive integers")


def correlation_integrand(f, indices, signs):
    """z ↦ ∏ f^{ε_j n_j}(z), where f^{-n} is the conjugate of f^n."""
    _check_signs(indices, signs)

    def integrand(z):
        rows = iterates_at(f, z, indices)
        out = np.ones(rows.shape[1:], dtype=complex)
        for row, sign in zip(rows, signs):
            out = out * (row if sign == 1 else np.conj(row))
        return out

    return integrand


def correlation_integral(f, indices, signs, grid, threads=1):
    integrand = correlation_integrand(f, indices, signs)
    return integrate(evaluate_chunked(integrand, grid.points, threads))


def degree_bound(f, indices):
    return sum(f.degree ** int(n) for n in indices)


def _next_pow2(n):
    return 1 << max(0, int(n - 1).bit_length())


def adaptive_integrate(integrand, start_points, abs_tol=QUAD_ABS_TOL, rel_tol=QUAD_REL_TOL,
                       max_points=None, threads=1):
    """Equispaced rule refined by nested doubling until two levels agree.

    Each refinement evaluates only the new midpoints (the previous grid rotated
    by π/M) and averages with the previous mean.
    """
    max_points = max_points or MAX_GRID
    M = max(int(start_points), 1)
    if M > max_points:
        raise PreconditionError(f"starting grid {M} exceeds the grid cap {max_points}")
    value = integrate(evaluate_chunked(integrand, uniform_grid(M).points, threads))
    change = math.inf
    while 2 * M <= max_points:
        midpoints = uniform_grid(M, offset=math.pi / M).points
        refined = 0.5 * (value + integrate(evaluate_chunked(integrand, midpoints, threads)))
        change = abs(refined - value)
        value, M = refined, 2 * M
        if change <= max(abs_tol, rel_tol * abs(value)):
            return QuadratureResult(value=value, M=M, converged=True, error_estimate=change)
    logger.warning("quadrature did not converge before the grid cap (M=%d, last change %.3e)",
                   M, change)
    return QuadratureResult(value=value, M=M, converged=False, error_estimate=change)


def grid_integrate(f, integrand, bound, abs_tol=QUAD_ABS_TOL, rel_tol=QUAD_REL_TOL,
                   max_points=None, threads=1):
    """Integrates an integrand built from iterates of f.

    For monomial products the integrand is a trigonometric polynomial of degree
    at most `bound`, so bound + 1 points are exact. Otherwise the grid starts at
    the next power of two above the bound and refines adaptively.
    """
    max_points = max_points or MAX_GRID
    if f.is_monomial:
        M = bound + 1
        if M > max_points:
            raise PreconditionError(f"exact grid needs {M} points, above the cap {max_points}")
        value = integrate(evaluate_chunked(integrand, uniform_grid(M).points, threads))
        return QuadratureResult(value=value, M=M, converged=True, error_estimate=0.0, method="exact")
    start = max(MIN_ADAPTIVE_GRID, _next_pow2(bound + 1))
    return adaptive_integrate(integrand, start, abs_tol=abs_tol, rel_tol=rel_tol,
                              max_points=max_points, threads=threads)


def grid_affordable(f, bound, max_points=None):
    max_points = max_points or MAX_GRID
    if f.is_monomial:
        return bound + 1 <= max_points
    return 2 * max(MIN_ADAPTIVE_GRID, _next_pow2(bound + 1)) <= max_points


def mc_integrate(integrand, sampler, threads=1):
    """Monte Carlo mean with standard error (sample std / sqrt(count))."""
    values = evaluate_chunked(integrand, mc_points(sampler, threads), threads)
    mean = integrate(values)
    spread = math.sqrt(float(np.mean(np.abs(values - mean) ** 2)))
    stderr = spread / math.sqrt(values.size)
    return QuadratureResult(value=mean, M=values.size, converged=True,
                            error_estimate=stderr, method="mc")


def contour_mean(function, radius, M):
    """Mean of an analytic function over the circle of the given radius."""
    if not 0.0 < radius <= 1.0:
        raise DomainError(f"contour radius must lie in (0, 1], got {radius}")
    return integrate(function(radius * uniform_grid(M).points))
