# correlations.py
import itertools
import logging
import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from .circle_quad import (MCSampler, QuadratureResult, adaptive_integrate, contour_mean,
                          evaluate_chunked, grid_affordable, grid_integrate, integrate,
                          mc_integrate, mc_points, uniform_grid)
from .config import (ABS_TOL, COV_TOL, DECAY_SLOPE_MARGIN, Q_MIN, REL_TOL, UNDERFLOW)
from .errors import DomainError, PreconditionError
from .inner_core import (apply, boundary_step, iterates_at, orbit_sum, require_not_rotation,
                         series_divide)
from .sequences import energy, kappa, sigma2

logger = logging.getLogger(__name__)

METHODS = ("auto", "grid", "mc", "disintegration")
MAX_DISINTEGRATION_ORDER = 64
MAX_EXPANDED_TERMS = 1 << 16
DEFAULT_MC_COUNT = 1 << 18
GRAM_MAX_N = 64
GRAM_RADIUS = 0.5
GRAM_NODES = 64
NORM_T_VALUES = (1.0, 1j, (1 + 1j) / math.sqrt(2.0))


@dataclass(frozen=True)
class CorrelationReport:
    description: str
    lhs: complex
    rhs: complex
    residual: float
    passed: bool
    tolerance: float
    relative: bool = False
    details: dict = field(default_factory=dict)


def _report(description, lhs, rhs, tolerance, relative=False, details=None):
    residual = abs(complex(lhs) - complex(rhs))
    limit = tolerance * abs(complex(rhs)) if relative else tolerance
    return CorrelationReport(description=description, lhs=complex(lhs), rhs=complex(rhs),
                             residual=residual, passed=residual <= limit, tolerance=tolerance,
                             relative=relative, details=details or {})


def _merge(indices, exponents):
    """Sorted (index, exponent) pairs with equal indices combined and zero exponents dropped.

    On the circle conj(fⁿ) = (fⁿ)^{-1}, so exponents of a repeated index add.
    """
    merged = {}
    for n, e in zip(indices, exponents):
        if n < 1:
            raise PreconditionError(f"iterate indices must be positive, got {n}")
        merged[int(n)] = merged.get(int(n), 0) + int(e)
    return [(n, e) for n, e in sorted(merged.items()) if e != 0]


def _truncated_mul(a, b, order):
    return np.convolve(a, b)[:order + 1]


def _compose_series(outer, inner, order):
    """Maclaurin coefficients of outer∘inner for inner(0) = 0."""
    out = np.zeros(order + 1, dtype=complex)
    out[0] = outer[0]
    power = np.zeros(order + 1, dtype=complex)
    power[0] = 1.0
    for i in range(1, order + 1):
        power = _truncated_mul(power, inner, order)
        out += outer[i] * power
    return out


@lru_cache(maxsize=256)
def _iterate_series(f, m, order):
    """Maclaurin coefficients 0..order of the m-th iterate of f."""
    rat = f.rational
    base = series_divide(rat.numerator, rat.denominator, order)
    base[0] = 0.0
    series = base
    for _ in range(m - 1):
        series = _compose_series(base, series, order)
    series.setflags(write=False)
    return series


def _power_table(series, order):
    """t[k][l] = [z^l](g^k) for 1 <= k <= order."""
    table = [None]
    power = np.zeros(order + 1, dtype=complex)
    power[0] = 1.0
    for _ in range(order):
        power = _truncated_mul(power, series, order)
        table.append(power)
    return table


def _disintegrate(laurent, series, order):
    """Replaces a Laurent polynomial P(w) by α ↦ ∫P dμ_α for the Clark measures of g."""
    table = _power_table(series, order)
    out = {0: laurent.get(0, 0j)}
    for l, p in laurent.items():
        if l == 0 or p == 0:
            continue
        for k in range(1, abs(l) + 1):
            t = table[k][abs(l)]
            key, value = (-k, p * t) if l < 0 else (k, p * np.conj(t))
            out[key] = out.get(key, 0j) + value
    return out


def disintegration_integral(f, indices, exponents):
    """∫ ∏ (f^{n_j})^{e_j} dm evaluated exactly by repeated Clark disintegration."""
    pairs = _merge(indices, exponents)
    if not pairs:
        return 1.0 + 0j
    order = sum(abs(e) for _, e in pairs)
    if order > MAX_DISINTEGRATION_ORDER:
        raise PreconditionError(
            f"total exponent {order} exceeds the disintegration limit {MAX_DISINTEGRATION_ORDER}")
    laurent = {pairs[0][1]: 1.0 + 0j}
    for (prev, _), (n, e) in zip(pairs, pairs[1:]):
        laurent = _disintegrate(laurent, _iterate_series(f, n - prev, order), order)
        laurent = {l + e: c for l, c in laurent.items()}
    return complex(laurent.get(0, 0j))


def _power_product_integrand(f, pairs):
    indices = [n for n, _ in pairs]

    def integrand(z):
        out = np.ones(np.shape(z), dtype=complex)
        if not pairs:
            return out
        rows = iterates_at(f, z, indices)
        for row, (_, e) in zip(rows, pairs):
            out = out * (row ** e if e > 0 else np.conj(row) ** (-e))
        return out

    return integrand


def _degree_bound(f, pairs):
    return sum(abs(e) * f.degree ** n for n, e in pairs)


def _choose_method(f, method, bound, grid, exact_ok, max_points):
    if method not in METHODS:
        raise DomainError(f"unknown integration method {method!r}; expected one of {METHODS}")
    if method != "auto":
        return method
    if grid is not None:
        return "grid"
    if f.is_monomial and grid_affordable(f, bound, max_points):
        return "grid"
    if exact_ok:
        return "disintegration"
    if grid_affordable(f, bound, max_points):
        return "grid"
    return "mc"


def _quadrature(f, integrand, bound, grid, method, sampler, threads, max_points):
    if method == "mc":
        return mc_integrate(integrand, sampler or MCSampler(seed=0, count=DEFAULT_MC_COUNT), threads)
    if grid is None:
        return grid_integrate(f, integrand, bound, max_points=max_points, threads=threads)
    if grid.M < bound + 1:
        raise PreconditionError(
            f"grid of {grid.M} points is not exact for trigonometric degree {bound}; need {bound + 1}")
    if f.is_monomial:
        value = integrate(evaluate_chunked(integrand, grid.points, threads))
        return QuadratureResult(value=value, M=grid.M, converged=True, error_estimate=0.0,
                                method="exact")
    return adaptive_integrate(integrand, grid.M, max_points=max_points, threads=threads)


def correlation_value(f, indices, exponents, grid=None, method="auto", sampler=None,
                      threads=1, max_points=None):
    """∫ ∏ (f^{n_j})^{e_j} dm with negative exponents meaning conjugates.

    `method` is one of "grid", "mc", "disintegration" or "auto"; an explicit
    grid must hold at least degree-bound + 1 points.
    """
    pairs = _merge(indices, exponents)
    order = sum(abs(e) for _, e in pairs)
    bound = _degree_bound(f, pairs)
    chosen = _choose_method(f, method, bound, grid, order <= MAX_DISINTEGRATION_ORDER, max_points)
    if chosen == "disintegration":
        value = disintegration_integral(f, [n for n, _ in pairs], [e for _, e in pairs])
        return QuadratureResult(value=value, M=0, converged=True, error_estimate=0.0,
                                method="disintegration")
    return _quadrature(f, _power_product_integrand(f, pairs), bound, grid, chosen, sampler,
                       threads, max_points)


def covariance_check(f, k, j, grid=None, method="auto", threads=1):
    """∫ conj(f^k) f^j dm = f'(0)^{j-k}."""
    if not 1 <= k < j:
        raise PreconditionError(f"need 1 <= k < j, got k={k}, j={j}")
    result = correlation_value(f, (k, j), (-1, 1), grid=grid, method=method, threads=threads)
    rhs = f.multiplier ** (j - k)
    return _report(f"covariance k={k} j={j}", result.value, rhs, COV_TOL,
                   details={"method": result.method, "M": result.M})


def _trig_on_circle(coefficients, u):
    L = (len(coefficients) - 1) // 2
    out = np.zeros(np.shape(u), dtype=complex)
    for idx, g in enumerate(coefficients):
        m = idx - L
        if g != 0:
            out = out + g * (u ** m if m >= 0 else np.conj(u) ** (-m))
    return out


def pushforward_check(f, coefficients, grid=None, threads=1):
    """∫ G∘f dm = ∫ G dm for a trigonometric polynomial G = Σ_{|m|<=L} g_m z^m."""
    if len(coefficients) % 2 != 1:
        raise PreconditionError("coefficient list must have odd length 2L+1")
    L = (len(coefficients) - 1) // 2
    bound = L * f.degree

    def composed(z):
        return _trig_on_circle(coefficients, boundary_step(f, z))

    lhs = _quadrature(f, composed, bound, grid, "grid", None, threads, None)
    rhs = integrate(_trig_on_circle(coefficients, uniform_grid(2 * L + 1).points))
    return _report(f"pushforward L={L}", lhs.value, rhs, COV_TOL,
                   details={"method": lhs.method, "M": lhs.M})


def _check_separated_pairs(pairs):
    for (n1, j1), (n2, j2) in zip(pairs, pairs[1:]):
        if max(n1, j1) >= min(n2, j2):
            raise PreconditionError(
                f"pairs ({n1}, {j1}) and ({n2}, {j2}) are not separated: "
                "need max of each pair below min of the next")


def factorization_check(f, pairs, grid=None, method="auto", threads=1):
    """∫ ∏ f^{n_k} conj(f^{j_k}) dm = ∏ ∫ f^{n_k} conj(f^{j_k}) dm for separated pairs."""
    pairs = [(int(n), int(j)) for n, j in pairs]
    if not pairs:
        raise PreconditionError("factorization needs at least one pair")
    _check_separated_pairs(pairs)
    indices = [x for pair in pairs for x in pair]
    exponents = [s for _ in pairs for s in (1, -1)]
    lhs = correlation_value(f, indices, exponents, grid=grid, method=method, threads=threads)
    rhs = 1.0 + 0j
    for n, j in pairs:
        rhs *= correlation_value(f, (n, j), (1, -1), grid=grid, method=method,
                                 threads=threads).value
    return _report(f"factorization {pairs}", lhs.value, rhs, ABS_TOL,
                   details={"method": lhs.method})


def _check_ordered_ranges(ranges):
    for s, e in ranges:
        if s < 1 or e < s:
            raise PreconditionError(f"invalid index range ({s}, {e})")
    for (_, e1), (s2, _) in zip(ranges, ranges[1:]):
        if e1 >= s2:
            raise PreconditionError("ranges must be ordered with max of each below min of the next")


def _squares_terms(coefficients):
    """Expansion of |Σ a_n fⁿ|² as (coef, {n: +1, m: -1}) terms."""
    terms = []
    for n, a_n in coefficients:
        for m, a_m in coefficients:
            terms.append((a_n * np.conj(a_m), ((n, 1), (m, -1))))
    return terms


def _expanded_integral(f, factors):
    """∫ ∏_k F_k dm where every F_k is a sum of iterate monomials."""
    cache = {}
    total = 0j
    for combo in itertools.product(*factors):
        coef = 1.0 + 0j
        indices, exponents = [], []
        for c, monomial in combo:
            coef *= c
            for n, e in monomial:
                indices.append(n)
                exponents.append(e)
        key = tuple(_merge(indices, exponents))
        if key not in cache:
            cache[key] = disintegration_integral(f, [n for n, _ in key], [e for _, e in key])
        total += coef * cache[key]
    return total


def _range_coefficients(seq, ranges):
    return [list(zip(range(s, e + 1), seq.values(s, e))) for s, e in ranges]


def _squares_integrand(f, per_range):
    indices = sorted(n for coeffs in per_range for n, _ in coeffs)
    position = {n: i for i, n in enumerate(indices)}

    def integrand(z):
        rows = iterates_at(f, z, indices)
        out = np.ones(np.shape(z))
        for coeffs in per_range:
            xi = sum(a * rows[position[n]] for n, a in coeffs)
            out = out * np.abs(xi) ** 2
        return out.astype(complex)

    return integrand


def _squares_integral(f, per_range, grid, method, sampler, threads, max_points):
    top = [max(n for n, _ in coeffs) for coeffs in per_range]
    bound = sum(2 * f.degree ** n for n in top)
    n_terms = math.prod(len(coeffs) ** 2 for coeffs in per_range)
    chosen = _choose_method(f, method, bound, grid, n_terms <= MAX_EXPANDED_TERMS, max_points)
    if chosen == "disintegration":
        value = _expanded_integral(f, [_squares_terms(coeffs) for coeffs in per_range])
        return QuadratureResult(value=value, M=0, converged=True, error_estimate=0.0,
                                method="disintegration")
    return _quadrature(f, _squares_integrand(f, per_range), bound, grid, chosen, sampler,
                       threads, max_points)


def uncorrelated_squares_check(f, seq, ranges, grid=None, method="auto", threads=1):
    """∫ ∏ |ξ_k|² dm = ∏ ∫ |ξ_k|² dm for block sums over ordered disjoint ranges."""
    ranges = [(int(s), int(e)) for s, e in ranges]
    if not ranges:
        raise PreconditionError("at least one range is required")
    _check_ordered_ranges(ranges)
    per_range = _range_coefficients(seq, ranges)
    lhs = _squares_integral(f, per_range, grid, method, None, threads, None)
    rhs = 1.0 + 0j
    for coeffs in per_range:
        rhs *= _squares_integral(f, [coeffs], grid, method, None, threads, None).value
    return _report(f"uncorrelated squares {ranges}", lhs.value, rhs, REL_TOL, relative=True,
                   details={"method": lhs.method})


FOUR_FACTOR_CASES = ("cancellation", "squared", "generic", "equality")


def _four_factor_setup(case, indices, signs):
    """(exponent list, decay exponent or None) for the chosen configuration."""
    n = [int(x) for x in indices]
    s = [int(x) for x in signs]
    if any(x not in (1, -1) for x in s):
        raise PreconditionError("signs must be +1 or -1")
    if case == "cancellation":
        if len(n) != 4 or max(n[0], n[1]) >= min(n[2], n[3]):
            raise PreconditionError("cancellation needs four indices with max(n1, n2) < min(n3, n4)")
        return n, [s[0], -s[0], 1, 1], None
    if case == "squared":
        if len(n) != 3 or len(s) != 3 or not n[0] < n[1] < n[2]:
            raise PreconditionError("squared case needs n1 < n2 < n3 and three signs")
        return n, [2 * s[0], s[1], s[2]], n[2] - n[0]
    if len(n) != 4 or len(s) != 4 or not n[0] < n[1] < n[2] < n[3]:
        raise PreconditionError(f"{case} case needs n1 < n2 < n3 < n4 and four signs")
    if case == "equality":
        if s[0] * s[1] != -1 or s[2] * s[3] != -1:
            raise PreconditionError("equality case needs e1*e2 = e3*e4 = -1")
        return n, s, n[1] - n[0] + n[3] - n[2]
    if case == "generic":
        wide = n[3] - n[2] > 2
        return n, s, (n[1] - n[0] + n[3] - n[2]) if wide else n[2] - n[0]
    raise DomainError(f"unknown four-factor case {case!r}; expected one of {FOUR_FACTOR_CASES}")


def four_factor_check(f, case, indices, signs, grid=None, method="auto", constant=None, threads=1):
    """Four-factor correlation configurations.

    cancellation asserts the integral vanishes; equality asserts
    |I| = a^{(n2-n1)+(n4-n3)}; squared and generic report the fitted constant
    |I| / a^exponent and assert the bound only when `constant` is given.
    """
    require_not_rotation(f, "four-factor correlations")
    n, exponents, decay = _four_factor_setup(case, indices, signs)
    result = correlation_value(f, n, exponents, grid=grid, method=method, threads=threads)
    value = result.value
    a = abs(f.multiplier)
    label = f"four-factor {case} n={tuple(n)} e={tuple(exponents)}"
    details = {"method": result.method}
    if case == "cancellation":
        return _report(label, value, 0.0, ABS_TOL, details=details)
    if case == "equality":
        return _report(label, abs(value), a ** decay, ABS_TOL, details=details)
    bound = a ** decay
    details["exponent"] = decay
    fitted = abs(value) / bound if bound > UNDERFLOW else None
    details["fitted_constant"] = fitted
    if constant is None or fitted is None:
        return CorrelationReport(description=label, lhs=complex(abs(value)), rhs=complex(bound),
                                 residual=0.0, passed=True, tolerance=0.0, details=details)
    limit = constant * bound
    return CorrelationReport(description=label, lhs=complex(abs(value)), rhs=complex(limit),
                             residual=max(abs(value) - limit, 0.0), passed=abs(value) <= limit,
                             tolerance=0.0, details=details)


def squared_factor_check(f, indices, signs, grid=None, method="auto", constant=None):
    return four_factor_check(f, "squared", indices, signs, grid=grid, method=method,
                             constant=constant)


def generic_four_factor(f, indices, signs, grid=None, method="auto", constant=None):
    return four_factor_check(f, "generic", indices, signs, grid=grid, method=method,
                             constant=constant)


@dataclass(frozen=True)
class DecayFit:
    k: int
    signs: tuple
    q_values: tuple
    magnitudes: tuple
    slope: float
    bound_slope: float
    fitted_constant: float
    passed: bool
    underflow: bool = False

    @property
    def note(self):
        if self.underflow:
            return "underflow: bound vacuously satisfied"
        return ""


def decay_fit(f, k, signs, q_values, base_index=1, method="auto", q_min=Q_MIN, threads=1):
    """Fits the decay rate of |∫∏ f^{ε_j n_j} dm| along n_j = base + (j-1)q.

    The slope of log|I| against q over the upper half of the q grid must not
    exceed (k/4)·log a plus a fixed margin.
    """
    if not 2 <= k <= 6:
        raise PreconditionError(f"k must lie in 2..6, got {k}")
    signs = tuple(int(s) for s in signs)
    if len(signs) != k:
        raise PreconditionError(f"need {k} signs, got {len(signs)}")
    q_values = tuple(int(q) for q in q_values)
    if not q_values or any(b <= a for a, b in zip(q_values, q_values[1:])):
        raise PreconditionError("q values must be a nonempty increasing list")
    if q_values[0] < q_min:
        raise PreconditionError(f"q values must be >= q_min={q_min}")
    require_not_rotation(f, "decay fits")
    a = abs(f.multiplier)
    magnitudes = []
    for q in q_values:
        indices = [base_index + j * q for j in range(k)]
        magnitudes.append(abs(correlation_value(f, indices, signs, method=method,
                                                threads=threads).value))
    bound_slope = (k / 4.0) * math.log(a) if a > 0 else -math.inf
    mags = np.array(magnitudes)
    if np.all(mags < UNDERFLOW):
        logger.info("decay fit k=%d: every correlation below %.0e", k, UNDERFLOW)
        return DecayFit(k=k, signs=signs, q_values=q_values, magnitudes=tuple(magnitudes),
                        slope=None, bound_slope=bound_slope, fitted_constant=None,
                        passed=True, underflow=True)
    upper = np.arange(len(q_values)) >= len(q_values) // 2
    keep = upper & (mags >= UNDERFLOW)
    q_arr = np.array(q_values, dtype=float)
    if keep.sum() >= 2:
        slope = float(np.polyfit(q_arr[keep], np.log(mags[keep]), 1)[0])
    else:
        slope = -math.inf
    fitted = float(np.max(mags[keep] / a ** (k * q_arr[keep] / 4.0))) if keep.any() and a > 0 else None
    passed = slope <= bound_slope + DECAY_SLOPE_MARGIN
    logger.info("decay fit k=%d: slope %.6g vs bound %.6g", k, slope, bound_slope)
    return DecayFit(k=k, signs=signs, q_values=q_values, magnitudes=tuple(magnitudes),
                    slope=slope, bound_slope=bound_slope, fitted_constant=fitted, passed=passed)


def gram_coefficients(f, count):
    """c_k = ∫ f^k(w) conj(w) dm(w) for k < count, by contour means inside the disk."""
    def quotient(k):
        def g(w):
            z = w
            for _ in range(k):
                z = apply(f, z)
            return z / w
        return g

    out = np.empty(count, dtype=complex)
    out[0] = 1.0
    for k in range(1, count):
        out[k] = contour_mean(quotient(k), GRAM_RADIUS, GRAM_NODES)
    return out


def _gram_norm2(f, a):
    c = gram_coefficients(f, len(a))
    cross = 0j
    for k in range(1, len(a)):
        cross += c[k] * np.vdot(a[:-k], a[k:])
    return float(np.sum(np.abs(a) ** 2) + 2.0 * cross.real)


def norm2_squared(f, seq, N, method="auto", grid=None, sampler=None, threads=1, max_points=None):
    """‖Σ_{n<=N} a_n fⁿ‖₂² by boundary quadrature ("boundary") or Gram reduction ("gram")."""
    if method not in ("auto", "boundary", "gram"):
        raise DomainError(f"unknown norm method {method!r}")
    a = seq.values(1, N)
    bound = 2 * f.degree ** N
    if method == "auto":
        method = "boundary" if grid is not None or grid_affordable(f, bound, max_points) else "gram"
    if method == "gram":
        if N > GRAM_MAX_N:
            raise PreconditionError(f"Gram reduction is limited to N <= {GRAM_MAX_N}, got {N}")
        return _gram_norm2(f, a)

    def integrand(z):
        return (np.abs(orbit_sum(f, a, z)) ** 2).astype(complex)

    how = "mc" if sampler is not None else "grid"
    return _quadrature(f, integrand, bound, grid, how, sampler, threads, max_points).value.real


def _xi_samples(f, a, grid, sampler, threads):
    points = mc_points(sampler, threads) if sampler is not None else grid.points
    return evaluate_chunked(lambda z: orbit_sum(f, a, z), points, threads)


def norm_comparability_check(f, seq, N, grid=None, sampler=None, method="auto", threads=1,
                             l4_constant=None):
    """Norm identities for ξ = Σ_{n<=N} a_n fⁿ: ‖ξ‖₂² = σ², the κ-sandwich,
    ∫⟨t,ξ⟩² dm = |t|²σ²/2, and the ratio ‖ξ‖₄/‖ξ‖₂."""
    require_not_rotation(f, "norm comparability")
    lam = f.multiplier
    target = sigma2(seq, lam, N)
    S2 = energy(seq, N)
    k = kappa(lam)
    reports = []

    norm2 = norm2_squared(f, seq, N, method=method, grid=grid, sampler=sampler, threads=threads)
    reports.append(_report(f"L2 norm N={N}", norm2, target, REL_TOL, relative=True))
    sandwich = S2 / k <= target * (1 + 1e-12) and target <= k * S2 * (1 + 1e-12)
    reports.append(CorrelationReport(description=f"kappa sandwich N={N}", lhs=complex(target),
                                     rhs=complex(S2), residual=0.0, passed=sandwich,
                                     tolerance=0.0, details={"kappa": k}))

    a = seq.values(1, N)
    quadrature_ok = grid is not None or sampler is not None or grid_affordable(f, 4 * f.degree ** N)
    if not quadrature_ok:
        for t in NORM_T_VALUES:
            reports.append(_report(f"scalar product t={t:.6g} (Gram)", abs(t) ** 2 * norm2 / 2,
                                   abs(t) ** 2 * target / 2, REL_TOL, relative=True))
        return reports

    if grid is None and sampler is None:
        grid = uniform_grid(max(1 << 14, 4 * f.degree ** N + 1))
    xi = _xi_samples(f, a, grid, sampler, threads)
    for t in NORM_T_VALUES:
        value = float(np.mean((np.conj(t) * xi).real ** 2))
        reports.append(_report(f"scalar product t={t:.6g}", value, abs(t) ** 2 * target / 2,
                               REL_TOL if sampler is None else 5.0 / math.sqrt(xi.size),
                               relative=True))
    l2 = math.sqrt(float(np.mean(np.abs(xi) ** 2)))
    l4 = float(np.mean(np.abs(xi) ** 4)) ** 0.25
    ratio = l4 / l2
    passed = True if l4_constant is None else ratio <= l4_constant
    reports.append(CorrelationReport(description=f"L4/L2 ratio N={N}", lhs=complex(ratio),
                                     rhs=complex(l4_constant or 0.0), residual=0.0,
                                     passed=passed, tolerance=0.0,
                                     details={"fitted_constant": ratio}))
    return reports


def identity_suite(f, n_max=6, method="auto", threads=1):
    """Exact correlation identities for all admissible small index tuples up to n_max."""
    reports = []
    for k in range(1, n_max):
        for j in range(k + 1, n_max + 1):
            reports.append(covariance_check(f, k, j, method=method, threads=threads))
    reports.append(pushforward_check(f, [0, 1, 0, 1, 1], threads=threads))
    for n1, j1, n2, j2 in itertools.product(range(1, n_max + 1), repeat=4):
        if max(n1, j1) < min(n2, j2) and n1 != j1 and n2 != j2:
            reports.append(factorization_check(f, [(n1, j1), (n2, j2)], method=method,
                                               threads=threads))
    if not f.is_rotation:
        for n in itertools.combinations(range(1, n_max + 1), 4):
            for e1 in (1, -1):
                reports.append(four_factor_check(f, "cancellation", n, (e1, -e1, 1, 1),
                                                 method=method, threads=threads))
            for signs in ((1, -1, 1, -1), (-1, 1, -1, 1), (1, -1, -1, 1), (-1, 1, 1, -1)):
                reports.append(four_factor_check(f, "equality", n, signs, method=method,
                                                 threads=threads))
    return reports
