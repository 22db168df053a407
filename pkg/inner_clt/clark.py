# clark.py
import logging
import math
from dataclasses import dataclass
from functools import cached_property

import numpy as np
from numpy.polynomial import polynomial as P

from .circle_quad import integrate, uniform_grid
from .config import (CLARK_NEWTON_STEPS, CLARK_ON_CIRCLE_TOL, CLARK_PULLBACK_TOL, CLARK_WEIGHT_TOL,
                     UNIT_TOL)
from .errors import DomainError, NumericalFailureError, PreconditionError
from .inner_core import apply, boundary_derivative_modulus, complex_derivative, taylor_at_zero

logger = logging.getLogger(__name__)

MIN_ATOM_SEPARATION = 1e-8
MAX_MOMENT = 64
MAX_VERIFIED_MOMENT = 16
MAX_TRIG_DEGREE = 32


@dataclass(frozen=True, eq=False)
class ClarkMeasure:
    alpha: complex
    atoms: tuple

    @cached_property
    def points(self):
        return np.array([z for z, _ in self.atoms], dtype=complex)

    @cached_property
    def weights(self):
        return np.array([w for _, w in self.atoms], dtype=float)

    @property
    def total_mass(self):
        return float(np.sum(self.weights))


@dataclass(frozen=True)
class Residual:
    label: str
    lhs: complex
    rhs: complex
    residual: float
    tolerance: float = 1e-8

    @property
    def passed(self):
        return self.residual <= self.tolerance


def _pullback_polynomial(f, alpha):
    rat = f.rational
    size = max(len(rat.numerator), len(rat.denominator))
    num = np.zeros(size, dtype=complex)
    den = np.zeros(size, dtype=complex)
    num[:len(rat.numerator)] = rat.numerator
    den[:len(rat.denominator)] = rat.denominator
    return num - alpha * den


def _polish(f, alpha, roots):
    z = roots.copy()
    for step in range(CLARK_NEWTON_STEPS):
        raw = z - (apply(f, z) - alpha) / complex_derivative(f, z)
        if step == CLARK_NEWTON_STEPS - 1:
            drift = np.abs(np.abs(raw) - 1.0)
            if np.any(drift > CLARK_ON_CIRCLE_TOL):
                raise NumericalFailureError(
                    f"Clark atom left the circle after polishing (max drift {drift.max():.3e}); "
                    "the zero configuration is ill-conditioned")
        z = raw / np.abs(raw)
    return z


def clark_measure(f, alpha):
    """Atomic Clark measure μ_α: the d preimages of α with weights 1/|f'|."""
    alpha = complex(alpha)
    if abs(abs(alpha) - 1.0) > UNIT_TOL:
        raise DomainError(f"alpha must lie on the unit circle, got |alpha|={abs(alpha)!r}")
    coeffs = _pullback_polynomial(f, alpha)
    roots = np.linalg.eigvals(P.polycompanion(coeffs)) if len(coeffs) > 2 else \
        np.array([-coeffs[0] / coeffs[1]])
    points = _polish(f, alpha, roots)
    order = np.argsort(np.mod(np.angle(points), 2.0 * math.pi), kind="stable")
    points = points[order]
    weights = 1.0 / boundary_derivative_modulus(f, points)
    if len(points) > 1:
        angles = np.sort(np.mod(np.angle(points), 2.0 * math.pi))
        gaps = np.diff(np.concatenate([angles, angles[:1] + 2.0 * math.pi]))
        if gaps.min() <= MIN_ATOM_SEPARATION:
            raise NumericalFailureError("Clark atoms are not separated on the circle")
    atoms = tuple((complex(z), float(w)) for z, w in zip(points, np.atleast_1d(weights)))
    return ClarkMeasure(alpha=alpha, atoms=atoms)


def moment(mu, l):
    """Σ_j w_j conj(z_j)^l; negative l gives Σ_j w_j z_j^{|l|}."""
    if abs(l) > MAX_MOMENT:
        raise PreconditionError(f"moment order must satisfy |l| <= {MAX_MOMENT}, got {l}")
    base = np.conj(mu.points) if l >= 0 else mu.points
    return complex(np.sum(mu.weights * base ** abs(l)))


def power_grid_size(f, k, l):
    """Grid size for ∫ f(z)^k conj(z)^l dm.

    Monomial products give a trigonometric polynomial. Otherwise the poles of
    f^k sit at 1/conj(a) and the rule converges like max|a|^M.
    """
    size = f.degree * k + l + 1
    rho = f.max_zero_modulus
    if rho > 0:
        size += math.ceil(math.log(1e-17) / math.log(rho))
    return size


def power_moment_integral(f, k, l, grid=None):
    """∫ f(z)^k conj(z)^l dm by equispaced quadrature."""
    needed = power_grid_size(f, k, l)
    if grid is None:
        grid = uniform_grid(needed)
    elif grid.M < needed:
        raise PreconditionError(f"grid of {grid.M} points is too small; need {needed}")
    z = grid.points
    return integrate(apply(f, z) ** k * np.conj(z) ** l)


def verify_moments(f, alpha, l_max, grid=None):
    if not 1 <= l_max <= MAX_VERIFIED_MOMENT:
        raise PreconditionError(f"l_max must lie in 1..{MAX_VERIFIED_MOMENT}, got {l_max}")
    mu = clark_measure(f, alpha)
    conj_alpha = complex(alpha).conjugate()
    taylor = taylor_at_zero(f, 2)
    results = []
    for l in range(1, l_max + 1):
        lhs = moment(mu, l)
        if l == 1:
            rhs = taylor[1] * conj_alpha
        elif l == 2:
            rhs = taylor[2] * conj_alpha + taylor[1] ** 2 * conj_alpha ** 2
        else:
            rhs = sum(conj_alpha ** k * power_moment_integral(f, k, l, grid) for k in range(1, l + 1))
        results.append(Residual(label=f"moment l={l}", lhs=lhs, rhs=complex(rhs),
                                residual=abs(lhs - rhs)))
    return results


def trig_integral(mu, coefficients):
    """∫ G dμ for G(z) = Σ_{m=-L}^{L} g_m z^m given as a list of 2L+1 coefficients."""
    L = (len(coefficients) - 1) // 2
    total = 0j
    for idx, g in enumerate(coefficients):
        if g != 0:
            total += g * moment(mu, -(idx - L))
    return total


def verify_disintegration(f, coefficients, M_alpha):
    """Compares the α-average of ∫G dμ_α with ∫G dm = g_0."""
    if len(coefficients) % 2 != 1:
        raise PreconditionError("coefficient list must have odd length 2L+1")
    L = (len(coefficients) - 1) // 2
    if L > MAX_TRIG_DEGREE:
        raise PreconditionError(f"trigonometric degree must be <= {MAX_TRIG_DEGREE}, got {L}")
    if M_alpha < 2 * L * f.degree + 1:
        raise PreconditionError(
            f"alpha grid of {M_alpha} points is too small; need {2 * L * f.degree + 1}")
    alphas = uniform_grid(M_alpha).points
    inner = np.array([trig_integral(clark_measure(f, a), coefficients) for a in alphas])
    lhs = integrate(inner)
    rhs = complex(coefficients[L])
    return Residual(label=f"disintegration L={L}", lhs=lhs, rhs=rhs, residual=abs(lhs - rhs))


def clark_suite(f, n_alpha=64, l_max=8, m_max=8):
    """Weight, pullback, moment and disintegration residuals over an α grid."""
    alphas = uniform_grid(n_alpha, offset=0.5).points
    results = []
    for alpha in alphas:
        mu = clark_measure(f, alpha)
        drift = float(np.max(np.abs(apply(f, mu.points) - alpha)))
        results.append(Residual(label=f"pullback alpha={alpha:.6g}", lhs=drift, rhs=0.0,
                                residual=drift, tolerance=CLARK_PULLBACK_TOL))
        results.append(Residual(label=f"weight sum alpha={alpha:.6g}", lhs=mu.total_mass, rhs=1.0,
                                residual=abs(mu.total_mass - 1.0), tolerance=CLARK_WEIGHT_TOL))
    for alpha in alphas[:: max(1, n_alpha // 8)]:
        results.extend(verify_moments(f, alpha, l_max))
    M_alpha = max(n_alpha, 2 * m_max * f.degree + 1)
    for m in range(-m_max, m_max + 1):
        coefficients = [0.0] * (2 * m_max + 1)
        coefficients[m + m_max] = 1.0
        check = verify_disintegration(f, coefficients, M_alpha)
        results.append(Residual(label=f"disintegration m={m}", lhs=check.lhs, rhs=check.rhs,
                                residual=check.residual))
    logger.info("clark suite: %d residuals, worst %.3e", len(results),
                max(r.residual for r in results))
    return results
