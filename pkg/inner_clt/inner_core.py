# inner_core.py
import cmath
import logging
from dataclasses import dataclass
from functools import cached_property

import numpy as np
from numpy.polynomial import polynomial as P

from .config import DISK_MARGIN, MAX_TAYLOR_ORDER, UNIT_TOL
from .errors import DomainError, PreconditionError

logger = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class RationalForm:
    """f = P/Q with ascending coefficient arrays and Q[0] == 1."""
    numerator: np.ndarray
    denominator: np.ndarray

    @property
    def degree(self):
        num = P.polytrim(self.numerator, tol=1e-13)
        den = P.polytrim(self.denominator, tol=1e-13)
        return max(len(num), len(den)) - 1

    def __call__(self, w):
        return P.polyval(w, self.numerator) / P.polyval(w, self.denominator)


@dataclass(frozen=True, eq=False)
class BlaschkeProduct:
    phase: complex
    zeros: tuple

    @property
    def degree(self):
        return len(self.zeros)

    @property
    def is_rotation(self):
        return self.degree == 1

    @property
    def is_monomial(self):
        return all(a == 0 for a in self.zeros)

    @property
    def max_zero_modulus(self):
        return max((abs(a) for a in self.zeros), default=0.0)

    @cached_property
    def rational(self):
        return to_rational(self)

    @cached_property
    def multiplier(self):
        """f'(0)."""
        return taylor_at_zero(self, 1)[1]

    def __call__(self, w, boundary=False):
        return evaluate(self, w, boundary=boundary)

    def __repr__(self):
        zeros = ", ".join(f"{complex(a):.6g}" for a in self.zeros)
        return f"BlaschkeProduct(phase={complex(self.phase):.6g}, zeros=[{zeros}])"


def make_blaschke(phase, zeros):
    phase = complex(phase)
    zeros = tuple(complex(a) for a in zeros)
    if abs(abs(phase) - 1.0) > UNIT_TOL:
        raise DomainError(f"phase must have unit modulus, got |phase|={abs(phase)!r}")
    if not zeros:
        raise DomainError("a Blaschke product needs at least one zero")
    for a in zeros:
        if a != 0 and abs(a) > 1.0 - DISK_MARGIN:
            raise DomainError(f"zero outside open disk: {a!r}")
    if not any(a == 0 for a in zeros):
        raise DomainError("f(0) ≠ 0: at least one zero must sit at the origin")
    return BlaschkeProduct(phase=phase, zeros=zeros)


def from_spec(spec):
    """Builds a product from a config mapping `{phase_angle, zeros: [[re, im], ...]}`."""
    phase = cmath.exp(1j * float(spec.get("phase_angle", 0.0)))
    zeros = [complex(re, im) for re, im in spec["zeros"]]
    return make_blaschke(phase, zeros)


def to_spec(f):
    return {
        "phase_angle": cmath.phase(f.phase),
        "zeros": [[a.real, a.imag] for a in f.zeros],
    }


def require_not_rotation(f, what="this operation"):
    if f.is_rotation:
        raise DomainError(f"{what} requires an inner function which is not a rotation")


def _as_output(w, out):
    return complex(out) if np.ndim(w) == 0 else out


def evaluate(f, w, boundary=False):
    """Evaluates f at points of the closed disk.

    Args:
        f (BlaschkeProduct): The product.
        w (complex or array_like): Evaluation points with |w| <= 1.
        boundary (bool): If True the points lie on the circle and the result
            is renormalized to exact unit modulus.

    Returns:
        complex or numpy.ndarray: f(w), same shape as `w`.
    """
    arr = np.asarray(w, dtype=complex)
    if np.any(np.abs(arr) > 1.0 + UNIT_TOL):
        raise DomainError("evaluation point outside the closed disk")
    out = apply(f, arr)
    if boundary:
        out = out / np.abs(out)
    return _as_output(w, out)


def apply(f, arr):
    """Unchecked evaluation kernel used by the orbit loops."""
    out = np.full(arr.shape, f.phase, dtype=complex)
    for a in f.zeros:
        if a == 0:
            out = out * arr
        else:
            out = out * ((abs(a) / a) * (a - arr) / (1.0 - a.conjugate() * arr))
    return out


def boundary_step(f, arr):
    out = apply(f, arr)
    return out / np.abs(out)


def _require_boundary(z):
    if np.any(np.abs(np.abs(np.asarray(z)) - 1.0) > UNIT_TOL):
        raise DomainError("point is not on the unit circle")


def iterate(f, n, z):
    if n < 0:
        raise DomainError(f"iterate count must be nonnegative, got {n}")
    _require_boundary(z)
    w = np.asarray(z, dtype=complex)
    for _ in range(n):
        w = boundary_step(f, w)
    return _as_output(z, w)


def iterates_at(f, z, indices):
    """Runs one forward orbit and returns the iterates at the requested indices.

    Returns an array of shape (len(indices),) + shape(z), rows ordered as the
    sorted unique indices.
    """
    wanted = sorted(set(int(n) for n in indices))
    z = np.asarray(z, dtype=complex)
    rows = np.empty((len(wanted),) + z.shape, dtype=complex)
    w = z
    step = 0
    for row, n in enumerate(wanted):
        while step < n:
            w = boundary_step(f, w)
            step += 1
        rows[row] = w
    return rows


def orbit_sum(f, coefficients, z, start=1, compensated=False):
    """Σ_j c_j f^{start+j}(z) along one forward orbit of each boundary point.

    With `compensated` the running sum carries a Kahan correction term.
    """
    w = np.asarray(z, dtype=complex)
    for _ in range(start - 1):
        w = boundary_step(f, w)
    total = np.zeros(w.shape, dtype=complex)
    carry = np.zeros(w.shape, dtype=complex)
    for c in coefficients:
        w = boundary_step(f, w)
        if not compensated:
            total += c * w
            continue
        y = c * w - carry
        t = total + y
        carry = (t - total) - y
        total = t
    return total


def to_rational(f):
    numerator = np.array([f.phase], dtype=complex)
    denominator = np.array([1.0], dtype=complex)
    for a in f.zeros:
        if a == 0:
            numerator = P.polymul(numerator, [0.0, 1.0])
        else:
            unit = abs(a) / a
            numerator = P.polymul(numerator, [unit * a, -unit])
            denominator = P.polymul(denominator, [1.0, -a.conjugate()])
    return RationalForm(numerator=np.asarray(numerator, dtype=complex),
                        denominator=np.asarray(denominator, dtype=complex))


def series_divide(numerator, denominator, order):
    """Maclaurin coefficients 0..order of numerator/denominator (denominator[0] != 0)."""
    num = np.zeros(order + 1, dtype=complex)
    take = min(len(numerator), order + 1)
    num[:take] = numerator[:take]
    den = np.asarray(denominator, dtype=complex)
    out = np.zeros(order + 1, dtype=complex)
    for k in range(order + 1):
        acc = num[k]
        for i in range(1, min(k, len(den) - 1) + 1):
            acc -= den[i] * out[k - i]
        out[k] = acc / den[0]
    return out


def taylor_at_zero(f, order):
    if order < 1 or order > MAX_TAYLOR_ORDER:
        raise PreconditionError(f"order must lie in 1..{MAX_TAYLOR_ORDER}, got {order}")
    rat = f.rational
    coeffs = series_divide(rat.numerator, rat.denominator, order)
    coeffs[0] = 0.0
    return list(coeffs)


def boundary_derivative_modulus(f, z):
    """|f'(z)| on the circle, from the closed-form sum over zeros."""
    z = np.asarray(z, dtype=complex)
    total = np.zeros(z.shape)
    for a in f.zeros:
        if a == 0:
            total = total + 1.0
        else:
            total = total + (1.0 - abs(a) ** 2) / np.abs(1.0 - a.conjugate() * z) ** 2
    return float(total) if total.ndim == 0 else total


def complex_derivative(f, z):
    rat = f.rational
    num, den = rat.numerator, rat.denominator
    top = P.polyval(z, P.polysub(P.polymul(P.polyder(num), den), P.polymul(num, P.polyder(den))))
    return top / P.polyval(z, den) ** 2


def compose_rational(outer, inner):
    """Rational form of outer∘inner by homogeneous substitution.

    Both arguments are RationalForm instances; the result keeps denominator[0] == 1.
    """
    degree = max(len(outer.numerator), len(outer.denominator)) - 1
    num_pows = [np.array([1.0 + 0j])]
    den_pows = [np.array([1.0 + 0j])]
    for _ in range(degree):
        num_pows.append(P.polymul(num_pows[-1], inner.numerator))
        den_pows.append(P.polymul(den_pows[-1], inner.denominator))

    def substitute(coeffs):
        total = np.array([0.0 + 0j])
        for i, c in enumerate(coeffs):
            if c != 0:
                total = P.polyadd(total, c * P.polymul(num_pows[i], den_pows[degree - i]))
        return total

    numerator = substitute(outer.numerator)
    denominator = substitute(outer.denominator)
    scale = denominator[0]
    return RationalForm(numerator=numerator / scale, denominator=denominator / scale)
