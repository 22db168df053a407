# sequences.py
import logging
import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .circle_quad import TWO_PI, index_uniforms
from .config import LAG_CUTOFF
from .errors import DomainError, PreconditionError

logger = logging.getLogger(__name__)

KINDS = ("constant", "power", "geometric", "explicit", "random_phase")
MAX_CUTOFF = 2 ** 27


@dataclass(frozen=True)
class CoefficientSequence:
    """a_n for n >= 1.

    constant: a_n = c; power: a_n = n^p; geometric: a_n = r^n;
    explicit: listed values then zeros; random_phase: listed moduli with phases
    drawn from the (seed, n)-keyed stream, then zeros.
    """
    kind: str
    params: tuple

    def __post_init__(self):
        if self.kind not in KINDS:
            raise DomainError(f"unknown sequence kind {self.kind!r}")

    @property
    def is_summable(self):
        if self.kind == "constant":
            return self.params[0] == 0
        if self.kind == "power":
            return self.params[0] < -0.5
        if self.kind == "geometric":
            return abs(self.params[0]) < 1
        return True

    def values(self, start, stop):
        """a_n for start <= n <= stop as a complex array."""
        if start < 1:
            raise DomainError(f"sequence indices start at 1, got {start}")
        if stop < start:
            return np.zeros(0, dtype=complex)
        n = np.arange(start, stop + 1, dtype=float)
        if self.kind == "constant":
            return np.full(n.shape, self.params[0], dtype=complex)
        if self.kind == "power":
            return (n ** self.params[0]).astype(complex)
        if self.kind == "geometric":
            r = self.params[0]
            return (r ** n).astype(complex)
        listed = np.asarray(self.params[0], dtype=complex)
        out = np.zeros(n.shape, dtype=complex)
        lo, hi = start - 1, min(stop, len(listed))
        if hi > lo:
            out[:hi - lo] = listed[lo:hi]
            if self.kind == "random_phase":
                phases = index_uniforms(self.params[1], lo, hi)
                out[:hi - lo] = out[:hi - lo] * np.exp(1j * TWO_PI * phases)
        return out

    def __getitem__(self, n):
        return complex(self.values(n, n)[0])

    def squared_moduli(self, start, stop):
        return np.abs(self.values(start, stop)) ** 2


def constant(c=1.0):
    return CoefficientSequence("constant", (complex(c),))


def power(p):
    return CoefficientSequence("power", (float(p),))


def geometric(r):
    return CoefficientSequence("geometric", (r,))


def explicit(values):
    return CoefficientSequence("explicit", (tuple(complex(v) for v in values),))


def random_phase(moduli, seed):
    return CoefficientSequence("random_phase", (tuple(float(m) for m in moduli), int(seed)))


def _as_complex(value):
    if isinstance(value, (list, tuple)):
        re, im = value
        return complex(re, im)
    return complex(value)


def from_spec(spec):
    """Builds a sequence from `{kind, params}` as written in config files."""
    kind = spec["kind"]
    params = spec.get("params", {})
    if kind == "constant":
        return constant(_as_complex(params.get("c", 1.0)))
    if kind == "power":
        return power(params["p"])
    if kind == "geometric":
        r = _as_complex(params["r"])
        return geometric(r.real if r.imag == 0 else r)
    if kind == "explicit":
        return explicit([_as_complex(v) for v in params["values"]])
    if kind == "random_phase":
        return random_phase(params["moduli"], params["seed"])
    raise DomainError(f"unknown sequence kind {kind!r}")


def kappa(lam):
    a = abs(lam)
    return (1.0 + a) / (1.0 - a)


def _closed_form_cumulative(seq, n):
    """Σ_{m<=n} |a_m|² in closed form, or None when the kind has none."""
    n = np.asarray(n, dtype=float)
    if seq.kind == "constant":
        return abs(seq.params[0]) ** 2 * n
    if seq.kind == "geometric":
        q = abs(seq.params[0]) ** 2
        if q == 1.0:
            return n.copy()
        return q * np.expm1(n * math.log(q)) / (q - 1.0)
    if seq.kind == "power":
        two_p = 2.0 * seq.params[0]
        if two_p == 0:
            return n.copy()
        if two_p == 1:
            return n * (n + 1) / 2
        if two_p == 2:
            return n * (n + 1) * (2 * n + 1) / 6
        if two_p == 4:
            return n * (n + 1) * (2 * n + 1) * (3 * n * n + 3 * n - 1) / 30
    return None


@lru_cache(maxsize=32)
def _prefix_energy(seq, N):
    prefix = np.zeros(N + 1)
    np.cumsum(seq.squared_moduli(1, N), out=prefix[1:])
    prefix.setflags(write=False)
    return prefix


def cumulative_energy(seq, n, N=None):
    """Vectorised S_n² = Σ_{m<=n}|a_m|²; N bounds the cached prefix when no closed form exists."""
    closed = _closed_form_cumulative(seq, n)
    if closed is not None:
        return closed
    top = int(N if N is not None else np.max(n))
    return _prefix_energy(seq, top)[np.asarray(n, dtype=int)]


def energy(seq, N):
    if N < 1:
        raise DomainError(f"N must be positive, got {N}")
    closed = _closed_form_cumulative(seq, N)
    if closed is not None:
        return float(closed)
    return float(np.sum(seq.squared_moduli(1, N)))


def lag_count(lam, N):
    a = abs(lam)
    if a == 0:
        return 0
    return int(min(N - 1, math.ceil(math.log(LAG_CUTOFF) / math.log(a))))


def _check_lambda(lam):
    if abs(lam) >= 1:
        raise DomainError(f"|lambda| must be < 1, got {abs(lam)!r}")


def lag_variance(a, lam):
    """Σ|a_n|² + 2 Re Σ_k λ^k Σ_n conj(a_n) a_{n+k} over a contiguous block of coefficients."""
    total = float(np.sum(np.abs(a) ** 2))
    cross = 0j
    for k in range(1, lag_count(lam, len(a)) + 1):
        cross += lam ** k * np.vdot(a[:-k], a[k:])
    return total + 2.0 * cross.real


def sigma2(seq, lam, N):
    _check_lambda(lam)
    if N < 1:
        raise DomainError(f"N must be positive, got {N}")
    value = lag_variance(seq.values(1, N), lam)
    if value < -1e-12:
        logger.warning("sigma2 came out negative (%.3e); clamping to 0", value)
    return max(value, 0.0)


@dataclass(frozen=True)
class TailVariance:
    value: float
    truncation_bound: float
    cutoff: int


def _energy_beyond(seq, cutoff):
    if seq.kind == "geometric":
        q = abs(seq.params[0]) ** 2
        return q ** (cutoff + 1) / (1.0 - q)
    if seq.kind == "power":
        p = seq.params[0]
        return cutoff ** (2 * p + 1) / (-2 * p - 1)
    if seq.kind in ("explicit", "random_phase"):
        listed = np.abs(np.asarray(seq.params[0], dtype=complex)) ** 2
        return float(np.sum(listed[cutoff:]))
    return math.inf


def _sup_beyond(seq, cutoff):
    if seq.kind == "geometric":
        return abs(seq.params[0]) ** (2 * (cutoff + 1))
    if seq.kind == "power":
        return (cutoff + 1.0) ** (2 * seq.params[0])
    if seq.kind in ("explicit", "random_phase"):
        listed = np.abs(np.asarray(seq.params[0], dtype=complex)) ** 2
        return float(listed[cutoff:].max()) if len(listed) > cutoff else 0.0
    return math.inf


def tail_sigma2(seq, lam, N, cutoff):
    """σ²(N) over indices N..cutoff with a bound on what the truncation drops."""
    _check_lambda(lam)
    if not seq.is_summable:
        raise DomainError(f"divergent sequence for tail mode: {seq.kind} {seq.params}")
    if cutoff < N:
        raise PreconditionError(f"cutoff {cutoff} must be >= N={N}")
    a = seq.values(N, cutoff)
    value = max(lag_variance(a, lam), 0.0)
    K = lag_count(lam, cutoff - N + 1)
    window = np.abs(a[max(0, len(a) - K):]) ** 2 if K else np.zeros(0)
    edge = max(float(window.max()) if window.size else 0.0, _sup_beyond(seq, cutoff))
    a_abs = abs(lam)
    bound = kappa(lam) * _energy_beyond(seq, cutoff) + 2.0 * a_abs / (1.0 - a_abs) ** 2 * edge
    return TailVariance(value=value, truncation_bound=bound, cutoff=cutoff)


def choose_cutoff(seq, lam, N, rel_tol):
    """Smallest doubling of the cutoff whose truncation bound is below rel_tol · σ²(N)."""
    cutoff = max(2 * N, N + 64)
    while cutoff <= MAX_CUTOFF:
        tail = tail_sigma2(seq, lam, N, cutoff)
        if tail.value > 0 and tail.truncation_bound <= rel_tol * tail.value:
            return tail
        cutoff *= 2
    raise PreconditionError(
        f"no cutoff up to {MAX_CUTOFF} brings the truncation bound below {rel_tol} relative")


def growth_ratio(seq, N):
    total = energy(seq, N)
    if total <= 0:
        raise DomainError(f"growth ratio undefined: a_1..a_{N} are all zero")
    return abs(seq[N]) ** 2 / total


def phi_envelope(seq, N, horizon=None):
    """Nonincreasing envelope φ(N) of max_{n<=M}|a_n|² / S_M² over N <= M <= horizon.

    Constant and power kinds use the analytic envelope and ignore the horizon.
    """
    if seq.kind == "constant":
        return 1.0 / N
    if seq.kind == "power":
        p = seq.params[0]
        peak = float(N) ** (2 * p) if p >= 0 else 1.0
        return peak / energy(seq, N)
    horizon = N if horizon is None else horizon
    if horizon < N:
        raise PreconditionError(f"horizon {horizon} must be >= N={N}")
    squares = seq.squared_moduli(1, horizon)
    running_max = np.maximum.accumulate(squares)
    prefix = np.cumsum(squares)
    with np.errstate(divide="ignore", invalid="ignore"):
        ratio = np.where(prefix > 0, running_max / prefix, 1.0)
    return float(ratio[N - 1:].max())


@dataclass(frozen=True)
class VarianceProfile:
    N: int
    S_N2: float
    sigma_N2: float
    growth_ratio: float
    phi: float


def variance_profile(seq, lam, N, horizon=None):
    return VarianceProfile(N=N, S_N2=energy(seq, N), sigma_N2=sigma2(seq, lam, N),
                           growth_ratio=growth_ratio(seq, N), phi=phi_envelope(seq, N, horizon))
