# blocks.py
import logging
import math
from dataclasses import dataclass

import numpy as np

from .circle_quad import evaluate_chunked
from .config import REL_SLACK
from .errors import DomainError, InsufficientScaleError
from .inner_core import boundary_step
from .sequences import cumulative_energy, lag_variance, phi_envelope, sigma2

logger = logging.getLogger(__name__)

MAX_SCALE_SEARCH = 2 ** 40


@dataclass(frozen=True)
class BlockPartition:
    """Alternating long (A) and short (B) blocks of 1..N.

    Ranges are inclusive (start, end) pairs. `sub_block_counts[k]` is the
    number of candidate sub-blocks B(k+1) was chosen from.
    """
    N: int
    phi: float
    J_bounds: tuple
    P_N: int
    A_ranges: tuple
    B_ranges: tuple
    Q_N: int
    residual_range: tuple
    residual_energy: float
    sub_block_counts: tuple = ()

    @property
    def blocks(self):
        """(k, kind, start, end) in index order."""
        out = []
        for k, a in enumerate(self.A_ranges, start=1):
            out.append((k, "A", a[0], a[1]))
            if k <= len(self.B_ranges):
                b = self.B_ranges[k - 1]
                out.append((k, "B", b[0], b[1]))
        return out


def _floor(x):
    return math.floor(x * (1.0 + REL_SLACK))


def _energy_between(cum, start, end):
    """Σ_{start<=n<=end}|a_n|² from a cumulative-energy callable."""
    return float(cum(end) - cum(start - 1))


def _cumulative(seq, N):
    return lambda n: cumulative_energy(seq, n, N)


def _first_reaching(cum, lo, hi, target):
    """Smallest j in (lo, hi] with cum(j) >= target, or None."""
    if cum(hi) < target:
        return None
    left, right = lo + 1, hi
    while left < right:
        mid = (left + right) // 2
        if cum(mid) >= target:
            right = mid
        else:
            left = mid + 1
    return left


def _scan_j_bounds(cum, N, phi):
    """Greedy auxiliary blocks, each carrying at least φ^{1/8} S_N² energy."""
    total = float(cum(N))
    threshold = phi ** 0.125 * total * (1.0 - REL_SLACK)
    bounds = [0]
    while total - float(cum(bounds[-1])) >= threshold:
        nxt = _first_reaching(cum, bounds[-1], N, float(cum(bounds[-1])) + threshold)
        if nxt is None:
            break
        bounds.append(nxt)
    return bounds


def _feasible(seq, N):
    if N < 2:
        return False
    phi = phi_envelope(seq, N)
    if phi <= 0 or phi > 1 or phi ** (-0.875) < 2.0 * (1.0 - REL_SLACK):
        return False
    return len(_scan_j_bounds(_cumulative(seq, N), N, phi)) - 1 >= 2


def minimal_scale(seq, start):
    """An N >= start at which the construction succeeds with φ = phi_envelope(seq, N).

    Doubles until a feasible scale is found, then bisects back down. Returns
    None for kinds whose envelope never gets small enough.
    """
    if seq.kind not in ("constant", "power"):
        return None
    lo, hi = max(1, start), max(2, start)
    while not _feasible(seq, hi):
        lo, hi = hi, hi * 2
        if hi > MAX_SCALE_SEARCH:
            return None
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if _feasible(seq, mid):
            hi = mid
        else:
            lo = mid
    return hi


def _insufficient(seq, N, phi, reason):
    needed = minimal_scale(seq, N)
    where = f"; try N >= {needed}" if needed is not None else ""
    return InsufficientScaleError(
        f"insufficient scale for block construction at N={N}, phi={phi:.6g}: {reason}{where}",
        minimal_n=needed)


def _sub_block_starts(start, end, phi):
    """Candidate sub-blocks of J = start..end as (starts, ends) arrays."""
    L = end - start + 1
    b = _floor(phi ** -0.5)
    p = L // b
    r = L - p * b
    lengths = np.full(p, b, dtype=np.int64)
    if r <= p:
        lengths[:r] += 1
    starts = start + np.concatenate([[0], np.cumsum(lengths)[:-1]])
    ends = starts + lengths - 1
    return starts, ends


def build_blocks(seq, N, phi):
    if N < 1:
        raise DomainError(f"N must be positive, got {N}")
    if not 0 < phi <= 1:
        raise DomainError(f"phi must lie in (0, 1], got {phi!r}")
    cum = _cumulative(seq, N)
    total = float(cum(N))
    if total <= 0:
        raise DomainError(f"a_1..a_{N} carry no energy")
    if phi ** (-0.875) < 2.0 * (1.0 - REL_SLACK):
        raise _insufficient(seq, N, phi, "phi^(-7/8) < 2")
    J = _scan_j_bounds(cum, N, phi)
    P_N = len(J) - 1
    if P_N < 2:
        raise _insufficient(seq, N, phi, f"only {P_N} auxiliary block(s) reach the energy threshold")
    if phi ** -0.5 < 1.0:
        raise _insufficient(seq, N, phi, "sub-blocks would be empty")

    B_ranges = []
    counts = []
    for k in range(1, P_N // 2 + 1):
        starts, ends = _sub_block_starts(J[2 * k - 1] + 1, J[2 * k], phi)
        if starts.size == 0:
            raise _insufficient(seq, N, phi, f"J({2 * k}) is shorter than one sub-block")
        energies = cum(ends) - cum(starts - 1)
        best = int(np.argmin(energies))
        B_ranges.append((int(starts[best]), int(ends[best])))
        counts.append(int(starts.size))

    Q_N = (P_N + 1) // 2
    A_ranges = []
    prev_end = 0
    for k in range(1, Q_N + 1):
        stop = B_ranges[k - 1][0] - 1 if k <= len(B_ranges) else J[P_N]
        A_ranges.append((prev_end + 1, stop))
        if k <= len(B_ranges):
            prev_end = B_ranges[k - 1][1]

    last = A_ranges[-1][1] if len(A_ranges) > len(B_ranges) else B_ranges[-1][1]
    if last < N:
        residual = (last + 1, N)
        residual_energy = _energy_between(cum, last + 1, N)
    else:
        residual, residual_energy = None, 0.0
    logger.info("blocks: N=%d phi=%.3g P_N=%d Q_N=%d", N, phi, P_N, Q_N)
    return BlockPartition(N=N, phi=phi, J_bounds=tuple(J), P_N=P_N, A_ranges=tuple(A_ranges),
                          B_ranges=tuple(B_ranges), Q_N=Q_N, residual_range=residual,
                          residual_energy=residual_energy, sub_block_counts=tuple(counts))


@dataclass(frozen=True)
class InvariantCheck:
    name: str
    passed: bool
    detail: str = ""


@dataclass(frozen=True)
class PartitionReport:
    checks: tuple
    q_phi: float
    large_block_ratio: float
    remainder_ratio: float = None

    @property
    def passed(self):
        return all(c.passed for c in self.checks)

    def check(self, name):
        for c in self.checks:
            if c.name == name:
                return c
        raise KeyError(name)


def _ordered_ranges(partition):
    return [(s, e) for _, _, s, e in partition.blocks]


def _index_mask(N, ranges):
    mask = np.zeros(N, dtype=bool)
    for s, e in ranges:
        mask[s - 1:e] = True
    return mask


def verify_partition(seq, partition, phi, lam=None):
    """Checks the construction's size, placement and energy claims.

    With `lam` given, also reports ‖Σa_n fⁿ − Σξ_k‖₂ / σ_N computed from the
    variance formula restricted to the short blocks and the residual.
    """
    N = partition.N
    cum = _cumulative(seq, N)
    checks = []

    ordered = _ordered_ranges(partition)
    consecutive = bool(ordered) and ordered[0][0] == 1 and all(
        s <= e for s, e in ordered) and all(
        nxt[0] == cur[1] + 1 for cur, nxt in zip(ordered, ordered[1:]))
    alternating = len(partition.B_ranges) in (len(partition.A_ranges), len(partition.A_ranges) - 1)
    checks.append(InvariantCheck("alternating_consecutive", consecutive and alternating))

    a_floor = phi ** (-0.875) * (1.0 - REL_SLACK)
    short_a = [k for k, (s, e) in enumerate(partition.A_ranges, 1) if e - s + 1 < a_floor]
    checks.append(InvariantCheck("a_size", not short_a, f"short A blocks: {short_a}" if short_a else ""))

    b_floor = phi ** -0.5 / 2.0 * (1.0 - REL_SLACK)
    short_b = [k for k, (s, e) in enumerate(partition.B_ranges, 1) if e - s + 1 < b_floor]
    checks.append(InvariantCheck("b_size", not short_b, f"short B blocks: {short_b}" if short_b else ""))

    J = partition.J_bounds
    outside = [k for k, (s, e) in enumerate(partition.B_ranges, 1)
               if 2 * k >= len(J) or not (J[2 * k - 1] < s and e <= J[2 * k])]
    checks.append(InvariantCheck("b_inside_j", not outside, f"misplaced: {outside}" if outside else ""))

    heavy = []
    for k, (s, e) in enumerate(partition.B_ranges, 1):
        if k in outside or k > len(partition.sub_block_counts):
            heavy.append(k)
            continue
        bound = _energy_between(cum, J[2 * k - 1] + 1, J[2 * k]) / partition.sub_block_counts[k - 1]
        if _energy_between(cum, s, e) > bound * (1.0 + REL_SLACK):
            heavy.append(k)
    checks.append(InvariantCheck("b_energy", not heavy, f"heavy B blocks: {heavy}" if heavy else ""))

    last_end = ordered[-1][1] if ordered else 0
    if partition.residual_range is None:
        residual_ok = last_end == N and partition.residual_energy == 0
    else:
        s, e = partition.residual_range
        residual_ok = s == last_end + 1 and e == N and math.isclose(
            partition.residual_energy, _energy_between(cum, s, e), rel_tol=1e-12, abs_tol=1e-300)
    checks.append(InvariantCheck("residual", residual_ok))

    total = float(cum(N))
    q_phi = partition.Q_N * phi ** 0.125
    large = max((_energy_between(cum, s, e) for s, e in partition.A_ranges), default=0.0)
    large_ratio = large / (phi ** 0.125 * total)

    remainder = None
    if lam is not None:
        short = list(partition.B_ranges)
        if partition.residual_range is not None:
            short.append(partition.residual_range)
        masked = np.where(_index_mask(N, short), seq.values(1, N), 0)
        remainder = math.sqrt(max(lag_variance(masked, lam), 0.0) / sigma2(seq, lam, N))
    return PartitionReport(checks=tuple(checks), q_phi=q_phi, large_block_ratio=large_ratio,
                           remainder_ratio=remainder)


def block_variance_ratio(seq, lam, partition):
    """Σ_j σ²(A(j)) / σ_N², lags kept inside each A(j)."""
    total = sum(lag_variance(seq.values(s, e), lam) for s, e in partition.A_ranges)
    return total / sigma2(seq, lam, partition.N)


def a_energy_fraction(seq, partition):
    """Σ_{n in the A-blocks}|a_n|² / S_N²."""
    cum = _cumulative(seq, partition.N)
    covered = sum(_energy_between(cum, s, e) for s, e in partition.A_ranges)
    return covered / float(cum(partition.N))


@dataclass(frozen=True)
class BlockSums:
    xi: np.ndarray
    eta: np.ndarray
    residual: np.ndarray

    @property
    def total(self):
        return self.xi.sum(axis=0) + self.eta.sum(axis=0) + self.residual


def block_sums(f, seq, partition, points, threads=1):
    """ξ_k and η_k at each point from one forward orbit of length N."""
    points = np.asarray(points, dtype=complex)
    if np.any(np.abs(np.abs(points) - 1.0) > 1e-12):
        raise DomainError("block sums are evaluated at points of the unit circle")
    N = partition.N
    n_a, n_b = len(partition.A_ranges), len(partition.B_ranges)
    owner = np.full(N, n_a + n_b, dtype=np.int64)
    for row, (s, e) in enumerate(partition.A_ranges):
        owner[s - 1:e] = row
    for row, (s, e) in enumerate(partition.B_ranges):
        owner[s - 1:e] = n_a + row
    a = seq.values(1, N)

    def accumulate(z):
        rows = np.zeros((n_a + n_b + 1, z.size), dtype=complex)
        w = z
        for n in range(N):
            w = boundary_step(f, w)
            rows[owner[n]] += a[n] * w
        return rows.T

    rows = evaluate_chunked(accumulate, points, threads).T
    return BlockSums(xi=rows[:n_a], eta=rows[n_a:n_a + n_b], residual=rows[-1])