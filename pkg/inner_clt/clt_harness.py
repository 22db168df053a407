# clt_harness.py
import logging
import math
from dataclasses import asdict, dataclass, field

import numpy as np
import weave
from scipy import stats

from .circle_quad import MCSampler, evaluate_chunked, mc_points, uniform_grid
from .config import (CF_GAP_THRESHOLD, CF_T_RADIUS, COMPENSATE_ABOVE, DEFAULT_T_GRID,
                     KS_PVALUE_THRESHOLD, MIN_SAMPLES, TAIL_REL_TOL)
from .errors import DomainError, NumericalFailureError, PreconditionError
from .inner_core import orbit_sum, require_not_rotation
from .sequences import choose_cutoff, energy, geometric, growth_ratio, sigma2, tail_sigma2

logger = logging.getLogger(__name__)

MODES = ("partial", "tail")


@dataclass(frozen=True)
class Sampling:
    """Equispaced grid of M points or M Monte Carlo points keyed by seed."""
    kind: str = "grid"
    M: int = 200_000
    seed: int = 0
    offset: float = 0.0

    def __post_init__(self):
        if self.kind not in ("grid", "mc"):
            raise DomainError(f"sampling kind must be 'grid' or 'mc', got {self.kind!r}")
        if self.M < 1:
            raise DomainError(f"sample count must be positive, got {self.M}")

    def points(self, threads=1):
        if self.kind == "grid":
            return uniform_grid(self.M, self.offset).points
        return mc_points(MCSampler(seed=self.seed, count=self.M), threads)


@dataclass(frozen=True)
class Thresholds:
    cf_gap: float = CF_GAP_THRESHOLD
    ks_pvalue: float = KS_PVALUE_THRESHOLD
    cf_radius: float = CF_T_RADIUS


@dataclass(frozen=True)
class ExperimentConfig:
    product: object
    sequence: object
    N: tuple
    mode: str = "partial"
    cutoff: int = None
    sampling: Sampling = field(default_factory=Sampling)
    t_grid: tuple = tuple(DEFAULT_T_GRID)
    thresholds: Thresholds = field(default_factory=Thresholds)
    out: str = "out"
    threads: int = 1

    def __post_init__(self):
        if self.mode not in MODES:
            raise DomainError(f"mode must be one of {MODES}, got {self.mode!r}")
        if self.mode == "tail" and not self.sequence.is_summable:
            raise DomainError("divergent sequence for tail mode: the tail variant needs "
                              "a square-summable sequence")
        if not self.N or any(n < 1 for n in self.N):
            raise PreconditionError("N values must be positive")
        if any(b <= a for a, b in zip(self.N, self.N[1:])):
            raise PreconditionError("N list must be increasing")
        if not any(t == 0 for t in self.t_grid):
            raise PreconditionError("t grid must contain 0")


@dataclass(frozen=True, eq=False)
class SampleSet:
    """Normalized sums at each sample point.

    `S` is the root energy of the coefficients that were summed: a_1..a_N in
    partial mode, a_N..a_cutoff in tail mode.
    """
    values: np.ndarray
    N: int
    sigma: float
    S: float
    mode: str
    sampling: Sampling
    cutoff: int = None
    truncation_bound: float = None

    @property
    def count(self):
        return int(self.values.size)


def _coefficients(config, N, lam):
    seq = config.sequence
    if config.mode == "partial":
        if seq.is_summable:
            logger.warning("sequence %s %s is square-summable; partial sums do not satisfy "
                           "the divergence condition", seq.kind, seq.params)
        return seq.values(1, N), 1, sigma2(seq, lam, N), None, None
    if config.cutoff is None:
        tail = choose_cutoff(seq, lam, N, TAIL_REL_TOL)
    else:
        tail = tail_sigma2(seq, lam, N, config.cutoff)
        if tail.truncation_bound >= TAIL_REL_TOL * tail.value:
            raise PreconditionError(
                f"cutoff {config.cutoff} leaves truncation bound {tail.truncation_bound:.3e}, "
                f"above {TAIL_REL_TOL} of the tail variance {tail.value:.3e}")
    logger.info("tail mode N=%d: cutoff %d, truncation bound %.3e", N, tail.cutoff,
                tail.truncation_bound)
    return seq.values(N, tail.cutoff), N, tail.value, tail.cutoff, tail.truncation_bound


@weave.op()
def simulate(config, N=None):
    """Normalized sums T_N = (√2/σ_N) Σ a_n fⁿ at each sample point."""
    f = config.product
    require_not_rotation(f, "the CLT harness")
    N = config.N[0] if N is None else N
    lam = f.multiplier
    coefficients, start, variance, cutoff, bound = _coefficients(config, N, lam)
    if variance <= 0:
        raise DomainError(f"variance vanishes at N={N}; nothing to normalize")
    sigma = math.sqrt(variance)
    compensated = len(coefficients) > COMPENSATE_ABOVE
    points = config.sampling.points(config.threads)

    def kernel(z):
        return orbit_sum(f, coefficients, z, start=start, compensated=compensated)

    values = evaluate_chunked(kernel, points, config.threads) * (math.sqrt(2.0) / sigma)
    if not np.all(np.isfinite(values)):
        raise NumericalFailureError(f"non-finite partial sums at N={N}")
    logger.info("simulated %d samples, N=%d, mode=%s", values.size, N, config.mode)
    if config.mode == "partial":
        summed = energy(config.sequence, N)
    else:
        summed = float(np.sum(np.abs(coefficients) ** 2))
    return SampleSet(values=values, N=N, sigma=sigma, S=math.sqrt(summed),
                     mode=config.mode, sampling=config.sampling, cutoff=cutoff,
                     truncation_bound=bound)


@dataclass(frozen=True)
class CFRow:
    t: complex
    value: complex
    target: float
    gap: float


@dataclass(frozen=True)
class KSResult:
    statistic: float
    pvalue: float


def _values(samples):
    return samples.values if isinstance(samples, SampleSet) else np.asarray(samples, dtype=complex)


def cf_curve(samples, t_grid=DEFAULT_T_GRID):
    """Empirical characteristic function E exp(i⟨t, T⟩) against exp(-|t|²/2)."""
    values = _values(samples)
    rows = []
    for t in t_grid:
        t = complex(t)
        phase = (np.conj(t) * values).real
        value = complex(np.mean(np.exp(1j * phase)))
        target = math.exp(-abs(t) ** 2 / 2.0)
        rows.append(CFRow(t=t, value=value, target=target, gap=abs(value - target)))
    return tuple(rows)


def _ks(data, distribution):
    result = stats.kstest(data, distribution, method="asymp")
    return KSResult(statistic=float(result.statistic), pvalue=float(result.pvalue))


@dataclass(frozen=True)
class GaussianReport:
    mean: complex
    second_moment: float
    covariance: tuple
    cf_table: tuple
    ks_re: KSResult
    ks_im: KSResult
    radial_ks: KSResult
    verdicts: dict
    count: int = 0

    @property
    def cf_sup_gap(self):
        return max(row.gap for row in self.cf_table)

    @property
    def verdict(self):
        return "PASS" if all(self.verdicts.values()) else "FAIL"

    def to_dict(self):
        return {
            "count": self.count,
            "mean": [self.mean.real, self.mean.imag],
            "second_moment": self.second_moment,
            "covariance": [list(row) for row in self.covariance],
            "cf_table": [{"t": [r.t.real, r.t.imag], "value": [r.value.real, r.value.imag],
                          "target": r.target, "gap": r.gap} for r in self.cf_table],
            "ks_re": asdict(self.ks_re),
            "ks_im": asdict(self.ks_im),
            "radial_ks": asdict(self.radial_ks),
            "verdicts": dict(self.verdicts),
            "verdict": self.verdict,
        }

    @classmethod
    def from_dict(cls, data):
        return cls(
            mean=complex(*data["mean"]),
            second_moment=data["second_moment"],
            covariance=tuple(tuple(row) for row in data["covariance"]),
            cf_table=tuple(CFRow(t=complex(*r["t"]), value=complex(*r["value"]),
                                 target=r["target"], gap=r["gap"]) for r in data["cf_table"]),
            ks_re=KSResult(**data["ks_re"]),
            ks_im=KSResult(**data["ks_im"]),
            radial_ks=KSResult(**data["radial_ks"]),
            verdicts=dict(data["verdicts"]),
            count=data.get("count", 0),
        )


@weave.op()
def gaussian_tests(samples, t_grid=DEFAULT_T_GRID, thresholds=Thresholds()):
    """Moments, characteristic-function gaps and KS tests against the standard complex normal."""
    values = _values(samples)
    if values.size < MIN_SAMPLES:
        raise PreconditionError(f"need at least {MIN_SAMPLES} samples, got {values.size}")
    re, im = values.real, values.imag
    covariance = np.cov(np.vstack([re, im]), bias=True)
    table = cf_curve(values, t_grid)
    ks_re = _ks(re, "norm")
    ks_im = _ks(im, "norm")
    radial = _ks(np.abs(values) ** 2 / 2.0, "expon")
    in_radius = [row.gap for row in table if abs(row.t) <= thresholds.cf_radius * (1 + 1e-12)]
    verdicts = {
        "cf_gap": max(in_radius, default=0.0) < thresholds.cf_gap,
        "ks_re": ks_re.pvalue > thresholds.ks_pvalue,
        "ks_im": ks_im.pvalue > thresholds.ks_pvalue,
        "radial_ks": radial.pvalue > thresholds.ks_pvalue,
    }
    return GaussianReport(
        mean=complex(np.mean(values)),
        second_moment=float(np.mean(np.abs(values) ** 2)),
        covariance=tuple(tuple(float(x) for x in row) for row in covariance),
        cf_table=table, ks_re=ks_re, ks_im=ks_im, radial_ks=radial,
        verdicts=verdicts, count=int(values.size))


@dataclass(frozen=True)
class SweepRow:
    N: int
    second_moment: float
    cf_sup_gap: float
    ks_re: float
    ks_im: float
    radial_ks: float
    verdict: str


def sweep_row(N, report):
    return SweepRow(N=N, second_moment=report.second_moment, cf_sup_gap=report.cf_sup_gap,
                    ks_re=report.ks_re.statistic, ks_im=report.ks_im.statistic,
                    radial_ks=report.radial_ks.statistic, verdict=report.verdict)


@weave.op()
def sweep(config):
    """One row per N of the config: second moment, sup cf gap, KS statistics and verdict."""
    rows = []
    for N in config.N:
        report = gaussian_tests(simulate(config, N), config.t_grid, config.thresholds)
        rows.append(sweep_row(N, report))
        logger.info("sweep N=%d: E|T|^2=%.6f sup gap=%.4f %s", N, report.second_moment,
                    report.cf_sup_gap, report.verdict)
    return tuple(rows)


@dataclass(frozen=True)
class OptimalityRow:
    N: int
    growth_ratio: float
    verdict: str
    cf_sup_gap: float
    max_modulus: float
    modulus_bound: float


@weave.op()
def optimality_demo(f, N_list, M, seed, ratio=2.0, sampling_kind="mc", threads=1):
    """Runs the harness on a geometric sequence that violates the growth condition.

    Gaussian verdicts are expected to fail; the rows record them together with
    the growth ratio and the triangle-inequality bound on |T_N|.
    """
    seq = geometric(ratio)
    sampling = Sampling(kind=sampling_kind, M=M, seed=seed)
    config = ExperimentConfig(product=f, sequence=seq, N=tuple(N_list), sampling=sampling,
                              threads=threads)
    rows = []
    for N in config.N:
        samples = simulate(config, N)
        report = gaussian_tests(samples, config.t_grid, config.thresholds)
        bound = math.sqrt(2.0) * float(np.sum(np.abs(seq.values(1, N)))) / samples.sigma
        rows.append(OptimalityRow(N=N, growth_ratio=growth_ratio(seq, N), verdict=report.verdict,
                                  cf_sup_gap=report.cf_sup_gap,
                                  max_modulus=float(np.max(np.abs(samples.values))),
                                  modulus_bound=bound))
    return tuple(rows)
