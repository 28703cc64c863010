"""Monte Carlo for randomly weighted series and the estimators that check them.

Rows of a simulation are split into fixed-size chunks; chunk ``k`` draws from
its own stream ``SeedSequence(master, spawn_key=(k,))`` so results do not
depend on scheduling.  Inside a chunk, terms are drawn in index order, which
makes ``S_m`` monotone in ``m`` under a shared seed.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Sequence

import numpy as np
from scipy import stats

from . import kernels
from .errors import (
    DegenerateSampleError,
    DomainError,
    EmptySampleError,
    GridMismatchError,
    NoCertificateError,
    PreconditionError,
)
from .measures import TailMeasure, alpha_norm, oscillation_profile, product_convolve_tail
from .rng import chunk_bounds, stream
from .rv_core import RegVarLaw, TwoSidedLaw
from .weights import WeightLaw, WeightSequence, atoms as weight_atoms, explicit_sequence, iid_sequence

CHUNK_ROWS = 1 << 18
DEFAULT_TAIL_LEVELS = (1e-2, 1e-3, 1e-4)
MAX_TRUNCATION = 1 << 20


# ---------------------------------------------------------------------------
# truncation


@dataclass(frozen=True)
class TruncationCertificate:
    """``P[Σ_{t>m} Θ_t X_t⁺ > x_ref] <= bound`` by a p-th moment Markov bound."""

    m: int
    p: float
    bound: float
    x_ref: float
    epsilon: float


def _remainder_bound(seq: WeightSequence, x_mom: float, p: float, m: int, x_ref: float) -> float:
    if p <= 1.0:
        s = seq.tail_sum_bound(p, m)
        return math.inf if s is None else x_ref ** (-p) * x_mom * s
    s = seq.tail_sum_bound(p, m, pw=1.0 / p)
    return math.inf if s is None else x_ref ** (-p) * x_mom * s ** p


def _candidate_ps(alpha: float) -> list[float]:
    top = alpha * (1.0 - 1e-3)
    return sorted({round(alpha * k / 20.0, 12) for k in range(1, 20)} | {top}, reverse=True)


def truncation_level(seq: WeightSequence, x_law: RegVarLaw, p: float | None = None,
                     epsilon_trunc: float = 1e-3, x_ref: float = 1.0) -> TruncationCertificate:
    """Smallest ``m`` whose certified remainder probability is ``<= epsilon_trunc``.

    With ``p=None`` a grid of exponents in ``(0, alpha)`` is searched and the
    one giving the smallest ``m`` is kept.
    """
    if not x_ref > 0.0:
        raise DomainError("x_ref must be positive")
    if epsilon_trunc >= 1.0:
        return TruncationCertificate(0, float("nan") if p is None else p, 1.0, x_ref, epsilon_trunc)
    if not epsilon_trunc > 0.0:
        raise DomainError("epsilon_trunc must be positive")
    alpha = x_law.alpha
    ps = _candidate_ps(alpha) if p is None else [p]
    best: TruncationCertificate | None = None
    reasons = []
    for q in ps:
        if not 0.0 < q < alpha:
            reasons.append(f"p={q:g} is outside (0, alpha)")
            continue
        if seq.converges(q, 1.0 if q <= 1.0 else 1.0 / q) is not True:
            reasons.append(f"no summability certificate for E[Θ_t^{q:g}]")
            continue
        x_mom = x_law.moment(q)
        if seq.finite:
            limit = seq.length
        else:
            limit = 1
            while _remainder_bound(seq, x_mom, q, limit, x_ref) > epsilon_trunc:
                limit *= 2
                if limit > MAX_TRUNCATION:
                    break
            if limit > MAX_TRUNCATION:
                reasons.append(f"p={q:g} needs more than {MAX_TRUNCATION} terms")
                continue
        lo, hi = -1, limit
        while hi - lo > 1:
            mid = (lo + hi) // 2
            if _remainder_bound(seq, x_mom, q, mid, x_ref) <= epsilon_trunc:
                hi = mid
            else:
                lo = mid
        cert = TruncationCertificate(hi, q, _remainder_bound(seq, x_mom, q, hi, x_ref), x_ref, epsilon_trunc)
        if best is None or cert.m < best.m:
            best = cert
    if best is None:
        raise NoCertificateError("no certified truncation: " + "; ".join(reasons))
    return best


# ---------------------------------------------------------------------------
# simulation


@dataclass(frozen=True)
class SeriesSample:
    values: np.ndarray
    running_max_values: np.ndarray
    m: int
    truncation_bound: float = math.nan
    backend: str = kernels.BACKEND


def _split_zero_atom(law: WeightLaw) -> tuple[float, WeightLaw | None]:
    """Probability of ``Θ != 0`` and the conditional law given ``Θ != 0``."""
    if law.kind != "atoms" or not law.has_zero_atom:
        return 1.0, law
    pairs = [(v, p) for v, p in zip(law.values, law.probs) if v != 0.0 and p > 0.0]
    q = math.fsum(p for _, p in pairs)
    if q == 0.0:
        return 0.0, None
    return q, weight_atoms([v for v, _ in pairs], [p / q for _, p in pairs])


def _simulate_chunk(rng, x_law, laws, rows: int, comonotone: bool):
    m = len(laws)
    x_common = x_law.sample_with(rng, rows) if comonotone else None
    cols_theta, cols_x, cols_rows = [], [], []
    dense = True
    for law in laws:
        q, cond = _split_zero_atom(law)
        if q >= 1.0:
            idx = None
            k = rows
        else:
            dense = False
            k = int(rng.binomial(rows, q)) if q > 0.0 else 0
            idx = np.sort(rng.choice(rows, size=k, replace=False)) if k else np.empty(0, dtype=np.int64)
        th = cond.sample_with(rng, k) if k else np.empty(0)
        if comonotone:
            xv = x_common if idx is None else x_common[idx]
        else:
            xv = x_law.sample_with(rng, k) if k else np.empty(0)
        cols_theta.append(th)
        cols_x.append(xv)
        cols_rows.append(idx)
    if dense:
        theta = np.column_stack(cols_theta) if m else np.zeros((rows, 0))
        x = np.column_stack(cols_x) if m else np.zeros((rows, 0))
        pos, run_max = kernels.accumulate_series(np.ascontiguousarray(theta), np.ascontiguousarray(x))
        return pos, run_max
    # compact the nonzero terms of each row into consecutive columns, keeping index order
    row_ids = np.concatenate([np.arange(rows) if r is None else r for r in cols_rows])
    th_all = np.concatenate(cols_theta)
    x_all = np.concatenate(cols_x)
    order = np.argsort(row_ids, kind="stable")
    row_ids, th_all, x_all = row_ids[order], th_all[order], x_all[order]
    counts = np.bincount(row_ids, minlength=rows)
    width = int(counts.max()) if counts.size else 0
    starts = np.concatenate(([0], np.cumsum(counts)[:-1]))
    slot = np.arange(row_ids.size) - starts[row_ids]
    theta = np.zeros((rows, width))
    x = np.zeros((rows, width))
    theta[row_ids, slot] = th_all
    x[row_ids, slot] = x_all
    pos, run_max = kernels.accumulate_series(theta, x)
    # rows whose first term is zero have S_1 = 0 among their partial sums
    first_zero = np.ones(rows, dtype=bool)
    if cols_rows[0] is None:
        first_zero[:] = False
    else:
        first_zero[cols_rows[0]] = False
    run_max = np.where(first_zero, np.maximum(run_max, 0.0), run_max)
    return pos, run_max


def simulate_series(x_law, seq: WeightSequence, m: int, n: int, seed, *,
                    chunk_rows: int = CHUNK_ROWS, comonotone: bool = False,
                    truncation_bound: float = math.nan) -> SeriesSample:
    """``n`` realizations of ``S_m = Σ_{t<=m} Θ_t X_t⁺`` and the running maximum.

    ``comonotone=True`` uses one ``X`` per realization for every term (a
    deliberate contract violation for diagnostics).
    """
    if m < 1 or n < 1:
        raise DomainError("m and n must be at least 1")
    laws = [seq.law(t) for t in range(1, m + 1)]
    values = np.empty(n)
    run_max = np.empty(n)
    for unit, start, stop in chunk_bounds(n, chunk_rows):
        rng = stream(seed, unit)
        pos, rmax = _simulate_chunk(rng, x_law, laws, stop - start, comonotone)
        values[start:stop] = pos
        run_max[start:stop] = rmax
    return SeriesSample(values, run_max, m, truncation_bound)


# ---------------------------------------------------------------------------
# tail estimation


def clopper_pearson(k, n: int, level: float):
    """Exact binomial interval; one-sided at ``k = 0`` and ``k = n``."""
    k = np.asarray(k)
    a = 1.0 - level
    with np.errstate(invalid="ignore"):
        lo = np.where(k == 0, 0.0, stats.beta.ppf(a / 2.0, k, n - k + 1))
        hi = np.where(k == n, 1.0, stats.beta.ppf(1.0 - a / 2.0, k + 1, n - k))
        lo = np.where(k == n, a ** (1.0 / n), lo)
        hi = np.where(k == 0, 1.0 - a ** (1.0 / n), hi)
    return lo, hi


@dataclass(frozen=True)
class TailEstimate:
    x_levels: np.ndarray
    p_hat: np.ndarray
    ci_low: np.ndarray
    ci_high: np.ndarray
    n: int
    counts: np.ndarray
    ci_level: float

    def brackets(self, values) -> np.ndarray:
        v = np.asarray(values, dtype=float)
        return (self.ci_low <= v) & (v <= self.ci_high)


def empirical_tail(sample, x_levels, ci_level: float = 0.99) -> TailEstimate:
    s = np.ascontiguousarray(sample, dtype=np.float64)
    if s.size == 0:
        raise EmptySampleError("empirical tail of an empty sample")
    if not 0.0 < ci_level < 1.0:
        raise DomainError("ci_level must lie in (0, 1)")
    xs = np.ascontiguousarray(x_levels, dtype=np.float64)
    counts = np.asarray(kernels.exceedance_counts(s.ravel(), xs))
    n = s.size
    lo, hi = clopper_pearson(counts, n, ci_level)
    return TailEstimate(xs, counts / n, lo, hi, n, counts, ci_level)


@dataclass(frozen=True)
class RatioCurve:
    x_levels: np.ndarray
    ratio: np.ndarray
    low: np.ndarray
    high: np.ndarray

    def brackets(self, value) -> np.ndarray:
        return (self.low <= value) & (value <= self.high)


def tail_ratio(numerator: TailEstimate, denominator) -> RatioCurve:
    """Pointwise ratio; intervals by dividing CI endpoints.

    ``denominator`` is a :class:`TailEstimate`, a callable tail, or an array
    of values on ``numerator.x_levels``.
    """
    xs = numerator.x_levels
    if isinstance(denominator, TailEstimate):
        if denominator.x_levels.shape != xs.shape or not np.array_equal(denominator.x_levels, xs):
            raise GridMismatchError("numerator and denominator use different x grids")
        d, d_lo, d_hi = denominator.p_hat, denominator.ci_low, denominator.ci_high
    else:
        d = np.asarray(denominator(xs) if callable(denominator) else denominator, dtype=float)
        if d.shape != xs.shape:
            raise GridMismatchError("denominator values do not match the x grid")
        d_lo = d_hi = d
    if np.any(d <= 0.0) or np.any(d_lo <= 0.0):
        raise PreconditionError("denominator vanishes on the grid")
    return RatioCurve(xs, numerator.p_hat / d, numerator.ci_low / d_hi, numerator.ci_high / d_lo)


# ---------------------------------------------------------------------------
# Hill


@dataclass(frozen=True)
class HillEstimate:
    k: int
    alpha_hat: float
    se: float


def hill(sample, k: int) -> HillEstimate:
    s = np.asarray(sample, dtype=float).ravel()
    n = s.size
    if k < 10 or k >= n:
        raise PreconditionError(f"Hill needs 10 <= k < n (k={k}, n={n})")
    top = np.sort(np.partition(s, n - k - 1)[n - k - 1:])[::-1]
    if top[-1] <= 0.0:
        raise DegenerateSampleError("top order statistics must be positive")
    logs = np.log(top)
    total = math.fsum(logs[:k] - logs[k])
    if total <= 0.0:
        raise DegenerateSampleError("top order statistics are tied; Hill statistic is zero")
    a = k / total
    return HillEstimate(k, a, a / math.sqrt(k))


@dataclass(frozen=True)
class HillSweep:
    estimates: tuple
    spread: float
    agree: bool

    @property
    def central(self) -> HillEstimate:
        return self.estimates[1]


def hill_sweep(sample, k: int | None = None, n_se: float = 3.0) -> HillSweep:
    """Hill at ``k/2, k, 2k`` (default ``k = ceil(n**0.6)``).

    ``agree`` when every estimate lies within ``n_se`` standard errors of the
    central one (using the larger of the two standard errors).
    """
    n = np.size(sample)
    k0 = int(math.ceil(n ** 0.6)) if k is None else int(k)
    ks = [max(10, k0 // 2), k0, min(2 * k0, n - 1)]
    ests = tuple(hill(sample, kk) for kk in ks)
    c = ests[1]
    spread = max(e.alpha_hat for e in ests) - min(e.alpha_hat for e in ests)
    agree = all(abs(e.alpha_hat - c.alpha_hat) <= n_se * max(e.se, c.se) for e in ests)
    return HillSweep(ests, spread, agree)


# ---------------------------------------------------------------------------
# diagnostics


@dataclass(frozen=True)
class DiagnosticCurve:
    x_levels: np.ndarray
    ratio: np.ndarray
    low: np.ndarray
    high: np.ndarray
    flag: bool
    note: str = ""


def asymp_indep_diag(pair_sampler: Callable, x_levels, n: int, seed, ci_level: float = 0.99,
                     threshold: float = 0.25) -> DiagnosticCurve:
    """Empirical ``P[X1>x, X2>x] / P[X1>x]`` with conditional binomial intervals.

    The flag is raised ("consistent with asymptotic independence") when the
    upper bound is below ``threshold`` at the last estimable level and the
    point estimate there is no larger than at the first level.  Upper bounds
    themselves widen as exceedances thin out, so they are not required to fall.
    """
    if n < 1:
        raise DomainError("n must be at least 1")
    x1, x2 = pair_sampler(stream(seed), n)
    x1, x2 = np.asarray(x1, dtype=float), np.asarray(x2, dtype=float)
    xs = np.asarray(x_levels, dtype=float)
    n1 = np.array([np.count_nonzero(x1 > x) for x in xs])
    both = np.array([np.count_nonzero((x1 > x) & (x2 > x)) for x in xs])
    ratio = np.full(xs.shape, np.nan)
    lo = np.zeros(xs.shape)
    hi = np.ones(xs.shape)
    for i in range(xs.size):
        if n1[i]:
            ratio[i] = both[i] / n1[i]
            lo[i], hi[i] = (float(v) for v in clopper_pearson(both[i], int(n1[i]), ci_level))
    ok = n1 > 0
    flag = bool(ok.any() and hi[ok][-1] < threshold and ratio[ok][-1] <= ratio[ok][0])
    return DiagnosticCurve(xs, ratio, lo, hi, flag)


def _theta_pairs(theta) -> list[tuple[float, float]]:
    if theta is None:
        return [(1.0, 1.0)]
    if isinstance(theta, WeightLaw) and theta.kind == "atoms":
        return [(v, p) for v, p in zip(theta.values, theta.probs) if v > 0.0 and p > 0.0]
    raise PreconditionError("analytic left-tail diagnostics need an atomic weight law")


def left_tail_diag(law_or_sample, u: float, x_levels, theta: WeightLaw | None = None,
                   threshold: float = 0.05) -> DiagnosticCurve:
    """``P[ΘX < -u x] / P[ΘX > x]`` analytically (law) or empirically (signed sample).

    The flag means "left tail negligible": ratio nonincreasing and below
    ``threshold`` at the last level.
    """
    if not u > 0.0:
        raise DomainError("u must be positive")
    xs = np.asarray(x_levels, dtype=float)
    if isinstance(law_or_sample, (RegVarLaw, TwoSidedLaw)):
        law = law_or_sample
        pairs = _theta_pairs(theta)
        left = sum(p * np.asarray(law.left_tail(u * xs / v)) for v, p in pairs)
        right = sum(p * np.asarray(law.tail(xs / v)) for v, p in pairs)
        with np.errstate(divide="ignore", invalid="ignore"):
            ratio = np.where(right > 0.0, left / right, np.nan)
        lo = hi = ratio
    else:
        s = np.asarray(law_or_sample, dtype=float)
        if s.size == 0:
            raise EmptySampleError("left-tail diagnostic of an empty sample")
        left = np.array([np.count_nonzero(s < -u * x) for x in xs])
        right = np.array([np.count_nonzero(s > x) for x in xs])
        with np.errstate(divide="ignore", invalid="ignore"):
            ratio = np.where(right > 0, left / np.maximum(right, 1), np.nan)
        lo = hi = ratio
    fin = np.isfinite(ratio)
    flag = bool(fin.any() and ratio[fin][-1] < threshold and np.all(np.diff(ratio[fin]) <= 1e-12))
    return DiagnosticCurve(xs, ratio, lo, hi, flag)


# ---------------------------------------------------------------------------
# experiments


def default_levels(comparison_tail_isf: Callable[[float], float], probs=DEFAULT_TAIL_LEVELS) -> np.ndarray:
    return np.array([float(comparison_tail_isf(q)) for q in probs])


@dataclass
class FiniteSumReport:
    target_constant: float
    x_levels: np.ndarray
    sum_tail: TailEstimate
    max_tail: TailEstimate
    target: np.ndarray
    sum_ratio: RatioCurve
    max_ratio: RatioCurve
    curves_agree: bool
    brackets_target: np.ndarray
    flags: dict = field(default_factory=dict)

    def table(self):
        """Rows ``(curve, x_level, p_hat, ci_low, ci_high, target, ratio)``."""
        for name, est, rc in (("sum", self.sum_tail, self.sum_ratio), ("max", self.max_tail, self.max_ratio)):
            for i, x in enumerate(self.x_levels):
                yield (name, float(x), float(est.p_hat[i]), float(est.ci_low[i]), float(est.ci_high[i]),
                       float(self.target[i]), float(rc.ratio[i]))


def finite_sum_experiment(x_law, seq: WeightSequence, n_terms: int, n: int, seed, x_levels=None,
                          ci_level: float = 0.99, comonotone: bool = False,
                          chunk_rows: int = CHUNK_ROWS) -> FiniteSumReport:
    """Tail of ``Σ Θ_t X_t⁺`` and of the running maximum against ``Σ E[Θ_t^α] P[X>x]``."""
    alpha = x_law.alpha
    const = math.fsum(float(np.real(seq.law(t).moment(alpha))) for t in range(1, n_terms + 1))
    if x_levels is None:
        x_levels = default_levels(lambda q: x_law.isf(min(q / const, 1.0)) if hasattr(x_law, "isf")
                                  else math.nan)
    xs = np.asarray(x_levels, dtype=float)
    sample = simulate_series(x_law, seq, n_terms, n, seed, comonotone=comonotone, chunk_rows=chunk_rows)
    s_tail = empirical_tail(sample.values, xs, ci_level)
    m_tail = empirical_tail(sample.running_max_values, xs, ci_level)
    target = const * np.asarray(x_law.tail(xs))
    agree = bool(np.all((s_tail.ci_low <= m_tail.ci_high) & (m_tail.ci_low <= s_tail.ci_high)))
    flags = {"comonotone": comonotone}
    if comonotone and n_terms >= 2:
        flags["out_of_contract"] = "X_t share one draw; pairwise asymptotic independence is violated"
        diag = asymp_indep_diag(lambda rng, k: (lambda z: (z, z))(x_law.sample_with(rng, k)),
                                xs, min(n, 10**5), seed)
        flags["asymptotic_independence"] = diag.flag
    return FiniteSumReport(const, xs, s_tail, m_tail, target, tail_ratio(s_tail, target),
                           tail_ratio(m_tail, target), agree, s_tail.brackets(target), flags)


def rho_to_sequence(rho: TailMeasure, interpretation: str = "auto") -> WeightSequence:
    """Weights from a finite atomic ``rho``.

    ``single``: one ``Θ`` with law ``rho`` (needs total mass 1).
    ``per_atom``: ``Θ_t = v_t`` with probability ``m_t`` and 0 otherwise, so
    ``Σ_t P[Θ_t ∈ ·] = rho`` (needs every mass ``<= 1``).
    """
    if not rho.is_atomic or not rho.atoms:
        raise PreconditionError("rho must be a finite atomic measure")
    total = rho.atom_mass
    if interpretation == "auto":
        interpretation = "single" if abs(total - 1.0) <= 1e-12 else "per_atom"
    if interpretation == "single":
        if abs(total - 1.0) > 1e-12:
            raise PreconditionError("a single weight needs rho to have total mass 1")
        return iid_sequence(weight_atoms([v for v, _ in rho.atoms], [m / total for _, m in rho.atoms]), 1)
    if interpretation == "per_atom":
        laws = []
        for v, m in rho.atoms:
            if m > 1.0:
                raise PreconditionError("per-atom weights need every atom mass <= 1")
            laws.append(weight_atoms([v], [1.0]) if m == 1.0 else weight_atoms([v, 0.0], [m, 1.0 - m]))
        return explicit_sequence(laws)
    raise DomainError("interpretation must be auto, single or per_atom")


@dataclass
class ConverseReport:
    alpha: float
    norm: float
    x_levels: np.ndarray
    tail: TailEstimate
    exact: np.ndarray
    ratio: RatioCurve
    flat: bool
    hill: HillSweep
    mu_profile: object
    n_terms: int

    def table(self):
        for i, x in enumerate(self.x_levels):
            yield (float(x), float(self.tail.p_hat[i]), float(self.tail.ci_low[i]), float(self.tail.ci_high[i]),
                   float(self.exact[i]), float(self.ratio.ratio[i]))


def converse_experiment(mu: TailMeasure, rho: TailMeasure, n: int, seed, x_levels=None,
                        ci_level: float = 0.99, interpretation: str = "auto",
                        profile_grid=None, chunk_rows: int = CHUNK_ROWS) -> ConverseReport:
    """Sample ``X ~ mu``, form ``Σ Θ_t X_t`` and compare with ``||rho||_α x^{-α}``."""
    if n < 1:
        raise DomainError("n must be at least 1")
    if mu.alpha is None:
        raise PreconditionError("mu must carry its index alpha")
    alpha = mu.alpha
    seq = rho_to_sequence(rho, interpretation)
    norm = alpha_norm(rho, alpha)
    xs = (np.geomspace(10.0, 1000.0, 5) if x_levels is None else np.asarray(x_levels, dtype=float))

    sample = simulate_series(mu, seq, seq.length, n, seed, chunk_rows=chunk_rows)
    tail = empirical_tail(sample.values, xs, ci_level)
    base = np.power(xs, -alpha)
    ratio = tail_ratio(tail, base)
    exact = np.asarray(product_convolve_tail(mu, rho, xs))
    flat = bool(np.all(ratio.brackets(norm)))
    grid = np.geomspace(1.0, 1e6, 200) if profile_grid is None else profile_grid
    sweep = hill_sweep(sample.values)
    return ConverseReport(alpha, norm, xs, tail, exact, ratio, flat, sweep,
                          oscillation_profile(mu, alpha, grid), seq.length)


# ---------------------------------------------------------------------------
# exact Bonferroni checks on enumerable toy models


@dataclass(frozen=True)
class ToyTerm:
    """``Θ`` and ``X`` as nonnegative integer atoms with integer weights over a denominator."""

    theta_values: tuple
    theta_weights: tuple
    x_values: tuple
    x_weights: tuple

    def product_law(self) -> tuple[np.ndarray, np.ndarray, int]:
        vals, wts = [], []
        for tv, tw in zip(self.theta_values, self.theta_weights):
            for xv, xw in zip(self.x_values, self.x_weights):
                vals.append(tv * xv)
                wts.append(tw * xw)
        return np.array(vals, dtype=np.int64), np.array(wts, dtype=np.int64), \
            sum(self.theta_weights) * sum(self.x_weights)


@dataclass(frozen=True)
class BonferroniCheck:
    x: Fraction
    exact: Fraction
    lower: Fraction
    upper: Fraction

    @property
    def ok(self) -> bool:
        return self.lower <= self.exact <= self.upper


def random_toy_model(rng: np.random.Generator, max_terms: int = 4, max_atoms: int = 3,
                     denominator: int = 12) -> tuple[ToyTerm, ...]:
    def composition(k):
        cuts = np.sort(rng.choice(np.arange(1, denominator), size=k - 1, replace=False))
        return tuple(int(v) for v in np.diff(np.concatenate(([0], cuts, [denominator]))))

    terms = []
    for _ in range(int(rng.integers(2, max_terms + 1))):
        kt = int(rng.integers(1, max_atoms + 1))
        kx = int(rng.integers(1, max_atoms + 1))
        tv = tuple(int(v) for v in rng.choice(np.arange(0, 6), size=kt, replace=False))
        xv = tuple(int(v) for v in rng.choice(np.arange(1, 21), size=kx, replace=False))
        terms.append(ToyTerm(tv, composition(kt), xv, composition(kx)))
    return tuple(terms)


def _exceed(vals, wts, den, level: Fraction) -> Fraction:
    return Fraction(int(wts[vals > math.floor(level)].sum()), den) if level >= 0 else Fraction(1)


def bonferroni_check(model: Sequence[ToyTerm], x, delta: Fraction = Fraction(3, 4),
                     literal_upper: bool = False) -> BonferroniCheck:
    """Exact probabilities for ``P[Σ Θ_t X_t > x]`` and both Bonferroni bounds.

    Lower: ``Σ P[Y_t>x] - Σ_{s≠t} P[Y_s>x, Y_t>x]``.  Upper (``m >= 2``):
    ``Σ P[Y_t>δx] + Σ_{s≠t} P[Y_s>c, Y_t>c]`` with ``c = (1-δ)x/(m-1)``.
    ``literal_upper=True`` uses ``P[Y_t>x]`` in the first sum instead (not a
    valid bound in general; kept to exhibit counterexamples).
    """
    x = Fraction(x)
    laws = [t.product_law() for t in model]
    m = len(laws)
    # joint law of the sum by full enumeration
    sums = np.zeros(1, dtype=np.int64)
    weights = np.ones(1, dtype=np.int64)
    den = 1
    for vals, wts, d in laws:
        sums = (sums[:, None] + vals[None, :]).ravel()
        weights = (weights[:, None] * wts[None, :]).ravel()
        den *= d
    exact = Fraction(int(weights[sums > math.floor(x)].sum()), den)

    def pair(s, t, level):
        vs, ws, ds = laws[s]
        vt, wt, dt = laws[t]
        both = (vs[:, None] > math.floor(level)) & (vt[None, :] > math.floor(level))
        return Fraction(int((ws[:, None] * wt[None, :])[both].sum()), ds * dt)

    singles = [_exceed(v, w, d, x) for v, w, d in laws]
    pairs_x = [pair(s, t, x) for s in range(m) for t in range(m) if s != t]
    lower = sum(singles, Fraction(0)) - sum(pairs_x, Fraction(0))
    if m == 1:
        upper = singles[0] if literal_upper else _exceed(*laws[0], delta * x)
    else:
        c = (1 - delta) * x / (m - 1)
        first = singles if literal_upper else [_exceed(v, w, d, delta * x) for v, w, d in laws]
        upper = sum(first, Fraction(0)) + sum((pair(s, t, c) for s in range(m) for t in range(m) if s != t),
                                              Fraction(0))
    return BonferroniCheck(x, exact, lower, upper)


def toy_levels(model: Sequence[ToyTerm], count: int = 24) -> list[Fraction]:
    """Test levels: single-term atoms, their δ-rescalings and a spread up to the max sum."""
    atoms_ = sorted({int(v) for t in model for v in t.product_law()[0]})
    top = sum(max(t.product_law()[0]) for t in model)
    lv = {Fraction(a) for a in atoms_} | {Fraction(4 * a, 3) for a in atoms_}
    lv |= {Fraction(top * k, count) for k in range(count + 1)}
    return sorted(v for v in lv if v >= 0)
