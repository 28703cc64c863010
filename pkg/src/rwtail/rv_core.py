"""Regularly varying laws on (0, inf).

A law is described by its tail ``F̄(x) = x**-alpha * L(x)`` where ``L`` is a
slowly varying function given in one of the four Karamata forms::

    type 1   L(x) = c(x)
    type 2   L(x) = c(x) / P[V > log x]
    type 3   L(x) = c(x) * P[U > log x]
    type 4   L(x) = c(x) * P[U > log x] / P[V > log x]

with ``c(x) -> c in (0, inf)`` and ``U``, ``V`` long-tailed.  All mass sits on
``[x_min, inf)``; the tail is clipped at 1 so that quantiles have closed forms
whenever ``L`` is constant.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Mapping

import numpy as np
from scipy import integrate, special

from .errors import ConfigurationError, DomainError, NonConvergenceError, PreconditionError
from .rng import stream

CERTIFICATE_KEYS = (
    "long_tailed",
    "hazard_rate_to_zero",
    "in_S_star",
    "in_S_d_after_exp",
    "infinite_mean",
    "dominated_variation",
)

QUANTILE_ULPS = 4
QUANTILE_MAX_ITER = 200
MOMENT_ABS_TOL = 1e-10


def _scalar_or_array(values, like):
    if np.ndim(like) == 0:
        return float(np.asarray(values).item())
    return values


# ---------------------------------------------------------------------------
# long-tailed components


@dataclass(frozen=True)
class LongTailedComponent:
    """A long-tailed random variable used inside a slowly varying function.

    Membership in the heavy-tail classes is declared, never inferred: the
    ``certificates`` mapping carries literature defaults for the built-in
    families and whatever the caller asserts for custom ones.
    """

    family: str
    params: Mapping[str, float]
    tail_fn: Callable[[np.ndarray], np.ndarray] = field(repr=False, compare=False)
    certificates: Mapping[str, bool | None] = field(default_factory=dict)

    def tail(self, y):
        y_arr = np.asarray(y, dtype=float)
        out = np.where(y_arr < 0.0, 1.0, self.tail_fn(np.maximum(y_arr, 0.0)))
        return _scalar_or_array(out, y)

    def certified(self, key: str) -> bool | None:
        return self.certificates.get(key)

    @classmethod
    def weibull(cls, shape: float, scale: float = 1.0) -> "LongTailedComponent":
        if not 0.0 < shape < 1.0:
            raise ConfigurationError("Weibull component needs shape in (0, 1) to be long-tailed")
        if scale <= 0.0:
            raise ConfigurationError("Weibull scale must be positive")

        def tail_fn(y):
            return np.exp(-np.power(y / scale, shape))

        certs = dict(long_tailed=True, hazard_rate_to_zero=True, in_S_star=True,
                     in_S_d_after_exp=True, infinite_mean=False, dominated_variation=False)
        return cls("weibull", {"shape": shape, "scale": scale}, tail_fn, certs)

    @classmethod
    def lognormal(cls, mu: float = 0.0, sigma: float = 1.0) -> "LongTailedComponent":
        if sigma <= 0.0:
            raise ConfigurationError("lognormal sigma must be positive")

        def tail_fn(y):
            with np.errstate(divide="ignore"):
                z = (np.log(y) - mu) / sigma
            return special.ndtr(-z)

        certs = dict(long_tailed=True, hazard_rate_to_zero=True, in_S_star=True,
                     in_S_d_after_exp=True, infinite_mean=False, dominated_variation=False)
        return cls("lognormal", {"mu": mu, "sigma": sigma}, tail_fn, certs)

    @classmethod
    def lomax(cls, index: float, scale: float = 1.0) -> "LongTailedComponent":
        """``P[W > y] = (1 + y/scale)**-index``; hazard ``index/(scale + y)``."""
        if index <= 0.0 or scale <= 0.0:
            raise ConfigurationError("Lomax index and scale must be positive")

        def tail_fn(y):
            return (1.0 + y / scale) ** -index

        certs = dict(long_tailed=True, hazard_rate_to_zero=True, in_S_star=index > 1.0,
                     in_S_d_after_exp=index > 1.0, infinite_mean=index <= 1.0,
                     dominated_variation=True)
        return cls("lomax", {"index": index, "scale": scale}, tail_fn, certs)

    @classmethod
    def custom(cls, tail_fn, **certificates) -> "LongTailedComponent":
        unknown = set(certificates) - set(CERTIFICATE_KEYS)
        if unknown:
            raise ConfigurationError(f"unknown certificate keys: {sorted(unknown)}")
        return cls("custom", {}, lambda y: np.asarray(tail_fn(y), dtype=float), dict(certificates))


# ---------------------------------------------------------------------------
# slowly varying functions


@dataclass(frozen=True)
class SlowlyVaryingSpec:
    variant: int
    c_fn: Callable[[np.ndarray], np.ndarray] | None = field(default=None, repr=False, compare=False)
    c_limit: float = 1.0
    u: LongTailedComponent | None = None
    v: LongTailedComponent | None = None

    def __post_init__(self):
        if self.variant not in (1, 2, 3, 4):
            raise ConfigurationError(f"variant must be 1..4, got {self.variant!r}")
        if not (0.0 < self.c_limit < math.inf):
            raise ConfigurationError("c_limit must lie in (0, inf)")
        if self.variant in (3, 4) and self.u is None:
            raise ConfigurationError(f"type {self.variant} needs a U component")
        if self.variant in (2, 4) and self.v is None:
            raise ConfigurationError(f"type {self.variant} needs a V component")

    @property
    def is_constant(self) -> bool:
        return self.variant == 1 and self.c_fn is None

    def c(self, x):
        if self.c_fn is None:
            return np.full(np.shape(x), self.c_limit, dtype=float)
        return np.asarray(self.c_fn(np.asarray(x, dtype=float)), dtype=float)

    def evaluate(self, x):
        """L(x) without the domain check (callers guarantee x >= 1)."""
        x_arr = np.asarray(x, dtype=float)
        out = self.c(x_arr)
        logx = np.log(np.maximum(x_arr, 1.0))
        if self.variant in (3, 4):
            out = out * self.u.tail(logx)
        if self.variant in (2, 4):
            out = out / self.v.tail(logx)
        return _scalar_or_array(out, x)

    def log_at_log(self, s):
        """``log L(e**s)`` computed without forming ``e**s``."""
        s_arr = np.maximum(np.asarray(s, dtype=float), 0.0)
        if self.c_fn is None:
            out = np.full(s_arr.shape, math.log(self.c_limit))
        else:
            with np.errstate(over="ignore"):
                big = s_arr > 700.0
                cx = self.c(np.exp(np.where(big, 0.0, s_arr)))
            out = np.where(big, math.log(self.c_limit), np.log(cx))
        with np.errstate(divide="ignore"):
            if self.variant in (3, 4):
                out = out + np.log(self.u.tail(s_arr))
            if self.variant in (2, 4):
                out = out - np.log(self.v.tail(s_arr))
        return _scalar_or_array(out, s)


def sv_eval(spec: SlowlyVaryingSpec, x):
    """Evaluate the slowly varying function ``L`` at ``x >= 1``."""
    if np.any(np.asarray(x, dtype=float) < 1.0):
        raise DomainError("slowly varying functions are evaluated on x >= 1")
    return spec.evaluate(x)


# ---------------------------------------------------------------------------
# regularly varying laws


@dataclass(frozen=True)
class RegVarLaw:
    """Positive law with regularly varying tail of index ``-alpha``."""

    alpha: float
    sv: SlowlyVaryingSpec
    x_min: float = 1.0
    family: str = "custom"
    params: Mapping[str, float] = field(default_factory=dict)

    def __post_init__(self):
        if not self.alpha > 0.0:
            raise DomainError("alpha must be positive")
        if not self.x_min > 0.0:
            raise DomainError("x_min must be positive")
        if not self.sv.is_constant and self.x_min < 1.0:
            raise ConfigurationError("non-constant slowly varying parts need x_min >= 1")

    # -- tails ------------------------------------------------------------
    def tail(self, x):
        """``P[X > x]``."""
        # always 1-d: numpy's scalar and vector transcendental paths can differ by an ulp
        x_arr = np.atleast_1d(np.asarray(x, dtype=float))
        safe = np.maximum(x_arr, self.x_min)
        with np.errstate(over="ignore", under="ignore"):
            body = np.minimum(1.0, np.power(safe, -self.alpha) * self.sv.evaluate(safe))
        out = np.where(x_arr < self.x_min, 1.0, body)
        return _scalar_or_array(out, x)

    def log_tail_at_log(self, s):
        """``log P[X > e**s]`` without overflow for large ``s``."""
        s_arr = np.atleast_1d(np.asarray(s, dtype=float))
        s0 = math.log(self.x_min)
        safe = np.maximum(s_arr, s0)
        body = np.minimum(0.0, -self.alpha * safe + self.sv.log_at_log(safe))
        return _scalar_or_array(np.where(s_arr < s0, 0.0, body), s)

    def _log_integrand(self, p):
        def f(s):
            return p * math.exp(p * s + self.log_tail_at_log(s))
        return f

    def left_tail(self, x):
        """``P[X < -x]``: identically zero for a positive law."""
        return _scalar_or_array(np.zeros(np.shape(x)), x)

    def cdf(self, x):
        return _scalar_or_array(1.0 - np.asarray(self.tail(x)), x)

    # -- inversion --------------------------------------------------------
    def isf(self, q):
        """Smallest ``x`` with ``P[X > x] <= q`` for ``q`` in (0, 1]."""
        q_arr = np.atleast_1d(np.asarray(q, dtype=float))
        if np.any((q_arr <= 0.0) | (q_arr > 1.0)):
            raise DomainError("tail level must lie in (0, 1]")
        top = self.tail(self.x_min)
        out = np.full(q_arr.shape, self.x_min)
        need = q_arr < top
        if np.any(need):
            if self.sv.is_constant:
                c = self.sv.c_limit
                x = np.maximum(self.x_min, (c / q_arr[need]) ** (1.0 / self.alpha))
                for _ in range(64):  # rounding can leave the closed form a few ulps short
                    short = np.asarray(self.tail(x)) > q_arr[need]
                    if not np.any(short):
                        break
                    x = np.where(short, np.nextafter(x, np.inf), x)
                out[need] = x
            else:
                out[need] = self._isf_bisect(q_arr[need])
        return _scalar_or_array(out, q) if np.ndim(q) == 0 else out

    def _isf_bisect(self, q):
        lo = np.full(q.shape, math.log(self.x_min))
        step = np.ones(q.shape)
        hi = lo + step
        it = 0
        while True:
            above = self.tail(np.exp(hi)) > q
            if not np.any(above):
                break
            lo = np.where(above, hi, lo)
            step = np.where(above, 2.0 * step, step)
            hi = np.where(above, hi + step, hi)
            it += 1
            if it > QUANTILE_MAX_ITER or np.any(~np.isfinite(np.exp(hi[above]))):
                raise NonConvergenceError("could not bracket quantile")
        # stop when the bracket is a few ulps wide in x (or cannot be split in log space)
        while True:
            x_lo, x_hi = np.exp(lo), np.exp(hi)
            mid = 0.5 * (lo + hi)
            open_ = (x_hi - x_lo > QUANTILE_ULPS * np.spacing(x_hi)) & (mid > lo) & (mid < hi)
            if not np.any(open_):
                break
            above = self.tail(np.exp(mid)) > q
            lo = np.where(open_ & above, mid, lo)
            hi = np.where(open_ & ~above, mid, hi)
            it += 1
            if it > QUANTILE_MAX_ITER:
                raise NonConvergenceError("quantile bisection exceeded iteration cap")
        return np.exp(hi)

    def quantile(self, p):
        """Smallest ``x`` with ``F(x) >= p`` for ``p`` in [0, 1)."""
        p_arr = np.asarray(p, dtype=float)
        if np.any((p_arr < 0.0) | (p_arr >= 1.0)):
            raise DomainError("probability must lie in [0, 1)")
        return self.isf(1.0 - p_arr)

    def sample(self, n: int, seed) -> np.ndarray:
        """``n`` i.i.d. draws by inverse transform."""
        if n < 1:
            raise PreconditionError("n must be at least 1")
        rng = stream(seed)
        q = 1.0 - rng.random(n)
        return np.asarray(self.isf(q), dtype=float)

    def sample_with(self, rng: np.random.Generator, n: int) -> np.ndarray:
        if n == 0:
            return np.empty(0)
        return np.asarray(self.isf(1.0 - rng.random(n)), dtype=float)

    # -- moments ----------------------------------------------------------
    def moment(self, p: float) -> float:
        """``E[X**p]`` for ``0 <= p``; infinite moments raise."""
        if p < 0.0:
            raise DomainError("only nonnegative moments are supported")
        if p == 0.0:
            return 1.0
        if self.sv.is_constant and self.tail(self.x_min) == 1.0:
            if p >= self.alpha:
                raise DomainError(f"E[X^{p}] is infinite for tail index {self.alpha}")
            c = self.sv.c_limit
            return self.x_min ** p + p * c / (self.alpha - p) * self.x_min ** (p - self.alpha)
        if p > self.alpha:
            raise DomainError(f"E[X^{p}] is infinite for tail index {self.alpha}")
        s0 = math.log(self.x_min)
        val, err = integrate.quad(self._log_integrand(p), s0, np.inf,
                                  epsabs=MOMENT_ABS_TOL, limit=400)
        if not math.isfinite(val) or err > 1e-6 * max(1.0, abs(val)):
            raise NonConvergenceError(f"E[X^{p}] quadrature did not converge (err={err:.3g})")
        return self.x_min ** p + val

    def to_config(self) -> dict:
        if self.family == "custom":
            raise ConfigurationError("custom laws have no declarative form")
        return {"family": self.family, "alpha": self.alpha, "x_min": self.x_min, **dict(self.params)}


# ---------------------------------------------------------------------------
# built-in families


def pareto(alpha: float, x_min: float = 1.0) -> RegVarLaw:
    """``P[X > x] = (x / x_min)**-alpha`` for ``x >= x_min``."""
    if not alpha > 0.0:
        raise DomainError("alpha must be positive")
    sv = SlowlyVaryingSpec(1, c_limit=x_min ** alpha)
    return RegVarLaw(alpha, sv, x_min, family="pareto")


def weibull_log_law(alpha: float, shape: float = 0.5, scale: float = 1.0) -> RegVarLaw:
    """Type 3 law with ``L(x) = exp(-(log x / scale)**shape)``.

    With the default ``shape=0.5`` this is ``L(x) = exp(-sqrt(log x))``, for
    which ``E[X**alpha]`` is finite and ``L`` decays to zero.
    """
    sv = SlowlyVaryingSpec(3, u=LongTailedComponent.weibull(shape, scale))
    return RegVarLaw(alpha, sv, 1.0, family="weibull_log",
                     params={"shape": shape, "scale": scale})


def log_pareto_law(alpha: float, gamma: float, variant: int = 3, scale: float = 1.0) -> RegVarLaw:
    """``L(x) = (1 + log(x)/scale)**(-gamma)`` (type 3) or ``**(+gamma)`` (type 2)."""
    comp = LongTailedComponent.lomax(gamma, scale)
    if variant == 3:
        sv = SlowlyVaryingSpec(3, u=comp)
    elif variant == 2:
        sv = SlowlyVaryingSpec(2, v=comp)
    else:
        raise ConfigurationError("log_pareto_law supports variant 2 or 3")
    return RegVarLaw(alpha, sv, 1.0, family="log_pareto",
                     params={"gamma": gamma, "variant": variant, "scale": scale})


def lognormal_log_law(alpha: float, mu: float = 0.0, sigma: float = 1.0) -> RegVarLaw:
    """Type 3 law with ``L(x) = P[exp(N(mu, sigma)) > log x]``."""
    sv = SlowlyVaryingSpec(3, u=LongTailedComponent.lognormal(mu, sigma))
    return RegVarLaw(alpha, sv, 1.0, family="lognormal_log", params={"mu": mu, "sigma": sigma})


_FAMILIES = {
    "pareto": lambda cfg: pareto(cfg["alpha"], cfg.get("x_min", 1.0)),
    "weibull_log": lambda cfg: weibull_log_law(cfg["alpha"], cfg.get("shape", 0.5), cfg.get("scale", 1.0)),
    "log_pareto": lambda cfg: log_pareto_law(cfg["alpha"], cfg["gamma"], int(cfg.get("variant", 3)),
                                             cfg.get("scale", 1.0)),
    "lognormal_log": lambda cfg: lognormal_log_law(cfg["alpha"], cfg.get("mu", 0.0), cfg.get("sigma", 1.0)),
}

FAMILY_NAMES = tuple(_FAMILIES)


def law_from_config(cfg: Mapping) -> RegVarLaw:
    family = cfg.get("family")
    if family not in _FAMILIES:
        raise ConfigurationError(f"unknown law family {family!r}; expected one of {FAMILY_NAMES}")
    if "alpha" not in cfg:
        raise ConfigurationError("law config needs 'alpha'")
    if not float(cfg["alpha"]) > 0.0:
        raise DomainError("alpha must be positive")
    return _FAMILIES[family](dict(cfg))


def builtin_laws(alpha: float = 1.0) -> dict[str, RegVarLaw]:
    """One representative of each shipped family at tail index ``alpha``."""
    return {
        "pareto": pareto(alpha),
        "weibull_log": weibull_log_law(alpha),
        "log_pareto_type3": log_pareto_law(alpha, 2.0, variant=3),
        "log_pareto_type2": log_pareto_law(alpha, 0.5, variant=2),
        "lognormal_log": lognormal_log_law(alpha),
    }


# ---------------------------------------------------------------------------
# two-sided laws


@dataclass(frozen=True)
class TwoSidedLaw:
    """Mixture ``X = +R`` w.p. ``p_right`` and ``X = -W`` otherwise.

    ``P[X > x] = p_right * P[R > x]`` keeps the right tail regularly varying
    with the same index; the left tail is ``(1 - p_right) * P[W > x]``.
    """

    right: RegVarLaw
    left: RegVarLaw
    p_right: float = 0.5

    def __post_init__(self):
        if not 0.0 < self.p_right <= 1.0:
            raise DomainError("p_right must lie in (0, 1]")

    @property
    def alpha(self) -> float:
        return self.right.alpha

    def tail(self, x):
        x_arr = np.asarray(x, dtype=float)
        pos = self.p_right * np.asarray(self.right.tail(np.abs(x_arr)))
        neg = 1.0 - (1.0 - self.p_right) * np.asarray(self.left.tail(np.abs(x_arr)))
        out = np.where(x_arr >= 0.0, pos, neg)
        return _scalar_or_array(out, x)

    def left_tail(self, x):
        x_arr = np.asarray(x, dtype=float)
        out = np.where(x_arr >= 0.0, (1.0 - self.p_right) * np.asarray(self.left.tail(np.abs(x_arr))), 1.0)
        return _scalar_or_array(out, x)

    def sample(self, n: int, seed) -> np.ndarray:
        if n < 1:
            raise PreconditionError("n must be at least 1")
        return self.sample_with(stream(seed), n)

    def sample_with(self, rng: np.random.Generator, n: int) -> np.ndarray:
        if n == 0:
            return np.empty(0)
        sign = rng.random(n) < self.p_right
        out = np.empty(n)
        k = int(sign.sum())
        out[sign] = self.right.sample_with(rng, k)
        out[~sign] = -self.left.sample_with(rng, n - k)
        return out


def symmetric(law: RegVarLaw) -> TwoSidedLaw:
    return TwoSidedLaw(law, law, 0.5)


# ---------------------------------------------------------------------------
# Karamata integrals


def truncated_moment(law: RegVarLaw, x: float, gamma: float) -> float:
    """``E[X**gamma ; X <= x]`` (integration by parts on the tail)."""
    if x < law.x_min:
        raise DomainError("x must be at least x_min")
    if gamma <= 0.0:
        raise DomainError("gamma must be positive")
    x0 = law.x_min
    tail_x = law.tail(x)
    head = x0 ** gamma - x ** gamma * tail_x
    if law.sv.is_constant and law.tail(x0) == 1.0:
        c = law.sv.c_limit
        a = law.alpha
        if gamma == a:
            body = gamma * c * (math.log(x) - math.log(x0))
        else:
            body = gamma * c / (gamma - a) * (x ** (gamma - a) - x0 ** (gamma - a))
        return head + body
    s0, s1 = math.log(x0), math.log(x)
    if s1 == s0:
        return head
    val, err = integrate.quad(law._log_integrand(gamma), s0, s1,
                              epsabs=MOMENT_ABS_TOL, epsrel=1e-12, limit=500)
    if err > 10 * MOMENT_ABS_TOL * max(1.0, abs(val)):
        raise NonConvergenceError(f"truncated moment quadrature error {err:.3g}")
    return head + val


def truncated_alpha_moment(law: RegVarLaw, x: float) -> float:
    """``m(x) = int_0^x v**alpha dF(v)``."""
    return truncated_moment(law, x, law.alpha)


@dataclass(frozen=True)
class KaramataIntegral:
    law: RegVarLaw

    def __call__(self, x):
        if np.ndim(x) == 0:
            return truncated_alpha_moment(self.law, float(x))
        return np.array([truncated_alpha_moment(self.law, float(v)) for v in np.ravel(x)]).reshape(np.shape(x))


def karamata_ratio(law: RegVarLaw, x: float) -> float:
    """``E[X ; X <= x] / (x P[X > x])``; tends to ``alpha/(1-alpha)`` for alpha < 1."""
    return truncated_moment(law, x, 1.0) / (x * law.tail(x))


def rv_residual(law: RegVarLaw, t: float, xs) -> np.ndarray:
    """``|F̄(t x)/F̄(x) - t**-alpha|`` along ``xs``."""
    xs = np.asarray(xs, dtype=float)
    return np.abs(np.asarray(law.tail(t * xs)) / np.asarray(law.tail(xs)) - t ** -law.alpha)


# ---------------------------------------------------------------------------
# Potter envelope


@dataclass(frozen=True)
class PotterReport:
    M: float
    eps: float
    x0: float
    violations: list
    cap: float

    @property
    def ok(self) -> bool:
        return not self.violations


def log_grid(lo: float, hi: float, num: int) -> np.ndarray:
    return np.logspace(math.log10(lo), math.log10(hi), num)


def potter_envelope_check(law: RegVarLaw, eps: float, x0: float, grid=None,
                          u_points: int = 200, cap: float = 1e6) -> PotterReport:
    """Smallest ``M`` with ``F̄(x/u)/F̄(x) <= M u**(alpha -+ eps)`` on the grid.

    The exponent is ``alpha - eps`` for ``u < 1`` and ``alpha + eps`` for
    ``1 <= u <= x/x0``; only grid points ``x > x0`` are used.
    """
    if not 0.0 < eps < law.alpha:
        raise PreconditionError("Potter check needs 0 < eps < alpha")
    if x0 < law.x_min:
        raise PreconditionError("x0 must be at least x_min")
    xs = log_grid(1e2, 1e8, 61) if grid is None else np.asarray(grid, dtype=float)
    xs = xs[xs > x0]
    a = law.alpha
    u_small = np.logspace(-8, 0, u_points, endpoint=False)
    worst = 0.0
    violations = []
    for x in xs:
        tx = law.tail(x)
        r_small = np.asarray(law.tail(x / u_small)) / tx / u_small ** (a - eps)
        u_big = np.logspace(0.0, math.log10(x / x0), u_points)
        r_big = np.asarray(law.tail(x / u_big)) / tx / u_big ** (a + eps)
        local = max(float(r_small.max()), float(r_big.max()))
        if local > cap:
            i_s, i_b = int(r_small.argmax()), int(r_big.argmax())
            u_at = u_small[i_s] if r_small[i_s] >= r_big[i_b] else u_big[i_b]
            violations.append((float(x), float(u_at), local))
        worst = max(worst, local)
    return PotterReport(M=worst if not violations else math.inf, eps=eps, x0=x0,
                        violations=violations, cap=cap)
