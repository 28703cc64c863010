"""Sigma-finite measures on (0, inf) and their product convolution.

A :class:`TailMeasure` is represented lazily by ``x -> nu(x, inf)`` plus a
finite atom list and, optionally, a Lebesgue density for its continuous
part.  Measures of the form ``g dnu_alpha`` also keep ``g`` so bounds such
as ``nu(x, inf) <= 2 x**-alpha`` can be checked.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Mapping, Sequence

import numpy as np
from scipy import integrate

from .errors import ConfigurationError, DomainError, PreconditionError, StripViolationError
from .rng import stream

QUAD_REL_TOL = 1e-9
ORACLE_ABS_TOL = 1e-13
SAMPLER_LOG_WIDTH = 1e-14

EMPTY_STRIP = (math.nan, math.nan)


def _strip_contains(strip, sigma: float) -> bool:
    lo, hi = strip
    return lo < sigma < hi  # NaN bounds make the strip empty


@dataclass(frozen=True)
class TailMeasure:
    """Sigma-finite measure on ``(0, inf)``.

    ``strip`` is the open interval of exponents ``sigma`` with
    ``∫ y**sigma dnu`` finite (``EMPTY_STRIP`` when there is none).
    """

    tail_fn: Callable = field(repr=False, compare=False)
    atoms: tuple = ()
    density: Callable | None = field(default=None, repr=False, compare=False)
    g: Callable | None = field(default=None, repr=False, compare=False)
    alpha: float | None = None
    strip: tuple = EMPTY_STRIP
    support: tuple = (0.0, math.inf)
    kind: str = "custom"
    params: Mapping = field(default_factory=dict, compare=False)
    sampler: Callable | None = field(default=None, repr=False, compare=False)
    atomic: bool = False

    def tail(self, x):
        x_arr = np.asarray(x, dtype=float)
        if np.any(x_arr <= 0.0):
            raise DomainError("measure tails are defined for x > 0")
        out = np.asarray(self.tail_fn(x_arr), dtype=float)
        return float(out) if np.ndim(x) == 0 else out

    @property
    def is_atomic(self) -> bool:
        return self.atomic

    @property
    def atom_mass(self) -> float:
        return math.fsum(m for _, m in self.atoms)

    @property
    def total_mass(self) -> float:
        """``nu(0, inf)``; infinite for sigma-finite measures like ``nu_alpha``."""
        if self.is_atomic:
            return self.atom_mass
        lo = min([self.support[0]] + [v for v, _ in self.atoms])
        if lo > 0.0:
            return float(self.tail(lo * (1.0 - 1e-12)))
        return math.inf

    def sample_with(self, rng: np.random.Generator, n: int) -> np.ndarray:
        if self.sampler is not None:
            return self.sampler(rng, n)
        if self.is_atomic and abs(self.atom_mass - 1.0) <= 1e-12:
            vals = np.array([v for v, _ in self.atoms])
            cum = np.cumsum([m for _, m in self.atoms])
            cum[-1] = 1.0
            return vals[np.searchsorted(cum, rng.random(n), side="right")]
        raise PreconditionError("only probability measures with a sampler can be sampled")

    def sample(self, n: int, seed) -> np.ndarray:
        return self.sample_with(stream(seed), n)

    def to_config(self) -> dict:
        if self.kind == "custom":
            raise ConfigurationError("custom measures have no declarative form")
        return {"kind": self.kind, **dict(self.params)}


# ---------------------------------------------------------------------------
# constructors


def make_nu_alpha(alpha: float) -> TailMeasure:
    """``nu_alpha(x, inf) = x**-alpha``; no finite moments."""
    if not alpha > 0.0:
        raise DomainError("alpha must be positive")
    return TailMeasure(
        tail_fn=lambda x: np.power(x, -alpha),
        density=lambda y: alpha * np.power(y, -alpha - 1.0),
        g=lambda y: np.ones_like(np.asarray(y, dtype=float)),
        alpha=alpha,
        kind="nu_alpha",
        params={"alpha": alpha},
    )


def oscillating_g(beta0: float, a: float, b: float) -> Callable:
    def g(y):
        ly = beta0 * np.log(y)
        return 1.0 + a * np.cos(ly) + b * np.sin(ly)
    return g


def oscillating_scaled_tail_closed(x, alpha: float, beta0: float, a: float, b: float):
    """``x**alpha * nu(x, inf)`` for ``dnu = g dnu_alpha`` in closed form.

    ``∫_x^inf α y**(-α-1+iβ0) dy = α x**(-α+iβ0) / (α - iβ0)``, and
    ``a cos + b sin = Re[(a - ib) y**(iβ0)]``.
    """
    coef = (a - 1j * b) * alpha / (alpha - 1j * beta0)
    phase = beta0 * np.log(np.asarray(x, dtype=float))
    return 1.0 + coef.real * np.cos(phase) - coef.imag * np.sin(phase)


def oscillating_scaled_tail_quad(x: float, alpha: float, beta0: float, a: float, b: float) -> float:
    """Same quantity by adaptive Fourier-weighted quadrature in ``v = log(y/x)``.

    ``x**α nu(x, inf) = ∫_0^inf α e^{-αv} g(x e^v) dv``.
    """
    phi = beta0 * math.log(x)
    c_coef = a * math.cos(phi) + b * math.sin(phi)
    s_coef = b * math.cos(phi) - a * math.sin(phi)

    def envelope(v):
        return alpha * math.exp(-alpha * v)

    base, _ = integrate.quad(envelope, 0.0, math.inf, epsabs=ORACLE_ABS_TOL, epsrel=0.0)
    cos_part = sin_part = 0.0
    if c_coef:
        cos_part, _ = integrate.quad(envelope, 0.0, math.inf, weight="cos", wvar=beta0, epsabs=ORACLE_ABS_TOL)
    if s_coef:
        sin_part, _ = integrate.quad(envelope, 0.0, math.inf, weight="sin", wvar=beta0, epsabs=ORACLE_ABS_TOL)
    return base + c_coef * cos_part + s_coef * sin_part


def make_oscillating_nu(alpha: float = 1.0, beta0: float = math.pi, a: float = 0.5, b: float = 0.0,
                        method: str = "closed") -> TailMeasure:
    """Measure ``g dnu_alpha`` with ``g = 1 + a cos(β0 log y) + b sin(β0 log y)``.

    ``method="quadrature"`` evaluates the tail with the quadrature oracle
    instead of the closed form (slow; used for cross-checks).
    """
    r2 = a * a + b * b
    if not alpha > 0.0:
        raise DomainError("alpha must be positive")
    if not 0.0 < r2 <= 1.0:
        raise DomainError(f"need 0 < a^2+b^2 <= 1, got a^2+b^2 = {r2:g}")
    if beta0 == 0.0:
        raise DomainError("beta0 must be nonzero")
    if method not in ("closed", "quadrature"):
        raise DomainError("method must be 'closed' or 'quadrature'")
    g = oscillating_g(beta0, a, b)

    if method == "closed":
        def tail_fn(x):
            return np.power(x, -alpha) * oscillating_scaled_tail_closed(x, alpha, beta0, a, b)
    else:
        def tail_fn(x):
            x = np.asarray(x, dtype=float)
            vals = [oscillating_scaled_tail_quad(float(v), alpha, beta0, a, b) for v in np.ravel(x)]
            return np.power(x, -alpha) * np.reshape(vals, x.shape)

    return TailMeasure(
        tail_fn=tail_fn,
        density=lambda y: g(y) * alpha * np.power(y, -alpha - 1.0),
        g=g,
        alpha=alpha,
        kind="oscillating",
        params={"alpha": alpha, "beta0": beta0, "a": a, "b": b},
    )


def make_atoms(values: Sequence[float], masses: Sequence[float]) -> TailMeasure:
    vals = tuple(float(v) for v in values)
    ms = tuple(float(m) for m in masses)
    if len(vals) != len(ms) or not vals:
        raise ConfigurationError("atoms need matching non-empty locations and masses")
    if any(v <= 0.0 for v in vals) or any(m <= 0.0 for m in ms):
        raise DomainError("atom locations and masses must be positive")
    v_arr, m_arr = np.array(vals), np.array(ms)

    def tail_fn(x):
        x = np.asarray(x, dtype=float)
        return np.sum(m_arr * (v_arr > x[..., None]), axis=-1)

    return TailMeasure(tail_fn=tail_fn, atoms=tuple(zip(vals, ms)), strip=(-math.inf, math.inf),
                       support=(min(vals), max(vals)), kind="atoms",
                       params={"values": list(vals), "masses": list(ms)}, atomic=True)


def unit_atom(c: float = 1.0) -> TailMeasure:
    return make_atoms([c], [1.0])


def mellin_zero_rho(alpha: float = 1.0, beta0: float = math.pi) -> TailMeasure:
    """Two atoms ``{1, e**(pi/beta0)}`` whose Mellin line vanishes at ``beta0``."""
    v = math.exp(math.pi / beta0)
    w = v ** alpha
    return make_atoms([1.0, v], [w / (1.0 + w), 1.0 / (1.0 + w)])


def make_counterexample_mu(nu: TailMeasure, b_threshold: float | None = None) -> TailMeasure:
    """Probability measure agreeing with ``nu`` on ``(b, inf)`` plus an atom at 1.

    ``mu(y, inf)`` is ``nu(y, inf)`` above ``b``, ``nu(b, inf)`` on ``[1, b]``
    and 1 below 1.  The default ``b = 2**(1/alpha)`` is the smallest
    value the bound ``nu(x, inf) <= 2 x**-alpha`` makes admissible.
    """
    if nu.alpha is None:
        raise PreconditionError("nu must carry its index alpha")
    alpha = nu.alpha
    b = 2.0 ** (1.0 / alpha) if b_threshold is None else float(b_threshold)
    if not b > 1.0:
        raise PreconditionError("b_threshold must exceed 1")
    nu_b = float(nu.tail(b))
    if nu_b > 1.0:
        raise PreconditionError(f"nu(b, inf) = {nu_b:.6g} > 1 at b = {b:g}")
    mass1 = 1.0 - nu_b

    def tail_fn(y):
        y = np.asarray(y, dtype=float)
        # right-continuous: the atom at 1 is not in (1, inf)
        out = np.where(y < 1.0, 1.0, nu_b)
        hi = y > b
        if np.any(hi):
            out = np.array(out, dtype=float)
            out[hi] = nu.tail(y[hi])
        return out

    def density(y):
        y = np.asarray(y, dtype=float)
        return np.where(y > b, nu.density(np.maximum(y, b)), 0.0)

    def inverse_tail(q):
        # solve nu(y, inf) = q on (b, inf) by bisection in log y
        q = np.asarray(q, dtype=float)
        lo = np.full(q.shape, math.log(b))
        hi = np.log(np.maximum((2.0 / q) ** (1.0 / alpha), b * 2.0))
        bad = nu.tail(np.exp(hi)) > q
        while np.any(bad):
            hi = np.where(bad, hi + 1.0, hi)
            bad = nu.tail(np.exp(hi)) > q
        while np.max(hi - lo) > SAMPLER_LOG_WIDTH * max(1.0, float(np.max(hi))):
            mid = 0.5 * (lo + hi)
            above = nu.tail(np.exp(mid)) > q
            lo = np.where(above, mid, lo)
            hi = np.where(above, hi, mid)
        return np.exp(hi)

    def sampler(rng, n):
        u = rng.random(n)
        out = np.ones(n)
        cont = u < nu_b
        if np.any(cont):
            out[cont] = inverse_tail(u[cont])
        return out

    params = {"nu": nu.to_config() if nu.kind != "custom" else {}, "b_threshold": b}
    return TailMeasure(tail_fn=tail_fn, atoms=((1.0, mass1),), density=density, g=None, alpha=alpha,
                       strip=(-math.inf, alpha), support=(1.0, math.inf), kind="counterexample_mu",
                       params=params, sampler=sampler)


# ---------------------------------------------------------------------------
# convolution and norms


def _continuous_integral(fn, lo: float, hi: float) -> float:
    """``∫_lo^hi fn(y) dy`` in ``log y``, split into short pieces near ``lo``.

    Mass beyond ``y = e**700`` is dropped (it underflows in double precision
    for every integrand with finite moments).
    """
    a = math.log(lo) if lo > 0.0 else -700.0
    b = min(math.log(hi), 700.0) if math.isfinite(hi) else 700.0

    def integrand(u):
        y = math.exp(u)
        return fn(y) * y

    cuts = [a] + [c for c in np.arange(a + 2.0, min(b, a + 60.0), 2.0)] + [b]
    total = 0.0
    for s, e in zip(cuts[:-1], cuts[1:]):
        if e > s:
            v, _ = integrate.quad(integrand, s, e, epsrel=QUAD_REL_TOL, epsabs=0.0, limit=400)
            total += v
    return total


def alpha_norm(rho: TailMeasure, alpha: float) -> float:
    """``∫ y**alpha rho(dy)``; atoms exactly, the continuous part by quadrature."""
    if not _strip_contains(rho.strip, alpha):
        raise StripViolationError(f"∫ y^{alpha:g} rho(dy) diverges (strip {rho.strip})")
    total = math.fsum(m * v ** alpha for v, m in rho.atoms)
    if rho.density is not None:
        lo, hi = rho.support
        total += _continuous_integral(lambda y: y ** alpha * float(rho.density(y)), lo, hi)
    return total


def product_convolve_tail(nu: TailMeasure, rho: TailMeasure, x, eps: float = 1e-3):
    """``(nu ⊛ rho)(x, inf) = ∫ nu(x/u, inf) rho(du)``.

    Exact finite sum when ``rho`` is atomic; quadrature in ``log u`` for a
    continuous part.  ``rho`` must have finite moments on both sides of
    ``nu.alpha``.
    """
    if nu.alpha is not None and not (_strip_contains(rho.strip, nu.alpha - eps)
                                     and _strip_contains(rho.strip, nu.alpha + eps)):
        raise StripViolationError("rho lacks finite moments around alpha; the convolution integral diverges")
    x_arr = np.asarray(x, dtype=float)
    if np.any(x_arr <= 0.0):
        raise DomainError("x must be positive")
    terms = [m * np.asarray(nu.tail(x_arr / v)) for v, m in rho.atoms]
    out = np.zeros(x_arr.shape) if not terms else np.sum(terms, axis=0)
    if not rho.is_atomic:
        if rho.density is None:
            raise PreconditionError("rho needs atoms or a Lebesgue density")
        lo, hi = rho.support
        cont = [_continuous_integral(lambda u, xx=xx: float(nu.tail(xx / u)) * float(rho.density(u)), lo, hi)
                for xx in np.ravel(x_arr)]
        out = out + np.reshape(cont, x_arr.shape)
    return float(out) if np.ndim(x) == 0 else out


def product_convolve(nu: TailMeasure, rho: TailMeasure) -> TailMeasure:
    """Lazy measure ``nu ⊛ rho`` (tail via :func:`product_convolve_tail`)."""
    if nu.alpha is not None and not (_strip_contains(rho.strip, nu.alpha - 1e-3)
                                     and _strip_contains(rho.strip, nu.alpha + 1e-3)):
        raise StripViolationError("rho lacks finite moments around alpha; the convolution integral diverges")
    atoms = ()
    if nu.is_atomic and rho.is_atomic:
        merged: dict[float, float] = {}
        for v, m in nu.atoms:
            for w, k in rho.atoms:
                merged[v * w] = merged.get(v * w, 0.0) + m * k
        atoms = tuple(sorted(merged.items()))
    lo = max(nu.strip[0], rho.strip[0])
    hi = min(nu.strip[1], rho.strip[1])
    strip = (lo, hi) if lo < hi else EMPTY_STRIP
    both = nu.is_atomic and rho.is_atomic
    return TailMeasure(tail_fn=lambda x: product_convolve_tail(nu, rho, x), atoms=atoms,
                       alpha=nu.alpha, strip=strip, atomic=both)


def law_measure(law) -> TailMeasure:
    """A positive :class:`~rwtail.rv_core.RegVarLaw` viewed as a probability measure."""
    return TailMeasure(tail_fn=law.tail, alpha=law.alpha, strip=(-math.inf, law.alpha),
                       support=(law.x_min, math.inf), kind="law",
                       params={} if law.family == "custom" else {"law": law.to_config()},
                       sampler=law.sample_with)


def weight_measure(theta) -> TailMeasure:
    """Atomic :class:`~rwtail.weights.WeightLaw` as a measure; zero atoms are dropped."""
    if theta.kind != "atoms":
        raise PreconditionError("only atomic weight laws convert to atomic measures")
    pairs = [(v, p) for v, p in zip(theta.values, theta.probs) if v > 0.0 and p > 0.0]
    if not pairs:
        raise PreconditionError("weight law has no mass on (0, inf)")
    return make_atoms([v for v, _ in pairs], [p for _, p in pairs])


# ---------------------------------------------------------------------------
# profiles and the scaling identity


@dataclass(frozen=True)
class OscillationProfile:
    grid: np.ndarray
    values: np.ndarray

    @property
    def sup(self) -> float:
        return float(np.max(self.values))

    @property
    def inf(self) -> float:
        return float(np.min(self.values))

    @property
    def amplitude(self) -> float:
        return self.sup - self.inf


def oscillation_profile(tail, alpha: float, grid) -> OscillationProfile:
    """Profile of ``x**alpha * tail(x)`` on ``grid`` (measure or callable)."""
    xs = np.asarray(grid, dtype=float)
    fn = tail.tail if isinstance(tail, TailMeasure) else tail
    return OscillationProfile(xs, np.power(xs, alpha) * np.asarray(fn(xs), dtype=float))


@dataclass(frozen=True)
class ScalingReport:
    norm: float
    max_residual: float
    nu_profile: OscillationProfile
    conv_profile: OscillationProfile

    CSV_HEADER = ("x", "x^alpha*nu_tail", "x^alpha*conv_tail", "residual")

    def rows(self):
        for x, v, c in zip(self.nu_profile.grid, self.nu_profile.values, self.conv_profile.values):
            yield (float(x), float(v), float(c), float(abs(c - self.norm)))


def verify_scaling_identity(nu: TailMeasure, rho: TailMeasure, alpha: float, grid=None) -> ScalingReport:
    """Residual of ``x**α (nu ⊛ rho)(x, inf) = ||rho||_α`` on ``grid``."""
    xs = np.geomspace(1.0, 1e6, 50) if grid is None else np.asarray(grid, dtype=float)
    norm = alpha_norm(rho, alpha)
    nu_prof = oscillation_profile(nu, alpha, xs)
    conv_prof = oscillation_profile(lambda x: product_convolve_tail(nu, rho, x), alpha, xs)
    resid = float(np.max(np.abs(conv_prof.values - norm)))
    return ScalingReport(norm, resid, nu_prof, conv_prof)


# ---------------------------------------------------------------------------
# config


def measure_from_config(cfg: Mapping) -> TailMeasure:
    kind = cfg.get("kind")
    try:
        if kind == "nu_alpha":
            return make_nu_alpha(cfg["alpha"])
        if kind == "oscillating":
            return make_oscillating_nu(cfg.get("alpha", 1.0), cfg.get("beta0", math.pi),
                                       cfg.get("a", 0.5), cfg.get("b", 0.0), cfg.get("method", "closed"))
        if kind == "atoms":
            return make_atoms(cfg["values"], cfg.get("masses", cfg.get("probs")))
        if kind == "mellin_zero":
            return mellin_zero_rho(cfg.get("alpha", 1.0), cfg.get("beta0", math.pi))
        if kind == "counterexample_mu":
            return make_counterexample_mu(measure_from_config(cfg.get("nu", {"kind": "oscillating"})),
                                          cfg.get("b_threshold"))
    except KeyError as exc:
        raise ConfigurationError(f"measure {kind!r} is missing field {exc.args[0]!r}") from None
    raise ConfigurationError(f"unknown measure kind {kind!r}; expected nu_alpha, oscillating, atoms, "
                             "mellin_zero or counterexample_mu")
