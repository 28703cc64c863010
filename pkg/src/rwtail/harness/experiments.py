"""Named experiments: defaults, static checks and the run functions."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .. import measures, montecarlo as mc, rv_core, weights
from ..errors import ConfigurationError
from .config import (
    ExperimentConfig,
    check_count,
    check_levels,
    check_positive,
    check_probability_level,
)

PASS, FAIL, INCONCLUSIVE = "pass", "fail", "inconclusive"
TAIL_COLUMNS = ("x_level", "p_hat", "ci_low", "ci_high", "target", "ratio")


@dataclass
class Outcome:
    verdict: str
    summary: dict
    tables: dict = field(default_factory=dict)  # name -> (header, rows)


@dataclass(frozen=True)
class Experiment:
    name: str
    description: str
    result: str
    defaults: dict
    checks: dict
    run: Callable[[ExperimentConfig], Outcome]


# -- field checks ---------------------------------------------------------------


def _law(v, _p):
    rv_core.law_from_config(v)


def _theta(v, _p):
    weights.weight_law_from_config(v)


def _sequence(v, _p):
    weights.sequence_from_config(v)


def _measure(v, _p):
    measures.measure_from_config(v)


def _optional(check):
    def wrapped(v, p):
        if v is not None:
            check(v, p)
    return wrapped


def _beta_range(v, _p):
    if not (isinstance(v, list) and len(v) == 2 and all(isinstance(b, (int, float)) for b in v) and v[0] < v[1]):
        raise ConfigurationError("beta_range must be [low, high] with low < high")


def _eps_list(v, p):
    vals = v if isinstance(v, list) else [v]
    alpha = p.get("alpha")
    for e in vals:
        if not isinstance(e, (int, float)) or not 0.0 < e < alpha:
            raise ConfigurationError(f"each eps must satisfy 0 < eps < alpha (alpha={alpha})")


def _grid(v, _p):
    if not isinstance(v, dict):
        raise ConfigurationError("grid must be a table with x_min, x_max, points")
    if not 0.0 < v.get("x_min", 0) < v.get("x_max", 0):
        raise ConfigurationError("grid needs 0 < x_min < x_max")
    check_count(2)(v.get("points"), None)


def _interpretation(v, _p):
    if v not in ("auto", "single", "per_atom"):
        raise ConfigurationError("interpretation must be auto, single or per_atom")


def _n_terms(v, _p):
    if v != "auto":
        check_count(1)(v, _p)


def _flag(v, _p):
    if not isinstance(v, bool):
        raise ConfigurationError("must be true or false")


# -- helpers -----------------------------------------------------------------------


def _levels(value, auto: Callable[[], np.ndarray]) -> np.ndarray:
    return auto() if value in (None, "auto") else np.asarray(value, dtype=float)


def _tail_rows(est: mc.TailEstimate, target: np.ndarray):
    for i, x in enumerate(est.x_levels):
        yield (x, est.p_hat[i], est.ci_low[i], est.ci_high[i], target[i], est.p_hat[i] / target[i])


def _isf_levels(law, const: float, probs=mc.DEFAULT_TAIL_LEVELS) -> np.ndarray:
    return np.array([law.isf(min(q / const, 1.0)) for q in probs])


# -- experiments -------------------------------------------------------------------


def run_breiman(cfg: ExperimentConfig) -> Outcome:
    p = cfg.params
    law = rv_core.law_from_config(p["law"])
    theta = weights.weight_law_from_config(p["theta"])
    alpha = law.alpha
    e_theta = float(np.real(theta.moment(alpha)))
    xs = _levels(p["x_levels"], lambda: _isf_levels(law, 1.0))
    rep = mc.finite_sum_experiment(law, weights.iid_sequence(theta, 1), 1, p["n"], cfg.seed, xs, p["ci_level"])
    oracle = e_theta * np.asarray(law.tail(xs))
    summary = {"E_theta_alpha": e_theta, "x_levels": xs, "brackets": rep.sum_tail.brackets(oracle)}
    exact = law.family == "pareto" and bool(np.all(xs >= theta.ess_sup * law.x_min))
    summary["exact_oracle"] = exact
    if theta.kind == "atoms":
        conv = measures.product_convolve_tail(measures.law_measure(law), measures.weight_measure(theta), xs)
        summary["convolution_rel_error"] = float(np.max(np.abs(conv / oracle - 1.0)))
    ok = bool(np.all(summary["brackets"]))
    verdict = PASS if ok else (FAIL if exact else INCONCLUSIVE)
    return Outcome(verdict, summary, {"tail": (TAIL_COLUMNS, list(_tail_rows(rep.sum_tail, oracle)))})


def run_finite_sum(cfg: ExperimentConfig) -> Outcome:
    p = cfg.params
    law = rv_core.law_from_config(p["law"])
    seq = weights.sequence_from_config(p["sequence"])
    n_terms = p["n_terms"] if p["n_terms"] != "auto" else seq.length
    if n_terms is None:
        raise ConfigurationError("n_terms must be given for infinite sequences")
    const = math.fsum(float(np.real(seq.law(t).moment(law.alpha))) for t in range(1, n_terms + 1))
    xs = _levels(p["x_levels"], lambda: _isf_levels(law, const))
    rep = mc.finite_sum_experiment(law, seq, n_terms, p["n"], cfg.seed, xs, p["ci_level"],
                                   comonotone=p["comonotone"])
    summary = {"target_constant": const, "x_levels": xs, "curves_agree": rep.curves_agree,
               "sum_brackets": rep.sum_tail.brackets(rep.target),
               "max_brackets": rep.max_tail.brackets(rep.target), "flags": rep.flags}
    # only a single Pareto term has an exact finite-x oracle; elsewhere a miss is inconclusive
    exact = (n_terms == 1 and law.family == "pareto"
             and bool(np.all(xs >= seq.law(1).ess_sup * law.x_min)))
    summary["exact_oracle"] = exact
    if rep.flags.get("out_of_contract"):
        verdict = INCONCLUSIVE
    elif not rep.curves_agree:
        verdict = FAIL
    elif bool(np.all(summary["sum_brackets"])):
        verdict = PASS
    else:
        verdict = FAIL if exact else INCONCLUSIVE
    tables = {"tail_sum": (TAIL_COLUMNS, list(_tail_rows(rep.sum_tail, rep.target))),
              "tail_max": (TAIL_COLUMNS, list(_tail_rows(rep.max_tail, rep.target)))}
    return Outcome(verdict, summary, tables)


def run_series(cfg: ExperimentConfig) -> Outcome:
    p = cfg.params
    law = rv_core.law_from_config(p["law"])
    seq = weights.sequence_from_config(p["sequence"])
    const = seq.alpha_sum(law.alpha)
    if const is None:
        raise ConfigurationError("the sequence has no analytic alpha-moment sum")
    xs = _levels(p["x_levels"], lambda: _isf_levels(law, const))
    cert = mc.truncation_level(seq, law, None, p["epsilon_trunc"], p["delta"] * float(np.min(xs)))
    sample = mc.simulate_series(law, seq, max(cert.m, 1), p["n"], cfg.seed, truncation_bound=cert.bound)
    est = mc.empirical_tail(sample.values, xs, p["ci_level"])
    target = const * np.asarray(law.tail(xs))
    k = None if p["hill_k"] == "auto" else int(p["hill_k"])
    sweep = mc.hill_sweep(sample.values, k)
    finite = bool(np.all(np.isfinite(sample.values)))
    hill_ok = abs(sweep.central.alpha_hat - law.alpha) <= p["hill_band"] and sweep.agree
    brackets = est.brackets(target)
    summary = {"alpha_sum": const, "x_levels": xs, "truncation": {"m": cert.m, "p": cert.p, "bound": cert.bound,
               "x_ref": cert.x_ref}, "all_finite": finite, "brackets": brackets,
               "hill": [{"k": e.k, "alpha_hat": e.alpha_hat, "se": e.se} for e in sweep.estimates],
               "hill_agree": sweep.agree}
    if not (finite and hill_ok):
        verdict = FAIL
    else:
        verdict = PASS if bool(np.all(brackets)) else INCONCLUSIVE
    tables = {"tail": (TAIL_COLUMNS, list(_tail_rows(est, target))),
              "hill": (("k", "alpha_hat", "se"), [(e.k, e.alpha_hat, e.se) for e in sweep.estimates])}
    return Outcome(verdict, summary, tables)


def run_converse(cfg: ExperimentConfig) -> Outcome:
    p = cfg.params
    mu = measures.measure_from_config(p["mu"])
    rho = measures.measure_from_config(p["rho"])
    xs = _levels(p["x_levels"], lambda: np.geomspace(10.0, 1000.0, 5))
    rep = mc.converse_experiment(mu, rho, p["n"], cfg.seed, xs, p["ci_level"], p["interpretation"])
    brackets = rep.tail.brackets(rep.exact)
    prof = rep.mu_profile
    summary = {"alpha": rep.alpha, "rho_norm": rep.norm, "x_levels": xs, "brackets_exact": brackets,
               "flat_against_norm": rep.flat, "mu_profile_amplitude": prof.amplitude,
               "hill": [{"k": e.k, "alpha_hat": e.alpha_hat, "se": e.se} for e in rep.hill.estimates],
               "hill_spread": rep.hill.spread}
    verdict = PASS if bool(np.all(brackets)) else FAIL
    tables = {"tail": (TAIL_COLUMNS, list(_tail_rows(rep.tail, rep.exact))),
              "mu_profile": (("x", "x^alpha*mu_tail"), list(zip(prof.grid, prof.values))),
              "hill": (("k", "alpha_hat", "se"), [(e.k, e.alpha_hat, e.se) for e in rep.hill.estimates])}
    return Outcome(verdict, summary, tables)


def run_mellin(cfg: ExperimentConfig) -> Outcome:
    p = cfg.params
    seq = weights.sequence_from_config(p["sequence"])
    alpha = p["alpha"]
    lo, hi = p["beta_range"]
    zeros = weights.find_mellin_zeros(seq, alpha, (lo, hi), p["tol"])
    at = weights.mellin_line(seq, alpha, np.array(zeros)) if zeros else None
    moduli = [] if at is None else np.abs(np.atleast_1d(at.value)).tolist()
    summary = {"zeros": zeros, "moduli": moduli, "M_at_zero": weights.mellin_line(seq, alpha, 0.0).value}
    expect = p["expect_zeros"]
    if expect is None:
        verdict = PASS
    else:
        match = len(expect) == len(zeros) and all(abs(a - b) <= p["zero_tol"] for a, b in zip(sorted(expect), zeros))
        verdict = PASS if match else FAIL
        summary["expected"] = expect
    grid = np.linspace(lo, hi, 241)
    line = np.atleast_1d(weights.mellin_line(seq, alpha, grid).value)
    tables = {"zeros": (("beta", "abs_M"), list(zip(zeros, moduli))),
              "line": (("beta", "re_M", "im_M", "abs_M"),
                       [(b, v.real, v.imag, abs(v)) for b, v in zip(grid, line)])}
    return Outcome(verdict, summary, tables)


def run_check_conditions(cfg: ExperimentConfig) -> Outcome:
    p = cfg.params
    seq = weights.sequence_from_config(p["sequence"])
    alpha = p["alpha"]
    eps_list = sorted(p["eps"] if isinstance(p["eps"], list) else [p["eps"]], reverse=True)
    reports = {f"rw_eps={e:g}": weights.rw_condition_report(seq, alpha, e, p["t_max"]) for e in eps_list}
    problems = []
    for big, small in zip(eps_list, eps_list[1:]):
        problems += weights.rw_implication_consistency(seq, alpha, big, small, p["t_max"])
    if len(eps_list) == 1:
        problems += weights.rw_implication_consistency(seq, alpha, eps_list[0], eps_list[0] / 2, p["t_max"])
    if p["law"] is not None and p["theta"] is not None:
        reports["dz"] = weights.dz_condition_report(weights.weight_law_from_config(p["theta"]),
                                                    rv_core.law_from_config(p["law"]))
    rows = [(name, cond, v.status, v.reason) for name, rep in reports.items() for cond, v in rep.verdicts.items()]
    applicable = [v for name, rep in reports.items() if name.startswith("rw")
                  for cond, v in rep.verdicts.items() if cond.startswith("RW") and v.evidence.get("applies")]
    summary = {"reports": {k: r.to_dict() for k, r in reports.items()}, "contradictions": problems}
    if problems:
        verdict = FAIL
    elif any(v.status == "unknown" for v in applicable):
        verdict = INCONCLUSIVE
    else:
        verdict = PASS
    return Outcome(verdict, summary, {"verdicts": (("report", "condition", "status", "reason"), rows)})


def run_scaling_identity(cfg: ExperimentConfig) -> Outcome:
    p = cfg.params
    nu = measures.measure_from_config(p["nu"])
    rho = measures.measure_from_config(p["rho"])
    alpha = p["alpha"] if p["alpha"] is not None else nu.alpha
    g = p["grid"]
    xs = np.geomspace(g["x_min"], g["x_max"], g["points"])
    rep = measures.verify_scaling_identity(nu, rho, alpha, xs)
    summary = {"norm": rep.norm, "max_residual": rep.max_residual,
               "nu_amplitude": rep.nu_profile.amplitude, "conv_amplitude": rep.conv_profile.amplitude}
    ok = rep.max_residual <= p["tol"]
    if p["min_amplitude"] is not None:
        ok = ok and rep.nu_profile.amplitude >= p["min_amplitude"]
    return Outcome(PASS if ok else FAIL, summary,
                   {"scaling": (measures.ScalingReport.CSV_HEADER, list(rep.rows()))})


# -- registry ------------------------------------------------------------------------

_TWO_POINT = {"kind": "atoms", "values": [0.5, 2.0], "probs": [0.5, 0.5]}
_MC_CHECKS = {"n": check_count(1), "ci_level": check_probability_level, "x_levels": check_levels}

REGISTRY: dict[str, Experiment] = {}


def _register(exp: Experiment):
    REGISTRY[exp.name] = exp


_register(Experiment(
    "breiman", "Monte Carlo tail of one product Θ·X against E[Θ^α]·P[X>x]",
    "Breiman's product-tail theorem",
    {"law": {"family": "pareto", "alpha": 0.7}, "theta": dict(_TWO_POINT), "n": 10 ** 6,
     "ci_level": 0.99, "x_levels": "auto"},
    {"law": _law, "theta": _theta, **_MC_CHECKS},
    run_breiman))

_register(Experiment(
    "finite-sum", "Tails of Σ Θ_t X_t⁺ and of the running maximum against Σ E[Θ_t^α]·P[X>x]",
    "tail equivalence of weighted finite sums, their positive parts and running maxima",
    {"law": {"family": "pareto", "alpha": 0.7},
     "sequence": {"kind": "iid", "length": 3, "law": dict(_TWO_POINT)},
     "n_terms": "auto", "n": 10 ** 6, "ci_level": 0.99, "x_levels": "auto", "comonotone": False},
    {"law": _law, "sequence": _sequence, "n_terms": _n_terms, "comonotone": _flag, **_MC_CHECKS},
    run_finite_sum))

_register(Experiment(
    "series", "Truncated infinite series with certified remainder, tail ratio and Hill sweep",
    "tail asymptotics of infinite randomly weighted series under the moment conditions",
    {"law": {"family": "pareto", "alpha": 0.5}, "sequence": {"kind": "pathological", "alpha": 0.5},
     "n": 10 ** 5, "ci_level": 0.99, "x_levels": "auto", "epsilon_trunc": 1e-5, "delta": 0.1,
     "hill_k": "auto", "hill_band": 0.1},
    {"law": _law, "sequence": _sequence, "epsilon_trunc": check_positive, "delta": check_positive,
     "hill_band": check_positive, **_MC_CHECKS},
    run_series))

_register(Experiment(
    "converse", "Counterexample input μ with a Mellin-zero weight: sum tail vs. exact μ⊛ρ",
    "failure of the converse without the Mellin non-vanishing condition",
    {"mu": {"kind": "counterexample_mu", "nu": {"kind": "oscillating", "alpha": 1.0, "beta0": math.pi,
                                                 "a": 0.5, "b": 0.0}},
     "rho": {"kind": "mellin_zero", "alpha": 1.0, "beta0": math.pi}, "n": 10 ** 6, "ci_level": 0.99,
     "x_levels": "auto", "interpretation": "auto"},
    {"mu": _measure, "rho": _measure, "interpretation": _interpretation, **_MC_CHECKS},
    run_converse))

_register(Experiment(
    "mellin", "Zeros of β ↦ Σ E[Θ_t^(α+iβ)] on an interval",
    "the Mellin non-vanishing condition of the converse theorem",
    {"sequence": {"kind": "iid", "length": 1, "law": {"kind": "mellin_zero", "alpha": 1.0, "beta0": math.pi}},
     "alpha": 1.0, "beta_range": [0.1, 6.0], "tol": 1e-9, "expect_zeros": None, "zero_tol": 1e-9},
    {"sequence": _sequence, "alpha": check_positive, "beta_range": _beta_range, "tol": check_positive,
     "zero_tol": check_positive},
    run_mellin))

_register(Experiment(
    "check-conditions", "RW / modified RW summability reports (and DZ reports for a law pair)",
    "the RW and DZ moment conditions and the implication between the RW variants",
    {"sequence": {"kind": "pathological", "alpha": 0.5}, "alpha": 0.5, "eps": [0.1, 0.05], "t_max": 64,
     "law": None, "theta": None},
    {"sequence": _sequence, "alpha": check_positive, "eps": _eps_list, "t_max": check_count(1),
     "law": _optional(_law), "theta": _optional(_theta)},
    run_check_conditions))

_register(Experiment(
    "scaling-identity", "Residual of x^α·(ν⊛ρ)(x,∞) = ‖ρ‖_α for oscillating ν and Mellin-zero ρ",
    "the product-convolution identity behind the counterexample",
    {"nu": {"kind": "oscillating", "alpha": 1.0, "beta0": math.pi, "a": 0.5, "b": 0.0},
     "rho": {"kind": "mellin_zero", "alpha": 1.0, "beta0": math.pi}, "alpha": None,
     "grid": {"x_min": 1.0, "x_max": 1e6, "points": 50}, "tol": 1e-8, "min_amplitude": 0.2},
    {"nu": _measure, "rho": _measure, "alpha": _optional(check_positive), "grid": _grid, "tol": check_positive,
     "min_amplitude": _optional(check_positive)},
    run_scaling_identity))


def list_experiments() -> list[tuple[str, str, str]]:
    """``(name, description, result exercised)`` in a stable order."""
    return [(e.name, e.description, e.result) for e in REGISTRY.values()]
