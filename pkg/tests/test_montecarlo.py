import itertools
import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import stats

from rwtail import measures, montecarlo as mc, rv_core, weights
from rwtail.errors import (DegenerateSampleError, DomainError, EmptySampleError, GridMismatchError,
                           NoCertificateError, PreconditionError)


# -- truncation ------------------------------------------------------------------


def geometric_remainder(m, p, x_ref):
    # x_ref^-p E[X^p] Σ_{t>m} (2^-t)^p with X ~ Pareto(1), so E[X^p] = 1/(1-p)
    r = 0.5 ** p
    return x_ref ** -p / (1 - p) * r ** (m + 1) / (1 - r)


@pytest.mark.parametrize("eps,x_ref", [(1e-3, 1.0), (1e-6, 10.0), (0.2, 1.0)])
def test_truncation_level_is_minimal(eps, x_ref):
    seq = weights.geometric_sequence(1.0, 0.5)
    cert = mc.truncation_level(seq, rv_core.pareto(1.0), p=0.5, epsilon_trunc=eps, x_ref=x_ref)
    assert cert.bound == pytest.approx(geometric_remainder(cert.m, 0.5, x_ref), rel=1e-12)
    assert cert.bound <= eps
    assert cert.m == 0 or geometric_remainder(cert.m - 1, 0.5, x_ref) > eps


def test_truncation_searches_exponents():
    seq = weights.pathological_sequence(0.5)
    cert = mc.truncation_level(seq, rv_core.pareto(0.5), epsilon_trunc=1e-5, x_ref=1e5)
    assert 0 < cert.p < 0.5 and cert.bound <= 1e-5
    fixed = mc.truncation_level(seq, rv_core.pareto(0.5), p=cert.p, epsilon_trunc=1e-5, x_ref=1e5)
    assert fixed.m == cert.m


def test_truncation_edge_cases():
    seq = weights.geometric_sequence(1.0, 0.5)
    assert mc.truncation_level(seq, rv_core.pareto(1.0), epsilon_trunc=1.0).m == 0
    with pytest.raises(NoCertificateError):
        mc.truncation_level(weights.power_sequence(1.0, 2.0), rv_core.pareto(1.0), p=0.4)
    with pytest.raises(DomainError):
        mc.truncation_level(seq, rv_core.pareto(1.0), epsilon_trunc=0.0)
    with pytest.raises(DomainError):
        mc.truncation_level(seq, rv_core.pareto(1.0), x_ref=-1.0)
    finite = weights.iid_sequence(weights.degenerate(1.0), 4)
    assert mc.truncation_level(finite, rv_core.pareto(1.0), epsilon_trunc=1e-9).m <= 4


# -- simulation ------------------------------------------------------------------


def test_simulation_reproducible_and_prefix_stable():
    law = rv_core.pareto(0.7)
    seq = weights.iid_sequence(weights.atoms([0.0, 0.5, 2.0], [0.3, 0.3, 0.4]), 3)
    a = mc.simulate_series(law, seq, 3, 2500, seed=9, chunk_rows=1000)
    b = mc.simulate_series(law, seq, 3, 2500, seed=9, chunk_rows=1000)
    c = mc.simulate_series(law, seq, 3, 1000, seed=9, chunk_rows=1000)
    assert np.array_equal(a.values, b.values) and np.array_equal(a.running_max_values, b.running_max_values)
    assert np.array_equal(a.values[:1000], c.values)
    assert not np.array_equal(a.values, mc.simulate_series(law, seq, 3, 2500, seed=10, chunk_rows=1000).values)


def test_simulation_single_term_is_scaled_law():
    law = rv_core.pareto(1.0)
    seq = weights.iid_sequence(weights.degenerate(3.0), 1)
    s = mc.simulate_series(law, seq, 1, 200_000, seed=1)
    assert np.all(s.values >= 3.0)
    assert np.array_equal(s.values, s.running_max_values)
    ks = stats.kstest(s.values / 3.0, lambda x: 1.0 - np.minimum(1.0, 1.0 / np.maximum(x, 1.0)))
    assert ks.pvalue > 1e-3


def test_simulation_all_zero_weights():
    seq = weights.iid_sequence(weights.degenerate(0.0), 2)
    s = mc.simulate_series(rv_core.pareto(1.0), seq, 2, 1000, seed=1)
    assert np.all(s.values == 0.0) and np.all(s.running_max_values == 0.0)


def test_running_max_with_signed_terms():
    law = rv_core.TwoSidedLaw(rv_core.pareto(1.0), rv_core.pareto(1.0), 0.5)
    seq = weights.iid_sequence(weights.degenerate(1.0), 4)
    s = mc.simulate_series(law, seq, 4, 50_000, seed=2)
    assert np.all(s.running_max_values <= s.values + 1e-9)
    assert np.all(s.values >= 0.0)


def test_simulation_validation():
    seq = weights.iid_sequence(weights.degenerate(1.0), 1)
    with pytest.raises(DomainError):
        mc.simulate_series(rv_core.pareto(1.0), seq, 0, 10, seed=1)
    with pytest.raises(DomainError):
        mc.simulate_series(rv_core.pareto(1.0), seq, 1, 0, seed=1)


# -- estimators ------------------------------------------------------------------


@pytest.mark.parametrize("k,n", [(0, 50), (3, 50), (25, 50), (50, 50), (7, 10 ** 6)])
def test_clopper_pearson_matches_scipy(k, n):
    lo, hi = mc.clopper_pearson(k, n, 0.99)
    if 0 < k < n:
        ci = stats.binomtest(k, n).proportion_ci(confidence_level=0.99, method="exact")
        assert lo == pytest.approx(ci.low, rel=1e-10) and hi == pytest.approx(ci.high, rel=1e-10)
    elif k == 0:
        assert lo == 0.0 and stats.binom.cdf(0, n, hi) == pytest.approx(0.01, rel=1e-9)
    else:
        assert hi == 1.0 and stats.binom.sf(n - 1, n, lo) == pytest.approx(0.01, rel=1e-9)


@settings(max_examples=40, deadline=None)
@given(p=st.floats(1e-3, 0.5), seed=st.integers(0, 2 ** 32))
def test_clopper_pearson_coverage_is_plausible(p, seed):
    # with 99.9% intervals a miss on a single draw is a 1e-3 event
    rng = np.random.default_rng(seed)
    n = 2000
    k = int(rng.binomial(n, p))
    lo, hi = mc.clopper_pearson(k, n, 0.999)
    assert lo <= hi
    assert lo <= p <= hi or abs(k / n - p) > 3 * math.sqrt(p * (1 - p) / n)


def test_empirical_tail_counts():
    s = np.array([1.0, 2.0, 2.0, 5.0, 10.0])
    est = mc.empirical_tail(s, [0.5, 2.0, 7.0, 10.0])
    assert est.counts.tolist() == [5, 2, 1, 0]
    assert est.p_hat.tolist() == [1.0, 0.4, 0.2, 0.0]
    with pytest.raises(EmptySampleError):
        mc.empirical_tail([], [1.0])
    with pytest.raises(DomainError):
        mc.empirical_tail(s, [1.0], ci_level=1.0)


def test_tail_ratio_checks():
    a = mc.empirical_tail(np.arange(100.0), [10.0, 20.0])
    b = mc.empirical_tail(np.arange(100.0), [10.0, 30.0])
    with pytest.raises(GridMismatchError):
        mc.tail_ratio(a, b)
    with pytest.raises(PreconditionError):
        mc.tail_ratio(a, np.array([0.0, 1.0]))
    r = mc.tail_ratio(a, lambda x: np.full_like(x, 0.5))
    assert r.ratio == pytest.approx([89 / 50, 79 / 50])


def test_hill_on_exact_pareto():
    x = rv_core.pareto(1.5).sample(200_000, seed=8)
    est = mc.hill(x, 2000)
    assert abs(est.alpha_hat - 1.5) <= 4 * est.se
    sweep = mc.hill_sweep(x)
    assert sweep.central.k == math.ceil(200_000 ** 0.6) and sweep.agree


def test_hill_preconditions():
    with pytest.raises(PreconditionError):
        mc.hill(np.arange(1.0, 100.0), 5)
    with pytest.raises(PreconditionError):
        mc.hill(np.arange(1.0, 20.0), 19)
    with pytest.raises(DegenerateSampleError):
        mc.hill(np.ones(100), 20)


# -- diagnostics -----------------------------------------------------------------


def test_asymptotic_independence_diag():
    law = rv_core.pareto(1.0)
    xs = np.geomspace(10, 1000, 5)
    indep = mc.asymp_indep_diag(lambda rng, n: (law.sample_with(rng, n), law.sample_with(rng, n)), xs, 10 ** 5, 1)
    same = mc.asymp_indep_diag(lambda rng, n: (lambda z: (z, z))(law.sample_with(rng, n)), xs, 10 ** 5, 1)
    assert indep.flag and not same.flag
    assert np.all(same.ratio == 1.0)


def test_left_tail_diag():
    xs = np.geomspace(10, 1e6, 6)
    two = rv_core.TwoSidedLaw(rv_core.pareto(1.0), rv_core.pareto(2.0), 0.5)
    assert mc.left_tail_diag(two, 1.0, xs).flag
    heavy_left = rv_core.TwoSidedLaw(rv_core.pareto(2.0), rv_core.pareto(1.0), 0.5)
    assert not mc.left_tail_diag(heavy_left, 1.0, xs).flag
    sample = two.sample(10 ** 5, seed=3)
    emp = mc.left_tail_diag(sample, 1.0, xs[:3])
    assert np.all(emp.ratio < 0.2)
    with pytest.raises(DomainError):
        mc.left_tail_diag(two, 0.0, xs)


# -- experiments -----------------------------------------------------------------


def test_finite_sum_comonotone_flags():
    law = rv_core.pareto(0.7)
    seq = weights.iid_sequence(weights.atoms([0.5, 2.0], [0.5, 0.5]), 3)
    rep = mc.finite_sum_experiment(law, seq, 3, 10 ** 5, seed=1, comonotone=True)
    assert "out_of_contract" in rep.flags and rep.flags["asymptotic_independence"] is False
    assert len(list(rep.table())) == 2 * rep.x_levels.size


def test_rho_to_sequence():
    single = mc.rho_to_sequence(measures.mellin_zero_rho())
    assert single.length == 1
    per = mc.rho_to_sequence(measures.make_atoms([1.0, 3.0], [0.5, 0.7]))
    assert per.length == 2 and per.law(2).moment(1.0) == pytest.approx(2.1)
    with pytest.raises(PreconditionError):
        mc.rho_to_sequence(measures.make_atoms([1.0, 3.0], [0.5, 0.7]), "single")
    with pytest.raises(PreconditionError):
        mc.rho_to_sequence(measures.make_atoms([1.0], [1.5]), "per_atom")
    with pytest.raises(DomainError):
        mc.rho_to_sequence(measures.mellin_zero_rho(), "both")


def test_converse_experiment_tracks_exact_target():
    mu = measures.make_counterexample_mu(measures.make_oscillating_nu())
    rep = mc.converse_experiment(mu, measures.mellin_zero_rho(), 10 ** 6, seed=3)
    assert np.all(rep.tail.brackets(rep.exact))
    # the input oscillates while the exact output is flat against the norm
    assert rep.mu_profile.amplitude > 0.2
    assert np.allclose(rep.exact * rep.x_levels, rep.norm, rtol=1e-8)


# -- Bonferroni ------------------------------------------------------------------


def brute_force_exceedance(model, x):
    """P[Σ Θ_t X_t > x] by enumerating every joint outcome with Fractions."""
    per_term = []
    for term in model:
        tw, xw = sum(term.theta_weights), sum(term.x_weights)
        per_term.append([(tv * xv, Fraction(a, tw) * Fraction(b, xw))
                         for tv, a in zip(term.theta_values, term.theta_weights)
                         for xv, b in zip(term.x_values, term.x_weights)])
    total = Fraction(0)
    for combo in itertools.product(*per_term):
        if sum(v for v, _ in combo) > x:
            p = Fraction(1)
            for _, q in combo:
                p *= q
            total += p
    return total


@settings(max_examples=25, deadline=None)
@given(seed=st.integers(0, 2 ** 32))
def test_bonferroni_exact_matches_brute_force(seed):
    rng = np.random.default_rng(seed)
    model = mc.random_toy_model(rng)
    for x in mc.toy_levels(model, count=6):
        chk = mc.bonferroni_check(model, x)
        assert chk.exact == brute_force_exceedance(model, x)
        assert chk.ok


def test_literal_upper_bound_counterexample():
    # Y1 = 9, Y2 = 2 at x = 10: the sum exceeds x surely, yet no single term exceeds x
    # and no pair exceeds (1-δ)x = 2.5 jointly
    model = (mc.ToyTerm((1,), (1,), (9,), (1,)), mc.ToyTerm((1,), (1,), (2,), (1,)))
    literal = mc.bonferroni_check(model, 10, literal_upper=True)
    assert literal.exact == 1 and literal.upper == 0 and not literal.ok
    assert mc.bonferroni_check(model, 10).ok
