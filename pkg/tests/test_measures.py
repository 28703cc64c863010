import math

import mpmath as mp
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import oracles
from rwtail import measures as ms, rv_core, weights
from rwtail.errors import ConfigurationError, DomainError, PreconditionError, StripViolationError


def oscillating_tail_mpmath(x, alpha, beta0, a, b):
    """x^α ∫_x^∞ α y^(-α-1) (1 + a cos(β0 log y) + b sin(β0 log y)) dy by oscillatory quadrature."""
    f = lambda y: alpha * mp.power(y, -alpha - 1) * (1 + a * mp.cos(beta0 * mp.log(y)) + b * mp.sin(beta0 * mp.log(y)))
    # zeros of the oscillation are geometric in y, so integrate over log-periods
    period = lambda k: x * mp.exp(2 * mp.pi * k / beta0)
    with mp.workdps(20):
        return float(mp.power(x, alpha) * mp.quadosc(f, [x, mp.inf], zeros=period))


def test_nu_alpha():
    nu = ms.make_nu_alpha(0.7)
    assert nu.tail(10.0) == pytest.approx(10.0 ** -0.7)
    with pytest.raises(DomainError):
        nu.tail(0.0)
    with pytest.raises(DomainError):
        ms.make_nu_alpha(0.0)


@pytest.mark.parametrize("x", [1.0, 3.7, 1e3, 2.5e5])
@pytest.mark.parametrize("params", [(1.0, math.pi, 0.5, 0.0), (0.6, 2.0, 0.3, -0.4)])
def test_oscillating_tail_against_mpmath(x, params):
    ref = oscillating_tail_mpmath(x, *params)
    assert ms.oscillating_scaled_tail_closed(x, *params) == pytest.approx(ref, rel=1e-12)
    assert ms.oscillating_scaled_tail_quad(x, *params) == pytest.approx(ref, rel=1e-10)


def test_oscillating_parameter_checks():
    with pytest.raises(DomainError, match=r"a\^2\+b\^2 <= 1"):
        ms.make_oscillating_nu(1.0, math.pi, 1.2, 0.0)
    with pytest.raises(DomainError):
        ms.make_oscillating_nu(1.0, math.pi, 0.0, 0.0)
    with pytest.raises(DomainError):
        ms.make_oscillating_nu(1.0, 0.0, 0.5, 0.0)
    with pytest.raises(DomainError):
        ms.make_oscillating_nu(-1.0)


def test_oscillation_amplitude_matches_closed_form():
    nu = ms.make_oscillating_nu()
    prof = ms.oscillation_profile(nu.tail, 1.0, np.geomspace(1.0, 1e6, 2001))
    amplitude = 2 * 0.5 / math.hypot(1.0, math.pi)  # 2 |a - ib| α / |α - iβ0|
    assert prof.amplitude == pytest.approx(amplitude, rel=1e-4)
    assert prof.amplitude <= amplitude * (1 + 1e-12)


def test_atoms_measure():
    rho = ms.make_atoms([1.0, 3.0], [0.25, 0.5])
    assert rho.is_atomic and rho.total_mass == pytest.approx(0.75)
    assert rho.tail(np.array([0.5, 1.0, 2.0, 3.0])).tolist() == [0.75, 0.5, 0.5, 0.0]
    with pytest.raises(DomainError):
        ms.make_atoms([0.0], [1.0])
    with pytest.raises(ConfigurationError):
        ms.make_atoms([1.0, 2.0], [1.0])


def test_alpha_norm():
    assert ms.alpha_norm(ms.mellin_zero_rho(), 1.0) == pytest.approx(oracles.MELLIN_NORM, rel=1e-15)
    with pytest.raises(StripViolationError):
        ms.alpha_norm(ms.make_nu_alpha(1.0), 1.0)
    mu = ms.make_counterexample_mu(ms.make_oscillating_nu())
    with pytest.raises(StripViolationError):
        ms.alpha_norm(mu, 1.0)


def test_convolution_strip_check():
    with pytest.raises(StripViolationError):
        ms.product_convolve_tail(ms.make_nu_alpha(1.0), ms.make_nu_alpha(1.0), 10.0)


@settings(max_examples=40, deadline=None)
@given(alpha=st.floats(0.2, 3.0), values=st.lists(st.floats(0.05, 20.0), min_size=1, max_size=4),
       masses=st.lists(st.floats(0.01, 2.0), min_size=4, max_size=4), x=st.floats(1e-3, 1e6))
def test_nu_alpha_scaling_for_atomic_rho(alpha, values, masses, x):
    rho = ms.make_atoms(values, masses[: len(values)])
    conv = ms.product_convolve_tail(ms.make_nu_alpha(alpha), rho, x)
    norm = math.fsum(m * v ** alpha for v, m in zip(values, masses))
    assert conv == pytest.approx(norm * x ** -alpha, rel=1e-12)


@settings(max_examples=30, deadline=None)
@given(c1=st.floats(0.1, 10.0), c2=st.floats(0.1, 10.0), x=st.floats(0.5, 1e5))
def test_point_mass_composition(c1, c2, x):
    nu = ms.make_oscillating_nu(0.8, 2.0, 0.3, 0.2)
    once = ms.product_convolve(ms.product_convolve(nu, ms.unit_atom(c1)), ms.unit_atom(c2))
    direct = ms.product_convolve(nu, ms.unit_atom(c1 * c2))
    assert once.tail(x) == pytest.approx(direct.tail(x), rel=1e-12)
    assert direct.tail(x) == pytest.approx(nu.tail(x / (c1 * c2)), rel=1e-12)


def test_convolution_with_continuous_rho():
    # ν_α ⊛ Pareto(2) = E[Y^α] x^-α with E[Y^0.5] = 4/3
    rho = ms.TailMeasure(tail_fn=lambda y: np.minimum(1.0, np.asarray(y) ** -2.0), density=lambda y: 2.0 * y ** -3.0,
                         strip=(-math.inf, 2.0), support=(1.0, math.inf))
    xs = np.array([0.5, 2.0, 50.0, 1e5])
    conv = ms.product_convolve_tail(ms.make_nu_alpha(0.5), rho, xs)
    assert conv == pytest.approx(4.0 / 3.0 * xs ** -0.5, rel=1e-9)
    assert ms.alpha_norm(rho, 0.5) == pytest.approx(4.0 / 3.0, rel=1e-12)


def test_weight_and_law_measures():
    rho = ms.weight_measure(weights.atoms([0.0, 2.0], [0.4, 0.6]))
    assert rho.atoms == ((2.0, 0.6),)
    lm = ms.law_measure(rv_core.pareto(0.7))
    assert not lm.is_atomic and lm.tail(5.0) == pytest.approx(5.0 ** -0.7)


def test_counterexample_mu_shape():
    nu = ms.make_oscillating_nu()
    mu = ms.make_counterexample_mu(nu)
    b = 2.0
    nu_b = float(nu.tail(b))
    assert mu.tail(0.999) == 1.0
    assert mu.tail(1.0) == nu_b  # right-continuous at the atom
    assert mu.tail(1.7) == nu_b and mu.tail(b) == nu_b
    assert mu.tail(5.0) == nu.tail(5.0)
    assert mu.total_mass == pytest.approx(1.0)
    assert mu.atom_mass == pytest.approx(1.0 - nu_b)
    with pytest.raises(PreconditionError):
        ms.make_counterexample_mu(nu, b_threshold=0.5)
    with pytest.raises(PreconditionError):
        ms.make_counterexample_mu(nu, b_threshold=1.01)  # ν(1.01, ∞) > 1


def test_counterexample_sampler_matches_tail():
    mu = ms.make_counterexample_mu(ms.make_oscillating_nu())
    s = mu.sample(200_000, seed=4)
    for y in (1.0, 3.0, 10.0, 100.0):
        p = float(mu.tail(y))
        assert abs(np.mean(s > y) - p) <= 5 * math.sqrt(p * (1 - p) / s.size) + 1e-12


def test_nu_half_against_mu():
    mu = ms.make_counterexample_mu(ms.make_oscillating_nu())
    nu = ms.make_nu_alpha(0.5)
    xs = np.array([3.0, 40.0, 1e4])
    norm = ms.alpha_norm(mu, 0.5)
    assert ms.product_convolve_tail(nu, mu, xs) == pytest.approx(norm * xs ** -0.5, rel=1e-9)


def test_scaling_identity_report():
    rep = ms.verify_scaling_identity(ms.make_oscillating_nu(), ms.mellin_zero_rho(), 1.0)
    assert rep.max_residual <= 1e-12
    rows = list(rep.rows())
    assert len(rows) == 50 and len(ms.ScalingReport.CSV_HEADER) == len(rows[0])
    assert rep.conv_profile.amplitude < 1e-12 < 0.2 < rep.nu_profile.amplitude


def test_scaling_identity_fails_without_mellin_zero():
    rho = ms.make_atoms([1.0, 2.0], [0.5, 0.5])
    rep = ms.verify_scaling_identity(ms.make_oscillating_nu(), rho, 1.0)
    assert rep.max_residual > 0.05


def test_measure_config_roundtrip():
    for m in (ms.make_nu_alpha(0.5), ms.make_oscillating_nu(1.0, 2.0, 0.2, 0.3), ms.mellin_zero_rho(),
              ms.make_atoms([1.0, 2.0], [0.3, 0.7]), ms.make_counterexample_mu(ms.make_oscillating_nu())):
        again = ms.measure_from_config(m.to_config())
        xs = np.geomspace(0.5, 1e4, 9)
        assert np.array_equal(again.tail(xs), m.tail(xs))
    with pytest.raises(ConfigurationError):
        ms.measure_from_config({"kind": "gaussian"})
