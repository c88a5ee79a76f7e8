import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import stats

from otgrowth.ballprob import (BallSpec, ball_lower_fixed, ball_lower_loggrad, ball_lower_poly,
                               ball_prob_mc, ball_prob_quad, density_inf_on_ball, muB0_lower,
                               poly_alpha, write_ballprob_csv)
from otgrowth.errors import ConfigurationError, DomainError
from otgrowth.measures import DensityModel


def e(d):
    u = np.zeros(d)
    u[0] = 1.0
    return u


def test_ball_spec():
    b = BallSpec.transport_ball([1.0, 0.0], [0.0, 1.0], 0.5)
    assert b.center == (1.0, 1.0) and b.radius == 0.5
    with pytest.raises(DomainError):
        BallSpec((0.0,), 0.0)
    with pytest.raises(DomainError):
        BallSpec.transport_ball([0.0], [2.0], 1.0)


def test_poly_alpha_example():
    assert poly_alpha(1.0, 2.0, 1) == pytest.approx(1 / 49, rel=1e-14)
    assert ball_lower_poly(1.0, 2.0, 1, 1.0, [1.0], 0.1) == pytest.approx(1 / 98, rel=1e-14)


def test_poly_bound_small_regime_and_errors():
    assert ball_lower_poly(1.0, 2.0, 1, 0.0, [1.0], 0.1) == 0.0
    assert ball_lower_poly(1.0, 2.0, 2, [0.5, 0.0], e(2), 0.1) == pytest.approx(0.1 * math.pi)
    with pytest.raises(DomainError):
        ball_lower_poly(1.0, 2.0, 1, 1.0, [0.5], 0.1)
    with pytest.raises(DomainError):
        ball_lower_poly(1.0, 1.0, 1, 1.0, [1.0], 0.1)


@settings(max_examples=60, deadline=None)
@given(st.floats(1.0, 1e6), st.floats(1.0, 1e6), st.floats(1.1, 4.0), st.integers(1, 4))
def test_poly_bound_nonincreasing(r1, r2, q, d):
    lo, hi = min(r1, r2), max(r1, r2)
    u = e(d)
    assert ball_lower_poly(2.0, q, d, hi, u, 0.1) <= ball_lower_poly(2.0, q, d, lo, u, 0.1)


@settings(max_examples=60, deadline=None)
@given(st.floats(0.0, 1e6), st.floats(0.0, 1e6), st.floats(0.0, 5.0), st.integers(1, 4))
def test_loggrad_bound_nonincreasing(r1, r2, A, d):
    lo, hi = min(r1, r2), max(r1, r2)
    assert ball_lower_loggrad(A, d, hi, 0.3) <= ball_lower_loggrad(A, d, lo, 0.3)


def test_loggrad_examples():
    for x in (0.0, 1.0, 100.0):
        assert ball_lower_loggrad(0.0, 3, x, 0.3) == 0.3
    assert ball_lower_loggrad(1.0, 1, 0.0, 0.3) == pytest.approx(math.exp(-1.5) * 0.3, rel=1e-14)
    with pytest.raises(DomainError):
        ball_lower_loggrad(1.0, 1, 0.0, 1.5)
    with pytest.raises(DomainError):
        ball_lower_loggrad(1.0, 1, 0.0, 0.0)


def test_muB0_lower_values():
    assert muB0_lower(0.0, 1.0, 1, "sharp") == 1.0
    # 2 * exp(-(1 + 1/2 + log 2)) = exp(-3/2)
    assert muB0_lower(1.0, 1.0, 1, "paper") == pytest.approx(math.exp(-1.5), rel=1e-14)
    assert muB0_lower(1.0, 1.0, 1, "sharp") == pytest.approx(math.exp(-0.5), rel=1e-14)
    with pytest.raises(DomainError):
        muB0_lower(1.0, 0.0, 1)
    with pytest.raises(DomainError):
        muB0_lower(1.0, 1.0, 1, "other")


@pytest.mark.parametrize("d", [1, 2, 3])
def test_muB0_lower_dominated(d):
    model = DensityModel.polyv(2, d)
    s = model.structural
    exact = ball_prob_quad(model, BallSpec(np.zeros(d), 0.5)).value
    assert muB0_lower(s["A"], s["V0"], d, "sharp") <= exact
    assert muB0_lower(s["A"], s["V0"], d, "paper") <= exact


def test_ball_prob_mc_examples():
    est = ball_prob_mc(DensityModel.uniform(0, 1), BallSpec((0.5,), 0.25), 20_000, seed=0)
    assert abs(est.value - 0.5) <= 3 * est.stderr
    est = ball_prob_mc(DensityModel.gaussian(0, 1), BallSpec((0.0,), 1.0), 100_000, seed=1)
    assert abs(est.value - (stats.norm.cdf(1) - stats.norm.cdf(-1))) <= 3 * est.stderr
    est = ball_prob_mc(DensityModel.gaussian(0, 1), BallSpec((0.0,), 1e-9), 10_000, seed=2)
    assert est.value == 0.0


@pytest.mark.parametrize("d", [1, 2, 3])
def test_quadrature_agrees_with_closed_forms(d):
    # standard Gaussian ball about the origin: chi-square cdf
    model = DensityModel.gaussian(0.0, 1.0, dim=d)
    q = ball_prob_quad(model, BallSpec(np.zeros(d), 1.3))
    assert q.value == pytest.approx(stats.chi2.cdf(1.3 ** 2, d), abs=1e-9)
    # off-center: noncentral chi-square cdf
    c = 0.7 * e(d)
    q = ball_prob_quad(model, BallSpec(c, 1.1))
    assert q.value == pytest.approx(stats.ncx2.cdf(1.1 ** 2, d, 0.49), abs=1e-8)


@pytest.mark.parametrize("d", [1, 2])
def test_quadrature_non_radial_path(d):
    model = DensityModel.gaussian(0.5 * e(d), 1.0, dim=d)
    q = ball_prob_quad(model, BallSpec(1.2 * e(d), 0.9))
    assert q.value == pytest.approx(stats.ncx2.cdf(0.81, d, 0.49), abs=1e-8)


def test_density_inf_on_ball():
    model = DensityModel.polyv(2, 1)
    assert density_inf_on_ball(model, 7.0) == pytest.approx(1 / (math.pi * 50))
    with pytest.raises(ConfigurationError):
        density_inf_on_ball(DensityModel.laplace(1.0, 1), 1.0)


def test_fixed_ball_bound():
    model = DensityModel.polyv(2, 2)
    inf4 = density_inf_on_ball(model, 4.0)
    for r in (0.0, 0.3, 0.99):
        exact = ball_prob_quad(model, BallSpec(r * e(2) + 2 * e(2), 1.0)).value
        assert ball_lower_fixed(inf4, 2) <= exact


@pytest.mark.parametrize("d", [1, 2, 3])
@pytest.mark.parametrize("q", [2.0, 3.0])
def test_analytic_bounds_dominated(d, q):
    model = DensityModel.polyv(q, d)
    s = model.structural
    inf7 = density_inf_on_ball(model, 7.0)
    mu0 = muB0_lower(s["A"], s["V0"], d)
    u = e(d)
    for r in (0.5, 1.0, 2.0, 4.0, 8.0):
        x = r * u
        truth = ball_prob_quad(model, BallSpec(x + 4 * r * u, 2 * r))
        assert ball_lower_poly(s["L"], q, d, x, u, inf7) <= truth.value + 3 * truth.abserr
        truth = ball_prob_quad(model, BallSpec(x, 0.5))
        assert ball_lower_loggrad(s["A"], d, x, mu0) <= truth.value + 3 * truth.abserr


def test_poly_bound_mc_oracle_at_three():
    model = DensityModel.polyv(2, 1)
    s = model.structural
    est = ball_prob_mc(model, BallSpec((15.0,), 6.0), 1_000_000, seed=11)
    lower = ball_lower_poly(s["L"], 2, 1, 3.0, [1.0], density_inf_on_ball(model, 7.0))
    assert lower <= est.value - 3 * est.stderr


def test_write_ballprob_csv(tmp_path):
    write_ballprob_csv([(1.0, 0.1, 0.2, 0.01, True)], tmp_path / "b.csv")
    lines = (tmp_path / "b.csv").read_text().splitlines()
    assert lines == ["x_norm,analytic_lower,mc_estimate,mc_stderr,pass", "1,0.10000000000000001,0.20000000000000001,0.01,1"]
