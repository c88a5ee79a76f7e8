import math
import warnings

import numpy as np
import pytest
from scipy import stats

from otgrowth import bounds as B
from otgrowth.ballprob import BallSpec, ball_lower_loggrad, ball_prob_mc, muB0_lower
from otgrowth.concentration import exponential_profile, poly_tail, polytail_psi, subgaussian_profile
from otgrowth.errors import DomainError, FormulaDegenerateError
from otgrowth.measures import DensityModel
from otgrowth.transport import default_grid, quantile_map_1d

CAUCHY = DensityModel.polyv(2, 1)
LOG2 = math.log(2.0)


def test_unit_ball_volume():
    assert B.unit_ball_volume(1) == pytest.approx(2.0, rel=1e-14)
    assert B.unit_ball_volume(2) == pytest.approx(math.pi, rel=1e-14)
    assert B.unit_ball_volume(3) == pytest.approx(4 * math.pi / 3, rel=1e-14)
    # log-gamma route stays finite far past where the direct gamma overflows
    assert 0.0 < B.unit_ball_volume(400) < 1e-100


# -- abstract bounds ----------------------------------------------------------

def test_generic_bound_examples():
    psi = poly_tail(1.0, 2.0)
    assert B.generic_bound(psi, 0.04) == pytest.approx(15.0, rel=1e-12)
    psi2 = poly_tail(1.0, 2.0, r0=2.0)
    assert B.generic_bound(psi2, 0.5) == pytest.approx(6.0)
    with pytest.raises(DomainError):
        B.generic_bound(psi, 0.0)


def test_concentration_bound_examples():
    assert B.concentration_bound(subgaussian_profile(1.0), 0.0, math.exp(-2)) == pytest.approx(6.0, rel=1e-12)
    assert B.concentration_bound(subgaussian_profile(1.0), 1.7, 1.0) == 1.7
    # masses above 1 come from analytic slack and are clamped
    assert B.concentration_bound(subgaussian_profile(1.0), 1.7, 3.0) == 1.7
    assert B.concentration_bound(exponential_profile(1, 1), 1.0, math.exp(-3)) == pytest.approx(10.0, rel=1e-12)
    with pytest.raises(DomainError):
        B.concentration_bound(subgaussian_profile(1.0), -1.0, 0.5)


@pytest.mark.parametrize("M,p,d", [(1.0, 2.0, 1), (2.0, 3.0, 1), (1.3, 2.5, 2), (0.8, 1.5, 3)])
def test_psi_inverse_closed_form(M, p, d):
    psi = polytail_psi(M, p, d)
    C = psi.params["C_tail"]
    for s in (1e-9, 1e-4, 0.01, 0.3, 0.99):
        expect = 3.0 * (C / s) ** (1.0 / (d * (p - 1.0)))
        assert B.generic_bound(psi, s) == pytest.approx(expect, rel=1e-12)


# -- published values -----------------------------------------------------------

def test_subgaussian_published_example():
    got = B.subgaussian_growth(1, 1, 1, 1, 0.0, flavor="published")
    assert got == pytest.approx(3 + 3 * math.sqrt(5 + LOG2), rel=1e-9)
    assert got == pytest.approx(10.158095, abs=1e-6)


def test_subgaussian_published_degenerate():
    b = B.subgaussian_bound(0, 1, 1, 1, flavor="published")
    assert b.constants["radicand_at_0"] == pytest.approx(-LOG2, rel=1e-14)
    with pytest.raises(FormulaDegenerateError, match="assembled"):
        b(0.0)
    # the assembled flavor stays defined: A = 0 makes the ball mass 1
    assert B.subgaussian_growth(0, 1, 1, 1, 0.0) == pytest.approx(1.0)


def test_exponential_published_example():
    got = B.exponential_growth(1, 1, 1, 1, 1, 0.0, flavor="published")
    assert got == pytest.approx(2 + 3 * (5 + LOG2), rel=1e-9)
    assert got == pytest.approx(19.0794, abs=1e-4)


@pytest.mark.parametrize("x", [0.0, 0.3, 1.0, 7.0, 1e4])
def test_exponential_doubling_increment(x):
    A, sigma, d = 1.7, 0.6, 2
    b = B.exponential_bound(A, 2.0, 1.5, sigma, d, flavor="published")
    inc = 3 * sigma * d * 2 * A * math.log((1 + 2 * x) / (1 + x))
    assert b(2 * x) - b(x) == pytest.approx(inc, rel=1e-9, abs=1e-12)


def test_exponential_published_clamps_with_warning():
    b = B.exponential_bound(0.0, 0.1, 1.0, 1.0, 1, flavor="published")
    assert b.constants["bracket_at_0"] < 0
    with pytest.warns(RuntimeWarning):
        assert b(0.0) == pytest.approx(2.0)
    with pytest.raises(DomainError):
        B.exponential_bound(1, 1, 0.5, 1, 1)


def test_proof_intermediate_flavor():
    A, V0, d = 1.0, 1.0, 1
    b = B.subgaussian_bound(A, V0, 1.0, d, flavor="proof_intermediate")
    mu0 = muB0_lower(A, V0, d, "paper")
    assert b(0.0) == pytest.approx(1 + 3 * math.sqrt(2 * LOG2 + 3 - math.log(mu0)), rel=1e-12)
    # it is a different constant from the published one
    assert b(0.0) != pytest.approx(B.subgaussian_growth(A, V0, 1, d, 0.0, "published"))
    assert "debug" in b.notes


def test_logconcave_composition():
    for x in (0.0, 1.0, 50.0):
        for flavor in ("published", "assembled"):
            got = B.logconcave_growth(1, 1, 1, 1, 2, x, flavor)
            ref = B.exponential_growth(1, 1, 1, math.sqrt(math.log(2)), 2, x, flavor)
            assert got == ref
    b = B.logconcave_bound(1, 1, 1, 1, 2)
    assert b.params["user_assumed"] == ["c1", "c2"]
    with pytest.raises(DomainError):
        B.logconcave_bound(1, 1, 1, 1, 1)


@pytest.mark.parametrize("flavor", ["published", "assembled"])
def test_logconcave_dimension_sweep_shape(flavor):
    x = 10.0
    ratios = []
    for d in range(2, 65):
        ld = math.log(d)
        shape = d * math.sqrt(ld) * (1 + ld + math.log1p(x))
        ratios.append(B.logconcave_growth(1, 1, 1, 1, d, x, flavor) / shape)
    ratios = np.array(ratios)
    assert np.all(np.isfinite(ratios))
    assert ratios.max() / ratios.min() < 10


def test_polynomial_exponents():
    assert B.polynomial_bound(1, 2.5, 1, 2.5, 1).constants["exponent"] == 1.0
    assert B.polynomial_bound(1, 3, 1, 2, 1).constants["exponent"] == 2.0
    with pytest.raises(DomainError):
        B.polynomial_bound(1, 3, 1, 1, 1)
    with pytest.raises(DomainError):
        B.polynomial_bound(1, 1, 1, 2, 1)


def test_polynomial_published_constant():
    b = B.polynomial_bound(1, 3, 1, 2, 1, flavor="published")
    c = b.constants
    assert c["C"] == max(c["C_poly"], c["small_ball_bound"])
    for x in (0.0, 2.0, 100.0):
        assert b(x) == pytest.approx(c["C"] * (1 + x) ** 2, rel=1e-14)


def test_polynomial_user_alpha():
    a = B.polynomial_growth(1, 3, 1, 2, 1, 5.0, alpha_source="user", alpha=0.5)
    psi = polytail_psi(1, 2, 1)
    small = B.polynomial_bound(1, 3, 1, 2, 1).constants["small_ball_bound"]
    expect = max(small, 3 * (psi.params["C_tail"] / (0.5 * 6.0 ** -2)))
    assert a == pytest.approx(expect, rel=1e-12)
    with pytest.raises(DomainError):
        B.polynomial_growth(1, 3, 1, 2, 1, 5.0, alpha_source="user")


# -- structural properties ---------------------------------------------------

def _all_bounds():
    out = []
    for f in ("published", "assembled"):
        out += [B.subgaussian_bound(4, math.pi, 1, 1, f), B.subgaussian_bound(1, 1, 2, 3, f),
                B.exponential_bound(4, math.pi, 3, 4, 1, f), B.logconcave_bound(1, 1, 1, 1, 8, f),
                B.polynomial_bound(math.pi, 2, 2, 3, 1, f), B.polynomial_bound(1, 3, 1, 2, 2, f)]
    return out


@pytest.mark.parametrize("bound", _all_bounds(), ids=lambda b: f"{b.theorem}-{b.flavor}")
def test_monotone_and_nonnegative(bound):
    x = B.log_grid(1e-3, 1e6, 1000)
    vals = bound(x)
    assert np.all(vals >= 0)
    assert np.all(np.diff(vals) >= -1e-12 * vals[1:])


def test_evaluate_rejects_negative_and_is_vectorized():
    b = B.subgaussian_bound(1, 1, 1, 1)
    assert isinstance(b(1.0), float)
    assert b(np.array([0.0, 1.0])).shape == (2,)
    with pytest.raises(DomainError):
        b(-1.0)
    with pytest.raises(TypeError):
        b.params["A"] = 2
    assert b.to_dict()["params"]["A"] == 1


@pytest.mark.parametrize("pub,asm", [
    (B.subgaussian_bound(4, math.pi, 1, 1, "published"), B.subgaussian_bound(4, math.pi, 1, 1)),
    (B.subgaussian_bound(1, 1, 1, 1, "published"), B.subgaussian_bound(1, 1, 1, 1)),
    (B.exponential_bound(4, math.pi, 3, 4, 1, "published"), B.exponential_bound(4, math.pi, 3, 4, 1)),
    (B.logconcave_bound(1, 1, 1, 1, 4, "published"), B.logconcave_bound(1, 1, 1, 1, 4)),
    (B.polynomial_bound(math.pi, 2, 2, 3, 1, "published"), B.polynomial_bound(math.pi, 2, 2, 3, 1)),
])
def test_flavor_ratio_bounded(pub, asm):
    x = np.geomspace(1, 1e6, 400)
    log_ratio = np.log(pub(x) / asm(x))
    assert np.all(np.isfinite(log_ratio))
    # same growth order: the ratio settles instead of drifting
    assert np.max(np.abs(log_ratio)) < math.log(50)
    assert abs(log_ratio[-1] - log_ratio[-50]) < 0.05


@pytest.mark.parametrize("A,V0,s2,d", [(4, math.pi, 1, 1), (1, 1, 2, 3), (0.5, 2, 0.3, 2), (6, 2, 1, 1)])
def test_subgaussian_assembled_is_the_composition(A, V0, s2, d):
    b = B.subgaussian_bound(A, V0, s2, d)
    for x in (0.0, 0.5, 3.0, 1e3, 1e6):
        ref = B.subgaussian_assembled_reference(A, V0, s2, d, x)
        # written out by hand from the pieces
        mb = ball_lower_loggrad(A, d, x + 1, muB0_lower(A, V0, d, "sharp"))
        hand = B.concentration_bound(subgaussian_profile(s2), math.sqrt(d * s2), mb)
        assert ref == hand
        assert b(x) == pytest.approx(ref, rel=1e-12)


@pytest.mark.parametrize("A,V0,c,sigma,d", [(4, math.pi, 3, 4, 1), (1, 1, 1, 1, 2)])
def test_exponential_assembled_is_the_composition(A, V0, c, sigma, d):
    b = B.exponential_bound(A, V0, c, sigma, d)
    for x in (0.0, 0.5, 3.0, 1e3, 1e6):
        assert b(x) == pytest.approx(B.exponential_assembled_reference(A, V0, c, sigma, d, x), rel=1e-12)


def test_assembled_survives_underflow():
    # A*d large enough that the ball mass underflows a double
    b = B.subgaussian_bound(40, 2.0, 1.0, 20)
    assert math.isfinite(b(1e6)) and b(1e6) > b(0.0)


# -- end-to-end 1D oracles -------------------------------------------------------

def _abs_map(target):
    x = default_grid(CAUCHY)
    T = quantile_map_1d(CAUCHY, target, x)
    return x, np.abs(T.values)


def test_cauchy_to_normal_domination():
    s = CAUCHY.structural
    x, absT = _abs_map(DensityModel.gaussian(0.0, 1.0))
    b = B.subgaussian_bound(s["A"], s["V0"], 1.0, 1)
    assert np.all(absT <= b(np.abs(x)))
    # the map at 1 is Phi^{-1}(3/4)
    assert quantile_map_1d(CAUCHY, DensityModel.gaussian(0, 1), [1.0]).values[0] == pytest.approx(
        stats.norm.ppf(0.75), abs=1e-9)


def test_cauchy_to_laplace_domination():
    s = CAUCHY.structural
    lap = DensityModel.laplace(1.0, 1)
    x, absT = _abs_map(lap)
    c = lap.structural
    b = B.exponential_bound(s["A"], s["V0"], c["c"], c["sigma"], 1)
    assert np.all(absT <= b(np.abs(x)))


def test_cauchy_to_t_slope_and_domination():
    src, tgt = CAUCHY.structural, DensityModel.polyv(3, 1)
    t = tgt.structural
    x, absT = _abs_map(tgt)
    b = B.polynomial_bound(src["L"], src["q"], t["M"], t["p"], 1)
    assert np.all(absT <= b(np.abs(x)))
    tail = x > 100
    slope = np.polyfit(np.log(x[tail]), np.log(absT[tail]), 1)[0]
    assert abs(slope - 0.5) <= 0.15 * 0.5


def test_generic_bound_with_mc_ball_mass():
    # Cauchy to Cauchy: T is the identity, W = pi (1 + y^2) >= 1 + y^2
    psi = polytail_psi(1.0, 2.0, 1)
    for r in (1.0, 3.0, 10.0):
        lam = 2 * r
        est = ball_prob_mc(CAUCHY, BallSpec((r + 2 * lam,), lam), 100_000, seed=int(r))
        bound = B.generic_bound(psi, est.value + 3 * est.stderr)
        assert r <= bound


# -- curves -------------------------------------------------------------------

def test_bound_curve_notes_and_csv(tmp_path):
    pub = B.subgaussian_bound(0.1, 0.2, 1, 1, "published")
    asm = B.subgaussian_bound(0.1, 0.2, 1, 1)
    rows = B.bound_curve(pub, asm, [0.0, 1e6])
    assert rows[0][3] == "published:degenerate" and math.isnan(rows[0][1])
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        rows2 = B.bound_curve(B.exponential_bound(0, 0.1, 1, 1, 1, "published"), None, [0.0])
    assert rows2[0][3] == "published:clamped"
    path = tmp_path / "c.csv"
    B.write_bound_curve_csv(rows, "subgaussian_target", path)
    lines = path.read_text().splitlines()
    assert lines[0] == "x_norm,bound_published,bound_assembled,theorem,flavor_notes"
    assert lines[1].startswith("0,nan,")
    assert lines[1].endswith(",subgaussian_target,published:degenerate")


def test_log_grid():
    g = B.log_grid(1e-3, 1e6, 10)
    assert g[0] == 0.0 and g.size == 11 and g[-1] == pytest.approx(1e6)
    assert B.log_grid(1, 10, 3, include_zero=False).size == 3
