"""Lower bounds on source ball probabilities and the estimators that check them."""

import math
from dataclasses import dataclass

import numpy as np
from scipy import integrate

from ._math import log_unit_ball_volume, unit_ball_volume
from ._validation import check_positive, check_unit_vector, norm_of
from .errors import ConfigurationError, DomainError
from .measures import MCEstimate, sample


@dataclass(frozen=True)
class BallSpec:
    center: tuple
    radius: float

    def __post_init__(self):
        if not self.radius > 0:
            raise DomainError(f"ball radius must be > 0, got {self.radius!r}")
        object.__setattr__(self, "center", tuple(np.atleast_1d(np.asarray(self.center, float)).tolist()))

    @property
    def dim(self):
        return len(self.center)

    @classmethod
    def transport_ball(cls, x, u, lam):
        """``B(x + 2 lam u, lam)``, the ball whose image lies in the cone at T(x)."""
        x = np.atleast_1d(np.asarray(x, float))
        u = check_unit_vector(u)
        return cls(x + 2.0 * lam * u, check_positive(lam, "lambda"))


@dataclass(frozen=True)
class QuadEstimate:
    """Deterministic ball probability with the integrator's error estimate."""

    value: float
    abserr: float


def poly_alpha(L, q, d):
    """``alpha = L^{-d} 7^{-qd} 2^{-(q-1)d} omega_d`` for the ``|x| >= 1`` regime."""
    return math.exp(-d * math.log(L) - q * d * math.log(7.0) - (q - 1) * d * math.log(2.0)
                    + log_unit_ball_volume(d))


def ball_lower_poly(L, q, d, x, u, V_bounded_region_inf):
    """Lower bound on ``mu(B(x + 4|x|u, 2|x|))`` when ``V <= L(1 + |z|^q)``.

    For ``|x| >= 1`` returns ``alpha (1 + |x|)^{-(q-1)d}`` with
    :func:`poly_alpha`. For ``|x| < 1`` the ball sits inside ``B(0, 7)`` and the
    value is ``V_bounded_region_inf * omega_d * (2|x|)^d``, where the first
    factor is a lower bound on the density over ``B(0, 7)``.
    """
    if not q > 1:
        raise DomainError("q must be > 1")
    check_positive(L, "L")
    check_unit_vector(u)
    r = norm_of(x)
    if r >= 1.0:
        return poly_alpha(L, q, d) * (1.0 + r) ** (-(q - 1) * d)
    return V_bounded_region_inf * unit_ball_volume(d) * (2.0 * r) ** d


def ball_lower_fixed(density_inf_B4, d):
    """Lower bound on ``mu(B(x + 2u, 1))`` for ``|x| < 1``: that ball lies in
    ``B(0, 4)``, so its mass is at least ``inf_{B(0,4)} density * omega_d``."""
    return density_inf_B4 * unit_ball_volume(d)


def ball_lower_loggrad(A, d, x, muB0):
    """``exp(-3Ad/2) (1 + 2|x|)^{-2Ad} muB0``, a lower bound on ``mu(B(x, 1/2))``
    when ``|grad log V| <= A/(1 + |x|)`` and ``muB0 <= mu(B(0, 1/2))``."""
    if A < 0:
        raise DomainError("A must be >= 0")
    if not 0 < muB0 <= 1:
        raise DomainError(f"muB0 must lie in (0, 1], got {muB0!r}")
    r = norm_of(x)
    return math.exp(-1.5 * A * d - 2.0 * A * d * math.log1p(2.0 * r)) * muB0


def muB0_lower(A, V0, d, variant="paper"):
    """Lower bound on ``mu(B(0, 1/2))`` from ``log V`` being A-Lipschitz.

    ``"paper"``: ``exp(-d log V0 - d(A + 1/2 + log 2)) omega_d``.
    ``"sharp"``: ``exp(-d log V0 - d(A/2 + log 2)) omega_d`` (density at least
    ``V0^{-d} e^{-Ad/2}`` on a ball of volume ``omega_d 2^{-d}``).
    Both are capped at 1.
    """
    if not V0 > 0:
        raise DomainError(f"V0 must be > 0, got {V0!r}")
    if A < 0:
        raise DomainError("A must be >= 0")
    if variant == "paper":
        expo = -d * math.log(V0) - d * (A + 0.5 + math.log(2.0))
    elif variant == "sharp":
        expo = -d * math.log(V0) - d * (0.5 * A + math.log(2.0))
    else:
        raise DomainError(f"unknown variant {variant!r}")
    return min(1.0, math.exp(expo + log_unit_ball_volume(d)))


def density_inf_on_ball(model, radius):
    """Exact infimum of a radially decreasing density over ``B(0, radius)``."""
    if model.family == "polyv" or (model.family == "gaussian" and model.is_radial):
        return float(model.radial_density(radius))
    raise ConfigurationError(
        f"no certified density infimum for {model!r}; supply the bound explicitly")


def ball_prob_mc(model, ball, n, seed=None):
    """Fraction of ``n`` samples inside ``ball``, with binomial standard error."""
    if ball.dim != model.dim:
        raise DomainError("ball and model dimensions differ")
    X, info = sample(model, n, seed, return_info=True)
    inside = np.linalg.norm(X - np.asarray(ball.center), axis=1) <= ball.radius
    p = float(inside.mean())
    return MCEstimate(p, math.sqrt(p * (1.0 - p) / n), int(n), seed, info)


def ball_prob_quad(model, ball, epsabs=1e-13, epsrel=1e-10):
    """Ball probability by adaptive quadrature (d <= 3).

    Radial densities reduce to a single integral over ``|z|`` weighted by
    the measure of the sphere ``|z| = r`` inside the ball; otherwise the
    integral runs in polar coordinates about the ball center.
    """
    d = model.dim
    if d > 3:
        raise DomainError("quadrature path supports d <= 3")
    if ball.dim != d:
        raise DomainError("ball and model dimensions differ")
    c = np.asarray(ball.center)
    rho = ball.radius
    kw = dict(epsabs=epsabs, epsrel=epsrel, limit=200)
    if model.is_radial:
        return _ball_prob_radial(model, float(np.linalg.norm(c)), rho, kw)
    if d == 1:
        f = lambda t: float(model.density([[t]])[0])  # noqa: E731
        val, err = integrate.quad(f, c[0] - rho, c[0] + rho, **kw)
    elif d == 2:
        def g(r, th):
            z = c + r * np.array([math.cos(th), math.sin(th)])
            return r * float(model.density(z[None, :])[0])
        val, err = integrate.nquad(g, [[0, rho], [0, 2 * math.pi]], opts=kw)
    else:
        def g(r, th, ph):
            s = math.sin(ph)
            z = c + r * np.array([s * math.cos(th), s * math.sin(th), math.cos(ph)])
            return r * r * s * float(model.density(z[None, :])[0])
        val, err = integrate.nquad(g, [[0, rho], [0, 2 * math.pi], [0, math.pi]], opts=kw)
    return QuadEstimate(float(val), float(err))


def _ball_prob_radial(model, a, rho, kw):
    d = model.dim
    lo = max(0.0, a - rho)
    hi = a + rho
    dens = model.radial_density

    def shell(r):
        # measure of {|z| = r} inside B(c, rho), |c| = a
        if r <= rho - a:
            return _sphere_measure(d, r)
        cos_t = (r * r + a * a - rho * rho) / (2.0 * r * a)
        cos_t = min(1.0, max(-1.0, cos_t))
        if d == 1:
            return 1.0
        if d == 2:
            return 2.0 * r * math.acos(cos_t)
        return 2.0 * math.pi * r * r * (1.0 - cos_t)

    breaks = [b for b in (rho - a,) if lo < b < hi]
    val, err = integrate.quad(lambda r: float(dens(r)) * shell(r), lo, hi, points=breaks or None, **kw)
    return QuadEstimate(float(val), float(err))


def _sphere_measure(d, r):
    if d == 1:
        return 2.0
    if d == 2:
        return 2.0 * math.pi * r
    return 4.0 * math.pi * r * r


def write_ballprob_csv(rows, path):
    """Rows of ``(x_norm, analytic_lower, estimate, stderr, pass)``."""
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write("x_norm,analytic_lower,mc_estimate,mc_stderr,pass\n")
        for x, lower, est, se, ok in rows:
            fh.write(f"{x:.17g},{lower:.17g},{est:.17g},{se:.17g},{int(ok)}\n")


__all__ = [
    "BallSpec", "QuadEstimate", "poly_alpha", "ball_lower_poly", "ball_lower_fixed",
    "ball_lower_loggrad", "muB0_lower", "density_inf_on_ball", "ball_prob_mc",
    "ball_prob_quad", "write_ballprob_csv",
]
