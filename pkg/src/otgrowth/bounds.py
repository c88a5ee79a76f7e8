"""Growth bounds on ``|T(x)|`` for the Brenier map, in two flavors.

``published`` evaluates the closed-form statements. ``assembled`` composes
the abstract bound with the ball lower bounds and tail functions, so every
constant is explicit. Subgaussian bounds also expose ``proof_intermediate``,
the form reached just before the final simplification of constants.
"""

import math
import warnings
from dataclasses import dataclass, field
from types import MappingProxyType

import numpy as np

from ._math import log_unit_ball_volume, unit_ball_volume
from .ballprob import ball_lower_fixed, ball_lower_loggrad, ball_lower_poly, muB0_lower, poly_alpha
from .concentration import (exponential_profile, invert_profile, polytail_psi,
                            subgaussian_profile)
from .errors import DomainError, FormulaDegenerateError

THEOREMS = ("generic", "concentration", "subgaussian_target", "exponential_target",
            "logconcave_target", "polynomial_densities")
FLAVORS = ("published", "assembled", "proof_intermediate")

LAMBDA_POLICY = {
    "subgaussian_target": "lambda = 1/2",
    "exponential_target": "lambda = 1/2",
    "logconcave_target": "lambda = 1/2",
    "polynomial_densities": "lambda = 2|x| for |x| >= 1, lambda = 1 for |x| < 1",
}


def _clamp_mass(mu_ball):
    if not mu_ball > 0:
        raise DomainError(f"ball probability must be > 0, got {mu_ball!r}")
    return min(float(mu_ball), 1.0)


def generic_bound(psi, mu_ball):
    """``max(3 r0, 3 psi^{-1}(mu_ball))`` for a tail function ``psi``."""
    s = _clamp_mass(mu_ball)
    return max(3.0 * psi.r0, 3.0 * invert_profile(psi, s))


def concentration_bound(profile, M_moment, mu_ball):
    """``max(M + 3 r0, M + 3 phi^{-1}(mu_ball))`` for a centered target with
    ``E|z| <= M_moment`` and concentration profile ``phi``."""
    if M_moment < 0:
        raise DomainError("M_moment must be >= 0")
    s = _clamp_mass(mu_ball)
    return max(M_moment + 3.0 * profile.r0, M_moment + 3.0 * invert_profile(profile, s))


@dataclass(frozen=True)
class GrowthBound:
    """Callable ``|x| -> bound``, plus the parameters and constants behind it."""

    theorem: str
    flavor: str
    params: dict
    constants: dict
    fn: object = field(repr=False, compare=False)
    notes: str = ""

    def __post_init__(self):
        if self.theorem not in THEOREMS:
            raise DomainError(f"unknown theorem {self.theorem!r}")
        if self.flavor not in FLAVORS:
            raise DomainError(f"unknown flavor {self.flavor!r}")
        object.__setattr__(self, "params", MappingProxyType(dict(self.params)))
        object.__setattr__(self, "constants", MappingProxyType(dict(self.constants)))

    def evaluate(self, x_norm):
        r = np.asarray(x_norm, dtype=float)
        if np.any(r < 0) or np.any(np.isnan(r)):
            raise DomainError("|x| must be >= 0")
        out = np.asarray(self.fn(r), dtype=float)
        return float(out) if out.ndim == 0 else out

    __call__ = evaluate

    def to_dict(self):
        return {"theorem": self.theorem, "flavor": self.flavor, "params": dict(self.params),
                "constants": dict(self.constants), "notes": self.notes}


def _check_flavor(flavor, allowed=("published", "assembled")):
    if flavor not in allowed:
        raise DomainError(f"flavor must be one of {allowed}, got {flavor!r}")


def _check_loggrad_params(A, V0, d):
    if A < 0:
        raise DomainError("A must be >= 0")
    if not V0 > 0:
        raise DomainError("V0 must be > 0")
    if int(d) != d or d < 1:
        raise DomainError(f"d must be a positive integer, got {d!r}")


def loggrad_ball_mass(A, V0, d, x_norm):
    """Lower bound on ``mu(B(x + u, 1/2))`` used by the concentration theorems.

    ``|x + u| <= |x| + 1``, so the log-gradient ball bound is taken at
    ``|x| + 1`` with the sharp lower bound on ``mu(B(0, 1/2))``.
    """
    return ball_lower_loggrad(A, d, float(x_norm) + 1.0, muB0_lower(A, V0, d, "sharp"))


def _log_loggrad_mass(A, V0, d, r):
    # log of loggrad_ball_mass, kept in log space so large A*d cannot underflow
    log_b0 = min(0.0, -d * math.log(V0) - d * (0.5 * A + math.log(2.0)) + log_unit_ball_volume(d))
    return -1.5 * A * d - 2.0 * A * d * np.log1p(2.0 * (r + 1.0)) + log_b0


# -- subgaussian target ------------------------------------------------------

def subgaussian_bound(A, V0, sigma2, d, flavor="assembled"):
    _check_loggrad_params(A, V0, d)
    if not sigma2 > 0:
        raise DomainError("sigma2 must be > 0")
    _check_flavor(flavor, FLAVORS)
    d = int(d)
    sigma = math.sqrt(sigma2)
    M = math.sqrt(d) * sigma
    params = {"A": A, "V0": V0, "sigma2": sigma2, "d": d, "M_moment": M, "r0": 0.0,
              "lambda_policy": LAMBDA_POLICY["subgaussian_target"]}
    if flavor == "published":
        base = 2 * A * math.log(2.0) + 5 * A - log_unit_ball_volume(d) / d + math.log(V0)

        def fn(r):
            rad = base + 2 * A * np.log1p(r)
            if np.any(rad < 0):
                raise FormulaDegenerateError(
                    f"published subgaussian radicand is negative ({np.min(rad):.6g}); "
                    "use the assembled flavor")
            return M * (3.0 + 3.0 * np.sqrt(rad))

        return GrowthBound("subgaussian_target", flavor, params, {"radicand_at_0": base}, fn)
    if flavor == "proof_intermediate":
        mu0 = muB0_lower(A, V0, d, "paper")
        base = 2 * A * math.log(2.0) + 3 * A - math.log(mu0) / d

        def fn(r):
            return M * (1.0 + 3.0 * np.sqrt(base + 2 * A * np.log1p(r)))

        return GrowthBound("subgaussian_target", flavor, params, {"muB0": mu0}, fn,
                           notes="debug only; differs from the published constants")

    def fn(r):
        log_s = np.minimum(_log_loggrad_mass(A, V0, d, r), 0.0)
        return M + 3.0 * sigma * np.sqrt(-2.0 * log_s)

    return GrowthBound("subgaussian_target", flavor, params,
                       {"M_moment": M, "muB0": muB0_lower(A, V0, d, "sharp")}, fn,
                       notes="ball bound at |x|+1, sharp muB0")


def subgaussian_growth(A, V0, sigma2, d, x_norm, flavor="assembled"):
    return subgaussian_bound(A, V0, sigma2, d, flavor).evaluate(x_norm)


def subgaussian_assembled_reference(A, V0, sigma2, d, x_norm):
    """The assembled subgaussian bound written as the literal composition."""
    mb = loggrad_ball_mass(A, V0, d, x_norm)
    return concentration_bound(subgaussian_profile(sigma2), math.sqrt(d * sigma2), mb)


# -- exponential target --------------------------------------------------------

def exponential_bound(A, V0, c, sigma, d, flavor="assembled", theorem="exponential_target",
                      extra_params=None):
    _check_loggrad_params(A, V0, d)
    if not c >= 1:
        raise DomainError(f"exponential concentration needs c >= 1, got {c!r}")
    if not sigma > 0:
        raise DomainError("sigma must be > 0")
    _check_flavor(flavor)
    d = int(d)
    M = 2.0 * math.sqrt(c * d) * sigma
    params = {"A": A, "V0": V0, "c": c, "sigma": sigma, "d": d, "M_moment": M, "r0": 0.0,
              "lambda_policy": LAMBDA_POLICY[theorem]}
    params.update(extra_params or {})
    if flavor == "published":
        base = (math.log(c) / d + math.log(V0) + 2 * A * math.log(2.0) + 3 * A + 2.0
                - log_unit_ball_volume(d) / d)

        def fn(r):
            inner = base + 2 * A * np.log1p(r)
            if np.any(inner < 0):
                warnings.warn("published exponential bracket is negative; clamped at 0",
                              RuntimeWarning, stacklevel=3)
                inner = np.maximum(inner, 0.0)
            return M + 3.0 * sigma * d * inner

        return GrowthBound(theorem, flavor, params, {"bracket_at_0": base}, fn)

    def fn(r):
        log_s = np.minimum(_log_loggrad_mass(A, V0, d, r), 0.0)
        # inverse of min(1, c e^{-r/sigma}) at s; r0 = 0 when s >= 1
        return M + 3.0 * sigma * np.maximum(math.log(c) - log_s, 0.0) * (log_s < 0)

    return GrowthBound(theorem, flavor, params,
                       {"M_moment": M, "muB0": muB0_lower(A, V0, d, "sharp")}, fn,
                       notes="ball bound at |x|+1, sharp muB0")


def exponential_growth(A, V0, c, sigma, d, x_norm, flavor="assembled"):
    return exponential_bound(A, V0, c, sigma, d, flavor).evaluate(x_norm)


def exponential_assembled_reference(A, V0, c, sigma, d, x_norm):
    mb = loggrad_ball_mass(A, V0, d, x_norm)
    return concentration_bound(exponential_profile(c, sigma), 2.0 * math.sqrt(c * d) * sigma, mb)


# -- log-concave target ------------------------------------------------------

def logconcave_bound(A, V0, c1, c2, d, flavor="assembled"):
    """Exponential bound with ``(c, sigma) = (c1, c2 sqrt(log d))``.

    ``c1`` and ``c2`` are user-assumed constants of the exponential
    concentration of isotropic log-concave measures.
    """
    if int(d) != d or d < 2:
        raise DomainError("log-concave bound needs d >= 2 so that log d > 0")
    return exponential_bound(A, V0, c1, c2 * math.sqrt(math.log(d)), d, flavor,
                             theorem="logconcave_target",
                             extra_params={"c1": c1, "c2": c2, "user_assumed": ["c1", "c2"]})


def logconcave_growth(A, V0, c1, c2, d, x_norm, flavor="assembled"):
    return logconcave_bound(A, V0, c1, c2, d, flavor).evaluate(x_norm)


# -- polynomial densities -------------------------------------------------------

def polynomial_bound(L, q, M_tail, p, d, flavor="assembled", alpha=None, density_inf_B4=None):
    """Bound for ``V <= L(1 + |x|^q)`` and ``W >= M_tail(1 + |y|^p)``.

    ``alpha`` defaults to :func:`poly_alpha`; ``density_inf_B4`` (a lower
    bound on the source density over ``B(0, 4)``) defaults to
    ``L^{-d} (1 + 4^q)^{-d}``, which follows from the same hypothesis.
    """
    if not (p > 1 and q > 1):
        raise DomainError("p and q must both be > 1")
    if not (L > 0 and M_tail > 0):
        raise DomainError("L and M_tail must be > 0")
    if int(d) != d or d < 1:
        raise DomainError(f"d must be a positive integer, got {d!r}")
    _check_flavor(flavor)
    d = int(d)
    alpha_source = "assembled" if alpha is None else "user"
    alpha = poly_alpha(L, q, d) if alpha is None else float(alpha)
    if density_inf_B4 is None:
        density_inf_B4 = math.exp(-d * (math.log(L) + math.log1p(4.0 ** q)))
    psi = polytail_psi(M_tail, p, d)
    exponent = (q - 1.0) / (p - 1.0)
    c_poly = 3.0 * (psi.params["C_tail"] / alpha) ** (1.0 / (d * (p - 1.0)))
    small = generic_bound(psi, ball_lower_fixed(density_inf_B4, d))
    params = {"L": L, "q": q, "M_tail": M_tail, "p": p, "d": d, "r0": 0.0,
              "alpha_source": alpha_source, "lambda_policy": LAMBDA_POLICY["polynomial_densities"]}
    constants = {"alpha": alpha, "C_tail": psi.params["C_tail"], "C_poly": c_poly,
                 "small_ball_bound": small, "exponent": exponent,
                 "density_inf_B4": density_inf_B4}
    if flavor == "published":
        C = max(c_poly, small)
        constants["C"] = C
        return GrowthBound("polynomial_densities", flavor, params, constants,
                           lambda r: C * np.power(1.0 + r, exponent),
                           notes="C = max(C_poly, small-ball bound)")
    u = np.zeros(d)
    u[0] = 1.0

    def one(r):
        if r < 1.0:
            return small
        mb = ball_lower_poly(L, q, d, r, u, density_inf_B4) if alpha_source == "assembled" \
            else alpha * (1.0 + r) ** (-(q - 1) * d)
        return max(small, generic_bound(psi, mb))

    return GrowthBound("polynomial_densities", flavor, params, constants,
                       np.vectorize(one, otypes=[float]),
                       notes="max of the small-ball constant and the |x| >= 1 bound")


def polynomial_growth(L, q, M_tail, p, d, x_norm, alpha_source="assembled", alpha=None,
                      flavor="assembled", density_inf_B4=None):
    if alpha_source not in ("assembled", "user"):
        raise DomainError(f"unknown alpha_source {alpha_source!r}")
    if alpha_source == "user" and alpha is None:
        raise DomainError("alpha_source='user' needs an alpha value")
    if alpha_source == "assembled":
        alpha = None
    return polynomial_bound(L, q, M_tail, p, d, flavor, alpha, density_inf_B4).evaluate(x_norm)


# -- curves ----------------------------------------------------------------------

def log_grid(x_min=1e-3, x_max=1e6, n=200, include_zero=True):
    g = np.geomspace(x_min, x_max, n)
    return np.concatenate([[0.0], g]) if include_zero else g


def bound_curve(published, assembled, x_grid):
    """Rows ``(x, published, assembled, notes)``; a degenerate published value
    becomes NaN with a note instead of stopping the curve."""
    rows = []
    for r in np.asarray(x_grid, dtype=float):
        note = ""
        if published is None:
            pub = math.nan
        else:
            try:
                with warnings.catch_warnings(record=True) as caught:
                    warnings.simplefilter("always")
                    pub = published.evaluate(r)
                if caught:
                    note = "published:clamped"
            except FormulaDegenerateError:
                pub, note = math.nan, "published:degenerate"
        asm = math.nan if assembled is None else assembled.evaluate(r)
        rows.append((float(r), float(pub), float(asm), note))
    return rows


def write_bound_curve_csv(rows, theorem, path):
    """Columns ``x_norm,bound_published,bound_assembled,theorem,flavor_notes``."""
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write("x_norm,bound_published,bound_assembled,theorem,flavor_notes\n")
        for x, pub, asm, note in rows:
            fh.write(f"{x:.17g},{pub:.17g},{asm:.17g},{theorem},{note}\n")


__all__ = [
    "THEOREMS", "FLAVORS", "LAMBDA_POLICY", "GrowthBound", "unit_ball_volume", "generic_bound",
    "concentration_bound", "loggrad_ball_mass", "subgaussian_bound", "subgaussian_growth",
    "subgaussian_assembled_reference", "exponential_bound", "exponential_growth",
    "exponential_assembled_reference", "logconcave_bound", "logconcave_growth",
    "polynomial_bound", "polynomial_growth", "log_grid", "bound_curve", "write_bound_curve_csv",
]
