"""Concentration profiles, tail functions and their generalized inverses,
empirical tail checks, and the Lyapunov drift used for polynomial
concentration.
"""

import math
from dataclasses import dataclass, field

import numpy as np

from ._math import unit_ball_volume
from ._validation import as_rows, check_points, check_unit_vector
from .errors import DomainError, InfeasibleDriftError, UnboundedInverseError, UnsupportedConstantError

PROFILE_KINDS = ("subgaussian", "exponential", "polyconc", "custom")
TAIL_KINDS = ("polytail", "from_profile", "custom")
_SEARCH_MAX = 1e15


def _nudge_up(f, r, s):
    # closed forms can land one ulp on the wrong side of s
    for _ in range(64):
        if f(r) <= s:
            return r
        r = np.nextafter(r, np.inf)
    return r


@dataclass(frozen=True)
class ConcentrationProfile:
    """Decreasing ``phi`` on ``[r0, inf)`` with values clamped to ``[0, 1]``.

    ``kind`` selects the formula from ``params``; a ``custom`` profile carries
    its own callable in ``fn``.
    """

    kind: str
    params: dict
    r0: float = 0.0
    fn: object = field(default=None, compare=False, repr=False)

    def __post_init__(self):
        if self.kind not in PROFILE_KINDS:
            raise DomainError(f"unknown profile kind {self.kind!r}")
        if self.r0 < 0:
            raise DomainError("r0 must be >= 0")
        if self.kind == "custom" and self.fn is None:
            raise DomainError("custom profile needs a callable")

    def __call__(self, r):
        r = np.asarray(r, dtype=float)
        p = self.params
        with np.errstate(divide="ignore", over="ignore"):
            if self.kind == "subgaussian":
                v = np.exp(-r * r / (2.0 * p["sigma2"]))
            elif self.kind == "exponential":
                v = p["c"] * np.exp(-r / p["sigma"])
            elif self.kind == "polyconc":
                v = p["C"] * np.power(r, -p["ell"])
            else:
                v = np.vectorize(self.fn, otypes=[float])(r)
        v = np.minimum(v, 1.0)
        return float(v) if v.ndim == 0 else v

    def inverse(self, s):
        return invert_profile(self, s)

    def to_json(self):
        if self.kind == "custom":
            raise DomainError("custom profiles are not serializable")
        return {"kind": self.kind, "params": dict(self.params), "r0": self.r0}

    @classmethod
    def from_json(cls, obj):
        builders = {
            "subgaussian": lambda p: subgaussian_profile(p["sigma2"]),
            "exponential": lambda p: exponential_profile(p["c"], p["sigma"]),
            "polyconc": lambda p: polyconc_profile(p["C"], p["ell"], obj.get("r0", 0.0)),
        }
        if obj.get("kind") not in builders:
            raise DomainError(f"cannot deserialize profile kind {obj.get('kind')!r}")
        return builders[obj["kind"]](obj["params"])


@dataclass(frozen=True)
class TailFunction:
    """Decreasing ``psi`` with ``psi(r) >= nu(|z| >= r)`` for ``r >= r0``."""

    kind: str
    params: dict
    r0: float = 0.0
    profile: ConcentrationProfile = None
    fn: object = field(default=None, compare=False, repr=False)

    def __post_init__(self):
        if self.kind not in TAIL_KINDS:
            raise DomainError(f"unknown tail kind {self.kind!r}")

    def __call__(self, r):
        r = np.asarray(r, dtype=float)
        with np.errstate(divide="ignore", over="ignore"):
            if self.kind == "polytail":
                v = self.params["C_tail"] * np.power(r, -self.params["exponent"])
            elif self.kind == "from_profile":
                v = np.asarray(self.profile(np.maximum(r - self.params["M"], 0.0)))
            else:
                v = np.vectorize(self.fn, otypes=[float])(r)
        return float(v) if np.ndim(v) == 0 else v

    def inverse(self, s):
        return invert_profile(self, s)

    def to_json(self):
        if self.kind == "custom":
            raise DomainError("custom tails are not serializable")
        out = {"kind": self.kind, "params": dict(self.params), "r0": self.r0}
        if self.profile is not None:
            out["profile"] = self.profile.to_json()
        return out


def subgaussian_profile(sigma2):
    if not sigma2 > 0:
        raise DomainError(f"sigma2 must be > 0, got {sigma2!r}")
    return ConcentrationProfile("subgaussian", {"sigma2": float(sigma2)}, 0.0)


def exponential_profile(c, sigma):
    """``phi(r) = min(1, c exp(-r/sigma))``; requires ``c >= 1``."""
    if not c >= 1:
        raise DomainError(f"exponential profile needs c >= 1, got {c!r}")
    if not sigma > 0:
        raise DomainError(f"sigma must be > 0, got {sigma!r}")
    return ConcentrationProfile("exponential", {"c": float(c), "sigma": float(sigma)}, 0.0)


def polyconc_profile(C, ell, r0=0.0):
    if not (C > 0 and ell > 0):
        raise DomainError("polynomial profile needs C > 0 and ell > 0")
    return ConcentrationProfile("polyconc", {"C": float(C), "ell": float(ell)}, float(r0))


def custom_profile(fn, r0=0.0):
    return ConcentrationProfile("custom", {}, float(r0), fn)


def polytail_psi(M, p, d, r0=0.0):
    """Tail function ``C_tail * r^{-d(p-1)}`` for ``nu = W^{-d}`` with
    ``W(y) >= M (1 + |y|^p)``, where ``C_tail = M^{-d} omega_d / (p-1)``.

    Valid for every ``r > 0`` because ``(1 + |y|^p)^{-d} <= |y|^{-pd}``.
    """
    if not p > 1:
        raise DomainError(f"p must be > 1 for an integrable tail, got {p!r}")
    if not M > 0:
        raise DomainError(f"M must be > 0, got {M!r}")
    d = int(d)
    c_tail = M ** (-d) * unit_ball_volume(d) / (p - 1)
    return TailFunction("polytail", {"C_tail": c_tail, "exponent": d * (p - 1),
                                     "M": float(M), "p": float(p), "d": d}, float(r0))


def poly_tail(C_tail, exponent, r0=0.0):
    """Bare ``C_tail * r^{-exponent}`` tail function."""
    if not (C_tail > 0 and exponent > 0):
        raise DomainError("poly tail needs positive constant and exponent")
    return TailFunction("polytail", {"C_tail": float(C_tail), "exponent": float(exponent)}, float(r0))


def tail_from_profile(profile, M):
    """``psi(r) = phi(r - M)``, valid for ``r >= M + r0`` when ``E|z| <= M``."""
    if M < 0:
        raise DomainError("moment bound M must be >= 0")
    return TailFunction("from_profile", {"M": float(M)}, float(M) + profile.r0, profile)


def custom_tail(fn, r0=0.0):
    return TailFunction("custom", {}, float(r0), None, fn)


def invert_profile(f, s):
    """Generalized inverse: smallest ``r >= r0`` with ``f(r) <= s``."""
    if not s > 0:
        raise DomainError(f"inverse level must be > 0, got {s!r}")
    s = float(s)
    r0 = float(f.r0)
    if f(r0) <= s:
        return r0
    p = f.params
    if f.kind == "subgaussian":
        r = math.sqrt(p["sigma2"]) * math.sqrt(2.0 * math.log(1.0 / s))
    elif f.kind == "exponential":
        r = p["sigma"] * math.log(p["c"] / s)
    elif f.kind == "polyconc":
        r = (p["C"] / s) ** (1.0 / p["ell"])
    elif f.kind == "polytail":
        r = (p["C_tail"] / s) ** (1.0 / p["exponent"])
    elif f.kind == "from_profile":
        r = p["M"] + invert_profile(f.profile, s)
    else:
        return _bisect_inverse(f, s, r0)
    return _nudge_up(f, max(r, r0), s)


def _bisect_inverse(f, s, r0, xtol=1e-12):
    lo = r0
    hi = max(r0, 1.0) * 2.0
    while f(hi) > s:
        lo = hi
        hi *= 2.0
        if hi > _SEARCH_MAX:
            raise UnboundedInverseError(f"f(r) > {s!r} on the whole search range [{r0}, {_SEARCH_MAX:g}]")
    while hi - lo > xtol * max(1.0, hi):
        mid = 0.5 * (lo + hi)
        if f(mid) <= s:
            hi = mid
        else:
            lo = mid
    return hi


# -- LSI arithmetic -------------------------------------------------------

LSI_CONVENTION = "sigma2 = exp(2*delta) / kappa (variance proxy; kappa = Hessian lower bound)"


@dataclass(frozen=True)
class LSIResult:
    sigma2: float
    case: str
    convention: str = LSI_CONVENTION


def lsi_sigma(case, kappa, delta=0.0):
    """Subgaussian variance proxy for a strongly log-concave reference.

    ``case`` is ``"bakry_emery"`` (Hessian of the potential >= kappa),
    ``"holley_stroock"`` (plus a bounded perturbation, sup norm <= delta) or
    ``"aida_shigekawa"`` (plus a Lipschitz perturbation). The last has no
    numeric constant and raises.
    """
    if not kappa > 0:
        raise DomainError("kappa must be > 0")
    if delta < 0:
        raise DomainError("delta must be >= 0")
    if case == "bakry_emery":
        return LSIResult(1.0 / kappa, case)
    if case == "holley_stroock":
        return LSIResult(math.exp(2.0 * delta) / kappa, case)
    if case == "aida_shigekawa":
        raise UnsupportedConstantError(
            "Lipschitz perturbations give a subgaussian constant depending only on "
            "(kappa, delta), but no numeric value is available")
    raise DomainError(f"unknown LSI case {case!r}")


# -- 1-Lipschitz test functions -------------------------------------------

class LinearFunction:
    """``z -> <z, theta>`` with a unit vector ``theta``."""

    name = "linear"

    def __init__(self, theta):
        self.theta = check_unit_vector(theta)

    def __call__(self, Z):
        return check_points(Z, dim=self.theta.size) @ self.theta


class NormFunction:
    """``z -> |z|``."""

    name = "norm"

    def __call__(self, Z):
        return np.linalg.norm(check_points(Z), axis=1)


class ConeFunction:
    """``z -> (2/3)<z - a, u> + |z - a|/3``; 1-Lipschitz since ``|u| = 1``."""

    name = "cone"

    def __init__(self, a, u):
        self.u = check_unit_vector(u)
        self.a = np.asarray(a, dtype=float).reshape(self.u.shape)

    def __call__(self, Z):
        D = check_points(Z, dim=self.u.size) - self.a
        return (2.0 / 3.0) * (D @ self.u) + np.linalg.norm(D, axis=1) / 3.0


LIPSCHITZ_CATALOG = (LinearFunction, NormFunction, ConeFunction)


@dataclass(frozen=True)
class TailPoint:
    r: float
    estimate: float
    stderr: float


def empirical_tail(samples, f, r_grid):
    """Fraction of samples with ``f >= mean(f) + r`` for each ``r``."""
    if not isinstance(f, LIPSCHITZ_CATALOG):
        raise DomainError("test function must come from the 1-Lipschitz catalog")
    X = np.asarray(samples, dtype=float)
    if X.size == 0:
        raise DomainError("empty sample set")
    vals = f(X)
    n = vals.size
    dev = vals - vals.mean()
    out = []
    for r in np.atleast_1d(np.asarray(r_grid, dtype=float)):
        p = float(np.count_nonzero(dev >= r)) / n
        out.append(TailPoint(float(r), p, math.sqrt(p * (1.0 - p) / n)))
    return out


def write_tail_csv(points, bound, path, stat_sigmas=3.0):
    """Columns ``r,estimate,stderr,bound,pass``."""
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write("r,estimate,stderr,bound,pass\n")
        for pt in points:
            b = float(bound(pt.r))
            ok = pt.estimate <= b + stat_sigmas * pt.stderr
            fh.write(f"{pt.r:.17g},{pt.estimate:.17g},{pt.stderr:.17g},{b:.17g},{int(ok)}\n")


# -- Lyapunov drift -------------------------------------------------------

def lyapunov_drift(W_model, k, x):
    """Generator of ``g = 1 + |x|^k / k`` under the reversible diffusion with
    invariant density ``W^{-d}``:

        Lg(x) = d(k-1)|x|^{k-2} - d|x|^{k-2} x.grad W(x) / W(x)
    """
    if not k > 2:
        raise DomainError("k must be > 2")
    X, single = as_rows(x, W_model.dim)
    d = W_model.dim
    r = np.linalg.norm(X, axis=1)
    radial = np.einsum("ni,ni->n", X, W_model.grad_log_V(X))
    out = d * r ** (k - 2) * ((k - 1) - radial)
    return float(out[0]) if single else out


@dataclass
class DriftReport:
    C1: float
    C2: float
    k: float
    R: float
    beta_prime: float
    degenerate: bool
    binding_interior: tuple = None
    binding_exterior: tuple = None
    exterior_ratio_min: float = None
    exterior_ratio_ok: bool = None
    proof_constants: dict = field(default_factory=dict)


def fit_drift_constants(W_model, k, beta_prime, R, grid):
    """Fit ``Lg <= C1 1_{B(0,R)} - C2 g^{(k-2)/k}`` on ``grid``.

    ``C2`` is the largest value the exterior points allow and ``C1`` the
    smallest value the interior then needs. The constants from the drift
    computation (``C1 = d(2(k-1) + alpha + beta')R^{k-2}``,
    ``C2 = d(beta' - (k-1))``) are reported alongside.
    """
    if not k > 2:
        raise DomainError("k must be > 2")
    if R < 2:
        raise DomainError("R must be >= 2")
    if beta_prime <= k - 1:
        raise InfeasibleDriftError(
            f"drift ratio {beta_prime} <= k - 1 = {k - 1}: no C2 > 0 exists")
    X = check_points(grid, dim=W_model.dim, name="grid")
    d = W_model.dim
    r = np.linalg.norm(X, axis=1)
    Lg = lyapunov_drift(W_model, k, X)
    Lg = np.atleast_1d(Lg)
    g = 1.0 + r ** k / k
    gpow = g ** ((k - 2) / k)
    ratio = np.einsum("ni,ni->n", X, W_model.grad_log_V(X))
    inner = r <= R
    outer = ~inner

    interior_ratio = ratio[inner]
    alpha = float(-interior_ratio.min()) if interior_ratio.size else 0.0
    proof = {"alpha": alpha,
             "C1": d * (2 * (k - 1) + alpha + beta_prime) * R ** (k - 2),
             "C2": d * (beta_prime - (k - 1))}

    if not np.any(outer):
        return DriftReport(math.inf, math.inf, k, R, beta_prime, True, proof_constants=proof)

    c2_each = -Lg[outer] / gpow[outer]
    j = int(np.argmin(c2_each))
    C2 = float(c2_each[j])
    if not C2 > 0:
        raise InfeasibleDriftError(
            f"drift condition violated at exterior grid point {X[outer][j].tolist()} (Lg = {Lg[outer][j]:.6g})")
    if np.any(inner):
        c1_each = Lg[inner] + C2 * gpow[inner]
        i = int(np.argmax(c1_each))
        C1 = max(0.0, float(c1_each[i]))
        bind_in = tuple(X[inner][i].tolist())
    else:
        C1, bind_in = 0.0, None
    ext_min = float(ratio[outer].min())
    return DriftReport(C1, C2, k, R, beta_prime, False, bind_in, tuple(X[outer][j].tolist()),
                       ext_min, ext_min >= beta_prime, proof)


__all__ = [
    "ConcentrationProfile", "TailFunction", "subgaussian_profile", "exponential_profile",
    "polyconc_profile", "custom_profile", "polytail_psi", "poly_tail", "tail_from_profile",
    "custom_tail", "invert_profile", "lsi_sigma", "LSIResult", "LinearFunction",
    "NormFunction", "ConeFunction", "empirical_tail", "TailPoint", "write_tail_csv",
    "lyapunov_drift", "fit_drift_constants", "DriftReport",
]
