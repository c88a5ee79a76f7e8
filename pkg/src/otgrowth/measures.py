"""Density families written in the ``V^{-d}`` convention, with samplers,
1D distribution functions and Monte Carlo moment estimators.

A model stores the log density. Every structural constant (``A``, ``L``,
``q``, ``M``, ``p``) refers to ``V = density^{-1/d}``, so
``log V = -log(density) / d`` and ``grad log V = -grad log(density) / d``.
"""

import math
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np
from scipy import integrate
from scipy.special import gammaln

from ._math import fd_step, log_unit_ball_volume, sphere_area
from ._quadrature import gk_integrate
from ._validation import check_points
from .errors import ConfigurationError, DomainError

CHUNK_SIZE = 65536
RWM_BURN_IN = 10_000
RWM_THIN = 10
TRUNCATION_LEVEL = 1e-16
_TRUNCATION_CAP = 1e12

FAMILIES = ("gaussian", "polyv", "uniform", "laplace", "custom")


@dataclass(frozen=True)
class MCEstimate:
    """Monte Carlo estimate with its standard error and sampling record."""

    value: float
    stderr: float
    n: int
    seed: object = None
    sampler: dict = field(default_factory=dict)

    def __post_init__(self):
        if not self.stderr >= 0:
            raise ValueError(f"stderr must be non-negative, got {self.stderr!r}")

    def to_dict(self):
        return {"value": self.value, "stderr": self.stderr, "n": self.n,
                "seed": self.seed, "sampler": dict(self.sampler)}


def chunk_generators(seed, n, chunk_size=CHUNK_SIZE):
    """Yield ``(size, Generator)`` pairs with per-chunk child seeds.

    Chunk ``i`` always draws from child ``i`` of ``SeedSequence(seed)`` on a
    Philox counter-based bit generator, so chunks can be produced in any
    order or in parallel and still reproduce the same stream.
    """
    n_chunks = max(1, -(-n // chunk_size))
    children = np.random.SeedSequence(seed).spawn(n_chunks)
    remaining = n
    for child in children:
        size = min(chunk_size, remaining)
        remaining -= size
        yield size, np.random.Generator(np.random.Philox(child))


class DensityModel:
    """Probability density on R^d.

    Use the family constructors (:meth:`gaussian`, :meth:`polyv`,
    :meth:`uniform`, :meth:`laplace`, :meth:`custom`) rather than calling
    ``__init__`` directly.

    Parameters
    ----------
    dim : int
    family : str
        One of ``FAMILIES``.
    params : dict
        Family parameters as declared by the caller.
    log_density_fn : callable
        Maps an (n, d) array to (n,) unnormalized log densities.
    grad_fn : callable or None
        Analytic gradient of ``log_density_fn``; finite differences if None.
    log_norm : float or None
        Log of the normalizing constant of ``exp(log_density_fn)``. Computed
        by quadrature (d = 1) when None.
    structural : dict
        Declared structural constants, all in the V convention.
    """

    def __init__(self, dim, family, params, log_density_fn, grad_fn=None,
                 log_norm=None, structural=None, center=None, scale=1.0,
                 support=None, radial_log_density=None, smooth=True):
        if int(dim) != dim or dim < 1:
            raise ConfigurationError(f"dim must be a positive integer, got {dim!r}")
        if family not in FAMILIES:
            raise ConfigurationError(f"unknown family {family!r}")
        self.dim = int(dim)
        self.family = family
        self.params = dict(params)
        self._log_density_fn = log_density_fn
        self._grad_fn = grad_fn
        self._log_norm = log_norm
        self.structural = dict(structural or {})
        self.center = np.zeros(self.dim) if center is None else np.asarray(center, float)
        self.scale = float(scale)
        self.support = support
        self._radial = radial_log_density
        self.smooth = smooth

    def __repr__(self):
        return f"DensityModel(family={self.family!r}, dim={self.dim}, params={self.params!r})"

    # -- constructors -----------------------------------------------------

    @classmethod
    def gaussian(cls, mean=0.0, cov=1.0, dim=None):
        """Gaussian N(mean, cov); ``cov`` may be a scalar, a diagonal or a matrix.

        A zero covariance gives a point mass, which can be sampled but has
        no density.
        """
        mean = np.atleast_1d(np.asarray(mean, dtype=float))
        if dim is not None and mean.size == 1 and dim > 1:
            mean = np.full(dim, mean[0])
        d = mean.size
        cov = np.asarray(cov, dtype=float)
        if cov.ndim == 0:
            cov = float(cov) * np.eye(d)
        elif cov.ndim == 1:
            cov = np.diag(cov)
        if cov.shape != (d, d):
            raise ConfigurationError(f"covariance shape {cov.shape} does not match mean of size {d}")
        if not np.allclose(cov, cov.T):
            raise ConfigurationError("covariance must be symmetric")
        evals, evecs = np.linalg.eigh(cov)
        if evals.min() < -1e-12 * max(1.0, evals.max()):
            raise ConfigurationError("covariance must be positive semi-definite")
        evals = np.clip(evals, 0.0, None)
        root = evecs * np.sqrt(evals)
        singular = evals.min() <= 0.0
        if singular:
            prec = None
            log_norm = None
        else:
            prec = np.linalg.inv(cov)
            log_norm = 0.5 * d * math.log(2 * math.pi) + 0.5 * float(np.sum(np.log(evals)))

        def logf(X):
            if prec is None:
                raise ConfigurationError("degenerate Gaussian has no density")
            Z = X - mean
            return -0.5 * np.einsum("ni,ij,nj->n", Z, prec, Z)

        def grad(X):
            if prec is None:
                raise ConfigurationError("degenerate Gaussian has no density")
            return -(X - mean) @ prec

        isotropic = np.allclose(mean, 0.0) and np.allclose(cov, cov[0, 0] * np.eye(d)) and not singular
        radial = None
        if isotropic:
            s2 = cov[0, 0]
            radial = lambda r: -0.5 * r * r / s2  # noqa: E731

        model = cls(d, "gaussian", {"mean": mean.tolist(), "cov": cov.tolist()}, logf, grad,
                    log_norm=log_norm, structural={"sigma2": float(evals.max())},
                    center=mean, scale=math.sqrt(max(evals.max(), 1e-300)),
                    radial_log_density=radial)
        model._root = root
        return model

    @classmethod
    def polyv(cls, q, dim=1, kappa=1.0):
        """Density proportional to ``(kappa * (1 + |x|^2)^{q/2})^{-d}``.

        This is a multivariate Student t with ``d(q-1)`` degrees of freedom;
        it is normalizable only for ``q > 1``. Normalized, ``V(x) = Z^{1/d}
        (1 + |x|^2)^{q/2}`` where ``Z = pi^{d/2} Gamma((q-1)d/2) / Gamma(qd/2)``,
        independent of ``kappa``.
        """
        q = float(q)
        d = int(dim)
        if not q > 1:
            raise ConfigurationError(f"PolyV density with q={q} is not normalizable (need q > 1)")
        if not kappa > 0:
            raise ConfigurationError("kappa must be positive")
        log_z0 = 0.5 * d * math.log(math.pi) + float(gammaln(0.5 * (q - 1) * d) - gammaln(0.5 * q * d))
        log_v0 = log_z0 / d
        s = 0.5 * q
        # (1+|x|^2)^s versus 1+|x|^{2s}: subadditive for s <= 1, superadditive for s >= 1
        upper = 1.0 if s <= 1 else 2.0 ** (s - 1)
        lower = 1.0 if s >= 1 else 2.0 ** (s - 1)
        structural = {
            "A": 2 * q,
            "V0": math.exp(log_v0),
            "L": math.exp(log_v0) * upper,
            "q": q,
            "M": math.exp(log_v0) * lower,
            "p": q,
        }
        expo = 0.5 * q * d

        def logf(X):
            return -expo * np.log1p(np.einsum("ni,ni->n", X, X))

        def grad(X):
            r2 = np.einsum("ni,ni->n", X, X)
            return -(2 * expo) * X / (1.0 + r2)[:, None]

        model = cls(d, "polyv", {"q": q, "kappa": float(kappa)}, logf, grad, log_norm=log_z0,
                    structural=structural, scale=1.0,
                    radial_log_density=lambda r: -expo * np.log1p(r * r))
        model._dof = (q - 1) * d
        return model

    @classmethod
    def uniform(cls, low=0.0, high=1.0, dim=None):
        low = np.atleast_1d(np.asarray(low, dtype=float))
        high = np.atleast_1d(np.asarray(high, dtype=float))
        if dim is not None and low.size == 1:
            low = np.full(dim, low[0])
            high = np.full(dim, high[0])
        if low.shape != high.shape or np.any(high <= low):
            raise ConfigurationError("uniform box needs low < high coordinate-wise")
        d = low.size
        log_vol = float(np.sum(np.log(high - low)))

        def logf(X):
            inside = np.all((X >= low) & (X <= high), axis=1)
            return np.where(inside, 0.0, -np.inf)

        def grad(X):
            interior = np.all((X > low) & (X < high), axis=1)
            out = np.zeros_like(X)
            out[~interior] = np.nan
            return out

        model = cls(d, "uniform", {"low": low.tolist(), "high": high.tolist()}, logf, grad,
                    log_norm=log_vol, center=0.5 * (low + high),
                    scale=float(np.max(high - low)) / math.sqrt(12),
                    support=(low, high), smooth=False)
        return model

    @classmethod
    def laplace(cls, scale=1.0, dim=1):
        """Product of centered Laplace(scale) coordinates.

        The declared exponential concentration ``(c, sigma) = (3, 4*scale)``
        follows from the Poincare constant ``4*scale^2`` of the product.
        """
        b = float(scale)
        if not b > 0:
            raise ConfigurationError("laplace scale must be positive")
        d = int(dim)

        def logf(X):
            return -np.sum(np.abs(X), axis=1) / b

        def grad(X):
            return -np.sign(X) / b

        return cls(d, "laplace", {"scale": b}, logf, grad, log_norm=d * math.log(2 * b),
                   structural={"c": 3.0, "sigma": 4.0 * b, "poincare": 4.0 * b * b},
                   scale=b * math.sqrt(2))

    @classmethod
    def custom(cls, log_density, dim=1, grad_log_density=None, proposal_scale=None,
               log_norm=None, structural=None, x0=None):
        """User density; sampled by random-walk Metropolis.

        ``log_density`` maps an (n, d) array to (n,) values and may be
        unnormalized. ``proposal_scale`` is required for sampling.
        """
        params = {"proposal_scale": proposal_scale}
        center = None if x0 is None else np.atleast_1d(np.asarray(x0, float))
        model = cls(dim, "custom", params, log_density, grad_log_density, log_norm=log_norm,
                    structural=structural, center=center,
                    scale=1.0 if proposal_scale is None else float(proposal_scale))
        return model

    # -- evaluators -------------------------------------------------------

    @property
    def is_radial(self):
        return self._radial is not None

    @property
    def log_norm(self):
        if self._log_norm is None:
            if self.dim != 1:
                raise ConfigurationError(
                    "normalizing constant unknown; pass log_norm for custom models with dim > 1")
            self._log_norm = math.log(self._table.total)
        return self._log_norm

    def _points(self, X):
        return check_points(X, dim=self.dim)

    def log_density(self, X):
        """Normalized log density at each row of ``X``."""
        X = self._points(X)
        return self._log_density_fn(X) - self.log_norm

    def density(self, X):
        return np.exp(self.log_density(X))

    def grad_log_density(self, X):
        X = self._points(X)
        if self._grad_fn is not None:
            return np.asarray(self._grad_fn(X), dtype=float)
        return self.fd_grad_log_density(X)

    def fd_grad_log_density(self, X):
        """Centered finite differences with step cbrt(eps) * max(1, |x|)."""
        X = self._points(X)
        out = np.empty_like(X)
        for i, x in enumerate(X):
            h = fd_step(x)
            E = h * np.eye(self.dim)
            up = self._log_density_fn(x + E)
            down = self._log_density_fn(x - E)
            out[i] = (up - down) / (2 * h)
        return out

    def log_V(self, X):
        return -self.log_density(X) / self.dim

    def V(self, X):
        return np.exp(self.log_V(X))

    def grad_log_V(self, X):
        return -self.grad_log_density(X) / self.dim

    def radial_density(self, r):
        """Normalized density as a function of |x| (radial families only)."""
        if self._radial is None:
            raise ConfigurationError(f"{self!r} is not radial")
        return np.exp(self._radial(np.asarray(r, dtype=float)) - self.log_norm)

    # -- 1D tabulation ----------------------------------------------------

    def _pdf_vec(self, x):
        x = np.asarray(x, dtype=float)
        return np.exp(self._log_density_fn(x.reshape(-1, 1)) - self._table_shift).reshape(x.shape)

    @cached_property
    def _table_shift(self):
        # log-density offset used inside quadrature; keeps integrands O(1)
        if self._log_norm is not None:
            return self._log_norm
        return float(self._log_density_fn(self.center[None, :])[0])

    @cached_property
    def _table(self):
        if self.dim != 1:
            raise DomainError("1D distribution functions need dim = 1")
        return _Table1D(self)


def truncation_radius(model, level=TRUNCATION_LEVEL, direction=None):
    """Radius beyond which the density falls below ``level * peak``.

    Doubling search from the model scale along ``direction`` (both signs);
    in d > 1 the coordinate axes are all probed when no direction is given.
    """
    c = model.center
    dirs = np.eye(model.dim) if direction is None else np.atleast_2d(direction)
    dirs = np.vstack([dirs, -dirs])
    peak = float(np.max(model._log_density_fn(c[None, :])))
    r = max(model.scale, 1e-8)
    while r < _TRUNCATION_CAP:
        vals = model._log_density_fn(c + r * dirs)
        if np.all(vals < peak + math.log(level)):
            return r
        r *= 2.0
    raise ConfigurationError(
        f"density does not drop below {level:g} of its peak within radius {_TRUNCATION_CAP:g}")


class _Table1D:
    """Node table of cumulative masses anchoring 1D cdf/quantile evaluation.

    Masses between nodes and the two infinite tails come from adaptive
    Gauss-Kronrod quadrature; tails use the substitution ``x = c + R/t``.
    Each query integrates from its nearest node, measuring the lower half of
    the distribution through the cdf and the upper half through the survival
    function so both tails keep full relative precision.
    """

    epsabs = 1e-300
    epsrel = 1e-12

    def __init__(self, model):
        self.model = model
        self.c = float(model.center[0])
        if model.support is not None:
            lo, hi = float(model.support[0][0]), float(model.support[1][0])
            nodes = np.linspace(lo, hi, 65)
            left_tail = right_tail = 0.0
        else:
            s = model.scale
            try:
                R = truncation_radius(model)
            except ConfigurationError:
                R = _TRUNCATION_CAP
            offsets = s * np.logspace(-3, math.log10(max(R / s, 10.0)), 200)
            nodes = np.concatenate([self.c - offsets[::-1], [self.c], self.c + offsets])
            tails = self._tail_raw(np.array([nodes[0], nodes[-1]]))
            left_tail, right_tail = float(tails[0]), float(tails[1])
        pieces = self._mass_raw(nodes[:-1], nodes[1:])
        total = left_tail + right_tail + pieces.sum()
        if not np.isfinite(total) or total <= 0:
            raise ConfigurationError("density is not normalizable")
        self.nodes = nodes
        self.total = total * math.exp(model._table_shift)
        self.norm = total
        self.cdf_nodes = (left_tail + np.concatenate([[0.0], np.cumsum(pieces)])) / total
        self.sf_nodes = (right_tail + np.concatenate([np.cumsum(pieces[::-1])[::-1], [0.0]])) / total

    def _mass_raw(self, a, b):
        return gk_integrate(self.model._pdf_vec, a, b, self.epsabs, self.epsrel)[0]

    def _tail_raw(self, x):
        """Mass beyond each x (away from the center), unnormalized."""
        x = np.atleast_1d(np.asarray(x, dtype=float))
        R = x - self.c
        f = self.model._pdf_vec
        out = np.empty(x.shape)
        for i, r in enumerate(R):
            val, err = gk_integrate(lambda t, r=r: f(self.c + r / t) * abs(r) / (t * t),
                                    0.0, 1.0, self.epsabs, self.epsrel)
            if not np.isfinite(val[0]) or err[0] > 1e-6 * abs(val[0]) + 1e-12:
                raise ConfigurationError("density tail integral does not converge (non-normalizable)")
            out[i] = val[0]
        return out

    def pdf(self, x):
        return self.model._pdf_vec(x) / self.norm

    def cdf_sf(self, x):
        """Return ``(cdf(x), sf(x))`` arrays, each accurate in its own tail."""
        x = np.atleast_1d(np.asarray(x, dtype=float))
        nodes = self.nodes
        cdf = np.empty(x.shape)
        sf = np.empty(x.shape)
        below = x <= nodes[0]
        above = x >= nodes[-1]
        inside = ~(below | above)
        if self.model.support is not None:
            cdf[below], sf[below] = 0.0, 1.0
            cdf[above], sf[above] = 1.0, 0.0
        else:
            for mask, upper in ((below, False), (above, True)):
                if np.any(mask):
                    m = self._tail_raw(x[mask]) / self.norm
                    if upper:
                        sf[mask], cdf[mask] = m, 1.0 - m
                    else:
                        cdf[mask], sf[mask] = m, 1.0 - m
        if np.any(inside):
            xi = x[inside]
            k = np.searchsorted(nodes, xi, side="right") - 1
            left = self.cdf_nodes[k] <= 0.5
            c_in = np.empty(xi.shape)
            s_in = np.empty(xi.shape)
            if np.any(left):
                kl = k[left]
                c_in[left] = self.cdf_nodes[kl] + self._mass_raw(nodes[kl], xi[left]) / self.norm
                s_in[left] = 1.0 - c_in[left]
            if np.any(~left):
                kr = k[~left] + 1
                s_in[~left] = self.sf_nodes[kr] + self._mass_raw(xi[~left], nodes[kr]) / self.norm
                c_in[~left] = 1.0 - s_in[~left]
            cdf[inside], sf[inside] = c_in, s_in
        return cdf, sf

    def quantile(self, p, tol=1e-9):
        p = np.atleast_1d(np.asarray(p, dtype=float))
        out = np.empty(p.shape)
        low = p <= 0.5
        if np.any(low):
            out[low] = self._solve_levels(p[low], upper=False, tol=tol)
        if np.any(~low):
            out[~low] = self._solve_levels(1.0 - p[~low], upper=True, tol=tol)
        return out

    def upper_quantile(self, s, tol=1e-9):
        """The x with ``sf(x) = s``, solved on the survival function."""
        return self._solve_levels(np.atleast_1d(np.asarray(s, dtype=float)), upper=True, tol=tol)

    def _resid(self, x, lv, upper):
        # increasing in x, zero at the solution
        cdf, sf = self.cdf_sf(x)
        return lv - sf if upper else cdf - lv

    def _solve_levels(self, lv, upper, tol):
        nodes = self.nodes
        n = len(nodes)
        if upper:
            k = np.array([np.count_nonzero(self.sf_nodes >= v) for v in lv]) - 1
        else:
            k = np.searchsorted(self.cdf_nodes, lv, side="right") - 1
        a = np.empty(lv.shape)
        b = np.empty(lv.shape)
        for i, ki in enumerate(k):
            if 0 <= ki < n - 1:
                a[i], b[i] = nodes[ki], nodes[ki + 1]
            elif ki < 0:
                b[i] = nodes[0]
                a[i] = self._walk(b[i], -1, lambda x, i=i: self._resid(x, lv[i:i + 1], upper)[0] <= 0)
            else:
                a[i] = nodes[-1]
                b[i] = self._walk(a[i], +1, lambda x, i=i: self._resid(x, lv[i:i + 1], upper)[0] >= 0)
        x = 0.5 * (a + b)
        done = np.zeros(lv.shape, dtype=bool)
        for _ in range(200):
            act = ~done
            if not np.any(act):
                break
            xa = x[act]
            r = self._resid(xa, lv[act], upper)
            aa, bb = a[act], b[act]
            aa = np.where(r < 0, xa, aa)
            bb = np.where(r > 0, xa, bb)
            dens = self.pdf(xa)
            with np.errstate(divide="ignore", invalid="ignore"):
                xn = np.where(dens > 0, xa - r / dens, 0.5 * (aa + bb))
            bad = ~((xn > aa) & (xn < bb)) | ~np.isfinite(xn)
            xn = np.where(bad, 0.5 * (aa + bb), xn)
            scale = np.maximum(1.0, np.abs(xa))
            conv = (r == 0) | (np.abs(xn - xa) <= 1e-4 * tol * scale) | ((bb - aa) <= 1e-15 * scale)
            xn = np.where(r == 0, xa, xn)
            a[act], b[act], x[act] = aa, bb, xn
            done[np.flatnonzero(act)[conv]] = True
        return x

    def _walk(self, x, sign, done):
        # double the distance from the center until ``done`` holds
        for _ in range(1100):
            x = self.c + 2.0 * (x - self.c) + sign
            if done(x):
                return x
        raise DomainError("probability level lies beyond the resolvable tail")


def _vectorized(fn, values):
    arr = np.asarray(values, dtype=float)
    out = fn(arr.ravel()).reshape(arr.shape)
    return float(out) if arr.ndim == 0 else out


def cdf_1d(model, x):
    """CDF of a 1D model by adaptive quadrature (absolute error well below 1e-10)."""
    table = model._table
    return _vectorized(lambda v: table.cdf_sf(v)[0], x)


def sf_1d(model, x):
    """Survival function ``1 - cdf``, computed directly in the upper tail."""
    table = model._table
    return _vectorized(lambda v: table.cdf_sf(v)[1], x)


def quantile_1d(model, p, tol=1e-9):
    """Inverse CDF by bracketed Newton iteration on the quadrature CDF."""
    arr = np.asarray(p, dtype=float)
    if np.any(~((arr > 0) & (arr < 1))):
        raise DomainError("quantile levels must lie in the open interval (0, 1)")
    table = model._table
    return _vectorized(lambda v: table.quantile(v, tol), arr)


def quantile_from_sf(model, s, tol=1e-9):
    """Upper-tail quantile: the x with ``sf(x) = s``, without forming ``1 - s``."""
    arr = np.asarray(s, dtype=float)
    if np.any(~((arr > 0) & (arr < 1))):
        raise DomainError("tail levels must lie in the open interval (0, 1)")
    table = model._table
    return _vectorized(lambda v: table.upper_quantile(v, tol), arr)


# -- sampling -------------------------------------------------------------

def sample(model, n, seed=None, chunk_size=CHUNK_SIZE, return_info=False):
    """Draw ``n`` points from ``model``; deterministic given ``seed``.

    Direct families are sampled exactly. Custom models use random-walk
    Metropolis with step ``2.4 * proposal_scale / sqrt(d)``, burn-in
    ``RWM_BURN_IN`` and thinning ``RWM_THIN``; the run record is returned
    when ``return_info`` is set.
    """
    n = int(n)
    if n < 1:
        raise DomainError("sample size must be >= 1")
    if model.family == "custom":
        X, info = _rwm(model, n, seed)
    else:
        X = np.vstack([_direct_chunk(model, size, rng)
                       for size, rng in chunk_generators(seed, n, chunk_size)])
        info = {"method": "direct", "family": model.family, "chunk_size": chunk_size}
    return (X, info) if return_info else X


def _direct_chunk(model, size, rng):
    d = model.dim
    if model.family == "gaussian":
        return np.asarray(model.params["mean"]) + rng.standard_normal((size, d)) @ model._root.T
    if model.family == "polyv":
        z = rng.standard_normal((size, d))
        g = rng.chisquare(model._dof, size)
        return z / np.sqrt(g)[:, None]
    if model.family == "uniform":
        low, high = model.support
        return low + (high - low) * rng.random((size, d))
    if model.family == "laplace":
        return rng.laplace(0.0, model.params["scale"], (size, d))
    raise ConfigurationError(f"no direct sampler for family {model.family!r}")


def _rwm(model, n, seed):
    scale = model.params.get("proposal_scale")
    if scale is None or not scale > 0:
        raise ConfigurationError("custom model needs a positive proposal_scale for sampling")
    d = model.dim
    step = 2.4 * float(scale) / math.sqrt(d)
    rng = np.random.Generator(np.random.Philox(np.random.SeedSequence(seed)))
    total = RWM_BURN_IN + n * RWM_THIN
    x = model.center.copy()
    lp = float(model._log_density_fn(x[None, :])[0])
    if not np.isfinite(lp):
        raise ConfigurationError("RWM start point has zero density; pass x0")
    proposals = rng.standard_normal((total, d)) * step
    log_u = np.log(rng.random(total))
    out = np.empty((n, d))
    accepted = 0
    k = 0
    for t in range(total):
        y = x + proposals[t]
        lq = float(model._log_density_fn(y[None, :])[0])
        if log_u[t] < lq - lp:
            x, lp = y, lq
            accepted += 1
        if t >= RWM_BURN_IN and (t - RWM_BURN_IN) % RWM_THIN == RWM_THIN - 1:
            out[k] = x
            k += 1
    info = {"method": "rwm", "step": step, "burn_in": RWM_BURN_IN, "thin": RWM_THIN,
            "acceptance_rate": accepted / total}
    return out, info


def write_samples_csv(X, path):
    """One point per row, header ``x1,...,xd``, 17 significant digits."""
    X = check_points(X)
    header = ",".join(f"x{i + 1}" for i in range(X.shape[1]))
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(header + "\n")
        for row in X:
            fh.write(",".join(f"{v:.17g}" for v in row) + "\n")


# -- estimators -----------------------------------------------------------

def mean_abs_moment(model, n, seed=None):
    """Monte Carlo estimate of the first absolute moment E|z|."""
    X, info = sample(model, n, seed, return_info=True)
    r = np.linalg.norm(X, axis=1)
    stderr = float(r.std(ddof=1) / math.sqrt(n)) if n > 1 else 0.0
    return MCEstimate(float(r.mean()), stderr, int(n), seed, info)


@dataclass(frozen=True)
class LogGradReport:
    A: float
    worst_ratio: float
    worst_point: tuple
    passed: bool
    domain_violations: list
    n_points: int
    reason: str = ""

    def to_dict(self):
        return {"A": self.A, "worst_ratio": self.worst_ratio, "worst_point": list(self.worst_point),
                "passed": self.passed, "domain_violations": list(self.domain_violations),
                "n_points": self.n_points, "reason": self.reason}


def verify_log_grad_decay(model, A, grid):
    """Check ``|grad log V(x)| * (1 + |x|) <= A`` on every grid point."""
    X = check_points(grid, dim=model.dim, name="grid")
    if X.shape[0] == 0:
        raise DomainError("grid is empty")
    with np.errstate(invalid="ignore", divide="ignore"):
        logf = model._log_density_fn(X)
        g = model.grad_log_V(X)
    bad = ~np.isfinite(logf) | ~np.all(np.isfinite(g), axis=1)
    ratio = np.linalg.norm(np.where(bad[:, None], 0.0, g), axis=1) * (1.0 + np.linalg.norm(X, axis=1))
    idx = int(np.argmax(ratio))
    violations = [int(i) for i in np.flatnonzero(bad)]
    reason = ""
    passed = bool(ratio[idx] <= A) and not violations
    if not model.smooth:
        passed = False
        reason = "domain violation: density is not smooth on R^d (support boundary)"
    elif violations:
        reason = f"domain violation: gradient undefined at {len(violations)} grid point(s)"
    elif not passed:
        reason = f"worst ratio {ratio[idx]:.6g} exceeds A = {A:g}"
    return LogGradReport(float(A), float(ratio[idx]), tuple(X[idx].tolist()), passed,
                         violations, int(X.shape[0]), reason)


def radial_grid(dim, r_max=100.0, n_radii=200, n_dirs=16, seed=0):
    """Points on log-spaced radii out to ``r_max`` along fixed directions."""
    radii = np.concatenate([[0.0], np.logspace(-2, math.log10(r_max), n_radii)])
    if dim == 1:
        dirs = np.array([[1.0], [-1.0]])
    else:
        rng = np.random.default_rng(seed)
        dirs = rng.standard_normal((n_dirs, dim))
        dirs = np.vstack([np.eye(dim), dirs / np.linalg.norm(dirs, axis=1, keepdims=True)])
    return (radii[:, None, None] * dirs[None, :, :]).reshape(-1, dim)


def check_normalization(model, method="auto", n=200_000, seed=0):
    """Integral of the normalized density with an error estimate.

    Quadrature in d <= 3 (over the box for bounded supports, otherwise in
    polar coordinates about the model center with the radius truncated
    where the density drops below 1e-16 of its peak); importance
    sampling from a Cauchy-type proposal otherwise. Returns ``(value, err)``
    where ``err`` is the quadrature error or the MC standard error.
    """
    if method == "auto":
        method = "quadrature" if model.dim <= 3 else "mc"
    if method == "quadrature":
        return _normalization_quad(model)
    if method == "mc":
        return _normalization_mc(model, n, seed)
    raise ConfigurationError(f"unknown method {method!r}")


def _normalization_quad(model):
    d = model.dim
    c = model.center
    kw = dict(epsabs=1e-10, epsrel=1e-9, limit=200)
    if d == 1:
        t = model._table
        return t.total / math.exp(model.log_norm), 1e-10

    def f(x):
        return math.exp(float(model._log_density_fn(np.asarray(x)[None, :])[0]) - model.log_norm)

    if model.support is not None:
        # box support: integrate in Cartesian coordinates over the box itself
        lo, hi = model.support
        return integrate.nquad(lambda *x: f(x), list(zip(lo, hi)), opts=kw)
    R = truncation_radius(model)

    if d == 2:
        def g(r, th):
            return r * f(c + r * np.array([math.cos(th), math.sin(th)]))
        val, err = integrate.nquad(g, [[0, R], [0, 2 * math.pi]], opts=kw)
    else:
        def g(r, th, ph):
            s = math.sin(ph)
            x = c + r * np.array([s * math.cos(th), s * math.sin(th), math.cos(ph)])
            return r * r * s * f(x)
        val, err = integrate.nquad(g, [[0, R], [0, 2 * math.pi], [0, math.pi]], opts=kw)
    return val, err


def _normalization_mc(model, n, seed):
    d = model.dim
    rng = np.random.Generator(np.random.Philox(np.random.SeedSequence(seed)))
    s = model.scale
    z = rng.standard_normal((n, d))
    g = rng.chisquare(1, n)
    Y = model.center + s * z / np.sqrt(g)[:, None]
    # multivariate t_1 proposal density
    log_t = (float(gammaln(0.5 * (d + 1)) - gammaln(0.5)) - 0.5 * d * math.log(math.pi)
             - d * math.log(s) - 0.5 * (d + 1) * np.log1p(np.sum(((Y - model.center) / s) ** 2, axis=1)))
    w = np.exp(model._log_density_fn(Y) - model.log_norm - log_t)
    return float(w.mean()), float(w.std(ddof=1) / math.sqrt(n))


__all__ = [
    "DensityModel", "MCEstimate", "LogGradReport", "cdf_1d", "sf_1d", "quantile_1d",
    "quantile_from_sf", "sample", "mean_abs_moment", "verify_log_grad_decay",
    "check_normalization", "truncation_radius", "radial_grid", "chunk_generators",
    "write_samples_csv", "sphere_area", "log_unit_ball_volume",
]
