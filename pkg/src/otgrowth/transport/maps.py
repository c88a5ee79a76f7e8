"""Transport map representations and the geometric checks run on them."""

from dataclasses import dataclass, field

import numpy as np

from .._validation import check_points
from ..errors import DegenerateRowError, DirectionUndefinedError, DomainError, GridTruncationError
from ..measures import cdf_1d, quantile_1d, quantile_from_sf, sf_1d

DEFAULT_GRID_SIZE = 2001
DEFAULT_P_MIN = 1e-6
PUSHFORWARD_TOL = 1e-6
_LEVEL_FLOOR = 1e-290


# -- 1D monotone rearrangement -------------------------------------------

@dataclass
class Map1D:
    """Monotone map ``T = Q_nu o F_mu`` sampled on a strictly increasing grid.

    Calling the map interpolates linearly inside the grid and composes the
    distribution functions exactly outside it.
    """

    grid: np.ndarray
    values: np.ndarray
    source: object = None
    target: object = None
    pushforward_error: float = None

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        flat = x.ravel()
        out = np.interp(flat, self.grid, self.values)
        outside = (flat < self.grid[0]) | (flat > self.grid[-1])
        if np.any(outside):
            out[outside] = _compose(self.source, self.target, flat[outside])[0]
        return out.reshape(x.shape)

    @property
    def is_strictly_increasing(self):
        return bool(np.all(np.diff(self.values) > 0))

    def as_discrete(self):
        return DiscreteMap(self.grid[:, None], self.values[:, None], {"kind": "quantile_1d"})


def default_grid(mu, n=DEFAULT_GRID_SIZE, p_min=DEFAULT_P_MIN):
    """``n`` source quantiles at levels evenly spaced in ``[p_min, 1 - p_min]``."""
    p = np.linspace(p_min, 1.0 - p_min, n)
    return quantile_1d(mu, p)


def _compose(mu, nu, x):
    """Images ``Q_nu(F_mu(x))`` together with the source cdf and sf levels."""
    cdf = np.atleast_1d(cdf_1d(mu, x))
    sf = np.atleast_1d(sf_1d(mu, x))
    if np.any(np.minimum(cdf, sf) < _LEVEL_FLOOR):
        bad = np.asarray(x)[np.minimum(cdf, sf) < _LEVEL_FLOOR]
        raise GridTruncationError(
            f"source cdf saturates at x = {bad[:3].tolist()}; shrink the grid toward the "
            f"source quantile range [{DEFAULT_P_MIN:g}, {1 - DEFAULT_P_MIN:g}]")
    out = np.empty(cdf.shape)
    low = cdf <= 0.5
    if np.any(low):
        out[low] = np.atleast_1d(quantile_1d(nu, cdf[low]))
    if np.any(~low):
        out[~low] = np.atleast_1d(quantile_from_sf(nu, sf[~low]))
    return out, cdf, sf


def quantile_map_1d(mu, nu, grid=None):
    """Monotone rearrangement of ``mu`` onto ``nu`` on ``grid``.

    Levels below 1/2 go through the cdf and levels above through the
    survival function, so both tails keep relative precision.
    """
    if mu.dim != 1 or nu.dim != 1:
        raise DomainError("quantile_map_1d needs 1D models")
    grid = default_grid(mu) if grid is None else np.asarray(grid, dtype=float).ravel()
    if grid.size == 0:
        raise DomainError("grid is empty")
    if np.any(np.diff(grid) <= 0):
        raise DomainError("grid must be strictly increasing")
    values, cdf, sf = _compose(mu, nu, grid)
    nu_cdf = np.atleast_1d(cdf_1d(nu, values))
    nu_sf = np.atleast_1d(sf_1d(nu, values))
    err = np.where(cdf <= 0.5, np.abs(nu_cdf - cdf), np.abs(nu_sf - sf))
    return Map1D(grid, values, mu, nu, float(err.max()))


# -- discrete maps --------------------------------------------------------

@dataclass
class DiscreteMap:
    """Point map ``x_i -> T(x_i)`` extracted from a coupling."""

    sources: np.ndarray
    images: np.ndarray
    provenance: dict = field(default_factory=dict)

    @property
    def n(self):
        return len(self.sources)

    @property
    def is_exact(self):
        return self.provenance.get("kind") in ("exact_lp", "quantile_1d")

    def write_csv(self, path):
        """Columns ``x1..xd,T1..Td,provenance``."""
        d = self.sources.shape[1]
        header = [f"x{i + 1}" for i in range(d)] + [f"T{i + 1}" for i in range(d)] + ["provenance"]
        tag = self.provenance.get("kind", "")
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write(",".join(header) + "\n")
            for x, y in zip(self.sources, self.images):
                fh.write(",".join(f"{v:.17g}" for v in np.concatenate([x, y])) + f",{tag}\n")


def barycentric_map(coupling):
    """Row-conditional mean of the targets, ``sum_j pi_ij y_j / sum_j pi_ij``."""
    P = coupling.plan
    rows = P.sum(axis=1)
    if np.any(rows <= 0):
        raise DegenerateRowError(f"coupling rows {np.flatnonzero(rows <= 0)[:5].tolist()} carry no mass")
    images = (P @ coupling.Y) / rows[:, None]
    if coupling.method == "sinkhorn":
        prov = {"kind": "sinkhorn_barycentric", "epsilon": coupling.info["epsilon"],
                "iterations": coupling.info["iterations"],
                "marginal_residual": coupling.info["marginal_residual"]}
    else:
        prov = {"kind": "exact_lp", "method": coupling.method}
    prov["jitter"] = coupling.info.get("jitter")
    return DiscreteMap(coupling.X.copy(), images, prov)


def _as_pairs(mapping):
    if isinstance(mapping, Map1D):
        return mapping.grid[:, None], mapping.values[:, None]
    return check_points(mapping.sources), check_points(mapping.images)


@dataclass
class MonotoneReport:
    n_pairs: int
    violations: list
    worst: float
    tol: float
    n_violations: int = 0

    @property
    def passed(self):
        return self.n_violations == 0


def check_monotone(mapping, tol=1e-9, max_listed=1000):
    """Test ``<T(x_j) - T(x_i), x_j - x_i> >= -tol`` over all pairs ``i < j``."""
    X, Y = _as_pairs(mapping)
    n = len(X)
    if n < 2:
        raise DomainError("monotonicity check needs at least two pairs")
    ip = np.zeros((n, n))
    for k in range(X.shape[1]):
        ip += (Y[None, :, k] - Y[:, None, k]) * (X[None, :, k] - X[:, None, k])
    iu, ju = np.triu_indices(n, 1)
    vals = ip[iu, ju]
    bad = np.flatnonzero(vals < -tol)
    viol = [(int(iu[k]), int(ju[k]), float(vals[k])) for k in bad[:max_listed]]
    return MonotoneReport(len(vals), viol, float(vals.min()), tol, int(bad.size))


def cone_function(z, anchor_image, u):
    """``(2/3)<z - T(x), u> + |z - T(x)|/3`` evaluated on rows of ``z``."""
    D = np.atleast_2d(z) - anchor_image
    return (2.0 / 3.0) * (D @ u) + np.linalg.norm(D, axis=1) / 3.0


@dataclass
class ConeReport:
    anchor: int
    lam: float
    n_in_ball: int
    violations: list
    worst: float
    tol: float

    @property
    def passed(self):
        return not self.violations


def default_cone_tol(mapping, tol=1e-9):
    """``tol`` for exact maps; ``epsilon * diam(Y)`` for entropic ones."""
    if isinstance(mapping, DiscreteMap) and mapping.provenance.get("kind") == "sinkhorn_barycentric":
        Y = mapping.images
        diam = float(np.max(np.linalg.norm(Y[:, None, :] - Y[None, :, :], axis=2)))
        return mapping.provenance["epsilon"] * diam
    return tol


def check_cone_inclusion(mapping, x_index, lam, tol=None):
    """Check that every map point in ``B(x + 2 lam u, lam)`` has its image in
    the cone ``{f >= 0}`` at ``T(x)``, with ``u = T(x)/|T(x)|``."""
    X, Y = _as_pairs(mapping)
    if tol is None:
        tol = default_cone_tol(mapping)
    if not lam > 0:
        raise DomainError("lambda must be > 0")
    x, tx = X[x_index], Y[x_index]
    norm_tx = float(np.linalg.norm(tx))
    if norm_tx == 0.0:
        raise DirectionUndefinedError(f"T(x) = 0 at anchor {x_index}")
    u = tx / norm_tx
    center = x + 2.0 * lam * u
    inside = np.flatnonzero(np.linalg.norm(X - center, axis=1) <= lam)
    vals = cone_function(Y[inside], tx, u) if inside.size else np.empty(0)
    bad = vals < -tol
    viol = [(int(j), float(v)) for j, v in zip(inside[bad], vals[bad])]
    worst = float(vals.min()) if vals.size else np.inf
    return ConeReport(int(x_index), float(lam), int(inside.size), viol, worst, float(tol))


def check_cone_all(mapping, lambdas=(0.5, 1.0, 2.0), tol=None):
    """Run :func:`check_cone_inclusion` over every anchor with ``T(x) != 0``.

    Returns ``(reports, skipped_anchors)``.
    """
    X, Y = _as_pairs(mapping)
    reports, skipped = [], []
    for i in range(len(X)):
        if not np.any(Y[i]):
            skipped.append(i)
            continue
        for lam in lambdas:
            reports.append(check_cone_inclusion(mapping, i, lam, tol))
    return reports, skipped
