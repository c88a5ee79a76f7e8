"""scikit-learn style wrappers around the transport solvers."""

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_array, check_is_fitted

from ..errors import ConfigurationError
from .exact import discrete_ot_exact
from .maps import DEFAULT_GRID_SIZE, DEFAULT_P_MIN, barycentric_map, default_grid, quantile_map_1d
from .sinkhorn import sinkhorn


class QuantileTransport1D(TransformerMixin, BaseEstimator):
    """Monotone transport between two 1D density models.

    ``fit`` tabulates the map on a grid: the sorted unique values of ``X``
    when given, otherwise ``n_grid`` source quantiles at levels spread
    evenly over ``[p_min, 1 - p_min]``.

    Attributes
    ----------
    map_ : Map1D
    grid_ : ndarray of shape (n_grid,)
    """

    def __init__(self, source, target, n_grid=DEFAULT_GRID_SIZE, p_min=DEFAULT_P_MIN):
        self.source = source
        self.target = target
        self.n_grid = n_grid
        self.p_min = p_min

    def fit(self, X=None, y=None):
        if X is None:
            grid = default_grid(self.source, self.n_grid, self.p_min)
        else:
            grid = np.unique(check_array(np.asarray(X, float).reshape(-1, 1)).ravel())
        self.map_ = quantile_map_1d(self.source, self.target, grid)
        self.grid_ = self.map_.grid
        return self

    def transform(self, X):
        check_is_fitted(self, "map_")
        X = check_array(np.asarray(X, float).reshape(-1, 1))
        return self.map_(X[:, 0])[:, None]


class DiscreteTransport(TransformerMixin, BaseEstimator):
    """Optimal transport between two point clouds for the squared cost.

    ``solver="exact"`` uses :func:`discrete_ot_exact` (capped at ``lp_cap``
    points per side); ``solver="sinkhorn"`` uses the entropic solver with an
    epsilon ladder from ``eps_start`` down to ``epsilon``. The fitted map is
    the barycentric projection of the coupling. ``transform`` sends each
    query point to the image of its nearest source atom.

    Attributes
    ----------
    coupling_ : Coupling
    map_ : DiscreteMap
    cost_ : float
    """

    def __init__(self, solver="exact", epsilon=0.01, eps_start=1.0, max_iter=10_000,
                 tol=1e-9, lp_cap=512):
        self.solver = solver
        self.epsilon = epsilon
        self.eps_start = eps_start
        self.max_iter = max_iter
        self.tol = tol
        self.lp_cap = lp_cap

    def fit(self, X, y, sample_weight=None, target_weight=None):
        X = check_array(X)
        Y = check_array(y)
        if self.solver == "exact":
            if max(len(X), len(Y)) > self.lp_cap:
                raise ConfigurationError(
                    f"{max(len(X), len(Y))} points exceed the exact-solver cap {self.lp_cap}; "
                    "use solver='sinkhorn'")
            coupling = discrete_ot_exact(X, Y, sample_weight, target_weight)
        elif self.solver == "sinkhorn":
            coupling = sinkhorn(X, Y, self.epsilon, sample_weight, target_weight,
                                max_iter=self.max_iter, tol=self.tol, eps_start=self.eps_start)
        else:
            raise ConfigurationError(f"unknown solver {self.solver!r}")
        self.coupling_ = coupling
        self.map_ = barycentric_map(coupling)
        self.cost_ = coupling.cost
        self.n_features_in_ = X.shape[1]
        return self

    def transform(self, X):
        check_is_fitted(self, "map_")
        X = check_array(X)
        S = self.map_.sources
        d2 = np.einsum("ijk,ijk->ij", X[:, None, :] - S[None], X[:, None, :] - S[None])
        return self.map_.images[np.argmin(d2, axis=1)]
