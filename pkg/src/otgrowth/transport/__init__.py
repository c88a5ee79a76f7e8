"""Numerical transport maps and checks of their geometric properties."""

from .assignment import hungarian
from .estimators import DiscreteTransport, QuantileTransport1D
from .exact import Coupling, discrete_ot_exact, sq_cost
from .maps import (ConeReport, DiscreteMap, Map1D, MonotoneReport, barycentric_map,
                   check_cone_all, check_cone_inclusion, check_monotone, cone_function,
                   default_cone_tol, default_grid, quantile_map_1d)
from .sinkhorn import epsilon_ladder, sinkhorn

__all__ = [
    "hungarian", "DiscreteTransport", "QuantileTransport1D", "Coupling", "discrete_ot_exact",
    "sq_cost", "ConeReport", "DiscreteMap", "Map1D", "MonotoneReport", "barycentric_map",
    "check_cone_all", "check_cone_inclusion", "check_monotone", "cone_function",
    "default_cone_tol", "default_grid", "quantile_map_1d", "epsilon_ladder", "sinkhorn",
]
