"""Growth bounds for optimal transport maps and numerical tools to check them."""

from . import ballprob, bounds, concentration, measures, transport
from .bounds import (GrowthBound, concentration_bound, exponential_growth, generic_bound,
                     logconcave_growth, polynomial_growth, subgaussian_growth, unit_ball_volume)
from .measures import DensityModel

__version__ = "0.1.0"

__all__ = [
    "ballprob", "bounds", "concentration", "measures", "transport", "GrowthBound",
    "concentration_bound", "exponential_growth", "generic_bound", "logconcave_growth",
    "polynomial_growth", "subgaussian_growth", "unit_ball_volume", "DensityModel",
]
