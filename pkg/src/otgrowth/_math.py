import math

import numpy as np
from scipy.special import gammaln


def log_unit_ball_volume(d):
    return 0.5 * d * math.log(math.pi) - float(gammaln(0.5 * d + 1.0))


def unit_ball_volume(d):
    """Volume of the Euclidean unit ball in R^d, computed through log-gamma."""
    if int(d) != d or d < 1:
        raise ValueError(f"dimension must be a positive integer, got {d!r}")
    return math.exp(log_unit_ball_volume(int(d)))


def sphere_area(d):
    """Surface area of the unit sphere S^{d-1}, i.e. d * omega_d."""
    return d * unit_ball_volume(d)


def fd_step(x):
    """Central-difference step cbrt(eps) * max(1, |x|)."""
    return np.cbrt(np.finfo(float).eps) * max(1.0, float(np.linalg.norm(x)))
