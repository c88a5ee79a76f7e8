"""Small input-validation helpers layered on sklearn's."""

import numpy as np
from sklearn.utils.validation import check_array

from .errors import DomainError


def check_points(X, dim=None, name="X"):
    """Return ``X`` as a float (n, d) array; 1D input is read as n points in R."""
    X = np.asarray(X, dtype=float)
    if X.ndim == 1:
        X = X[:, None]
    X = check_array(X, dtype=np.float64, ensure_2d=True, input_name=name)
    if dim is not None and X.shape[1] != dim:
        raise DomainError(f"{name} has dimension {X.shape[1]}, expected {dim}")
    return X


def check_weights(w, n, name="weights", atol=1e-12):
    if w is None:
        return np.full(n, 1.0 / n)
    w = np.asarray(w, dtype=float).ravel()
    if w.shape[0] != n:
        raise DomainError(f"{name} has length {w.shape[0]}, expected {n}")
    if np.any(w < 0) or not np.all(np.isfinite(w)):
        raise DomainError(f"{name} must be finite and non-negative")
    if abs(w.sum() - 1.0) > atol:
        raise DomainError(f"{name} sum to {w.sum()!r}, not 1 (tolerance {atol})")
    return w


def check_unit_vector(u, atol=1e-9):
    u = np.atleast_1d(np.asarray(u, dtype=float))
    if abs(np.linalg.norm(u) - 1.0) > atol:
        raise DomainError(f"|u| = {np.linalg.norm(u)!r} is not 1 within {atol}")
    return u


def check_positive(value, name):
    if not value > 0:
        raise DomainError(f"{name} must be > 0, got {value!r}")
    return float(value)


def norm_of(x):
    """Euclidean norm of a point, or abs of a scalar norm value."""
    x = np.asarray(x, dtype=float)
    if x.ndim == 0:
        return abs(float(x))
    return float(np.linalg.norm(x))


def as_rows(x, dim):
    """Points as an (n, dim) array; a single point may be passed flat."""
    a = np.asarray(x, dtype=float)
    if a.ndim == 0:
        return check_points(a.reshape(1, 1), dim=dim), True
    if a.ndim <= 1 and dim > 1 and a.size == dim:
        a = a.reshape(1, dim)
    return check_points(a, dim=dim), a.ndim == 0 or (a.ndim == 1 and (dim > 1 or a.size == 1))
