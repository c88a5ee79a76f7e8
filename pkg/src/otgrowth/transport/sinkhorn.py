"""Log-domain Sinkhorn iterations with an epsilon ladder."""

import math

import numpy as np

from .._validation import check_points, check_weights
from ..errors import DomainError, EpsilonTooSmallError
from .exact import Coupling, sq_cost


STAGE_ITER_CAP = 1000


def _lse(M, axis):
    # scipy's logsumexp carries enough overhead to dominate small problems
    m = M.max(axis=axis, keepdims=True)
    return (m + np.log(np.exp(M - m).sum(axis=axis, keepdims=True))).squeeze(axis)


def epsilon_ladder(epsilon, eps_start=1.0, factor=0.5):
    """Geometric sequence from ``eps_start`` down to ``epsilon``."""
    if eps_start <= epsilon:
        return [float(epsilon)]
    k = int(math.ceil(math.log(epsilon / eps_start) / math.log(factor)))
    return [float(eps_start * factor ** i) for i in range(k)] + [float(epsilon)]


def sinkhorn(X, Y, epsilon, a=None, b=None, max_iter=10_000, tol=1e-9, eps_start=1.0,
             ladder=True, check_every=10):
    """Entropic coupling for the squared Euclidean cost.

    Potentials are updated in the log domain and warm-started along an
    epsilon ladder ending at ``epsilon``. Intermediate rungs only supply warm
    starts and run at most ``STAGE_ITER_CAP`` sweeps. Stops once the L1
    row-marginal residual is at most ``tol`` (the column marginal is exact
    after each sweep) or after ``max_iter`` sweeps at the final epsilon.
    """
    if not epsilon > 0:
        raise DomainError("epsilon must be > 0")
    X = check_points(X, name="X")
    Y = check_points(Y, dim=X.shape[1], name="Y")
    a = check_weights(a, len(X), "a")
    b = check_weights(b, len(Y), "b")
    C = sq_cost(X, Y)
    with np.errstate(over="ignore"):
        if not np.isfinite(C.max() / epsilon):
            raise EpsilonTooSmallError(f"epsilon {epsilon:g} overflows the scaled cost")
    log_a, log_b = np.log(a), np.log(b)
    f = np.zeros(len(X))
    g = np.zeros(len(Y))
    eps_list = epsilon_ladder(epsilon, eps_start) if ladder else [float(epsilon)]
    total_iter = 0
    residual = math.inf
    for stage, eps in enumerate(eps_list):
        final = stage == len(eps_list) - 1
        stage_tol = tol if final else max(tol, 1e-6)
        stage_iter = max_iter if final else min(max_iter, STAGE_ITER_CAP)
        for it in range(stage_iter):
            f = eps * log_a - eps * _lse((g[None, :] - C) / eps, axis=1)
            g = eps * log_b - eps * _lse((f[:, None] - C) / eps, axis=0)
            total_iter += 1
            if (it + 1) % check_every == 0 or it == stage_iter - 1:
                P = np.exp((f[:, None] + g[None, :] - C) / eps)
                residual = float(np.abs(P.sum(axis=1) - a).sum())
                if residual <= stage_tol:
                    break
        if not (np.all(np.isfinite(f)) and np.all(np.isfinite(g))):
            raise EpsilonTooSmallError(f"non-finite potentials at epsilon {eps:g}")
    P = np.exp((f[:, None] + g[None, :] - C) / epsilon)
    residual = float(np.abs(P.sum(axis=1) - a).sum())
    if not np.all(np.isfinite(P)) or P.sum() == 0:
        raise EpsilonTooSmallError(f"kernel underflow at epsilon {epsilon:g}")
    info = {"epsilon": float(epsilon), "iterations": total_iter, "marginal_residual": residual,
            "converged": residual <= tol, "ladder": eps_list}
    return Coupling(X, Y, P, float(np.sum(P * C)), f, g, "sinkhorn", info)
