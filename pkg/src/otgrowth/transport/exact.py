"""Exact optimal couplings for the squared Euclidean cost."""

from dataclasses import dataclass, field

import numpy as np
from scipy import sparse
from scipy.optimize import linprog

from .._validation import check_points, check_weights
from ..errors import DomainError, SolverError
from .assignment import hungarian

JITTER = 1e-12
REDUCED_COST_TOL = 1e-9


def sq_cost(X, Y):
    """Matrix of squared Euclidean distances ``|x_i - y_j|^2``."""
    X = np.asarray(X, dtype=float)
    Y = np.asarray(Y, dtype=float)
    diff = X[:, None, :] - Y[None, :, :]
    return np.einsum("ijk,ijk->ij", diff, diff)


@dataclass
class Coupling:
    """Transport plan between two weighted point clouds, with its duals."""

    X: np.ndarray
    Y: np.ndarray
    plan: np.ndarray
    cost: float
    f: np.ndarray
    g: np.ndarray
    method: str
    info: dict = field(default_factory=dict)

    @property
    def a(self):
        return self.plan.sum(axis=1)

    @property
    def b(self):
        return self.plan.sum(axis=0)

    def reduced_costs(self):
        return sq_cost(self.X, self.Y) - self.f[:, None] - self.g[None, :]

    def triplets(self, threshold=0.0):
        i, j = np.nonzero(self.plan > threshold)
        return list(zip(i.tolist(), j.tolist(), self.plan[i, j].tolist()))

    def write_csv(self, path, threshold=0.0):
        """Sparse triplets ``i,j,mass``."""
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write("i,j,mass\n")
            for i, j, w in self.triplets(threshold):
                fh.write(f"{i},{j},{w:.17g}\n")


def _jitter_duplicates(P, rng, scale):
    _, first = np.unique(P, axis=0, return_index=True)
    dup = np.ones(len(P), dtype=bool)
    dup[first] = False
    if not dup.any():
        return P, 0
    P = P.copy()
    step = JITTER * max(1.0, scale)
    while True:
        P[dup] += step * rng.standard_normal((int(dup.sum()), P.shape[1]))
        if len(np.unique(P, axis=0)) == len(P):
            return P, int(dup.sum())


def discrete_ot_exact(X, Y, a=None, b=None, jitter_seed=0):
    """Optimal coupling of ``sum a_i delta_{x_i}`` and ``sum b_j delta_{y_j}``.

    Uniform weights with equal counts go through the Hungarian algorithm,
    so the plan is a permutation scaled by ``1/n``. Other weights solve the
    transportation LP with HiGHS. Either way the dual potentials are kept
    and optimality is certified by complementary slackness: every reduced
    cost ``C_ij - f_i - g_j`` must be at least ``-1e-9``.

    Duplicated points are separated by a 1e-12 perturbation first, recorded
    in ``info["jitter"]``.
    """
    X = check_points(X, name="X")
    Y = check_points(Y, dim=X.shape[1], name="Y")
    n, m = len(X), len(Y)
    uniform = a is None and b is None and n == m
    a = check_weights(a, n, "a")
    b = check_weights(b, m, "b")

    rng = np.random.default_rng(jitter_seed)
    scale = float(max(np.abs(X).max(), np.abs(Y).max(), 1.0))
    X, jx = _jitter_duplicates(X, rng, scale)
    Y, jy = _jitter_duplicates(Y, rng, scale)
    info = {"jitter": {"source": jx, "target": jy, "magnitude": JITTER * scale if (jx or jy) else 0.0}}

    C = sq_cost(X, Y)
    if uniform or (n == m and np.allclose(a, 1.0 / n, rtol=0, atol=1e-15)
                   and np.allclose(b, 1.0 / m, rtol=0, atol=1e-15)):
        col, f, g = hungarian(C)
        plan = np.zeros((n, m))
        plan[np.arange(n), col] = 1.0 / n
        method = "assignment"
        info["matching"] = col
    else:
        plan, f, g, lp_info = _transport_lp(C, a, b)
        method = "lp"
        info.update(lp_info)
    cost = float(np.sum(plan * C))
    reduced = C - f[:, None] - g[None, :]
    info["min_reduced_cost"] = float(reduced.min())
    info["dual_objective"] = float(a @ f + b @ g)
    if info["min_reduced_cost"] < -REDUCED_COST_TOL * max(1.0, float(C.max())):
        raise SolverError(f"optimality certificate failed: reduced cost {info['min_reduced_cost']:.3e}")
    return Coupling(X, Y, plan, cost, f, g, method, info)


def _transport_lp(C, a, b):
    n, m = C.shape
    rows = sparse.kron(sparse.eye(n), np.ones((1, m)))
    cols = sparse.kron(np.ones((1, n)), sparse.eye(m))
    A_eq = sparse.vstack([rows, cols]).tocsr()
    b_eq = np.concatenate([a, b])
    res = linprog(C.ravel(), A_eq=A_eq, b_eq=b_eq, bounds=(0, None), method="highs")
    if res.status != 0:
        raise SolverError(f"transport LP failed (status {res.status}, {res.nit} iterations): {res.message}")
    duals = res.eqlin.marginals
    plan = np.clip(res.x.reshape(n, m), 0.0, None)
    return plan, duals[:n].copy(), duals[n:].copy(), {"iterations": int(res.nit)}


def check_weight_balance(a, b, atol=1e-12):
    if abs(np.sum(a) - np.sum(b)) > atol:
        raise DomainError("source and target weights carry different mass")
