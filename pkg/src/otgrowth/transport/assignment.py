"""Shortest-augmenting-path Hungarian algorithm with dual potentials."""

import numpy as np


def hungarian(C):
    """Solve the rectangular assignment problem ``min sum C[i, col[i]]``.

    ``C`` is (n, m) with ``n <= m``. Returns ``(col, u, v)`` where ``col[i]``
    is the column matched to row ``i`` and ``u``, ``v`` are dual potentials
    with ``C[i, j] - u[i] - v[j] >= 0`` everywhere (up to rounding) and
    equality on matched pairs. Runs in O(n^2 m).
    """
    C = np.asarray(C, dtype=float)
    n, m = C.shape
    if n > m:
        raise ValueError("hungarian needs at least as many columns as rows")
    u = np.zeros(n + 1)
    v = np.zeros(m + 1)
    p = np.zeros(m + 1, dtype=int)    # p[j]: row (1-based) matched to column j
    way = np.zeros(m + 1, dtype=int)
    for i in range(1, n + 1):
        p[0] = i
        j0 = 0
        minv = np.full(m + 1, np.inf)
        used = np.zeros(m + 1, dtype=bool)
        while True:
            used[j0] = True
            i0 = p[j0]
            free = ~used[1:]
            cur = C[i0 - 1] - u[i0] - v[1:]
            better = free & (cur < minv[1:])
            minv[1:][better] = cur[better]
            way[1:][better] = j0
            masked = np.where(free, minv[1:], np.inf)
            j1 = int(np.argmin(masked)) + 1
            delta = masked[j1 - 1]
            u[p[used]] += delta
            v[used] -= delta
            minv[1:][free] -= delta
            j0 = j1
            if p[j0] == 0:
                break
        while j0:
            j1 = way[j0]
            p[j0] = p[j1]
            j0 = j1
    col = np.empty(n, dtype=int)
    rows = p[1:]
    matched = rows > 0
    col[rows[matched] - 1] = np.flatnonzero(matched)
    return col, u[1:], v[1:]
