"""Independent oracles used by the test suite.

These deliberately avoid the shortest-path closure code path: the hull oracle
enumerates the constraint system on a dense grid, and the regression oracle
solves the normal equations with extended-precision accumulation.
"""

from __future__ import annotations

import numpy as np


def wls_normal_equations(y, x, w):
    """Textbook (X'WX)^-1 X'Wy with long-double accumulation."""
    xl = np.asarray(x, dtype=np.longdouble)
    yl = np.asarray(y, dtype=np.longdouble)
    wl = np.asarray(w, dtype=np.longdouble)
    xtwx = xl.T @ (xl * wl[:, None])
    xtwy = xl.T @ (yl * wl)
    beta = np.linalg.solve(xtwx.astype(float), xtwy.astype(float))
    return beta


def diff_grid_hull(boxes, diffs, n_points=200, chunk=200_000):
    """Per-coordinate hull of the difference-bound polytope by grid enumeration.

    boxes: list of (lo, hi) per coordinate.
    diffs: dict mapping ordered pair (j, k) to (dl, du) with theta_j - theta_k
    in [dl, du].  Returns (hull, n_feasible) where hull is a list of
    (min, max) per coordinate, or (None, 0) if no grid point is feasible.
    """
    K = len(boxes)
    windows = {}

    def add_window(m, j, lo, hi):
        cur = windows.get((m, j), (-np.inf, np.inf))
        windows[(m, j)] = (max(cur[0], lo), min(cur[1], hi))

    for (j, k), (dl, du) in diffs.items():
        add_window(j, k, dl, du)
        add_window(k, j, -du, -dl)

    # visit coordinates so each new one is constrained against an earlier one
    # when the constraint graph allows it
    neighbors = {i: set() for i in range(K)}
    for (m, j) in windows:
        neighbors[m].add(j)
    order, seen = [], set()
    for start in range(K):
        if start in seen:
            continue
        stack = [start]
        while stack:
            node = stack.pop()
            if node in seen:
                continue
            seen.add(node)
            order.append(node)
            stack.extend(sorted(neighbors[node] - seen))

    grids = [np.linspace(lo, hi, n_points) for lo, hi in boxes]
    hull_min = np.full(K, np.inf)
    hull_max = np.full(K, -np.inf)
    n_feasible = 0

    def expand(partial, depth):
        nonlocal n_feasible
        if depth == K:
            n_feasible += len(partial)
            for pos, coord in enumerate(order):
                hull_min[coord] = min(hull_min[coord], partial[:, pos].min())
                hull_max[coord] = max(hull_max[coord], partial[:, pos].max())
            return
        m = order[depth]
        lo = np.full(len(partial), boxes[m][0])
        hi = np.full(len(partial), boxes[m][1])
        for pos, j in enumerate(order[:depth]):
            win = windows.get((m, j))
            if win is None:
                continue
            wlo, whi = win
            if np.isfinite(wlo):
                lo = np.maximum(lo, partial[:, pos] + wlo)
            if np.isfinite(whi):
                hi = np.minimum(hi, partial[:, pos] + whi)
        g = grids[m]
        i0 = np.searchsorted(g, lo - 1e-12, side="left")
        i1 = np.searchsorted(g, hi + 1e-12, side="right")
        counts = np.maximum(i1 - i0, 0)
        keep = np.flatnonzero(counts)
        if keep.size == 0:
            return
        counts_k = counts[keep]
        total = int(counts_k.sum())
        reps = np.repeat(keep, counts_k)
        starts = np.repeat(np.cumsum(counts_k) - counts_k, counts_k)
        gidx = np.repeat(i0[keep], counts_k) + (np.arange(total) - starts)
        new_partial = np.column_stack([partial[reps], g[gidx]])
        for lo_idx in range(0, len(new_partial), chunk):
            expand(new_partial[lo_idx : lo_idx + chunk], depth + 1)

    first = order[0]
    expand(grids[first][:, None], 1)
    if n_feasible == 0:
        return None, 0
    hull = [(hull_min[i], hull_max[i]) for i in range(K)]
    return hull, n_feasible


def extremize_rho_product(nu_l, nu_u, rho_l, rho_u, n=1000):
    """Dense-grid extremes of (rho - 1) * B over the admissible rectangle."""
    rho = np.linspace(rho_l, rho_u, n)
    b = np.linspace(nu_l, nu_u, n)
    vals = (rho[:, None] - 1.0) * b[None, :]
    return float(vals.min()), float(vals.max())
