"""Batch (all points at once) solvers for the average-distance problem."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction

import numpy as np
from scipy.spatial import cKDTree

from .measure import Configuration, DensityGrid, eval_F
from .short1d import PrefixCost

# Asymptotic constants: n^(1/d) * optimal cost -> theta_d * ||f||_{d/(d+1)}
THETA = {
    1: 0.25,
    2: (3 * math.log(3) + 4) / (6 * math.sqrt(2) * 3 ** 0.75),
}


class Method(Enum):
    CLOSED_FORM_1D = "closed"
    DP_1D = "dp"
    LLOYD = "lloyd"
    BRUTE_FORCE = "brute"


class UnsupportedDimensionError(ValueError):
    pass


@dataclass
class LongTermSolution:
    points: np.ndarray
    cost: float
    method: Method
    restarts: int = 1
    exact_cost: Fraction | None = None
    history: list[float] = field(default_factory=list, repr=False)


def solve_uniform_1d(n: int) -> LongTermSolution:
    """Midpoints of n equal intervals of [0, 1]; cost 1/(4n)."""
    if n < 1:
        raise ValueError("n must be >= 1")
    exact = [Fraction(2 * i - 1, 2 * n) for i in range(1, n + 1)]
    cost = Fraction(1, 4 * n)
    pts = np.array([[float(x)] for x in exact])
    return LongTermSolution(pts, float(cost), Method.CLOSED_FORM_1D, exact_cost=cost)


TIE_ATOL = 1e-12


def _middle_argmin(tot: np.ndarray) -> np.ndarray:
    """Argmin along axis 0; among entries within TIE_ATOL of the minimum take
    the middle one, so flat optima resolve to centered positions."""
    tot = tot.reshape(tot.shape[0], -1)
    arg = np.argmin(tot, axis=0)
    best = tot[arg, np.arange(tot.shape[1])]
    tied = tot <= best + TIE_ATOL
    cols = np.flatnonzero(tied.sum(axis=0) > 1)
    if cols.size:
        rank = np.cumsum(tied[:, cols], axis=0)
        target = (rank[-1] + 1) // 2
        arg[cols] = np.argmax(rank >= target, axis=0)
    return arg


class DP1D:
    """Optimal facilities among cell centers of a 1-D grid, for every count.

    ``table[t - 1, j]`` is the least cost of the cells left of center ``j``
    using ``t`` facilities, the rightmost of them at ``j``.  Memory is
    O(m^2) for the pair-cost matrix.  Costs within TIE_ATOL count as equal.
    """

    def __init__(self, grid: DensityGrid, n_max: int):
        if grid.dim != 1:
            raise UnsupportedDimensionError("DP solver is 1-D only")
        m = grid.num_cells
        if not 1 <= n_max <= m:
            raise ValueError(f"need 1 <= n <= number of cells ({m}), got {n_max}")
        self.grid = grid
        pc = PrefixCost(grid)
        c = grid.axes[0]
        self.c = c
        self.tail = pc.right(c)
        pair = np.empty((m, m))
        for r0 in range(0, m, 256):
            rows = c[r0:r0 + 256, None]
            pair[r0:r0 + 256] = pc.between(rows, np.broadcast_to(c, (rows.size, m)))
        pair[np.tril_indices(m)] = np.inf
        table = np.empty((n_max, m))
        arg = np.zeros((n_max, m), dtype=np.int64)
        table[0] = pc.left(c)
        for t in range(1, n_max):
            tot = table[t - 1][:, None] + pair
            arg[t] = _middle_argmin(tot)
            table[t] = tot[arg[t], np.arange(m)]
        self.table, self.arg = table, arg

    def solve(self, n: int) -> LongTermSolution:
        total = self.table[n - 1] + self.tail
        j = int(_middle_argmin(total)[0])
        idx = [j]
        for t in range(n - 1, 0, -1):
            j = int(self.arg[t, j])
            idx.append(j)
        pts = self.c[idx[::-1]][:, None]
        return LongTermSolution(pts, float(total[idx[0]]), Method.DP_1D)


def solve_dp_1d(grid: DensityGrid, n: int) -> LongTermSolution:
    return DP1D(grid, n).solve(n)


def weiszfeld_step(X, w, labels, points, eps: float = 1e-12):
    """One Weiszfeld update of every group median, with the Vardi-Zhang guard.

    A group whose current median sits on a data node moves only if the
    subgradient test says the node is not optimal.
    """
    n, d = points.shape
    diff = X - points[labels]
    r = np.sqrt(np.einsum("ij,ij->i", diff, diff))
    on_node = r < eps
    inv = np.where(on_node, 0.0, w / np.where(on_node, 1.0, r))
    den = np.bincount(labels, inv, minlength=n)
    eta = np.bincount(labels, np.where(on_node, w, 0.0), minlength=n)
    new = points.copy()
    ok = den > 0
    T = np.stack([np.bincount(labels, inv * X[:, a], minlength=n) for a in range(d)], axis=1)
    T[ok] /= den[ok, None]
    pull = np.linalg.norm((T - points) * den[:, None], axis=1)
    plain = ok & (eta == 0)
    new[plain] = T[plain]
    guard = ok & (eta > 0) & (pull > eta)
    lam = np.zeros(n)
    lam[guard] = eta[guard] / pull[guard]
    new[guard] = (1 - lam[guard, None]) * T[guard] + lam[guard, None] * points[guard]
    return new


def _lloyd_once(grid: DensityGrid, init: np.ndarray, max_rounds: int, tol: float,
                inner: int):
    X, w = grid.centers, grid.weights
    pts = init.copy()
    history = []
    best_cost, best_pts = np.inf, pts.copy()
    for _ in range(max_rounds):
        dist, labels = cKDTree(pts).query(X)
        cost = math.fsum(w * dist)
        history.append(cost)
        if cost < best_cost:
            best_cost, best_pts = cost, pts.copy()
        if len(history) > 1 and history[-2] - cost < tol:
            break
        for _ in range(inner):
            pts = weiszfeld_step(X, w, labels, pts)
    return best_pts, best_cost, history


def solve_lloyd(grid: DensityGrid, n: int, restarts: int = 8, seed: int = 0,
                max_rounds: int = 500, tol: float = 1e-10, inner: int = 5) -> LongTermSolution:
    """Best of ``restarts`` alternations of nearest-point assignment and
    per-group geometric medians, each started from n cells drawn from nu."""
    if n < 1:
        raise ValueError("n must be >= 1")
    positive = np.flatnonzero(grid.weights > 0)
    replace = positive.size < n
    best = None
    for child in np.random.SeedSequence(seed).spawn(restarts):
        rng = np.random.default_rng(child)
        p = grid.weights[positive] / grid.weights[positive].sum()
        init = grid.centers[rng.choice(positive, n, replace=replace, p=p)]
        pts, cost, hist = _lloyd_once(grid, init, max_rounds, tol, inner)
        if best is None or cost < best.cost:
            best = LongTermSolution(pts, cost, Method.LLOYD, restarts, history=hist)
    return best


def solve_brute_force(grid: DensityGrid, n: int, candidates=None) -> LongTermSolution:
    """Exhaustive search over ``n``-subsets of candidate points (tiny n only)."""
    from itertools import combinations

    cand = grid.centers if candidates is None else np.asarray(candidates, dtype=float)
    cand = cand.reshape(-1, grid.dim)
    X, w = grid.centers, grid.weights
    dist = np.sqrt(((X[:, None, :] - cand[None, :, :]) ** 2).sum(axis=2))
    best_cost, best_idx = np.inf, None
    for idx in combinations(range(len(cand)), n):
        cost = float(w @ dist[:, idx].min(axis=1))
        if cost < best_cost:
            best_cost, best_idx = cost, idx
    pts = cand[list(best_idx)]
    cost = eval_F(grid, Configuration.from_points(grid, pts))
    return LongTermSolution(pts, cost, Method.BRUTE_FORCE)


def density_norm(grid: DensityGrid) -> float:
    """||f||_{d/(d+1)} by the midpoint rule."""
    d = grid.dim
    p = d / (d + 1)
    integral = math.fsum(grid.density**p * grid.cell_volume)
    return integral ** (1 / p)


def limit_cost(grid: DensityGrid, n: int) -> float:
    """n^(-1/d) * theta_d * ||f||_{d/(d+1)}."""
    d = grid.dim
    if d not in THETA:
        raise UnsupportedDimensionError(f"theta_{d} is not known")
    if n < 1:
        raise ValueError("n must be >= 1")
    return n ** (-1 / d) * THETA[d] * density_norm(grid)


def limit_density(grid: DensityGrid) -> DensityGrid:
    """Grid whose density is proportional to f^(d/(d+1))."""
    d = grid.dim
    return DensityGrid(grid.domain, grid.shape, grid.density ** (d / (d + 1)) * grid.cell_volume)
