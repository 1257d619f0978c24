"""Myopic (one point at a time) placement for arbitrary 1-D densities.

Costs are evaluated with prefix sums over the quadrature cells, so the cost of
inserting a point anywhere in a gap between two facilities is O(log m).  The
candidate set is the half-cell lattice (cell centers and cell edges); the best
candidate is then polished by a zooming scan.
"""
from __future__ import annotations

import csv
from collections import deque
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from .measure import Configuration, DensityGrid, EmptyDomainError, eval_F, insert_point


class TieRule(Enum):
    LEFTMOST = "leftmost"
    RIGHTMOST = "rightmost"


class PrefixCost:
    """Midpoint-rule segment costs for a 1-D grid."""

    def __init__(self, grid: DensityGrid):
        if grid.dim != 1:
            raise ValueError("PrefixCost needs a 1-D grid")
        self.lo, self.hi = grid.domain.lo[0], grid.domain.hi[0]
        self.c = grid.axes[0]
        w = grid.weights
        self.W = np.concatenate([[0.0], np.cumsum(w)])
        self.M = np.concatenate([[0.0], np.cumsum(w * self.c)])

    def _idx(self, v):
        return np.searchsorted(self.c, v, side="left")

    def _mass(self, i0, i1):
        return self.W[i1] - self.W[i0], self.M[i1] - self.M[i0]

    def left(self, b):
        """Cells left of ``b`` served by a facility at ``b`` only."""
        ib = self._idx(b)
        m0, m1 = self.W[ib], self.M[ib]
        return np.maximum(b * m0 - m1, 0.0)

    def right(self, a):
        ia = self._idx(a)
        m0, m1 = self.W[-1] - self.W[ia], self.M[-1] - self.M[ia]
        return np.maximum(m1 - a * m0, 0.0)

    def between(self, a, b):
        """Cells between facilities at ``a`` < ``b``, each served by the nearer."""
        a, b = np.asarray(a, dtype=float), np.asarray(b, dtype=float)
        ia, im, ib = self._idx(a), self._idx(0.5 * (a + b)), self._idx(b)
        l0, l1 = self._mass(ia, im)
        r0, r1 = self._mass(im, ib)
        return np.maximum(l1 - a * l0, 0.0) + np.maximum(b * r0 - r1, 0.0)

    def total(self, points) -> float:
        p = np.sort(np.asarray(points, dtype=float))
        if p.size == 0:
            raise ValueError("empty configuration")
        return float(self.left(p[0]) + self.right(p[-1]) + np.sum(self.between(p[:-1], p[1:])))

    def gap_cost(self, p: np.ndarray, g: int) -> float:
        """Cost of gap ``g`` (0 = left boundary gap, len(p) = right boundary gap)."""
        if g == 0:
            return float(self.left(p[0]))
        if g == len(p):
            return float(self.right(p[-1]))
        return float(self.between(p[g - 1], p[g]))

    def insert_gain(self, p: np.ndarray, g: int, x) -> np.ndarray:
        """Decrease of the cost when a point ``x`` (array) is added inside gap ``g``."""
        x = np.asarray(x, dtype=float)
        k = len(p)
        if g == 0:
            new = self.left(x) + self.between(x, np.full_like(x, p[0]))
        elif g == k:
            new = self.between(np.full_like(x, p[-1]), x) + self.right(x)
        else:
            new = self.between(np.full_like(x, p[g - 1]), x) + self.between(
                x, np.full_like(x, p[g])
            )
        return self.gap_cost(p, g) - new

    def singleton(self, x) -> np.ndarray:
        return self.left(x) + self.right(x)


@dataclass
class Insertion:
    x: float
    cost: float
    ties: np.ndarray
    choices: list[float]


@dataclass
class Trajectory:
    steps: list[tuple[float, float]] = field(default_factory=list)
    label: str = ""
    truncated: bool = False

    @property
    def points(self) -> list[float]:
        return [x for x, _ in self.steps]

    @property
    def costs(self) -> list[float]:
        return [c for _, c in self.steps]

    @property
    def final_cost(self) -> float:
        return self.steps[-1][1]


class Myopic1D:
    """Incremental myopic solver state on a 1-D grid.

    ``gain`` holds, for every lattice candidate, the decrease of the cost if
    that candidate were added; only the gap that receives a point is
    recomputed after each insertion.
    """

    def __init__(self, grid: DensityGrid, tie_tol: float = 1e-9, plateau_width=None):
        if grid.dim != 1:
            raise ValueError("short-term 1-D solver needs a 1-D grid")
        if not np.any(grid.weights > 0):
            raise EmptyDomainError("all weights are zero")
        self.grid = grid
        self.pc = PrefixCost(grid)
        lo, hi, m = self.pc.lo, self.pc.hi, grid.shape[0]
        self.cand = lo + (hi - lo) * np.arange(2 * m + 1) / (2 * m)
        self.half = (hi - lo) / (2 * m)
        self.tie_tol = tie_tol
        if plateau_width is None:
            plateau_width = max(1e-3 * (hi - lo), 4 * grid.cell_width)
        self.plateau_width = plateau_width
        self.points = np.zeros(0)
        self.cost = np.inf
        self.gain = None

    def copy(self) -> Myopic1D:
        other = object.__new__(Myopic1D)
        other.__dict__.update(self.__dict__)
        other.points = self.points.copy()
        other.gain = None if self.gain is None else self.gain.copy()
        return other

    def _candidate_costs(self) -> np.ndarray:
        if self.gain is None:
            return self.pc.singleton(self.cand)
        return self.cost - self.gain

    def _gains_at(self, xs: np.ndarray) -> np.ndarray:
        p = self.points
        gaps = np.searchsorted(p, xs, side="left")
        out = np.empty(xs.size)
        for g in np.unique(gaps):
            sel = gaps == g
            out[sel] = self.pc.insert_gain(p, int(g), xs[sel])
        return out

    def _costs_at(self, xs) -> np.ndarray:
        xs = np.atleast_1d(np.asarray(xs, dtype=float))
        if len(self.points) == 0:
            return self.pc.singleton(xs)
        return self.cost - self._gains_at(xs)

    def _polish(self, lo: float, hi: float, ref: float) -> float:
        """Center of the set of minimizers inside [lo, hi] (zooming scan).

        Returning the center of a flat bottom keeps symmetric inputs symmetric.
        """
        lo, hi = max(lo, self.pc.lo), min(hi, self.pc.hi)
        eps = 1e-14 * abs(ref)
        for _ in range(4):
            xs = np.linspace(lo, hi, 129)
            cs = self._costs_at(xs)
            near = xs[cs <= cs.min() + eps]
            step = xs[1] - xs[0]
            lo, hi = max(near[0] - step, self.pc.lo), min(near[-1] + step, self.pc.hi)
        return 0.5 * (near[0] + near[-1])

    def best_insertion(self, tie_rule: TieRule = TieRule.LEFTMOST,
                       all_choices: bool = False) -> Insertion:
        """Best lattice candidate, polished; ``choices`` holds one position per
        narrow tie run and both ends of every plateau run.

        Unless ``all_choices`` is set only the run selected by ``tie_rule`` is
        polished and ``choices`` holds that run only.
        """
        costs = self._candidate_costs()
        best = float(costs.min())
        ref = self.cost if np.isfinite(self.cost) else best
        tied = costs <= best + self.tie_tol * abs(ref)
        idx = np.flatnonzero(tied)
        # contiguous runs of tied lattice candidates
        breaks = np.flatnonzero(np.diff(idx) > 1)
        runs = list(zip(np.concatenate([[idx[0]], idx[breaks + 1]]),
                        np.concatenate([idx[breaks], [idx[-1]]])))
        if not all_choices:
            runs = [runs[0] if tie_rule is TieRule.LEFTMOST else runs[-1]]
        choices = []
        for s, e in runs:
            a, b = self.cand[s], self.cand[e]
            if b - a >= self.plateau_width:
                choices.extend([a, b])
                continue
            x = self._polish(a - self.half, b + self.half, ref)
            if self._costs_at(x)[0] > costs[s:e + 1].min() + 1e-12 * abs(ref):
                x = self.cand[s + int(np.argmin(costs[s:e + 1]))]
            choices.append(x)
        choices = sorted(set(float(x) for x in choices))
        x = choices[0] if tie_rule is TieRule.LEFTMOST else choices[-1]
        return Insertion(x, float(self._costs_at(x)[0]), self.cand[idx], choices)

    def _refresh(self, lo: float, hi: float) -> None:
        """Recompute lattice gains for candidates in [lo, hi]."""
        i0 = np.searchsorted(self.cand, lo, side="left")
        i1 = np.searchsorted(self.cand, hi, side="right")
        self.gain[i0:i1] = self._gains_at(self.cand[i0:i1])

    def insert(self, x: float) -> float:
        x = float(np.clip(x, self.pc.lo, self.pc.hi))
        g = int(np.searchsorted(self.points, x))
        lo = self.points[g - 1] if g > 0 else self.pc.lo
        hi = self.points[g] if g < len(self.points) else self.pc.hi
        self.points = np.insert(self.points, g, x)
        if self.gain is None:
            self.gain = np.zeros(self.cand.size)
            self._refresh(self.pc.lo, self.pc.hi)
        else:
            self._refresh(lo, hi)
        self.cost = self.pc.total(self.points)
        return self.cost


def best_insertion(grid: DensityGrid, config: Configuration,
                   tie_rule: TieRule = TieRule.LEFTMOST, tie_tol: float = 1e-9) -> Insertion:
    solver = Myopic1D(grid, tie_tol)
    for p in config.points[:, 0]:
        solver.insert(p)
    return solver.best_insertion(tie_rule)


def run_trajectory(grid: DensityGrid, n: int, tie_rule: TieRule = TieRule.LEFTMOST,
                   tie_tol: float = 1e-9) -> Trajectory:
    if n < 1:
        raise ValueError("n must be >= 1")
    solver = Myopic1D(grid, tie_tol)
    traj = Trajectory(label=tie_rule.value)
    for _ in range(n):
        ins = solver.best_insertion(tie_rule)
        traj.steps.append((ins.x, solver.insert(ins.x)))
    return traj


def enumerate_branches(grid: DensityGrid, n: int, max_branches: int = 64,
                       tie_tol: float = 1e-9) -> list[Trajectory]:
    """Breadth-first expansion over tie choices, at most ``max_branches`` leaves.

    Branch labels are dot-separated choice indices (``"0.1"`` = first choice
    at step one, second at step two).
    """
    if n < 1 or max_branches < 1:
        raise ValueError("n and max_branches must be >= 1")
    frontier = deque([(Myopic1D(grid, tie_tol), Trajectory())])
    truncated = False
    for _ in range(n):
        nxt = deque()
        for solver, traj in frontier:
            choices = solver.best_insertion(all_choices=True).choices
            for i, x in enumerate(choices):
                if len(nxt) >= max_branches:
                    truncated = True
                    break
                child = solver.copy()
                cost = child.insert(x)
                label = f"{traj.label}.{i}" if traj.label else str(i)
                nxt.append((child, Trajectory(traj.steps + [(x, cost)], label)))
        frontier = nxt
    out = [t for _, t in frontier]
    for t in out:
        t.truncated = truncated
    return out


def trajectory_cost_check(grid: DensityGrid, traj: Trajectory) -> float:
    """Largest gap between recorded costs and a direct evaluation of F."""
    config = Configuration.empty(grid)
    worst = 0.0
    for x, cost in traj.steps:
        config = insert_point(grid, config, [x])
        worst = max(worst, abs(eval_F(grid, config) - cost))
    return worst


def write_trajectories_csv(trajs, path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["step", "x_added", "cost", "branchLabel"])
        for t in trajs:
            for k, (x, c) in enumerate(t.steps, start=1):
                w.writerow([k, repr(x), repr(c), t.label])
