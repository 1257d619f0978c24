"""Greedy (myopic) placement on a quadrature grid in any dimension.

Candidates are the cell centers.  For every candidate we keep the decrease of
the cost its insertion would produce,

    gain(x) = sum_q w_q * max(0, delta_q - |q - x|),

and after each insertion only the cells captured by the new point feed an
update, restricted to candidates that can reach them.
"""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field, replace

import numpy as np
from numba import njit
from scipy.signal import fftconvolve

from .measure import (Configuration, DensityGrid, OutOfDomainError,
                      distances_to, eval_F, insert_point)

TIE_RTOL = 1e-10


@njit(cache=True)
def _singleton_costs(X, w, out):
    n, d = X.shape
    for i in range(n):
        s = 0.0
        for q in range(n):
            if w[q] == 0.0:
                continue
            r2 = 0.0
            for a in range(d):
                t = X[i, a] - X[q, a]
                r2 += t * t
            s += w[q] * math.sqrt(r2)
        out[i] = s


@njit(cache=True)
def _gains_full(X, w, delta, out):
    n, d = X.shape
    for i in range(n):
        s = 0.0
        for q in range(n):
            dq = delta[q]
            if w[q] == 0.0 or dq == 0.0:
                continue
            r2 = 0.0
            for a in range(d):
                t = X[i, a] - X[q, a]
                r2 += t * t
            if r2 < dq * dq:
                s += w[q] * (dq - math.sqrt(r2))
        out[i] = s


@njit(cache=True)
def _gains_update(X, w, cand, changed, old, new, gain):
    d = X.shape[1]
    for ii in range(cand.size):
        i = cand[ii]
        s = 0.0
        for qq in range(changed.size):
            q = changed[qq]
            dq = old[q]
            r2 = 0.0
            for a in range(d):
                t = X[i, a] - X[q, a]
                r2 += t * t
            if r2 >= dq * dq:
                continue
            r = math.sqrt(r2)
            s += w[q] * (max(new[q] - r, 0.0) - (dq - r))
        gain[i] += s


@njit(cache=True)
def _ball_masses(X, w, radii, out):
    n, d = X.shape
    for i in range(n):
        rr = radii[i] * radii[i]
        s = 0.0
        for q in range(n):
            r2 = 0.0
            for a in range(d):
                t = X[i, a] - X[q, a]
                r2 += t * t
            if r2 < rr:
                s += w[q]
        out[i] = s


def singleton_costs(grid: DensityGrid) -> np.ndarray:
    """Cost of every one-point configuration placed at a cell center.

    The cell centers form a lattice, so this is a convolution of the masses
    with the distance kernel.
    """
    offs = np.meshgrid(
        *[np.arange(-(n - 1), n) * h for n, h in zip(grid.shape, grid.cell_widths)],
        indexing="ij",
    )
    kernel = np.sqrt(sum(o * o for o in offs))
    full = fftconvolve(grid.weights.reshape(grid.shape), kernel, mode="full")
    core = full[tuple(slice(n - 1, 2 * n - 1) for n in grid.shape)]
    return np.maximum(core.ravel(), 0.0)


def exact_gain(grid: DensityGrid, config: Configuration, x0) -> float:
    """Decrease of the cost when ``x0`` is added to ``config``."""
    x0 = np.atleast_1d(np.asarray(x0, dtype=float))
    if not grid.domain.contains(x0):
        raise OutOfDomainError(f"{x0} lies outside {grid.domain}")
    r = distances_to(grid, x0)
    return math.fsum(grid.weights * np.maximum(config.distance_field - r, 0.0))


def ball_gain_bound(grid: DensityGrid, config: Configuration) -> np.ndarray:
    """nu(B(x0, delta(x0)/4)) * delta(x0)/2 at every cell center x0.

    A pointwise lower bound for :func:`exact_gain` used in the scaling proof.
    """
    delta = np.asarray(config.distance_field, dtype=float)
    mass = np.empty(grid.num_cells)
    _ball_masses(np.ascontiguousarray(grid.centers), grid.weights, delta / 4, mass)
    return mass * delta / 2


@dataclass
class GreedyState:
    config: Configuration
    cost_history: list[float] = field(default_factory=list)
    gain_history: list[float] = field(default_factory=list)
    candidate_gains: np.ndarray | None = field(default=None, repr=False)

    @property
    def n(self) -> int:
        return len(self.config)

    @property
    def cost(self) -> float:
        return self.cost_history[-1]


def initial_state(grid: DensityGrid) -> GreedyState:
    return GreedyState(Configuration.empty(grid))


def _pick(values: np.ndarray, maximize: bool) -> int:
    """Best index; near-ties go to the smallest flat index (lexicographic)."""
    if maximize:
        best = values.max()
        ok = values >= best - TIE_RTOL * abs(best)
    else:
        best = values.min()
        ok = values <= best + TIE_RTOL * abs(best)
    return int(np.flatnonzero(ok)[0])


def add_best_point(grid: DensityGrid, state: GreedyState) -> GreedyState:
    X = np.ascontiguousarray(grid.centers)
    w = grid.weights
    if state.n == 0:
        costs = singleton_costs(grid)
        i = _pick(costs, maximize=False)
        config = insert_point(grid, state.config, X[i])
        gains = np.empty(grid.num_cells)
        _gains_full(X, w, np.asarray(config.distance_field), gains)
        cost = eval_F(grid, config)
        return GreedyState(config, [cost], [], gains)

    gains = state.candidate_gains.copy()
    i = _pick(gains, maximize=True)
    p = X[i]
    old = np.asarray(state.config.distance_field)
    config = insert_point(grid, state.config, p)
    new = np.asarray(config.distance_field)
    changed = np.flatnonzero(new < old)
    if changed.size:
        reach = old[changed].max()
        lo = X[changed].min(axis=0) - reach
        hi = X[changed].max(axis=0) + reach
        cand = np.flatnonzero(np.all((X > lo) & (X < hi), axis=1))
        _gains_update(X, w, cand, changed, old, new, gains)
    cost = eval_F(grid, config)
    prev = state.cost_history[-1]
    return GreedyState(config, state.cost_history + [cost],
                       state.gain_history + [prev - cost], gains)


def run(grid: DensityGrid, n: int, callback=None) -> GreedyState:
    if n < 1:
        raise ValueError("n must be >= 1")
    state = initial_state(grid)
    for _ in range(n):
        state = add_best_point(grid, state)
        if callback is not None:
            callback(state)
    return state


def resync(grid: DensityGrid, state: GreedyState) -> GreedyState:
    """Recompute the cached candidate gains from scratch."""
    gains = np.empty(grid.num_cells)
    _gains_full(np.ascontiguousarray(grid.centers), grid.weights,
                np.asarray(state.config.distance_field), gains)
    return replace(state, candidate_gains=gains)


def write_points_csv(points, path, comment: str | None = None) -> None:
    points = np.asarray(points, dtype=float)
    d = points.shape[1]
    with open(path, "w", newline="") as fh:
        if comment:
            for line in comment.splitlines():
                fh.write(f"# {line}\n")
        w = csv.writer(fh)
        w.writerow([f"x{i + 1}" for i in range(d)])
        for p in points:
            w.writerow([repr(float(v)) for v in p])
