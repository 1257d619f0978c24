"""Probability measures on boxes and the average-distance functional.

A measure is stored as cell masses on a uniform grid (midpoint rule), and a
facility configuration carries the distance from every cell center to its
nearest facility so that the functional is a single weighted sum.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path

import numpy as np


class DensityFormatError(ValueError):
    """Raised when a density-grid file cannot be parsed."""


class NegativeWeightError(ValueError):
    pass


class EmptyConfigurationError(ValueError):
    pass


class OutOfDomainError(ValueError):
    pass


class EmptyDomainError(ValueError):
    """All weights are zero."""


@dataclass(frozen=True)
class BoxDomain:
    lo: tuple[float, ...]
    hi: tuple[float, ...]

    def __post_init__(self):
        lo = tuple(float(v) for v in self.lo)
        hi = tuple(float(v) for v in self.hi)
        if len(lo) == 0 or len(lo) != len(hi):
            raise ValueError("lo and hi must be nonempty and of equal length")
        if any(a >= b for a, b in zip(lo, hi)):
            raise ValueError(f"degenerate box: lo={lo}, hi={hi}")
        object.__setattr__(self, "lo", lo)
        object.__setattr__(self, "hi", hi)

    @classmethod
    def unit(cls, d: int = 1) -> BoxDomain:
        return cls((0.0,) * d, (1.0,) * d)

    @property
    def dim(self) -> int:
        return len(self.lo)

    @property
    def volume(self) -> float:
        return math.prod(b - a for a, b in zip(self.lo, self.hi))

    def contains(self, x, tol: float = 1e-12) -> bool:
        x = np.atleast_1d(np.asarray(x, dtype=float))
        if x.shape != (self.dim,):
            return False
        lo, hi = np.array(self.lo), np.array(self.hi)
        return bool(np.all(x >= lo - tol) and np.all(x <= hi + tol))


@dataclass(frozen=True, eq=False)
class DensityGrid:
    """Cell masses of an absolutely continuous probability measure.

    ``weights`` is flat, row-major (last axis fastest) and sums to one.
    ``raw_mass`` is the total mass before normalization.
    """

    domain: BoxDomain
    shape: tuple[int, ...]
    weights: np.ndarray
    raw_mass: float = 1.0

    def __post_init__(self):
        shape = tuple(int(s) for s in self.shape)
        if len(shape) != self.domain.dim or any(s < 1 for s in shape):
            raise ValueError(f"bad shape {shape} for a {self.domain.dim}-d box")
        w = np.asarray(self.weights, dtype=float).ravel()
        if w.size != math.prod(shape):
            raise ValueError(f"expected {math.prod(shape)} weights, got {w.size}")
        if np.any(w < 0) or not np.all(np.isfinite(w)):
            raise NegativeWeightError("weights must be finite and nonnegative")
        total = math.fsum(w)
        if total <= 0:
            raise EmptyDomainError("total mass is zero")
        w = w / total
        w.flags.writeable = False
        object.__setattr__(self, "shape", shape)
        object.__setattr__(self, "weights", w)
        object.__setattr__(self, "raw_mass", float(self.raw_mass) * total)

    @classmethod
    def from_density(cls, domain: BoxDomain, shape, f) -> DensityGrid:
        """Sample ``f`` (vectorized over an (N, d) array) at cell centers."""
        grid = uniform_density(domain, shape)
        values = np.asarray(f(grid.centers), dtype=float)
        return cls(domain, grid.shape, values * grid.cell_volume)

    @property
    def dim(self) -> int:
        return self.domain.dim

    @property
    def num_cells(self) -> int:
        return self.weights.size

    @cached_property
    def cell_widths(self) -> np.ndarray:
        lo, hi = np.array(self.domain.lo), np.array(self.domain.hi)
        return (hi - lo) / np.array(self.shape)

    @property
    def cell_width(self) -> float:
        """Largest cell side."""
        return float(self.cell_widths.max())

    @property
    def cell_volume(self) -> float:
        return float(np.prod(self.cell_widths))

    @cached_property
    def axes(self) -> list[np.ndarray]:
        return [
            lo + (np.arange(n) + 0.5) * w
            for lo, n, w in zip(self.domain.lo, self.shape, self.cell_widths)
        ]

    @cached_property
    def centers(self) -> np.ndarray:
        """(N, d) array of cell centers in flat (row-major) order."""
        mesh = np.meshgrid(*self.axes, indexing="ij")
        c = np.stack([m.ravel() for m in mesh], axis=1)
        c.flags.writeable = False
        return c

    @cached_property
    def density(self) -> np.ndarray:
        """Density value f per cell (mass / cell volume)."""
        return self.weights / self.cell_volume


def uniform_density(domain: BoxDomain, shape) -> DensityGrid:
    shape = tuple(int(s) for s in np.atleast_1d(shape))
    return DensityGrid(domain, shape, np.ones(math.prod(shape)))


def parse_density(text: str) -> DensityGrid:
    lines = []
    for raw in text.splitlines():
        s = raw.strip()
        if s and not s.startswith("#"):
            lines.append(s)
    if len(lines) < 2:
        raise DensityFormatError("missing header lines")
    try:
        head = [int(t) for t in lines[0].split()]
        bounds = [float(t) for t in lines[1].split()]
        values = [float(t) for line in lines[2:] for t in line.split()]
    except ValueError as exc:
        raise DensityFormatError(str(exc)) from None
    if len(head) < 2 or head[0] != len(head) - 1:
        raise DensityFormatError(f"header must read 'd n1 ... nd', got {lines[0]!r}")
    d, shape = head[0], tuple(head[1:])
    if d < 1 or any(n < 1 for n in shape):
        raise DensityFormatError("dimension and cell counts must be positive")
    if len(bounds) != 2 * d:
        raise DensityFormatError(f"expected {2 * d} bounds, got {len(bounds)}")
    if len(values) != math.prod(shape):
        raise DensityFormatError(
            f"expected {math.prod(shape)} weights, got {len(values)}"
        )
    if any(v < 0 for v in values):
        raise NegativeWeightError("negative weight in density file")
    try:
        domain = BoxDomain(tuple(bounds[0::2]), tuple(bounds[1::2]))
    except ValueError as exc:
        raise DensityFormatError(str(exc)) from None
    return DensityGrid(domain, shape, np.array(values))


def load_density(path) -> DensityGrid:
    return parse_density(Path(path).read_text(encoding="utf-8"))


def format_density(grid: DensityGrid, values=None) -> str:
    """Serialize ``grid`` to the text format read by :func:`load_density`.

    ``values`` defaults to the normalized cell masses.
    """
    values = grid.weights if values is None else np.ravel(values)
    out = [" ".join(str(v) for v in (grid.dim, *grid.shape))]
    out.append(" ".join(f"{a!r} {b!r}" for a, b in zip(grid.domain.lo, grid.domain.hi)))
    last = grid.shape[-1]
    for i in range(0, len(values), last):
        out.append(" ".join(repr(float(v)) for v in values[i : i + last]))
    return "\n".join(out) + "\n"


@dataclass(frozen=True, eq=False)
class Configuration:
    points: np.ndarray
    distance_field: np.ndarray = field(repr=False)

    @classmethod
    def empty(cls, grid: DensityGrid) -> Configuration:
        return cls(np.zeros((0, grid.dim)), np.full(grid.num_cells, np.inf))

    @classmethod
    def from_points(cls, grid: DensityGrid, points) -> Configuration:
        config = cls.empty(grid)
        for p in np.asarray(points, dtype=float).reshape(-1, grid.dim):
            config = insert_point(grid, config, p)
        return config

    def __len__(self) -> int:
        return len(self.points)


def distances_to(grid: DensityGrid, x0) -> np.ndarray:
    """Euclidean distance from every cell center to ``x0``."""
    diff = grid.centers - np.asarray(x0, dtype=float)
    if grid.dim == 1:
        return np.abs(diff[:, 0])
    return np.sqrt(np.einsum("ij,ij->i", diff, diff))


def insert_point(grid: DensityGrid, config: Configuration, x0) -> Configuration:
    x0 = np.atleast_1d(np.asarray(x0, dtype=float))
    if not grid.domain.contains(x0):
        raise OutOfDomainError(f"{x0} lies outside {grid.domain}")
    field_ = np.minimum(config.distance_field, distances_to(grid, x0))
    field_.flags.writeable = False
    points = np.vstack([config.points, x0[None, :]])
    points.flags.writeable = False
    return Configuration(points, field_)


def eval_F(grid: DensityGrid, config: Configuration) -> float:
    """Midpoint-rule value of the integral of dist(x, config) against the measure."""
    if len(config) == 0:
        raise EmptyConfigurationError("F is undefined for an empty configuration")
    # fsum keeps the result independent of summation order
    return math.fsum(grid.weights * config.distance_field)
