"""Scaling-law analysis of cost sequences and of point distributions."""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .measure import Configuration, DensityGrid, EmptyConfigurationError, eval_F


@dataclass
class SeriesReport:
    n: np.ndarray
    values: np.ndarray
    alpha: float
    residual: float
    amplitude: float  # max - min of n^alpha * value over the trailing window
    liminf: float
    limsup: float


def fit_exponent(n, values) -> tuple[float, float]:
    """Least-squares decay exponent: values ~ C n^-alpha.

    Returns (alpha, rms residual of the log-log fit).
    """
    n = np.asarray(n, dtype=float)
    v = np.asarray(values, dtype=float)
    if n.size < 5:
        raise ValueError("need at least 5 points")
    if np.any(v <= 0) or np.any(n <= 0):
        raise ValueError("values and n must be positive")
    x, y = np.log(n), np.log(v)
    slope, icept = np.polyfit(x, y, 1)
    resid = y - (slope * x + icept)
    return float(-slope), float(np.sqrt(np.mean(resid**2)))


def trailing_window(n, values, lo_frac: float = 0.5):
    """min and max of ``values`` over n in [lo_frac * n_max, n_max]."""
    n = np.asarray(n)
    v = np.asarray(values, dtype=float)
    sel = n >= lo_frac * n.max()
    return float(v[sel].min()), float(v[sel].max())


def series_report(n, values, alpha: float | None = None) -> SeriesReport:
    n = np.asarray(n, dtype=float)
    values = np.asarray(values, dtype=float)
    fit_alpha, resid = fit_exponent(n, values)
    if alpha is None:
        alpha = fit_alpha
    scaled = n**alpha * values
    lo, hi = trailing_window(n, scaled)
    return SeriesReport(n, values, fit_alpha, resid, hi - lo, lo, hi)


def ratio_series(n_max: int, seq=None) -> SeriesReport:
    """r_n = s_n / l_n = 4 n s_n for the uniform measure on [0, 1].

    ``values`` holds r_n; ``liminf``/``limsup`` are the trailing-half min/max.
    """
    from .exact1d import generate_sequence

    if n_max < 2:
        raise ValueError("n_max must be >= 2")
    if seq is None or seq.n_max < n_max:
        seq = generate_sequence(n_max)
    n = np.arange(1, n_max + 1, dtype=float)
    r = 4 * n * seq.s_float[:n_max]
    lo, hi = trailing_window(n, r)
    alpha, resid = fit_exponent(n, seq.s_float[:n_max])
    return SeriesReport(n, r, alpha, resid, hi - lo, lo, hi)


def check_recursive_bound(series, C: float, d: int, rtol: float = 1e-12) -> tuple[bool, float]:
    """Check a_{n+1} <= a_n - C a_n^(d+1) and a_n <= B n^(-1/d).

    B = max(a_1, (1/(d C))^(1/d)).  ``holds`` is False if either the
    recurrence (up to a relative rounding slack ``rtol``) or the bound fails
    anywhere; the bound itself is checked without slack.
    """
    if C <= 0 or d < 1:
        raise ValueError("need C > 0 and d >= 1")
    a = np.asarray(series, dtype=float)
    B = max(float(a[0]), (1.0 / (d * C)) ** (1.0 / d))
    rhs = a[:-1] - C * a[:-1] ** (d + 1)
    rec_ok = bool(np.all(a[1:] <= rhs + rtol * np.abs(a[:-1])))
    n = np.arange(1, a.size + 1, dtype=float)
    bound_ok = bool(np.all(a <= B * n ** (-1.0 / d)))
    return rec_ok and bound_ok, B


def recurrence_constant(series, d: int) -> float:
    """Largest C such that a_{n+1} <= a_n - C a_n^(d+1) holds for the series."""
    a = np.asarray(series, dtype=float)
    return float(np.min((a[:-1] - a[1:]) / a[:-1] ** (d + 1)))


def generate_recursive(a1: float, C: float, d: int, length: int) -> np.ndarray:
    """Sequence with equality in the recurrence a_{n+1} = a_n - C a_n^(d+1)."""
    out = np.empty(length)
    out[0] = a1
    for i in range(1, length):
        a = out[i - 1]
        out[i] = a - C * a ** (d + 1)
    return out


def rescaled_cost(grid: DensityGrid, config: Configuration) -> float:
    n = len(config)
    if n == 0:
        raise EmptyConfigurationError("empty configuration")
    return n ** (1.0 / grid.dim) * eval_F(grid, config)


@dataclass(frozen=True)
class Region:
    """Union of boxes, each half-open (lo, hi] along every axis."""

    pieces: tuple
    name: str = ""

    @classmethod
    def interval(cls, lo, hi, name: str = "") -> Region:
        return cls((((lo,), (hi,)),), name)

    def contains(self, x) -> bool:
        x = tuple(x) if np.ndim(x) else (x,)
        return any(all(l < v <= h for v, l, h in zip(x, lo, hi)) for lo, hi in self.pieces)


def omega_regions(j_max: int) -> list[Region]:
    from .exact1d import omega_region

    out = []
    for j in range(j_max + 1):
        (a, b), (c, d) = omega_region(j)
        out.append(Region((((a,), (b,)), ((c,), (d,))), f"Omega_{j}"))
    return out


def uniform_bins(lo: float, hi: float, count: int) -> list[Region]:
    edges = [lo + (hi - lo) * Fraction(i, count) for i in range(count + 1)]
    edges = [float(e) for e in edges]
    regions = [Region.interval(a, b, f"bin_{i}") for i, (a, b) in enumerate(zip(edges, edges[1:]))]
    # close the first bin on the left so the lower boundary is counted
    first = regions[0]
    regions[0] = Region((((np.nextafter(lo, -np.inf),), (edges[1],)),), first.name)
    return regions


def _overlap(p, q) -> bool:
    (lo1, hi1), (lo2, hi2) = p, q
    return all(max(a, c) < min(b, d) for a, b, c, d in zip(lo1, hi1, lo2, hi2))


def empirical_measure_histogram(points, regions: list[Region]) -> list[tuple[Region, int, float]]:
    """Count points per region; regions must not overlap."""
    pieces = [(i, p) for i, r in enumerate(regions) for p in r.pieces]
    for a in range(len(pieces)):
        for b in range(a + 1, len(pieces)):
            if pieces[a][0] != pieces[b][0] and _overlap(pieces[a][1], pieces[b][1]):
                raise ValueError(
                    f"regions {regions[pieces[a][0]].name!r} and "
                    f"{regions[pieces[b][0]].name!r} overlap"
                )
    pts = list(points)
    total = len(pts)
    out = []
    for r in regions:
        count = sum(1 for p in pts if r.contains(p))
        out.append((r, count, count / total if total else 0.0))
    return out


def histogram_correlation(points, lo: float, hi: float, bins: int, profile) -> float:
    """Pearson correlation between a 1-D point histogram and ``profile`` at bin centers."""
    counts, edges = np.histogram(np.asarray(points, dtype=float).ravel(), bins=bins, range=(lo, hi))
    mid = 0.5 * (edges[1:] + edges[:-1])
    return float(np.corrcoef(counts, profile(mid))[0, 1])


def hexagon_mean_distance(samples: int = 400) -> float:
    """Mean distance to the center over a unit-area regular hexagon (quadrature).

    Independent check of the closed-form two-dimensional constant.
    """
    # one of 12 congruent right triangles: angle 0..pi/6, radial extent to the apothem
    side = math.sqrt(2 / (3 * math.sqrt(3)))
    apothem = side * math.sqrt(3) / 2
    th, wt = np.polynomial.legendre.leggauss(samples)
    th = (th + 1) * math.pi / 12
    wt = wt * math.pi / 12
    # integral of r * r dr from 0 to apothem/cos(theta) = (apothem/cos)^3 / 3
    inner = (apothem / np.cos(th)) ** 3 / 3
    return 12 * float(np.sum(wt * inner))


def write_series_csv(path, columns: dict) -> None:
    """CSV with one header row; ``columns`` maps names to equal-length sequences."""
    import csv

    names = list(columns)
    cols = [list(columns[k]) for k in names]
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(names)
        for row in zip(*cols):
            w.writerow([repr(float(v)) if isinstance(v, (float, np.floating)) else v for v in row])


def _ticks(lo: float, hi: float, log: bool) -> list[float]:
    if log:
        return [10.0**e for e in range(math.floor(lo), math.ceil(hi) + 1) if lo <= e <= hi]
    span = hi - lo
    if span <= 0:
        return [lo]
    step = 10 ** math.floor(math.log10(span))
    for m in (1, 2, 5, 10):
        if span / (step * m) <= 6:
            step *= m
            break
    start = math.ceil(lo / step) * step
    return [start + i * step for i in range(int((hi - start) / step + 1e-9) + 1)]


def line_plot_svg(series: dict, title: str = "", xlabel: str = "", ylabel: str = "",
                  logx: bool = False, logy: bool = False, width: int = 640,
                  height: int = 400) -> str:
    """Standalone SVG with one polyline per entry of ``series`` (label -> (x, y))."""
    colors = ["#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b"]
    ml, mr, mt, mb = 70, 20, 35, 50
    tx = np.log10 if logx else np.asarray
    ty = np.log10 if logy else np.asarray
    data = []
    for label, (x, y) in series.items():
        x, y = np.asarray(x, dtype=float), np.asarray(y, dtype=float)
        ok = np.isfinite(x) & np.isfinite(y)
        if logx:
            ok &= x > 0
        if logy:
            ok &= y > 0
        data.append((label, tx(x[ok]), ty(y[ok])))
    xs = np.concatenate([d[1] for d in data])
    ys = np.concatenate([d[2] for d in data])
    x0, x1 = float(xs.min()), float(xs.max())
    y0, y1 = float(ys.min()), float(ys.max())
    if x1 == x0:
        x1 = x0 + 1
    if y1 == y0:
        y1 = y0 + 1
    pad = 0.05 * (y1 - y0)
    y0, y1 = y0 - pad, y1 + pad
    pw, ph = width - ml - mr, height - mt - mb

    def px(v):
        return ml + (v - x0) / (x1 - x0) * pw

    def py(v):
        return mt + ph - (v - y0) / (y1 - y0) * ph

    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
        f'font-family="sans-serif" font-size="12">',
        f'<rect width="{width}" height="{height}" fill="white"/>',
        f'<text x="{width / 2}" y="20" text-anchor="middle" font-size="14">{title}</text>',
        f'<rect x="{ml}" y="{mt}" width="{pw}" height="{ph}" fill="none" stroke="black"/>',
    ]
    for t in _ticks(x0, x1, logx):
        v = math.log10(t) if logx else t
        out.append(f'<line x1="{px(v):.2f}" y1="{mt + ph}" x2="{px(v):.2f}" y2="{mt + ph + 5}" stroke="black"/>')
        out.append(f'<text x="{px(v):.2f}" y="{mt + ph + 18}" text-anchor="middle">{t:g}</text>')
    for t in _ticks(y0, y1, logy):
        v = math.log10(t) if logy else t
        out.append(f'<line x1="{ml - 5}" y1="{py(v):.2f}" x2="{ml}" y2="{py(v):.2f}" stroke="black"/>')
        out.append(f'<text x="{ml - 8}" y="{py(v) + 4:.2f}" text-anchor="end">{t:g}</text>')
    out.append(f'<text x="{ml + pw / 2}" y="{height - 10}" text-anchor="middle">{xlabel}</text>')
    out.append(f'<text x="15" y="{mt + ph / 2}" text-anchor="middle" '
               f'transform="rotate(-90 15 {mt + ph / 2})">{ylabel}</text>')
    for i, (label, x, y) in enumerate(data):
        c = colors[i % len(colors)]
        # thin long series so files stay small
        step = max(1, x.size // 4000)
        pts = " ".join(f"{px(a):.2f},{py(b):.2f}" for a, b in zip(x[::step], y[::step]))
        out.append(f'<polyline points="{pts}" fill="none" stroke="{c}" stroke-width="1"/>')
        out.append(f'<text x="{ml + 10}" y="{mt + 15 + 15 * i}" fill="{c}">{label}</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"


def write_line_plot(path, series: dict, **kw) -> None:
    with open(path, "w") as fh:
        fh.write(line_plot_svg(series, **kw))
