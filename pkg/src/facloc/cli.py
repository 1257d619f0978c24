"""Command-line front end: exact1d, shortterm, longterm and compare."""
from __future__ import annotations

import argparse
import csv
import math
import sys
from dataclasses import dataclass
from enum import Enum
from pathlib import Path

import numpy as np

from . import asymptotics, exact1d, greedy_nd, longterm, short1d
from .measure import (BoxDomain, DensityFormatError, DensityGrid, EmptyDomainError,
                      NegativeWeightError, load_density, uniform_density)

EXIT_OK, EXIT_USAGE, EXIT_INPUT, EXIT_NUMERIC = 0, 2, 3, 4


class UsageError(Exception):
    pass


class NumericFailure(Exception):
    pass


class Command(Enum):
    EXACT1D = "exact1d"
    SHORTTERM = "shortterm"
    LONGTERM = "longterm"
    COMPARE = "compare"


@dataclass
class RunConfig:
    command: Command
    grid: DensityGrid | None
    n: int
    tie: str = "leftmost"
    method: str = "auto"
    restarts: int = 8
    seed: int = 0
    out: Path = Path(".")
    limit_cost: bool = False


def parse_uniform(spec: str) -> DensityGrid:
    """``d=2,shape=200x200[,lo=0,hi=1]`` -> uniform grid on [lo, hi]^d."""
    fields = {}
    for part in spec.split(","):
        key, sep, val = part.partition("=")
        if not sep:
            raise UsageError(f"bad --uniform field {part!r} (expected key=value)")
        fields[key.strip()] = val.strip()
    unknown = set(fields) - {"d", "shape", "lo", "hi"}
    if unknown:
        raise UsageError(f"unknown --uniform keys: {sorted(unknown)}")
    try:
        d = int(fields.get("d", "1"))
        shape = tuple(int(s) for s in fields["shape"].split("x")) if "shape" in fields else None
        lo, hi = float(fields.get("lo", 0.0)), float(fields.get("hi", 1.0))
    except ValueError as exc:
        raise UsageError(f"bad --uniform value: {exc}") from None
    if d < 1:
        raise UsageError("d must be >= 1")
    if shape is None:
        shape = (1000,) if d == 1 else (100,) * d
    if len(shape) == 1 and d > 1:
        shape = shape * d
    if len(shape) != d or min(shape) < 1:
        raise UsageError(f"shape {shape} does not match d={d}")
    if not hi > lo:
        raise UsageError("need lo < hi")
    return uniform_density(BoxDomain((lo,) * d, (hi,) * d), shape)


def _grid(args) -> DensityGrid:
    if args.density and args.uniform:
        raise UsageError("give either --density or --uniform, not both")
    if args.density:
        return load_density(args.density)
    return parse_uniform(args.uniform or "d=1")


def _outdir(path) -> Path:
    out = Path(path)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _check_n(n: int) -> None:
    if n < 1:
        raise UsageError("--n must be >= 1")


def cmd_exact1d(n_max: int, out: Path) -> int:
    if n_max < 1:
        raise UsageError("--nmax must be >= 1")
    seq = exact1d.generate_sequence(n_max)
    exact1d.write_sequence_csv(seq, out / "sequence.csv")
    k = np.arange(1, n_max + 1)
    ratio = 4 * k * seq.s_float[:n_max]
    asymptotics.write_series_csv(out / "ratio.csv", {"n": k, "ratio": ratio})
    # Omega_j counts at the end of every batch
    with open(out / "omega_counts.csv", "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["k", "j", "count"])
        ends = sorted({min(b.k1, n_max) for b in seq.batches})
        for kk in ends:
            j_top = max(b.region for b in seq.batches if b.k0 <= kk) + 1
            for j in range(j_top + 1):
                w.writerow([kk, j, exact1d.count_points_in_omega(seq, kk, j)])
    asymptotics.write_line_plot(
        out / "ratio.svg", {"s_n / l_n": (k, ratio)}, title="s_n / l_n, uniform density on [0,1]",
        xlabel="n", ylabel="4 n s_n", logx=n_max >= 10,
    )
    return EXIT_OK


def _shortterm_1d(cfg: RunConfig) -> None:
    grid = cfg.grid
    if cfg.tie == "both":
        trajs = short1d.enumerate_branches(grid, cfg.n)
    else:
        trajs = [short1d.run_trajectory(grid, cfg.n, short1d.TieRule(cfg.tie))]
    short1d.write_trajectories_csv(trajs, cfg.out / "trajectory.csv")
    for t in trajs:
        name = "points.csv" if len(trajs) == 1 else f"points_{t.label}.csv"
        greedy_nd.write_points_csv(np.array(t.points)[:, None], cfg.out / name,
                                   comment=f"branch={t.label} cost={t.final_cost!r}")


def _shortterm_nd(cfg: RunConfig) -> None:
    state = greedy_nd.run(cfg.grid, cfg.n)
    pts = state.config.points
    d = cfg.grid.dim
    with open(cfg.out / "trajectory.csv", "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["step"] + [f"x{i + 1}" for i in range(d)] + ["cost"])
        for k, (p, c) in enumerate(zip(pts, state.cost_history), start=1):
            w.writerow([k] + [repr(float(v)) for v in p] + [repr(c)])
    greedy_nd.write_points_csv(pts, cfg.out / "points.csv", comment=f"cost={state.cost!r}")


def cmd_shortterm(cfg: RunConfig) -> int:
    _check_n(cfg.n)
    if cfg.grid.dim == 1:
        _shortterm_1d(cfg)
    else:
        if cfg.tie != "leftmost":
            raise UsageError("--tie applies to 1-D runs only (d >= 2 breaks ties lexicographically)")
        _shortterm_nd(cfg)
    return EXIT_OK


def _is_unit_uniform(grid: DensityGrid) -> bool:
    w = grid.weights
    return (grid.dim == 1 and grid.domain.lo[0] == 0.0 and grid.domain.hi[0] == 1.0
            and bool(np.allclose(w, w[0], rtol=1e-12, atol=0)))


def _solve_longterm(cfg: RunConfig) -> longterm.LongTermSolution:
    grid, n, method = cfg.grid, cfg.n, cfg.method
    if method == "auto":
        method = "dp" if grid.dim == 1 else "lloyd"
    if method == "closed":
        if not _is_unit_uniform(grid):
            raise UsageError("--method closed needs the uniform density on [0,1]")
        return longterm.solve_uniform_1d(n)
    if method == "dp":
        if grid.dim != 1:
            raise UsageError("--method dp is 1-D only")
        if n > grid.num_cells:
            raise UsageError(f"--n {n} exceeds the number of cells ({grid.num_cells})")
        return longterm.solve_dp_1d(grid, n)
    return longterm.solve_lloyd(grid, n, restarts=cfg.restarts, seed=cfg.seed)


def cmd_longterm(cfg: RunConfig) -> int:
    _check_n(cfg.n)
    if cfg.limit_cost and cfg.grid.dim not in longterm.THETA:
        raise UsageError(f"limit cost is unavailable in dimension {cfg.grid.dim} "
                         f"(known for d in {sorted(longterm.THETA)})")
    sol = _solve_longterm(cfg)
    if not math.isfinite(sol.cost):
        raise NumericFailure("solver returned a non-finite cost")
    lines = [f"method={sol.method.value}", f"n={cfg.n}", f"cost={sol.cost!r}"]
    if sol.exact_cost is not None:
        lines.append(f"exact_cost={sol.exact_cost}")
    if sol.method is longterm.Method.LLOYD:
        lines.append(f"restarts={sol.restarts} seed={cfg.seed}")
    if cfg.grid.dim in longterm.THETA:
        lines.append(f"limit_cost={longterm.limit_cost(cfg.grid, cfg.n)!r}")
    greedy_nd.write_points_csv(sol.points, cfg.out / "solution.csv", comment="\n".join(lines))
    return EXIT_OK


def cmd_compare(cfg: RunConfig) -> int:
    _check_n(cfg.n)
    grid, n = cfg.grid, cfg.n
    ks = np.arange(1, n + 1)
    if grid.dim == 1:
        s = np.array(short1d.run_trajectory(grid, n).costs)
        if n > grid.num_cells:
            raise UsageError(f"--n {n} exceeds the number of cells ({grid.num_cells})")
        dp = longterm.DP1D(grid, n)
        ref = np.array([dp.solve(k).cost for k in ks])
        ref_name = "l_n"
    elif grid.dim in longterm.THETA:
        s = np.array(greedy_nd.run(grid, n).cost_history)
        ref = np.array([longterm.limit_cost(grid, k) for k in ks])
        ref_name = "l_n_inf"
    else:
        raise UsageError(f"compare needs d <= 2 (got d={grid.dim})")
    if np.any(ref <= 0) or not np.all(np.isfinite(s)):
        raise NumericFailure("degenerate reference costs")
    ratio = s / ref
    asymptotics.write_series_csv(cfg.out / "compare.csv",
                                 {"n": ks, "s_n": s, ref_name: ref, "ratio": ratio})
    asymptotics.write_line_plot(
        cfg.out / "compare.svg", {f"s_n / {ref_name}": (ks, ratio)},
        title=f"short-term / long-term cost, d={grid.dim}", xlabel="n", ylabel="ratio",
    )
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="facloc", description=__doc__)
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, needs_n=True):
        src = sp.add_mutually_exclusive_group()
        src.add_argument("--density", metavar="PATH", help="density grid file")
        src.add_argument("--uniform", metavar="SPEC",
                         help="uniform density, e.g. d=2,shape=200x200 (optional lo=,hi=)")
        if needs_n:
            sp.add_argument("--n", type=int, required=True, help="number of points")
        sp.add_argument("--out", default=".", metavar="DIR", help="output directory")

    e = sub.add_parser("exact1d", help="exact myopic sequence for the uniform density on [0,1]")
    e.add_argument("--nmax", type=int, required=True)
    e.add_argument("--out", default=".", metavar="DIR")

    s = sub.add_parser("shortterm", help="myopic placement")
    common(s)
    s.add_argument("--tie", choices=["leftmost", "rightmost", "both"], default="leftmost")

    lt = sub.add_parser("longterm", help="batch placement")
    common(lt)
    lt.add_argument("--method", choices=["auto", "dp", "lloyd", "closed"], default="auto")
    lt.add_argument("--restarts", type=int, default=8)
    lt.add_argument("--seed", type=int, default=0)
    lt.add_argument("--limit-cost", action="store_true",
                    help="require the asymptotic reference cost (fails if unknown for d)")

    c = sub.add_parser("compare", help="short-term vs long-term cost ratio")
    common(c)
    return p


def run(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    cmd = Command(args.command)
    try:
        out = _outdir(args.out)
        if cmd is Command.EXACT1D:
            return cmd_exact1d(args.nmax, out)
        cfg = RunConfig(cmd, _grid(args), args.n, out=out,
                        tie=getattr(args, "tie", "leftmost"),
                        method=getattr(args, "method", "auto"),
                        restarts=getattr(args, "restarts", 8),
                        seed=getattr(args, "seed", 0),
                        limit_cost=getattr(args, "limit_cost", False))
        if cfg.restarts < 1:
            raise UsageError("--restarts must be >= 1")
        handler = {Command.SHORTTERM: cmd_shortterm, Command.LONGTERM: cmd_longterm,
                   Command.COMPARE: cmd_compare}[cmd]
        return handler(cfg)
    except (UsageError, longterm.UnsupportedDimensionError) as exc:
        print(f"facloc {cmd.value}: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (DensityFormatError, NegativeWeightError, EmptyDomainError, OSError) as exc:
        print(f"facloc {cmd.value}: input error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except (NumericFailure, FloatingPointError, ValueError) as exc:
        print(f"facloc {cmd.value}: numeric failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


def main(argv=None) -> None:
    sys.exit(run(argv))


if __name__ == "__main__":
    main()
