import csv
import subprocess
import sys

import numpy as np
import pytest

from facloc.cli import run
from facloc.measure import format_density

from conftest import two_block_grid


def read_rows(path):
    with open(path) as fh:
        return list(csv.reader(line for line in fh if not line.startswith("#")))


@pytest.fixture(scope="module")
def two_block_file(tmp_path_factory):
    g = two_block_grid()
    p = tmp_path_factory.mktemp("dens") / "two_block.txt"
    p.write_text(format_density(g, values=g.density))
    return p


def test_exact1d_outputs(tmp_path):
    assert run(["exact1d", "--nmax", "10", "--out", str(tmp_path)]) == 0
    rows = read_rows(tmp_path / "sequence.csv")
    assert rows[3][:3] == ["3", "1", "12"]
    for name in ("ratio.csv", "omega_counts.csv", "ratio.svg"):
        assert (tmp_path / name).stat().st_size > 0


def test_exact1d_single(tmp_path):
    assert run(["exact1d", "--nmax", "1", "--out", str(tmp_path)]) == 0
    rows = read_rows(tmp_path / "sequence.csv")
    assert len(rows) == 2 and rows[1][:3] == ["1", "1", "4"]


def test_exact1d_zero_is_usage_error(tmp_path, capsys):
    assert run(["exact1d", "--nmax", "0", "--out", str(tmp_path)]) == 2
    assert "nmax" in capsys.readouterr().err


def test_shortterm_square(tmp_path):
    assert run(["shortterm", "--uniform", "d=2,shape=200x200", "--n", "9",
                "--out", str(tmp_path)]) == 0
    rows = read_rows(tmp_path / "points.csv")
    assert rows[0] == ["x1", "x2"] and len(rows) == 10
    assert len(read_rows(tmp_path / "trajectory.csv")) == 10


def test_shortterm_two_branches(tmp_path, two_block_file):
    assert run(["shortterm", "--density", str(two_block_file), "--n", "2", "--tie", "both",
                "--out", str(tmp_path)]) == 0
    rows = read_rows(tmp_path / "trajectory.csv")[1:]
    finals = sorted(float(r[2]) for r in rows if r[0] == "2")
    assert finals == pytest.approx([0.5, 0.625], rel=0.01)
    assert len(list(tmp_path.glob("points_*.csv"))) == 2


def test_shortterm_single_point(tmp_path):
    assert run(["shortterm", "--uniform", "d=1,shape=2000", "--n", "1", "--out", str(tmp_path)]) == 0
    x = float(read_rows(tmp_path / "points.csv")[1][0])
    assert x == pytest.approx(0.5, abs=1 / 2000)


def test_shortterm_deterministic(tmp_path, two_block_file):
    outs = []
    for i in range(2):
        d = tmp_path / str(i)
        assert run(["shortterm", "--density", str(two_block_file), "--n", "5",
                    "--out", str(d)]) == 0
        outs.append((d / "trajectory.csv").read_bytes())
    assert outs[0] == outs[1]


def test_longterm_dp(tmp_path):
    assert run(["longterm", "--uniform", "d=1,shape=1000", "--n", "4", "--method", "dp",
                "--out", str(tmp_path)]) == 0
    text = (tmp_path / "solution.csv").read_text()
    cost = float(text.split("cost=")[1].split()[0])
    assert cost == pytest.approx(1 / 16, abs=2e-3)
    assert "limit_cost=0.0625" in text
    assert len(read_rows(tmp_path / "solution.csv")) == 5


def test_longterm_closed(tmp_path):
    assert run(["longterm", "--uniform", "d=1", "--n", "4", "--method", "closed",
                "--out", str(tmp_path)]) == 0
    assert "exact_cost=1/16" in (tmp_path / "solution.csv").read_text()


def test_longterm_lloyd_reproducible(tmp_path):
    args = ["longterm", "--uniform", "d=2,shape=100x100", "--n", "100", "--method", "lloyd",
            "--restarts", "8", "--seed", "7"]
    assert run(args + ["--out", str(tmp_path / "a")]) == 0
    assert run(args + ["--out", str(tmp_path / "b")]) == 0
    a = (tmp_path / "a" / "solution.csv").read_bytes()
    assert a == (tmp_path / "b" / "solution.csv").read_bytes()
    assert len(read_rows(tmp_path / "a" / "solution.csv")) == 101


def test_longterm_unsupported_dimension(tmp_path, capsys):
    code = run(["longterm", "--uniform", "d=3,shape=6", "--n", "2", "--limit-cost",
                "--out", str(tmp_path)])
    assert code == 2
    assert "dimension 3" in capsys.readouterr().err


def test_longterm_too_many_points(tmp_path):
    assert run(["longterm", "--uniform", "d=1,shape=10", "--n", "11", "--method", "dp",
                "--out", str(tmp_path)]) == 2


def test_compare_line(tmp_path):
    assert run(["compare", "--uniform", "d=1,shape=2000", "--n", "100", "--out", str(tmp_path)]) == 0
    rows = read_rows(tmp_path / "compare.csv")
    assert rows[0] == ["n", "s_n", "l_n", "ratio"]
    ratio = np.array([float(r[3]) for r in rows[1:]])
    assert len(ratio) == 100
    assert np.all(ratio >= 1 - 1e-9)
    assert ratio[0] == pytest.approx(1.0, abs=1e-9)
    assert (tmp_path / "compare.svg").exists()


def test_compare_square(tmp_path):
    assert run(["compare", "--uniform", "d=2,shape=100x100", "--n", "200",
                "--out", str(tmp_path)]) == 0
    rows = read_rows(tmp_path / "compare.csv")
    assert rows[0] == ["n", "s_n", "l_n_inf", "ratio"]
    ratio = np.array([float(r[3]) for r in rows[1:]])
    assert np.all((ratio > 1.0) & (ratio < 1.3))
    assert np.all(np.abs(ratio[100:] - 1.05) < 0.05)


def test_input_errors(tmp_path):
    assert run(["shortterm", "--density", str(tmp_path / "none.txt"), "--n", "2",
                "--out", str(tmp_path)]) == 3
    bad = tmp_path / "bad.txt"
    bad.write_text("1 3\n0 1\n1 2\n")
    assert run(["shortterm", "--density", str(bad), "--n", "2", "--out", str(tmp_path)]) == 3
    neg = tmp_path / "neg.txt"
    neg.write_text("1 3\n0 1\n1 -2 1\n")
    assert run(["shortterm", "--density", str(neg), "--n", "2", "--out", str(tmp_path)]) == 3


def test_usage_errors(tmp_path):
    assert run(["shortterm", "--uniform", "d=1,shape=10x10", "--n", "2",
                "--out", str(tmp_path)]) == 2
    assert run(["shortterm", "--uniform", "d=1", "--n", "0", "--out", str(tmp_path)]) == 2
    assert run(["shortterm", "--uniform", "shape=abc", "--n", "1", "--out", str(tmp_path)]) == 2
    with pytest.raises(SystemExit) as exc:
        run(["shortterm", "--uniform", "d=1"])
    assert exc.value.code == 2


def test_module_entry_point(tmp_path):
    r = subprocess.run([sys.executable, "-m", "facloc", "exact1d", "--nmax", "3",
                        "--out", str(tmp_path)], capture_output=True, text=True)
    assert r.returncode == 0
    assert (tmp_path / "sequence.csv").exists()
