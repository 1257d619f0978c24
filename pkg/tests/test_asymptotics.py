import math
import xml.dom.minidom
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from facloc import exact1d
from facloc.asymptotics import (Region, check_recursive_bound, empirical_measure_histogram,
                                fit_exponent, generate_recursive, line_plot_svg, omega_regions,
                                ratio_series, recurrence_constant, rescaled_cost, series_report,
                                uniform_bins, write_series_csv)
from facloc.longterm import solve_uniform_1d
from facloc.measure import (BoxDomain, Configuration, EmptyConfigurationError, eval_F,
                            uniform_density)


def test_fit_exact_power_law():
    n = np.arange(1, 200)
    alpha, resid = fit_exponent(n, 1 / (4 * n))
    assert alpha == pytest.approx(1.0, abs=1e-12)
    assert resid < 1e-12


def test_fit_errors():
    with pytest.raises(ValueError):
        fit_exponent([1, 2, 3, 4], [1, 1, 1, 1])
    with pytest.raises(ValueError):
        fit_exponent([1, 2, 3, 4, 5], [1, 1, 0, 1, 1])


@settings(max_examples=50, deadline=None)
@given(scale=st.floats(1e-6, 1e6), alpha=st.floats(0.1, 3.0), seed=st.integers(0, 1000))
def test_fit_scale_invariant(scale, alpha, seed):
    rng = np.random.default_rng(seed)
    n = np.arange(5, 60)
    v = n ** -alpha * np.exp(0.05 * rng.standard_normal(n.size))
    a1, _ = fit_exponent(n, v)
    a2, _ = fit_exponent(n, scale * v)
    assert a1 == pytest.approx(a2, abs=1e-9)


def test_exact_sequence_exponent(seq_1e5):
    n = np.arange(10, 10**5 + 1)
    alpha, _ = fit_exponent(n, seq_1e5.s_float[9:])
    assert alpha == pytest.approx(1.0, abs=0.05)


def test_ratio_series(seq_1e5):
    rep = ratio_series(10**5, seq_1e5)
    assert rep.values[0] == 1.0
    assert np.all(rep.values >= 1.0 - 1e-15)
    assert rep.liminf > 1.0
    assert rep.amplitude == rep.limsup - rep.liminf >= 0
    assert math.isfinite(rep.alpha)
    with pytest.raises(ValueError):
        ratio_series(1)


def test_series_report_amplitude():
    n = np.arange(1, 101)
    rep = series_report(n, (1 + 0.1 * (n % 2)) / n, alpha=1.0)
    assert rep.amplitude == pytest.approx(0.1)


def test_recursive_examples():
    a = 1 / (4 * np.arange(1, 500))
    C = recurrence_constant(a, 1)
    assert C == pytest.approx(2.0)
    holds, B = check_recursive_bound(a, C, 1)
    assert holds and B == pytest.approx(max(0.25, 1 / C))
    holds, B = check_recursive_bound(np.full(20, 0.3), 1.0, 2)
    assert not holds
    with pytest.raises(ValueError):
        check_recursive_bound(a, 0.0, 1)


@settings(max_examples=200, deadline=None)
@given(u=st.floats(1e-3, 1.0), logC=st.floats(-3, 3), d=st.integers(1, 3))
def test_recursive_bound_property(u, logC, d):
    C = 10.0 ** logC
    a1 = u * (1 / (d * C)) ** (1 / d)
    a = generate_recursive(a1, C, d, 300)
    holds, B = check_recursive_bound(a, C, d)
    assert holds
    n = np.arange(1, a.size + 1)
    assert np.all(a <= B * n ** (-1 / d))


def test_rescaled_cost_examples():
    g = uniform_density(BoxDomain.unit(1), (24000,))
    for n in (1, 2, 5, 8):
        c = Configuration.from_points(g, solve_uniform_1d(n).points)
        assert rescaled_cost(g, c) == pytest.approx(0.25, abs=2 * n * g.cell_width)
        assert rescaled_cost(g, c) == n * eval_F(g, c)
    with pytest.raises(EmptyConfigurationError):
        rescaled_cost(g, Configuration.empty(g))


def test_histogram_single_point():
    out = empirical_measure_histogram([0.3], [Region.interval(0.0, 1.0)])
    assert out[0][1:] == (1, 1.0)


def test_histogram_overlap_rejected():
    with pytest.raises(ValueError):
        empirical_measure_histogram([0.3], [Region.interval(0.0, 0.5), Region.interval(0.4, 1.0)])


def test_histogram_omega_full_level(seq_small):
    regions = omega_regions(8)
    for b in seq_small.batches:
        if b.region == 0 and not b.code.is_external and b.k1 <= seq_small.n_max:
            k = b.k1
            hist = empirical_measure_histogram(seq_small.points(k), regions)
            count = hist[0][1]
            assert count == 2 ** (int(b.code.h) + 2)
            assert hist[0][2] == pytest.approx(count / k)
            assert count == exact1d.count_points_in_omega(seq_small, k, 0)


def test_histogram_midpoints_follow_lengths():
    pts = solve_uniform_1d(3 ** 7).points[:, 0]
    hist = empirical_measure_histogram(pts, omega_regions(3))
    for j, (_, _, frac) in enumerate(hist):
        assert frac == pytest.approx(2 / 3 ** (j + 1), abs=2 / 3 ** 7)


def test_uniform_bins_cover():
    pts = np.linspace(0, 1, 101)
    hist = empirical_measure_histogram(pts, uniform_bins(0.0, 1.0, 10))
    assert sum(c for _, c, _ in hist) == 101


def test_region_2d():
    r = Region((((0.0, 0.0), (0.5, 0.5)),))
    assert r.contains((0.25, 0.5)) and not r.contains((0.0, 0.25))


def test_svg_and_csv(tmp_path):
    n = np.arange(1, 50)
    svg = line_plot_svg({"a": (n, 1 / n), "b": (n, 2 / n)}, title="t", logx=True, logy=True)
    doc = xml.dom.minidom.parseString(svg)
    assert len(doc.getElementsByTagName("polyline")) == 2
    svg2 = line_plot_svg({"a": (n, n)}, title="t")
    assert svg2 == line_plot_svg({"a": (n, n)}, title="t")
    p = tmp_path / "s.csv"
    write_series_csv(p, {"n": n[:3], "v": (1 / n[:3]).tolist()})
    assert p.read_text().splitlines() == ["n,v", "1,1.0", "2,0.5", "3,0.3333333333333333"]
