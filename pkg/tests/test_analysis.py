import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from bagforest.analysis import (
    correlation,
    kde_1d,
    kde_2d,
    kde_evaluate,
    quadrant_table,
    scatter_export,
    svg_heatmap,
    write_correlation_csv,
    write_kde_csv,
    write_quadrant_json,
)
from bagforest.data import DataError, Dataset
from oracles import kde2_direct, kde_direct, pearson


def _ds(**cols):
    labels = cols.pop("label")
    names = tuple(cols)
    return Dataset(names, np.column_stack([cols[n] for n in names]), labels)


def test_correlation_examples():
    d = _ds(x=[1, 2, 3, 4], y=[1, 3, 2, 4], z=[-1, -2, -3, -4], label=[0, 1, 0, 1])
    c = correlation(d, ["x", "y", "z"])
    assert c.values[0, 0] == 1.0
    assert c.values[0, 1] == pytest.approx(0.8, abs=1e-12)
    assert c.values[0, 2] == pytest.approx(-1.0, abs=1e-12)
    assert np.allclose(c.values, c.values.T, atol=1e-12)


def test_correlation_constant_column_flagged():
    d = _ds(x=[1, 2, 3], k=[5, 5, 5], label=[0, 1, 0])
    c = correlation(d)
    assert c.undefined == ("k",)
    assert c.values[1].tolist() == [0.0, 0.0]


def test_correlation_unknown_column():
    d = _ds(x=[1, 2], label=[0, 1])
    with pytest.raises(DataError, match="unknown column"):
        correlation(d, ["x", "nope"])


@settings(max_examples=50, deadline=None)
@given(
    x=arrays(float, 12, elements=st.floats(-100, 100)),
    y=arrays(float, 12, elements=st.floats(-100, 100)),
    a=st.floats(0.1, 50) | st.floats(-50, -0.1),
    b=st.floats(-100, 100),
)
def test_correlation_affine_invariance(x, y, a, b):
    if np.ptp(x) < 1e-3 or np.ptp(y) < 1e-3:
        return
    base = correlation(_ds(x=x, y=y, label=[0] * 12)).values[0, 1]
    moved = correlation(_ds(x=a * x + b, y=y, label=[0] * 12)).values[0, 1]
    assert moved == pytest.approx(np.sign(a) * base, abs=1e-9)
    assert base == pytest.approx(pearson(x.tolist(), y.tolist()), abs=1e-9)


def test_kde_1d_symmetric():
    g = kde_1d([-2.0, 2.0], grid_size=101)
    assert np.allclose(g.density, g.density[::-1], atol=1e-9)
    assert abs(g.mass() - 1) < 1e-3


def test_kde_1d_direct_sum_probe():
    data = [0.3, -1.2, 2.5, 0.0, 1.1]
    assert kde_evaluate([0.0], data, [1.0])[0] == pytest.approx(kde_direct(0.0, data, 1.0), abs=1e-12)
    g = kde_1d(data, bandwidth=1.0, grid_size=57)
    for x, v in zip(g.axes[0][::7], g.density[::7]):
        assert v == pytest.approx(kde_direct(x, data, 1.0), abs=1e-9)


def test_kde_1d_identical_values():
    with pytest.raises(DataError, match="identical"):
        kde_1d([3.0, 3.0, 3.0])


def test_kde_1d_by_label():
    vals = np.r_[np.linspace(0, 1, 10), np.linspace(5, 7, 8)]
    grids = kde_1d(vals, by_label=[0] * 10 + [1] * 8)
    assert set(grids) == {0, 1}
    assert all(abs(g.mass() - 1) < 1e-3 for g in grids.values())
    assert grids[1].axes[0][0] > grids[0].axes[0][0]


def test_kde_2d_single_point_peak():
    g = kde_2d([1.5], [-2.0], grid_size=41, bandwidths=(0.5, 0.5))
    i, j = np.unravel_index(np.argmax(g.density), g.density.shape)
    assert g.axes[0][j] == pytest.approx(1.5)
    assert g.axes[1][i] == pytest.approx(-2.0)


def test_kde_2d_probe_and_mass():
    xs, ys = [0.0, 1.0, -0.5], [0.2, -1.0, 0.7]
    g = kde_2d(xs, ys, bandwidths=(1.0, 1.0), grid_size=60)
    i, j = 17, 33
    want = kde2_direct(g.axes[0][j], g.axes[1][i], xs, ys, 1.0, 1.0)
    assert g.density[i, j] == pytest.approx(want, abs=1e-9)
    assert abs(g.mass() - 1) < 1e-3
    assert (g.density >= 0).all()


def test_kde_2d_scott_bandwidths():
    rng = np.random.default_rng(0)
    x, y = rng.normal(size=64), 3 * rng.normal(size=64)
    g = kde_2d(x, y)
    assert g.bandwidths[0] == pytest.approx(np.std(x, ddof=1) * 64 ** (-1 / 6))
    assert g.bandwidths[1] == pytest.approx(np.std(y, ddof=1) * 64 ** (-1 / 6))
    assert g.density.shape == (100, 100)


def test_quadrant_single_quadrant():
    d = _ds(a=[1, 1, 1], b=[0, 0, 0], label=[1, 0, 1])
    q = quadrant_table(d, "a", "b")
    assert q.counts.sum() == 3
    assert q.empty.tolist() == [[True, True], [False, True]]
    assert q.positive_rate[1, 0] == pytest.approx(2 / 3)
    assert np.isnan(q.positive_rate[0, 0])


def test_quadrant_even_spread():
    a = [0, 0, 0, 0, 1, 1, 1, 1]
    b = [0, 0, 1, 1, 0, 0, 1, 1]
    q = quadrant_table(_ds(a=a, b=b, label=[0, 1] * 4), "a", "b")
    assert (q.positive_rate == 0.5).all()


def test_quadrant_rejects_non_binary():
    with pytest.raises(DataError, match="not binary"):
        quadrant_table(_ds(a=[0, 2], b=[0, 1], label=[0, 1]), "a", "b")


def test_quadrant_json(tmp_path):
    q = quadrant_table(_ds(a=[1, 0, 1], b=[0, 0, 1], label=[1, 0, 0]), "a", "b")
    write_quadrant_json(q, tmp_path / "q.json")
    doc = json.loads((tmp_path / "q.json").read_text())
    assert doc["n_rows"] == 3
    assert sum(r["label_0"] + r["label_1"] for r in doc["quadrants"]) == 3
    assert [r["empty"] for r in doc["quadrants"]] == [False, True, False, False]


def test_scatter_export():
    d = _ds(x=[3.0, 1.0], y=[2.0, 5.0], label=[1, 0])
    assert scatter_export(d, "x", "y") == [(3.0, 2.0, 1), (1.0, 5.0, 0)]
    assert all(a == b for a, b, _ in scatter_export(d, "x", "x"))
    with pytest.raises(DataError):
        scatter_export(d, "x", "q")


def test_csv_writers(tmp_path):
    d = _ds(x=[1, 2, 3, 4], y=[1, 3, 2, 4], label=[0, 1, 0, 1])
    write_correlation_csv(correlation(d, ["x", "y"]), tmp_path / "c.csv")
    lines = (tmp_path / "c.csv").read_text().splitlines()
    assert lines[0] == ",x,y"
    assert len(lines) == 3
    write_kde_csv(kde_2d([0.0, 1.0], [0.0, 2.0], grid_size=10), tmp_path / "k.csv")
    rows = (tmp_path / "k.csv").read_text().splitlines()
    assert len(rows) == 11 and all(len(r.split(",")) == 11 for r in rows)


def test_svg_is_deterministic():
    m = np.arange(6.0).reshape(2, 3)
    assert svg_heatmap(m) == svg_heatmap(m.copy())
    assert svg_heatmap(m).count("<rect") == 6
