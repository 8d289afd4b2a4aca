import xml.etree.ElementTree as ET

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from hqml_explain.figures import importance_figure
from hqml_explain.qmedley import ExplainerConfig, ImportanceReport
from hqml_explain.ranking import importance_order
from hqml_explain.viz import (ChartSpec, grid_shape, render_bar_chart, render_multipanel,
                              render_text_chart)

SVG = "{http://www.w3.org/2000/svg}"


def report(scores, labels=None, descriptor="QDT (amplitude, 3 qubits)"):
    scores = np.asarray(scores, dtype=float)
    labels = labels or [f"f{i}" for i in range(len(scores))]
    return ImportanceReport(labels, 1.0, scores, scores, (0.5, 0.5), scores, ExplainerConfig(),
                            descriptor)


def bar_labels(svg):
    root = ET.fromstring(svg.encode())
    return [r.get("data-feature") for r in root.iter(f"{SVG}rect")]


def test_bar_order_descending():
    assert bar_labels(render_bar_chart(report([0.1, 0.5, 0.3], ["a", "b", "c"]))) == ["b", "c", "a"]


def test_ties_keep_feature_order():
    assert bar_labels(render_bar_chart(report([0.2, 0.2, 0.2], ["x", "y", "z"]))) == ["x", "y", "z"]


def test_negative_bars_left_of_zero():
    root = ET.fromstring(render_bar_chart(report([0.4, -0.2])).encode())
    rects = list(root.iter(f"{SVG}rect"))
    zero = float(next(root.iter(f"{SVG}line")).get("x1"))
    assert float(rects[0].get("x")) == pytest.approx(zero)
    neg = rects[1]
    assert float(neg.get("x")) + float(neg.get("width")) == pytest.approx(zero, abs=0.01)


def test_escaping_and_title():
    svg = render_bar_chart(report([0.1, 0.2], ["a<b", "c&d"]), ChartSpec(title="T & U"))
    root = ET.fromstring(svg.encode())
    assert "T & U" in [t.text for t in root.iter(f"{SVG}text")]
    assert sorted(bar_labels(svg)) == ["a<b", "c&d"]


@settings(max_examples=50, deadline=None)
@given(arrays(float, st.integers(1, 20), elements=st.floats(-5, 5, allow_nan=False)))
def test_any_report_renders_well_formed(scores):
    svg = render_bar_chart(report(scores))
    labels = bar_labels(svg)
    assert len(labels) == len(scores)
    assert labels == [f"f{j}" for j in importance_order(scores)]


def test_all_zero_scores_render():
    svg = render_bar_chart(report([0.0, 0.0]))
    assert len(bar_labels(svg)) == 2


def test_empty_report_rejected():
    with pytest.raises(ValueError, match="empty"):
        render_bar_chart(report([]))
    with pytest.raises(ValueError):
        render_multipanel([])


def test_grid_shapes():
    assert grid_shape(10) == (3, 4)
    assert grid_shape(4) == (2, 2)
    assert grid_shape(1) == (1, 1)
    assert grid_shape(5, ChartSpec(panel_grid=(1, 5))) == (1, 5)
    with pytest.raises(ValueError, match="cannot hold"):
        grid_shape(5, ChartSpec(panel_grid=(2, 2)))


def test_multipanel_layout():
    reports = [report(np.arange(3) * (i + 1), descriptor=f"m{i}") for i in range(10)]
    root = ET.fromstring(render_multipanel(reports).encode())
    panels = [e for e in root.iter(f"{SVG}svg") if e.get("class") == "panel"]
    assert len(panels) == 10
    ids = {p.get("id") for p in panels}
    assert "panel-2-1" in ids and "panel-0-3" in ids and "panel-2-2" not in ids


def test_text_chart_rows():
    text = render_text_chart(report([0.1, -0.4, 0.2], ["aa", "b", "ccc"]))
    lines = text.splitlines()
    assert [l.split()[0] for l in lines] == ["ccc", "aa", "b"]
    assert lines[0] == "ccc  |" + "█" * 20 + " " * 20 + "  0.2000"
    assert lines[2].count("█") == 40 and lines[2].endswith("-0.4000")


def test_matplotlib_figure_written(tmp_path):
    path = tmp_path / "fig.png"
    importance_figure([report([0.3, 0.1]), report([0.2, 0.5])], path, "two")
    assert path.read_bytes()[:8] == b"\x89PNG\r\n\x1a\n"
