"""Sorted horizontal bar charts as SVG documents and fixed-width text."""

from __future__ import annotations

import math
from dataclasses import dataclass
from xml.sax.saxutils import escape, quoteattr

import numpy as np

from .ranking import importance_order

TEXT_BAR_WIDTH = 40
_LABEL_W = 170
_VALUE_W = 70
_PAD = 12
_TITLE_H = 28


@dataclass(frozen=True)
class ChartSpec:
    title: str = ""
    width_px: int = 800
    bar_height_px: int = 24
    show_values: bool = True
    panel_grid: tuple[int, int] | None = None  # (rows, cols)

    def __post_init__(self):
        if self.width_px <= 0 or self.bar_height_px <= 0:
            raise ValueError("chart dimensions must be positive")
        if self.panel_grid is not None and min(self.panel_grid) <= 0:
            raise ValueError("panel grid dimensions must be positive")


def _num(v: float) -> str:
    return f"{v:.2f}"


def _check(report):
    if report is None or len(report.final) == 0:
        raise ValueError("cannot render an empty report")


def _chart_height(n_features: int, spec: ChartSpec) -> int:
    return _TITLE_H + n_features * spec.bar_height_px + 2 * _PAD


def _chart_body(report, spec: ChartSpec, title: str) -> list[str]:
    scores = np.asarray(report.final, dtype=float)
    order = importance_order(scores)
    width = spec.width_px
    plot_w = max(10.0, width - _LABEL_W - _VALUE_W - 2 * _PAD)
    pos = max(0.0, float(scores.max()))
    neg = max(0.0, float(-scores.min()))
    span = pos + neg
    x0 = _PAD + _LABEL_W + (plot_w * neg / span if span > 0 else 0.0)
    scale = plot_w / span if span > 0 else 0.0
    top = _TITLE_H + _PAD
    bh = spec.bar_height_px
    out = [f'<text x="{_num(width / 2)}" y="{_num(_TITLE_H - 8)}" text-anchor="middle" '
           f'font-family="sans-serif" font-size="14" font-weight="bold">{escape(title)}</text>']
    for row, j in enumerate(order):
        s = float(scores[j])
        y = top + row * bh
        length = abs(s) * scale
        x = x0 if s >= 0 else x0 - length
        fill = "#3b6ea8" if s >= 0 else "#c0504d"
        out.append(f'<text x="{_num(_PAD + _LABEL_W - 6)}" y="{_num(y + bh * 0.65)}" '
                   f'text-anchor="end" font-family="sans-serif" font-size="11">'
                   f'{escape(str(report.feature_labels[j]))}</text>')
        out.append(f'<rect x="{_num(x)}" y="{_num(y + bh * 0.15)}" width="{_num(length)}" '
                   f'height="{_num(bh * 0.7)}" fill="{fill}" data-feature={quoteattr(str(report.feature_labels[j]))}/>')
        if spec.show_values:
            vx = max(x0, x + length) + 4
            out.append(f'<text x="{_num(vx)}" y="{_num(y + bh * 0.65)}" font-family="monospace" '
                       f'font-size="10">{s:.4f}</text>')
    bottom = top + len(order) * bh
    out.append(f'<line x1="{_num(x0)}" y1="{_num(top)}" x2="{_num(x0)}" y2="{_num(bottom)}" '
               f'stroke="#333" stroke-width="1"/>')
    return out


def _document(width, height, body: list[str]) -> str:
    head = (f'<?xml version="1.0" encoding="UTF-8"?>\n'
            f'<svg xmlns="http://www.w3.org/2000/svg" version="1.1" '
            f'width="{width}" height="{height}" viewBox="0 0 {width} {height}">')
    return "\n".join([head, *body, "</svg>"]) + "\n"


def render_bar_chart(report, spec: ChartSpec = ChartSpec()) -> str:
    """One bar per feature, largest final score on top, negatives left of zero."""
    _check(report)
    title = spec.title or report.model_descriptor or "Feature importance"
    height = _chart_height(len(report.final), spec)
    return _document(spec.width_px, height, _chart_body(report, spec, title))


def grid_shape(n: int, spec: ChartSpec = ChartSpec()) -> tuple[int, int]:
    """``(rows, cols)``; automatic layout uses ``ceil(sqrt(n))`` columns."""
    if spec.panel_grid is not None:
        rows, cols = spec.panel_grid
        if rows * cols < n:
            raise ValueError(f"panel grid {rows}x{cols} cannot hold {n} panels")
        return rows, cols
    cols = math.ceil(math.sqrt(n))
    return math.ceil(n / cols), cols


def render_multipanel(reports, spec: ChartSpec = ChartSpec()) -> str:
    reports = list(reports)
    if not reports:
        raise ValueError("no reports to render")
    for r in reports:
        _check(r)
    rows, cols = grid_shape(len(reports), spec)
    panel_w = spec.width_px
    panel_h = max(_chart_height(len(r.final), spec) for r in reports)
    width, height = cols * panel_w, rows * panel_h + (_TITLE_H if spec.title else 0)
    body = []
    y_off = 0
    if spec.title:
        body.append(f'<text x="{_num(width / 2)}" y="{_num(_TITLE_H - 6)}" text-anchor="middle" '
                    f'font-family="sans-serif" font-size="16" font-weight="bold">{escape(spec.title)}</text>')
        y_off = _TITLE_H
    panel_spec = ChartSpec(width_px=panel_w, bar_height_px=spec.bar_height_px,
                           show_values=spec.show_values)
    for i, r in enumerate(reports):
        row, col = divmod(i, cols)
        body.append(f'<svg x="{col * panel_w}" y="{y_off + row * panel_h}" width="{panel_w}" '
                    f'height="{panel_h}" id="panel-{row}-{col}" class="panel">')
        body.extend(_chart_body(r, panel_spec, r.model_descriptor or f"panel {i}"))
        body.append("</svg>")
    return _document(width, height, body)


def render_text_chart(report) -> str:
    """Rows of ``label |bar  value``; the largest magnitude spans 40 cells."""
    _check(report)
    scores = np.asarray(report.final, dtype=float)
    labels = [str(l) for l in report.feature_labels]
    lw = max(len(l) for l in labels)
    peak = float(np.abs(scores).max())
    lines = []
    for j in importance_order(scores):
        cells = int(round(TEXT_BAR_WIDTH * abs(scores[j]) / peak)) if peak > 0 else 0
        lines.append(f"{labels[j]:<{lw}}  |{'█' * cells:<{TEXT_BAR_WIDTH}}  {scores[j]:.4f}")
    return "\n".join(lines) + "\n"
