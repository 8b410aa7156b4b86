"""Map projection, map-quality metrics and SVG scatter maps."""

from __future__ import annotations

import csv
import io
import math
import random
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional, Sequence
from xml.sax.saxutils import escape

import numpy as np

from .core import StaModel, best_matching_unit
from .data import Dataset
from .errors import InvalidArgumentError
from .serialize import model_fingerprint


@dataclass
class MapProjection:
    """Best-matching grid cell for every sample, in sample order."""

    rows: int
    cols: int
    sample: np.ndarray
    row: np.ndarray
    col: np.ndarray
    labels: Optional[np.ndarray] = None
    class_names: tuple[str, ...] = ()
    model_id: str = ""

    def __post_init__(self):
        self.sample = np.asarray(self.sample, dtype=np.int64)
        self.row = np.asarray(self.row, dtype=np.int64)
        self.col = np.asarray(self.col, dtype=np.int64)
        if not (self.sample.shape == self.row.shape == self.col.shape) or self.sample.ndim != 1:
            raise InvalidArgumentError("sample/row/col must be equal-length vectors")
        if self.row.size and (
            self.row.min() < 0 or self.row.max() >= self.rows or self.col.min() < 0 or self.col.max() >= self.cols
        ):
            raise InvalidArgumentError("projected coordinates fall outside the grid")
        if self.labels is not None:
            self.labels = np.asarray(self.labels, dtype=np.int64)
            if self.labels.shape != self.sample.shape:
                raise InvalidArgumentError("one label per record required")
        self.class_names = tuple(self.class_names)

    def __len__(self):
        return self.sample.size

    @property
    def coords(self) -> np.ndarray:
        return np.stack([self.row, self.col], axis=1)

    def cells(self) -> np.ndarray:
        return self.row * self.cols + self.col

    def subset(self, mask) -> "MapProjection":
        mask = np.asarray(mask)
        return MapProjection(
            self.rows,
            self.cols,
            self.sample[mask],
            self.row[mask],
            self.col[mask],
            None if self.labels is None else self.labels[mask],
            self.class_names,
            self.model_id,
        )

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["sample", "row", "col", "label"])
        for i in range(len(self)):
            label = ""
            if self.labels is not None:
                lab = int(self.labels[i])
                label = self.class_names[lab] if lab < len(self.class_names) else str(lab)
            writer.writerow([int(self.sample[i]), int(self.row[i]), int(self.col[i]), label])
        return buf.getvalue()

    def write_csv(self, path) -> Path:
        path = Path(path)
        path.write_text(self.to_csv(), encoding="utf-8")
        return path


def project(model: StaModel, dataset: Dataset) -> MapProjection:
    """Place every sample on its best-matching unit; labels are carried along, never consulted."""
    if dataset.d != model.input_dim:
        raise InvalidArgumentError(f"data has {dataset.d} features, model expects {model.input_dim}")
    wins = np.array([best_matching_unit(x, model) for x in dataset.X], dtype=np.int64)
    return MapProjection(
        rows=model.grid.rows,
        cols=model.grid.cols,
        sample=np.arange(dataset.n),
        row=wins // model.grid.cols,
        col=wins % model.grid.cols,
        labels=dataset.labels,
        class_names=dataset.class_names,
        model_id=model_fingerprint(model),
    )


def _require_labels(proj: MapProjection) -> np.ndarray:
    if proj.labels is None:
        raise InvalidArgumentError("metric needs a labelled projection")
    return proj.labels


def map_purity(proj: MapProjection) -> float:
    """Fraction of samples that carry the majority label of their grid cell."""
    labels = _require_labels(proj)
    n = len(proj)
    if n == 0:
        raise InvalidArgumentError("purity of an empty projection is undefined")
    C = int(labels.max()) + 1
    counts = np.zeros((proj.rows * proj.cols, C), dtype=np.int64)
    np.add.at(counts, (proj.cells(), labels), 1)
    return float(counts.max(axis=1).sum() / n)


def knn_map_accuracy(proj: MapProjection, k: int = 5) -> float:
    """Leave-one-out k-NN accuracy on grid coordinates.

    Equidistant neighbours are taken in sample order; a split vote goes to
    the smallest label index.
    """
    labels = _require_labels(proj)
    n = len(proj)
    if k < 1:
        raise InvalidArgumentError(f"k must be >= 1, got {k}")
    if n <= k:
        raise InvalidArgumentError(f"need more than k={k} samples, got {n}")
    c = proj.coords
    d2 = ((c[:, None, :] - c[None, :, :]) ** 2).sum(axis=2).astype(float)
    np.fill_diagonal(d2, np.inf)
    order = np.argsort(d2, axis=1, kind="stable")[:, :k]
    C = int(labels.max()) + 1
    votes = np.zeros((n, C), dtype=np.int64)
    np.add.at(votes, (np.repeat(np.arange(n), k), labels[order].ravel()), 1)
    return float(np.mean(votes.argmax(axis=1) == labels))


MARKERS = ("circle", "square", "diamond", "star", "triangle", "cross")
PALETTE = ("#d62728", "#1f77b4", "#2ca02c", "#000000", "#ff7f0e", "#9467bd", "#8c564b", "#17becf", "#e377c2", "#bcbd22")


@dataclass
class SvgStyle:
    cell: float = 24.0
    margin: float = 20.0
    marker_size: float = 4.0
    jitter: float = 0.3
    legend_width: float = 140.0
    title: str = ""
    markers: Sequence[str] = field(default=MARKERS)
    palette: Sequence[str] = field(default=PALETTE)


def _f(x: float) -> str:
    s = f"{x:.2f}".rstrip("0").rstrip(".")
    return "0" if s in ("-0", "") else s


def _points(pts) -> str:
    return " ".join(f"{_f(x)},{_f(y)}" for x, y in pts)


def _marker(shape: str, x: float, y: float, r: float, color: str, cls: str) -> str:
    paint = f'fill="{color}" class="{cls}"'
    if shape == "circle":
        return f'<circle cx="{_f(x)}" cy="{_f(y)}" r="{_f(r)}" {paint}/>'
    if shape == "square":
        s = 1.8 * r
        return f'<rect x="{_f(x - s / 2)}" y="{_f(y - s / 2)}" width="{_f(s)}" height="{_f(s)}" {paint}/>'
    if shape == "diamond":
        q = 1.3 * r
        pts = [(x, y - q), (x + q, y), (x, y + q), (x - q, y)]
    elif shape == "star":
        outer, inner = 1.4 * r, 0.6 * r
        pts = []
        for i in range(10):
            rad = outer if i % 2 == 0 else inner
            a = -math.pi / 2 + i * math.pi / 5
            pts.append((x + rad * math.cos(a), y + rad * math.sin(a)))
    elif shape == "triangle":
        q = 1.3 * r
        pts = [(x, y - q), (x + q, y + 0.8 * q), (x - q, y + 0.8 * q)]
    elif shape == "cross":
        a, b = 1.2 * r, 0.4 * r
        pts = [(x - b, y - a), (x + b, y - a), (x + b, y - b), (x + a, y - b), (x + a, y + b), (x + b, y + b),
               (x + b, y + a), (x - b, y + a), (x - b, y + b), (x - a, y + b), (x - a, y - b), (x - b, y - b)]
    else:
        raise InvalidArgumentError(f"unknown marker shape {shape!r}")
    return f'<polygon points="{_points(pts)}" {paint}/>'


def _jitter(index: int, radius: float) -> tuple[float, float]:
    r = random.Random(int(index))
    return r.uniform(-radius, radius), r.uniform(-radius, radius)


def class_style(label: int, style: SvgStyle) -> tuple[str, str]:
    return style.markers[label % len(style.markers)], style.palette[label % len(style.palette)]


def render_svg(proj: MapProjection, style: Optional[SvgStyle] = None) -> str:
    """Scatter map of the projection: one jittered marker per sample, a legend per class."""
    style = style or SvgStyle()
    cell, m = style.cell, style.margin
    top = m + (18.0 if style.title else 0.0)
    pw, ph = proj.cols * cell, proj.rows * cell
    n_legend = len(proj.class_names) if proj.labels is not None else 0
    width = 2 * m + pw + style.legend_width
    height = max(top + ph + m, top + 20.0 * n_legend + m)
    out = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{_f(width)}" height="{_f(height)}" '
        f'viewBox="0 0 {_f(width)} {_f(height)}">',
        f'<rect x="0" y="0" width="{_f(width)}" height="{_f(height)}" fill="#ffffff"/>',
    ]
    if style.title:
        out.append(f'<text x="{_f(m)}" y="{_f(m + 10)}" font-family="sans-serif" font-size="14">{escape(style.title)}</text>')
    lines = []
    for r in range(1, proj.rows):
        lines.append(f"M{_f(m)},{_f(top + r * cell)}H{_f(m + pw)}")
    for c in range(1, proj.cols):
        lines.append(f"M{_f(m + c * cell)},{_f(top)}V{_f(top + ph)}")
    out.append('<g class="plot-area">')
    out.append(f'<rect x="{_f(m)}" y="{_f(top)}" width="{_f(pw)}" height="{_f(ph)}" fill="none" stroke="#444444"/>')
    if lines:
        out.append(f'<path d="{"".join(lines)}" stroke="#e6e6e6" stroke-width="0.5" fill="none"/>')
    for i in range(len(proj)):
        jx, jy = _jitter(int(proj.sample[i]), style.jitter)
        x = m + (proj.col[i] + 0.5 + jx) * cell
        y = top + (proj.row[i] + 0.5 + jy) * cell
        if proj.labels is None:
            shape, color, cls = "circle", "#555555", "marker"
        else:
            lab = int(proj.labels[i])
            shape, color = class_style(lab, style)
            cls = f"marker c{lab}"
        out.append(_marker(shape, x, y, style.marker_size, color, cls))
    out.append("</g>")
    out.append('<g class="legend">')
    lx = 2 * m + pw
    for lab in range(n_legend):
        shape, color = class_style(lab, style)
        ly = top + 10 + 20 * lab
        out.append(_marker(shape, lx + 6, ly, style.marker_size, color, "legend-marker"))
        out.append(
            f'<text x="{_f(lx + 18)}" y="{_f(ly + 4)}" font-family="sans-serif" font-size="12" '
            f'class="legend-label">{escape(proj.class_names[lab])}</text>'
        )
    out.append("</g>")
    out.append("</svg>")
    return "\n".join(out) + "\n"


def write_svg(proj: MapProjection, path, style: Optional[SvgStyle] = None) -> Path:
    path = Path(path)
    path.write_text(render_svg(proj, style), encoding="utf-8")
    return path
