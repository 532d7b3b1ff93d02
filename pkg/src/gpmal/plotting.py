"""Standalone SVG scatter plots of 2-D embeddings, coloured by class.

Output is deterministic text so plots can be diffed and regression-tested.
A companion CSV of the raw (x, y, label) triples can be written alongside.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np

from .data import format_value

# Categorical palette, 20 entries; classes beyond that cycle with a warning.
PALETTE = (
    "#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd",
    "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf",
    "#aec7e8", "#ffbb78", "#98df8a", "#ff9896", "#c5b0d5",
    "#c49c94", "#f7b6d2", "#c7c7c7", "#dbdb8d", "#9edae5",
)

MIN_AXIS_SPAN = 1e-6


def class_color(class_id: int) -> str:
    return PALETTE[class_id % len(PALETTE)]


@dataclass(frozen=True)
class ScatterSpec:
    xs: tuple[float, ...]
    ys: tuple[float, ...]
    class_ids: tuple[int, ...]
    class_names: tuple[str, ...] = ()
    title: str = ""
    width: int = 640
    height: int = 480
    point_radius: float = 3.0
    margin: int = 40

    def validate(self) -> None:
        if not (len(self.xs) == len(self.ys) == len(self.class_ids)):
            raise ValueError("xs, ys and class_ids must have equal length")
        if not all(np.isfinite(self.xs)) or not all(np.isfinite(self.ys)):
            raise ValueError("non-finite point coordinate")


def scatter_from_embedding(embedding: np.ndarray, class_ids,
                           class_names=(), title: str = "") -> ScatterSpec:
    """Build a spec from an (n, t) embedding; only the first two dimensions
    are plotted when t > 2."""
    embedding = np.asarray(embedding, dtype=np.float64)
    if embedding.ndim != 2 or embedding.shape[1] < 2:
        raise ValueError("scatter plots need an embedding with at least 2 columns")
    if embedding.shape[1] > 2:
        warnings.warn(
            f"embedding has {embedding.shape[1]} dimensions; "
            "plotting the first two only"
        )
    return ScatterSpec(
        xs=tuple(float(v) for v in embedding[:, 0]),
        ys=tuple(float(v) for v in embedding[:, 1]),
        class_ids=tuple(int(c) for c in class_ids),
        class_names=tuple(class_names),
        title=title,
    )


def _axis_range(values) -> tuple[float, float]:
    lo, hi = min(values), max(values)
    span = hi - lo
    if span < MIN_AXIS_SPAN:
        mid = (lo + hi) / 2.0
        lo, hi = mid - MIN_AXIS_SPAN / 2.0, mid + MIN_AXIS_SPAN / 2.0
        span = MIN_AXIS_SPAN
    pad = 0.05 * span
    return lo - pad, hi + pad


def render_scatter(spec: ScatterSpec) -> str:
    """Produce an SVG 1.1 document with one circle per point and a class
    legend. Byte-identical output for identical input."""
    spec.validate()
    if len(set(spec.class_ids)) > len(PALETTE):
        warnings.warn(
            f"more than {len(PALETTE)} classes; palette colors will repeat"
        )
    x_lo, x_hi = _axis_range(spec.xs)
    y_lo, y_hi = _axis_range(spec.ys)
    m = spec.margin
    plot_w = spec.width - 2 * m
    plot_h = spec.height - 2 * m

    def px(x: float) -> float:
        return m + (x - x_lo) / (x_hi - x_lo) * plot_w

    def py(y: float) -> float:
        # SVG y grows downward
        return spec.height - m - (y - y_lo) / (y_hi - y_lo) * plot_h

    lines = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" version="1.1" '
        f'width="{spec.width}" height="{spec.height}" '
        f'viewBox="0 0 {spec.width} {spec.height}">',
        f'<rect width="{spec.width}" height="{spec.height}" fill="white"/>',
        f'<rect x="{m}" y="{m}" width="{plot_w}" height="{plot_h}" '
        'fill="none" stroke="#cccccc"/>',
    ]
    if spec.title:
        lines.append(
            f'<text x="{spec.width / 2:.1f}" y="{m / 2:.1f}" '
            'text-anchor="middle" font-family="sans-serif" font-size="14">'
            f"{_escape(spec.title)}</text>"
        )
    for x, y, cid in zip(spec.xs, spec.ys, spec.class_ids):
        lines.append(
            f'<circle cx="{px(x):.2f}" cy="{py(y):.2f}" '
            f'r="{spec.point_radius:g}" fill="{class_color(cid)}" '
            'fill-opacity="0.75"/>'
        )
    seen = sorted(set(spec.class_ids))
    for slot, cid in enumerate(seen):
        ly = m + 14 + slot * 16
        name = (
            spec.class_names[cid]
            if cid < len(spec.class_names)
            else str(cid)
        )
        lines.append(
            f'<rect x="{spec.width - m - 70}" y="{ly - 9}" width="10" '
            f'height="10" fill="{class_color(cid)}"/>'
        )
        lines.append(
            f'<text x="{spec.width - m - 56}" y="{ly}" '
            'font-family="sans-serif" font-size="11">'
            f"{_escape(name)}</text>"
        )
    lines.append("</svg>")
    return "\n".join(lines) + "\n"


def _escape(text: str) -> str:
    return (
        text.replace("&", "&amp;").replace("<", "&lt;").replace(">", "&gt;")
    )


def write_points_csv(spec: ScatterSpec, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("x,y,label\n")
        for x, y, cid in zip(spec.xs, spec.ys, spec.class_ids):
            name = (
                spec.class_names[cid]
                if cid < len(spec.class_names)
                else str(cid)
            )
            fh.write(f"{format_value(x)},{format_value(y)},{name}\n")
