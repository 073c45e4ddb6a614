"""SVG renders of base maps, density heat layers, overlays and the category graph."""

from __future__ import annotations

from collections.abc import Mapping, Sequence
from pathlib import Path

import numpy as np
import svgwrite

from .categraph import CategoryGraph
from .overlay import OverlaySpec
from .vosmap import Clustering, DensityField, MapLayout

CANVAS_SIZE = 800
MARGIN = 40

HEATMAP_COLORS = [
    "#ddffff",
    "#afffff",
    "#aaf191",
    "#80d385",
    "#ffff8c",
    "#f9d057",
    "#f29e2e",
    "#e76818",
    "#ff6161",
    "#ff0000",
]

CLUSTER_COLORS = [
    "#1f77b4",
    "#d62728",
    "#2ca02c",
    "#9467bd",
    "#ff7f0e",
    "#17becf",
    "#8c564b",
    "#e377c2",
    "#bcbd22",
    "#7f7f7f",
]

MUTED_COLOR = "#d0d0d0"
HIGHLIGHT_COLOR = "#d62728"


class _Viewport:
    """Maps layout coordinates onto the canvas, y axis pointing up."""

    def __init__(self, bbox: tuple[float, float, float, float], size: int = CANVAS_SIZE):
        xmin, xmax, ymin, ymax = bbox
        self.xmin, self.ymin = xmin, ymin
        span = max(xmax - xmin, ymax - ymin, 1e-12)
        self.scale = (size - 2 * MARGIN) / span
        self.height = size

    def point(self, x: float, y: float) -> tuple[float, float]:
        px = MARGIN + (x - self.xmin) * self.scale
        py = self.height - MARGIN - (y - self.ymin) * self.scale
        return round(px, 3), round(py, 3)

    @classmethod
    def around(cls, positions: np.ndarray) -> _Viewport:
        if len(positions) == 0:
            return cls((0.0, 1.0, 0.0, 1.0))
        return cls(
            (
                float(positions[:, 0].min()),
                float(positions[:, 0].max()),
                float(positions[:, 1].min()),
                float(positions[:, 1].max()),
            )
        )


def _drawing(path: Path) -> svgwrite.Drawing:
    path.parent.mkdir(parents=True, exist_ok=True)
    return svgwrite.Drawing(str(path), size=(CANVAS_SIZE, CANVAS_SIZE), profile="full")


def _radius(weight: float, largest: float, lo: float = 2.0, hi: float = 14.0) -> float:
    if largest <= 0:
        return lo
    return round(lo + (hi - lo) * np.sqrt(weight / largest), 3)


def _heat_group(density: DensityField, view: _Viewport) -> svgwrite.container.Group:
    group = svgwrite.container.Group(opacity=0.6)
    peak = float(density.values.max())
    if peak <= 0:
        return group
    xs, ys = density.cell_centers()
    dx, dy = density.cell_size
    levels = len(HEATMAP_COLORS)
    for row, cy in enumerate(ys):
        for col, cx in enumerate(xs):
            value = float(density.values[row, col])
            bucket = min(int(value / peak * levels), levels - 1)
            if value / peak < 0.01:
                continue
            x0, y0 = view.point(cx - dx / 2, cy + dy / 2)
            x1, y1 = view.point(cx + dx / 2, cy - dy / 2)
            group.add(
                svgwrite.shapes.Rect(
                    insert=(x0, y0),
                    size=(round(x1 - x0, 3), round(y1 - y0, 3)),
                    fill=HEATMAP_COLORS[bucket],
                )
            )
    return group


def render_density(density: DensityField, path: Path) -> Path:
    xmin, xmax, ymin, ymax = density.bbox
    drawing = _drawing(path)
    drawing.add(_heat_group(density, _Viewport((xmin, xmax, ymin, ymax))))
    drawing.save()
    return path


def render_map(
    layout: MapLayout,
    clustering: Clustering | None,
    weights: Sequence[float],
    path: Path,
    density: DensityField | None = None,
    show_labels: bool = False,
) -> Path:
    """Nodes sized by weight and colored by cluster, over an optional heat layer."""
    drawing = _drawing(path)
    if density is not None:
        view = _Viewport(density.bbox)
        drawing.add(_heat_group(density, view))
    else:
        view = _Viewport.around(layout.positions)

    clusters = clustering.as_dict() if clustering is not None else {}
    largest = max(weights, default=0.0)
    nodes = drawing.add(drawing.g(id="nodes"))
    for (x, y), node, weight in zip(layout.positions, layout.node_ids, weights):
        cid = clusters.get(node, 0)
        color = CLUSTER_COLORS[(cid - 1) % len(CLUSTER_COLORS)] if cid else MUTED_COLOR
        circle = drawing.circle(
            center=view.point(x, y), r=_radius(weight, largest), fill=color, fill_opacity=0.8
        )
        circle.set_desc(title=node)
        nodes.add(circle)
        if show_labels:
            cx, cy = view.point(x, y)
            nodes.add(drawing.text(node, insert=(cx + 4, cy - 4), font_size=9))
    drawing.save()
    return path


def render_overlay(overlay: OverlaySpec, weights: Sequence[float], path: Path) -> Path:
    """Base nodes muted, subset nodes highlighted and drawn on top."""
    base = overlay.base
    view = _Viewport.around(base.positions)
    drawing = _drawing(path)
    largest = max(weights, default=0.0)

    muted = drawing.add(drawing.g(id="base", fill=MUTED_COLOR, fill_opacity=0.5))
    highlighted = drawing.add(drawing.g(id="subset", fill=HIGHLIGHT_COLOR, fill_opacity=0.9))
    for (x, y), node, weight in zip(base.positions, base.node_ids, weights):
        if node in overlay.subset:
            continue
        muted.add(drawing.circle(center=view.point(x, y), r=_radius(weight, largest)))
    for (x, y), node, weight in zip(base.positions, base.node_ids, weights):
        if node not in overlay.subset:
            continue
        scale = overlay.highlight.get(node, 1.0)
        circle = drawing.circle(center=view.point(x, y), r=_radius(weight * scale, largest))
        circle.set_desc(title=node)
        highlighted.add(circle)
    drawing.save()
    return path


def render_categraph(
    graph: CategoryGraph,
    layout: MapLayout,
    path: Path,
    colors: Mapping[str, str] | None = None,
) -> Path:
    """Edges weighted by co-assignment count, nodes sized by category size."""
    colors = colors or {}
    view = _Viewport.around(layout.positions)
    drawing = _drawing(path)
    index = layout.index()

    edges = graph.edges()
    heaviest = max((w for _, _, w in edges), default=1)
    edge_group = drawing.add(drawing.g(id="edges", stroke="#999999", stroke_opacity=0.6))
    for a, b, weight in edges:
        edge_group.add(
            drawing.line(
                start=view.point(*layout.positions[index[a]]),
                end=view.point(*layout.positions[index[b]]),
                stroke_width=round(0.5 + 4.5 * weight / heaviest, 3),
            )
        )

    largest = max((graph.node_weight(c) for c in graph.categories), default=0)
    node_group = drawing.add(drawing.g(id="categories"))
    for i, category in enumerate(layout.node_ids):
        x, y = layout.positions[i]
        fill = colors.get(category, CLUSTER_COLORS[i % len(CLUSTER_COLORS)])
        center = view.point(x, y)
        node_group.add(
            drawing.circle(
                center=center,
                r=_radius(graph.node_weight(category), largest, lo=6.0, hi=30.0),
                fill=fill,
                fill_opacity=0.85,
            )
        )
        node_group.add(drawing.text(category, insert=(center[0] + 8, center[1]), font_size=12))
    drawing.save()
    return path
