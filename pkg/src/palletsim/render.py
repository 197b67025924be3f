"""Plan-view SVG of a layout: racks, aisles, zones and staging points."""

from __future__ import annotations

import xml.etree.ElementTree as ET
from pathlib import Path

import numpy as np

from .layout import ZONE_CODE, Layout, Zone

ZONE_FILL = {
    ZONE_CODE[Zone.P]: "#1f5fbf",  # blue
    ZONE_CODE[Zone.E]: "#f08c1a",  # orange
    ZONE_CODE[Zone.S]: "#f2d22e",  # yellow
    ZONE_CODE[Zone.UNZONED]: "#8c8c8c",
}
AISLE_FILL = "#eeeeee"
INBOUND_FILL = "#2e9e44"
OUTBOUND_FILL = "#c0392b"
MM_PER_PX = 100.0


def _poly_points(coords, to_px) -> str:
    return " ".join(f"{x:.1f},{y:.1f}" for x, y in (to_px(*c) for c in coords))


def layout_svg(layout: Layout, title: str | None = None) -> ET.Element:
    """Build the SVG tree.

    Every pallet position is drawn once and split into one strip per level,
    each strip filled with that level's zone colour, so upper-level zones
    stay visible in plan view.
    """
    xs = [layout.slot_rect[:, 0].min(), layout.slot_rect[:, 2].max()]
    ys = [layout.slot_rect[:, 1].min(), layout.slot_rect[:, 3].max()]
    for r in layout.aisle_rects:
        xs += [r[0], r[2]]
        ys += [r[1], r[3]]
    x0, x1 = min(xs), max(xs)
    y0, y1 = min(ys), max(ys)
    pad = 2000.0
    width = (x1 - x0 + 2 * pad) / MM_PER_PX
    height = (y1 - y0 + 2 * pad) / MM_PER_PX

    def to_px(x, y):
        return (x - x0 + pad) / MM_PER_PX, (y1 - y + pad) / MM_PER_PX

    svg = ET.Element("svg", xmlns="http://www.w3.org/2000/svg", version="1.1",
                     width=f"{width:.1f}", height=f"{height:.1f}",
                     viewBox=f"0 0 {width:.1f} {height:.1f}")
    ET.SubElement(svg, "title").text = title or f"{layout.name} ({layout.variant})"

    aisles = ET.SubElement(svg, "g", id="aisles", fill=AISLE_FILL)
    for r in layout.aisle_rects:
        px, py = to_px(r[0], r[3])
        ET.SubElement(aisles, "rect", x=f"{px:.1f}", y=f"{py:.1f}",
                      width=f"{(r[2] - r[0]) / MM_PER_PX:.1f}",
                      height=f"{(r[3] - r[1]) / MM_PER_PX:.1f}")
    for poly in layout.extra_areas:
        for g in getattr(poly, "geoms", [poly]):
            ET.SubElement(aisles, "polygon", points=_poly_points(g.exterior.coords, to_px))

    racks = ET.SubElement(svg, "g", id="racks", stroke="#333333")
    racks.set("stroke-width", "0.3")
    rect = np.round(layout.slot_rect, 3)
    _, first, inverse = np.unique(rect, axis=0, return_index=True, return_inverse=True)
    inverse = inverse.ravel()
    for pos, s0 in enumerate(first):
        members = np.flatnonzero(inverse == pos)
        members = members[np.argsort(layout.slot_level[members], kind="stable")]
        xa, ya, xb, yb = rect[s0]
        n = len(members)
        for k, s in enumerate(members):
            fill = ZONE_FILL[int(layout.slot_zone[s])]
            if (xb - xa) >= (yb - ya):
                sx0, sx1, sy0, sy1 = xa + (xb - xa) * k / n, xa + (xb - xa) * (k + 1) / n, ya, yb
            else:
                sx0, sx1, sy0, sy1 = xa, xb, ya + (yb - ya) * k / n, ya + (yb - ya) * (k + 1) / n
            px, py = to_px(sx0, sy1)
            ET.SubElement(racks, "rect", x=f"{px:.2f}", y=f"{py:.2f}",
                          width=f"{(sx1 - sx0) / MM_PER_PX:.2f}",
                          height=f"{(sy1 - sy0) / MM_PER_PX:.2f}", fill=fill)

    marks = ET.SubElement(svg, "g", id="staging")
    size = 12.0
    for node, fill, label in ((layout.inbound_staging, INBOUND_FILL, "inbound"),
                              (layout.outbound_staging, OUTBOUND_FILL, "outbound")):
        cx, cy = to_px(*layout.nav.coords[node])
        pts = f"{cx:.1f},{cy - size:.1f} {cx - size:.1f},{cy + size * 0.6:.1f} {cx + size:.1f},{cy + size * 0.6:.1f}"
        tri = ET.SubElement(marks, "polygon", points=pts, fill=fill)
        tri.set("class", f"staging {label}")
        ET.SubElement(tri, "title").text = f"{label} staging"
    return svg


def render_layout(target, out_path) -> Path:
    """Write an SVG for a Scenario or a built Layout."""
    layout = target if isinstance(target, Layout) else target.build_layout()
    title = None if isinstance(target, Layout) else f"{target.name}: {layout.variant}, {target.policy.value}"
    tree = ET.ElementTree(layout_svg(layout, title))
    ET.indent(tree)
    out_path = Path(out_path)
    try:
        tree.write(out_path, encoding="utf-8", xml_declaration=True)
    except OSError as exc:
        raise OSError(f"cannot write SVG {out_path}: {exc.strerror or exc}") from exc
    return out_path
