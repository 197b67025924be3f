"""Layout geometry: slots, zones, staging points, aisle graph and footprint.

All layouts share one rectangular grid generator. Picking aisles run along
y, starting at a bottom cross-aisle that carries the two staging points.
Every aisle is flanked by double-deep racks on both sides; rack positions
are split into ``lanes_per_bay`` pallet lanes per bay, each lane having its
own access node on the aisle centreline.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from enum import Enum
from typing import Optional

import numpy as np
import shapely
from shapely.geometry import LineString, Polygon, box
from shapely.ops import unary_union

from .model import ConfigError
from .routing import NavGraph, VehicleProfile, cost_table, distance_table


class Zone(str, Enum):
    P = "P"
    E = "E"
    S = "S"
    UNZONED = "Unzoned"


ZONE_CODE = {Zone.P: 0, Zone.E: 1, Zone.S: 2, Zone.UNZONED: 3}
ZONE_BY_CODE = {v: k for k, v in ZONE_CODE.items()}


@dataclass(frozen=True)
class LayoutSpec:
    """Rack and aisle dimensions in mm; counts are per layout."""

    aisle_width: float = 3200.0
    wide_aisle_width: float = 4000.0
    cross_aisle_width: float = 3200.0
    rack_depth: float = 1200.0
    bay_width: float = 2800.0
    lanes_per_bay: int = 2
    levels: int = 4
    level_height: float = 1500.0
    aisles: int = 9
    bays: int = 17
    top_cross_aisle: bool = True
    zone_fractions: tuple = (0.10, 0.60, 0.30)  # (P, E, S)
    diagonal_angle: float = 55.0
    target_slot_count: Optional[int] = None
    inbound_position: float = 0.25  # fraction of width, snapped to an aisle

    def __post_init__(self):
        for name in ("aisle_width", "wide_aisle_width", "cross_aisle_width", "rack_depth",
                     "bay_width", "level_height"):
            if not getattr(self, name) > 0:
                raise ConfigError(f"{name} must be positive")
        for name in ("lanes_per_bay", "levels", "aisles", "bays"):
            v = getattr(self, name)
            if int(v) != v or v < 1:
                raise ConfigError(f"{name} must be a positive integer, got {v!r}")
        zf = tuple(float(z) for z in self.zone_fractions)
        if len(zf) != 3 or any(z < 0 for z in zf) or abs(sum(zf) - 1.0) > 1e-9:
            raise ConfigError(f"zone_fractions must be three non-negative values summing to 1, got {zf}")
        object.__setattr__(self, "zone_fractions", zf)
        if self.target_slot_count is not None and self.target_slot_count < 1:
            raise ConfigError("target_slot_count must be positive")
        if not 0.0 <= self.inbound_position <= 1.0:
            raise ConfigError("inbound_position must lie in [0, 1]")

    @property
    def grid_slot_count(self) -> int:
        return self.aisles * self.bays * self.lanes_per_bay * 2 * 2 * self.levels

    @property
    def slot_target(self) -> int:
        return self.grid_slot_count if self.target_slot_count is None else int(self.target_slot_count)


@dataclass(frozen=True)
class Slot:
    id: int
    position: tuple  # pick face point (x mm, y mm) on the aisle edge
    level: int
    depth_index: int
    zone: Zone
    max_collars: int
    node: int


@dataclass(eq=False)
class Layout:
    """A built layout. Per-slot data is held column-wise in numpy arrays."""

    name: str
    variant: str
    spec: LayoutSpec
    nav: NavGraph
    inbound_staging: int
    outbound_staging: int
    slot_x: np.ndarray
    slot_y: np.ndarray
    slot_level: np.ndarray
    slot_depth: np.ndarray
    slot_zone: np.ndarray
    slot_node: np.ndarray
    slot_partner: np.ndarray  # front <-> rear slot at the same lane/side/level
    slot_max_collars: np.ndarray
    slot_rect: np.ndarray  # (n, 4) xmin, ymin, xmax, ymax of the pallet position
    aisle_rects: list
    extra_areas: list = field(default_factory=list)  # shapely polygons (V cross-aisle)
    zone_fractions: tuple = (1.0, 0.0, 0.0)
    diagonal_edges: np.ndarray = field(default_factory=lambda: np.zeros(0, dtype=bool))
    _dist: Optional[np.ndarray] = field(default=None, repr=False)
    _costs: dict = field(default_factory=dict, repr=False)

    @property
    def n_slots(self) -> int:
        return len(self.slot_x)

    @property
    def slots(self) -> list:
        return [self.slot(i) for i in range(self.n_slots)]

    def slot(self, i: int) -> Slot:
        return Slot(
            id=i,
            position=(float(self.slot_x[i]), float(self.slot_y[i])),
            level=int(self.slot_level[i]),
            depth_index=int(self.slot_depth[i]),
            zone=ZONE_BY_CODE[int(self.slot_zone[i])],
            max_collars=int(self.slot_max_collars[i]),
            node=int(self.slot_node[i]),
        )

    def zone_counts(self) -> dict:
        return {z: int(np.sum(self.slot_zone == c)) for z, c in ZONE_CODE.items()}

    @property
    def footprint(self) -> Polygon:
        rects = np.unique(np.round(self.slot_rect, 3), axis=0)
        parts = [box(*r) for r in rects] + [box(*r) for r in self.aisle_rects]
        parts += list(self.extra_areas)
        merged = unary_union(parts)
        if merged.is_empty:
            return Polygon()
        geoms = getattr(merged, "geoms", [merged])
        return unary_union([Polygon(g.exterior) for g in geoms])

    def distances(self) -> np.ndarray:
        """All-pairs node distances in metres (computed once)."""
        if self._dist is None:
            self._dist = distance_table(self.nav)
        return self._dist

    def costs(self, vehicle: VehicleProfile) -> np.ndarray:
        """All-pairs node travel times for ``vehicle`` (computed once per profile)."""
        if vehicle not in self._costs:
            self._costs[vehicle] = cost_table(self.nav, vehicle)
        return self._costs[vehicle]

    def outbound_distance(self) -> np.ndarray:
        """Per-slot nav distance (m) from the access node to outbound staging."""
        return self.distances()[self.outbound_staging][self.slot_node]


def compute_area(layout: Layout) -> float:
    """Footprint area in m^2 over racks and aisles, staging excluded."""
    return layout.footprint.area / 1e6


# -- grid generator -----------------------------------------------------------

def _aisle_positions(spec: LayoutSpec, widths):
    dd = 2 * spec.rack_depth
    x = dd  # left wall rack
    centres = []
    for a, w in enumerate(widths):
        centres.append(x + w / 2)
        x += w
        x += 2 * dd if a < len(widths) - 1 else dd
    return np.array(centres), x


class _GraphBuilder:
    def __init__(self):
        self.coords = []
        self.edges = []
        self.index = {}

    def node(self, x, y):
        key = (round(x, 6), round(y, 6))
        if key not in self.index:
            self.index[key] = len(self.coords)
            self.coords.append((x, y))
        return self.index[key]

    def chain(self, nodes, width, tag=0):
        for u, v in zip(nodes, nodes[1:]):
            if u != v:
                self.edges.append((u, v, width, tag))


def _build_grid(spec: LayoutSpec, name: str, variant: str, widths=None, bays=None,
                diagonal_angle=None):
    n = spec.aisles
    bays = spec.bays if bays is None else bays
    widths = [spec.aisle_width] * n if widths is None else list(widths)
    xs, width_total = _aisle_positions(spec, widths)
    c = spec.cross_aisle_width
    lane_w = spec.bay_width / spec.lanes_per_bay
    n_lanes = bays * spec.lanes_per_bay
    rack_len = bays * spec.bay_width
    y_bottom = c / 2
    y_top = c + rack_len + c / 2
    lane_y = c + (np.arange(n_lanes) + 0.5) * lane_w
    centre = n // 2
    x0 = xs[centre]
    inbound_aisle = int(np.argmin(np.abs(xs - spec.inbound_position * width_total)))

    g = _GraphBuilder()
    out_stage = g.node(x0, 0.0)
    in_stage = g.node(xs[inbound_aisle], 0.0)
    bottom = [g.node(x, y_bottom) for x in xs]
    g.chain(bottom, c)
    g.chain([out_stage, bottom[centre]], c)
    if inbound_aisle != centre:
        g.chain([in_stage, bottom[inbound_aisle]], c)
    top = [g.node(x, y_top) for x in xs] if spec.top_cross_aisle else None
    if top:
        g.chain(top, c)

    # Flying-V: diagonal cross-aisle from the outbound apex through each aisle
    extra_areas = []
    diag_points = {}
    if diagonal_angle is not None:
        tan = math.tan(math.radians(diagonal_angle)) if diagonal_angle < 90 else math.inf
        rack_top = c + rack_len
        for direction in (-1, 1):
            pts = [(x0, y_bottom)]
            a = centre + direction
            while 0 <= a < n:
                y = y_bottom + abs(xs[a] - x0) * tan
                if not y < rack_top - lane_w / 2:
                    break
                pts.append((xs[a], y))
                diag_points[a] = y
                a += direction
            if len(pts) > 1:
                extra_areas.append(LineString(pts).buffer(spec.aisle_width / 2, cap_style="flat"))

    lane_nodes = []
    for a, x in enumerate(xs):
        ys = list(lane_y)
        if a in diag_points:
            ys.append(diag_points[a])
        ys = sorted(set(ys))
        ids = [g.node(x, y) for y in ys]
        chain = [bottom[a]] + ids + ([top[a]] if top else [])
        g.chain(chain, widths[a])
        lane_nodes.append([g.node(x, y) for y in lane_y])
    for direction in (-1, 1):
        seq = [bottom[centre]]
        a = centre + direction
        while a in diag_points:
            seq.append(g.node(xs[a], diag_points[a]))
            a += direction
        g.chain(seq, spec.aisle_width, tag=1)

    # slots
    rd = spec.rack_depth
    rows = []
    for a, x in enumerate(xs):
        half = widths[a] / 2
        for j, y in enumerate(lane_y):
            node = lane_nodes[a][j]
            for side in (-1, 1):
                face = x + side * half
                for depth in (0, 1):
                    inner = face + side * depth * rd
                    outer = inner + side * rd
                    xmin, xmax = min(inner, outer), max(inner, outer)
                    for level in range(spec.levels):
                        rows.append((face, y, level, depth, node, xmin, y - lane_w / 2, xmax,
                                     y + lane_w / 2, a, j, side))
    arr = np.array(rows, dtype=float)

    aisle_rects = [(x - w / 2, c, x + w / 2, c + rack_len) for x, w in zip(xs, widths)]
    aisle_rects.append((0.0, 0.0, width_total, c))
    if top:
        aisle_rects.append((0.0, c + rack_len, width_total, c + rack_len + c))

    keep = np.ones(len(arr), dtype=bool)
    if extra_areas:
        boxes = shapely.box(arr[:, 5], arr[:, 6], arr[:, 7], arr[:, 8])
        for band in extra_areas:
            keep &= ~(shapely.area(shapely.intersection(boxes, band)) > 1.0)
        bounds = box(0, 0, width_total, aisle_rects[-1][3])
        extra_areas = [band.intersection(bounds) for band in extra_areas]

    edges = np.array([(u, v, w) for u, v, w, _ in g.edges], dtype=float)
    diag = np.array([t == 1 for *_, t in g.edges], dtype=bool)
    nav = NavGraph(np.array(g.coords), edges)
    return dict(arr=arr, keep=keep, nav=nav, in_stage=in_stage, out_stage=out_stage,
                aisle_rects=aisle_rects, extra_areas=extra_areas, diag=diag, xs=xs)


def _assemble(spec, name, variant, parts, keep, zone_codes=None, zone_fractions=(1.0, 0.0, 0.0)):
    arr = parts["arr"][keep]
    n = len(arr)
    # front/rear partner within the same (aisle, lane, side, level)
    key_to_idx = {}
    for i, r in enumerate(arr):
        key_to_idx[(int(r[9]), int(r[10]), int(r[11]), int(r[2]), int(r[3]))] = i
    partner = np.full(n, -1, dtype=np.int64)
    for (a, j, side, level, depth), i in key_to_idx.items():
        partner[i] = key_to_idx.get((a, j, side, level, 1 - depth), -1)
    # a rear position whose front was cut away faces the aisle directly
    depth = np.where(partner < 0, 0, arr[:, 3].astype(np.int64))
    zone = (np.full(n, ZONE_CODE[Zone.UNZONED], dtype=np.int8) if zone_codes is None
            else np.asarray(zone_codes, dtype=np.int8))
    slot_node = arr[:, 4].astype(np.int64)
    return Layout(
        name=name, variant=variant, spec=spec,
        nav=parts["nav"].with_slot_map(slot_node),
        inbound_staging=parts["in_stage"], outbound_staging=parts["out_stage"],
        slot_x=arr[:, 0].copy(), slot_y=arr[:, 1].copy(),
        slot_level=arr[:, 2].astype(np.int64), slot_depth=depth,
        slot_zone=zone, slot_node=slot_node, slot_partner=partner,
        slot_max_collars=_max_collars(spec, arr[:, 2]),
        slot_rect=arr[:, 5:9].copy(), aisle_rects=parts["aisle_rects"],
        extra_areas=parts["extra_areas"], zone_fractions=tuple(zone_fractions),
        diagonal_edges=parts["diag"],
    )


def _max_collars(spec: LayoutSpec, levels) -> np.ndarray:
    # 200 mm beam-and-clearance allowance per level; the top level is open
    clear = int((spec.level_height - 200) // 200)
    cap = np.full(len(levels), min(6, max(1, clear)), dtype=np.int64)
    cap[np.asarray(levels) == spec.levels - 1] = 6
    return cap


def _trim_to_target(parts, keep, target):
    """Drop the farthest surplus positions (highest y, then highest level)."""
    idx = np.flatnonzero(keep)
    surplus = len(idx) - target
    if surplus <= 0:
        return keep
    arr = parts["arr"]
    order = np.lexsort((-arr[idx, 2], -arr[idx, 1]))
    keep = keep.copy()
    keep[idx[order[:surplus]]] = False
    return keep


# -- public builders ----------------------------------------------------------

def build_conventional(spec: LayoutSpec, name: str = "conventional", variant: str = "conventional") -> Layout:
    """Straight parallel aisles, double-deep racks, no zoning."""
    target = spec.slot_target
    if spec.grid_slot_count < target:
        raise ConfigError(
            f"spec yields {spec.grid_slot_count} slots, fewer than target_slot_count {target}")
    parts = _build_grid(spec, name, variant)
    keep = _trim_to_target(parts, parts["keep"], target)
    layout = _assemble(spec, name, variant, parts, keep)
    _check_connected(layout)
    return layout


def build_flying_v(spec: LayoutSpec, name: str = "flying_v") -> Layout:
    """Conventional grid with a V-shaped cross-aisle rising from outbound staging.

    Slots cut by the diagonals are dropped and the aisles lengthened until the
    slot count is back at the target.
    """
    angle = spec.diagonal_angle
    if angle is None or not 0 < angle <= 90:
        raise ConfigError(f"diagonal_angle must lie in (0, 90] degrees, got {angle!r}")
    target = spec.slot_target
    bays = spec.bays
    for _ in range(10 * spec.bays + 50):
        parts = _build_grid(spec, name, "flying_v", bays=bays, diagonal_angle=angle)
        if parts["keep"].sum() >= target:
            break
        bays += 1
    else:
        raise ConfigError("could not restore the slot target after inserting the V cross-aisle")
    keep = _trim_to_target(parts, parts["keep"], target)
    layout = _assemble(replace(spec, bays=bays), name, "flying_v", parts, keep)
    _check_connected(layout)
    return layout


def _wide_aisle_order(n: int) -> list:
    centre = n // 2
    order = [centre]
    for k in range(1, n):
        for a in (centre - k, centre + k):
            if 0 <= a < n:
                order.append(a)
    return order


def build_cpu(spec: LayoutSpec, name: str = "cpu") -> Layout:
    """Zoned layout: P on the ground of widened centre aisles, S above, E beyond.

    P takes the ground positions nearest outbound staging along wide aisles.
    S takes the remaining wide-aisle positions (lowest level first) and, if
    that is not enough, the nearest narrow-aisle positions. E is the rest.
    """
    p_frac, e_frac, s_frac = spec.zone_fractions
    target = spec.slot_target
    if spec.grid_slot_count < target:
        raise ConfigError(
            f"spec yields {spec.grid_slot_count} slots, fewer than target_slot_count {target}")
    n_p = int(round(p_frac * target))
    n_s = int(round(s_frac * target))
    n_p = min(n_p, target)
    n_s = min(n_s, target - n_p)
    per_aisle_ground = spec.bays * spec.lanes_per_bay * 2 * 2
    if n_p > per_aisle_ground * spec.aisles:
        raise ConfigError(
            f"zone_fractions ask for {n_p} ground-level P slots but only "
            f"{per_aisle_ground * spec.aisles} ground positions exist")
    n_wide = 0 if n_p == 0 else math.ceil(n_p / per_aisle_ground)
    wide = set(_wide_aisle_order(spec.aisles)[:n_wide])
    widths = [spec.wide_aisle_width if a in wide else spec.aisle_width for a in range(spec.aisles)]

    parts = _build_grid(spec, name, "cpu", widths=widths)
    keep = _trim_to_target(parts, parts["keep"], target)
    if keep.sum() < target:
        raise ConfigError("geometry cannot hold target_slot_count")
    layout = _assemble(spec, name, "cpu", parts, keep, zone_fractions=spec.zone_fractions)

    dist = layout.outbound_distance()
    aisle = parts["arr"][keep][:, 9].astype(int)
    in_wide = np.isin(aisle, sorted(wide))
    level = layout.slot_level
    ids = np.arange(layout.n_slots)
    zone = np.full(layout.n_slots, ZONE_CODE[Zone.E], dtype=np.int8)

    ground = np.flatnonzero(in_wide & (level == 0))
    if n_p > len(ground):
        raise ConfigError(f"only {len(ground)} ground positions in wide aisles for {n_p} P slots")
    ground = ground[np.lexsort((ids[ground], layout.slot_depth[ground], dist[ground]))]
    zone[ground[:n_p]] = ZONE_CODE[Zone.P]

    rest_wide = np.flatnonzero(in_wide & (zone != ZONE_CODE[Zone.P]))
    rest_wide = rest_wide[np.lexsort((ids[rest_wide], dist[rest_wide], level[rest_wide]))]
    take = rest_wide[:n_s]
    zone[take] = ZONE_CODE[Zone.S]
    short = n_s - len(take)
    if short > 0:
        narrow = np.flatnonzero(~in_wide)
        narrow = narrow[np.lexsort((ids[narrow], level[narrow], dist[narrow]))]
        zone[narrow[:short]] = ZONE_CODE[Zone.S]
    layout.slot_zone = zone
    _check_connected(layout)
    return layout


def build_layout(variant: str, spec: LayoutSpec, name: Optional[str] = None) -> Layout:
    name = name or variant
    if variant in ("conventional", "current"):
        return build_conventional(spec, name=name, variant=variant)
    if variant == "flying_v":
        return build_flying_v(spec, name=name)
    if variant == "cpu":
        return build_cpu(spec, name=name)
    raise ConfigError(f"unknown layout variant {variant!r}")


def _check_connected(layout: Layout) -> None:
    d = layout.distances()
    need = np.unique(np.r_[layout.slot_node, layout.inbound_staging])
    if not np.all(np.isfinite(d[layout.outbound_staging, need])):
        raise ConfigError(f"layout {layout.name!r}: navigation graph is disconnected")
