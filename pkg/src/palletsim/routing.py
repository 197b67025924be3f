"""Navigation graph, turn-aware shortest paths and the truck time model."""

from __future__ import annotations

import heapq
import math
from dataclasses import dataclass, field
from typing import Iterable, Optional, Sequence

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import dijkstra

TURN_THRESHOLD_DEG = 45.0


class Unreachable(RuntimeError):
    """No admissible path exists between the requested nodes."""


@dataclass(frozen=True)
class VehicleProfile:
    """Reach-truck kinematics. Speeds in m/s, times in s, widths in mm."""

    travel_speed: float = 1.2
    lift_speed: float = 0.25
    turn_penalty: float = 8.0
    min_aisle_width: float = 2800.0
    capacity_collar_units: int = 9
    handling_s: float = 20.0
    dock_handling_s: float = 53.0

    def __post_init__(self):
        for name in ("travel_speed", "lift_speed"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive")
        for name in ("turn_penalty", "handling_s", "dock_handling_s"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be non-negative")
        if self.capacity_collar_units < 1:
            raise ValueError("capacity_collar_units must be at least 1")


class NavGraph:
    """Undirected aisle graph with node coordinates in mm.

    ``edges`` rows are (u, v, width_mm); lengths are derived from the node
    coordinates so they always equal the Euclidean distance.
    """

    def __init__(self, coords, edges, slot_node=None):
        self.coords = np.asarray(coords, dtype=float).reshape(-1, 2)
        e = np.asarray(edges, dtype=float).reshape(-1, 3)
        self.edge_u = e[:, 0].astype(np.int64)
        self.edge_v = e[:, 1].astype(np.int64)
        self.edge_width = e[:, 2].copy()
        d = self.coords[self.edge_u] - self.coords[self.edge_v]
        self.edge_length = np.hypot(d[:, 0], d[:, 1])
        self.slot_node = (np.zeros(0, dtype=np.int64) if slot_node is None
                          else np.asarray(slot_node, dtype=np.int64))
        self._adj = None

    @property
    def n_nodes(self) -> int:
        return len(self.coords)

    @property
    def n_edges(self) -> int:
        return len(self.edge_u)

    def with_slot_map(self, slot_node) -> "NavGraph":
        g = NavGraph.__new__(NavGraph)
        g.__dict__.update(self.__dict__)
        g.slot_node = np.asarray(slot_node, dtype=np.int64)
        return g

    def adjacency(self, vehicle: Optional[VehicleProfile] = None) -> list:
        """Per-node list of (neighbour, length_mm) over admissible edges."""
        min_w = 0.0 if vehicle is None else vehicle.min_aisle_width
        adj = [[] for _ in range(self.n_nodes)]
        for u, v, w, length in zip(self.edge_u, self.edge_v, self.edge_width, self.edge_length):
            if w >= min_w:
                adj[u].append((int(v), float(length)))
                adj[v].append((int(u), float(length)))
        for row in adj:
            row.sort()
        return adj

    def without_edges(self, mask) -> "NavGraph":
        """Copy with the edges selected by boolean ``mask`` removed."""
        keep = ~np.asarray(mask, dtype=bool)
        edges = np.column_stack([self.edge_u[keep], self.edge_v[keep], self.edge_width[keep]])
        return NavGraph(self.coords, edges, self.slot_node)


def edge_seconds(length_mm: float, vehicle: VehicleProfile) -> float:
    return (length_mm / 1000.0) / vehicle.travel_speed


def is_turn(coords, a: int, b: int, c: int) -> bool:
    """True when travelling a->b->c changes heading by at least 45 degrees."""
    ax, ay = coords[b][0] - coords[a][0], coords[b][1] - coords[a][1]
    bx, by = coords[c][0] - coords[b][0], coords[c][1] - coords[b][1]
    na, nb = math.hypot(ax, ay), math.hypot(bx, by)
    if na == 0 or nb == 0:
        return False
    cos = (ax * bx + ay * by) / (na * nb)
    angle = math.degrees(math.acos(max(-1.0, min(1.0, cos))))
    return angle >= TURN_THRESHOLD_DEG - 1e-6


def _step_cost(coords, prev, u, v, length, vehicle) -> float:
    # one float per transition so the table builder sums identically
    pen = vehicle.turn_penalty if prev is not None and is_turn(coords, prev, u, v) else 0.0
    return edge_seconds(length, vehicle) + pen


@dataclass(frozen=True)
class Route:
    nodes: tuple
    length_mm: float
    turns: int
    seconds: float

    @property
    def length_m(self) -> float:
        return self.length_mm / 1000.0

    def concat(self, other: "Route", graph: NavGraph, vehicle: VehicleProfile) -> "Route":
        """Join two routes sharing an endpoint; a turn at the joint counts once."""
        if not self.nodes or len(self.nodes) == 1:
            return other
        if not other.nodes or len(other.nodes) == 1:
            return self
        if self.nodes[-1] != other.nodes[0]:
            raise ValueError("routes do not share the junction node")
        joint = 0
        if is_turn(graph.coords, self.nodes[-2], self.nodes[-1], other.nodes[1]):
            joint = 1
        return Route(
            nodes=self.nodes + other.nodes[1:],
            length_mm=self.length_mm + other.length_mm,
            turns=self.turns + other.turns + joint,
            seconds=self.seconds + other.seconds + joint * vehicle.turn_penalty,
        )


def route_from_nodes(graph: NavGraph, nodes: Sequence[int], vehicle: VehicleProfile) -> Route:
    """Measure an explicit node walk; consecutive nodes must share an edge."""
    nodes = tuple(int(n) for n in nodes)
    lengths = {}
    for u, v, length in zip(graph.edge_u, graph.edge_v, graph.edge_length):
        lengths[(int(u), int(v))] = lengths[(int(v), int(u))] = float(length)
    cost = 0.0
    total = 0.0
    turns = 0
    for i in range(1, len(nodes)):
        u, v = nodes[i - 1], nodes[i]
        if (u, v) not in lengths:
            raise ValueError(f"no edge between {u} and {v}")
        prev = nodes[i - 2] if i >= 2 else None
        if prev is not None and is_turn(graph.coords, prev, u, v):
            turns += 1
        cost = cost + _step_cost(graph.coords, prev, u, v, lengths[(u, v)], vehicle)
        total += lengths[(u, v)]
    return Route(nodes, total, turns, cost)


def shortest_path(graph: NavGraph, src: int, dst: int, vehicle: VehicleProfile) -> Route:
    """Minimum-time route from ``src`` to ``dst`` with turn penalties.

    Search runs over (node, previous node) states so a heading change can be
    charged. Among equal-cost routes the lexicographically smallest node
    sequence wins.
    """
    n = graph.n_nodes
    if not (0 <= src < n and 0 <= dst < n):
        raise IndexError(f"node out of range: {src}, {dst}")
    if src == dst:
        return Route((src,), 0.0, 0, 0.0)
    adj = graph.adjacency(vehicle)
    coords = graph.coords
    heap = [(0.0, (src,), None, 0.0, 0)]
    done = set()
    while heap:
        cost, path, prev, length, turns = heapq.heappop(heap)
        u = path[-1]
        if u == dst:
            return Route(path, length, turns, cost)
        state = (u, prev)
        if state in done:
            continue
        done.add(state)
        for v, elen in adj[u]:
            if (v, u) in done:
                continue
            turn = prev is not None and is_turn(coords, prev, u, v)
            step = _step_cost(coords, prev, u, v, elen, vehicle)
            heapq.heappush(heap, (cost + step, path + (v,), u, length + elen, turns + int(turn)))
    raise Unreachable(f"no admissible path from {src} to {dst}")


def travel_time(route: Route, vehicle: VehicleProfile, lift_levels: int,
                level_height_m: float = 1.5) -> float:
    """Seconds for one storage or retrieval move along ``route``."""
    if lift_levels < 0:
        raise ValueError("lift_levels must be non-negative")
    lift = 2.0 * lift_levels * level_height_m / vehicle.lift_speed
    return route.seconds + lift + vehicle.handling_s


def lift_seconds(level, vehicle: VehicleProfile, level_height_m: float = 1.5):
    """Fork travel up and back down for a slot at ``level`` (array-friendly)."""
    return 2.0 * np.asarray(level) * level_height_m / vehicle.lift_speed


# -- all-pairs tables used by the simulator ---------------------------------

def _arc_arrays(graph: NavGraph, vehicle: Optional[VehicleProfile]):
    min_w = 0.0 if vehicle is None else vehicle.min_aisle_width
    ok = graph.edge_width >= min_w
    u, v, length = graph.edge_u[ok], graph.edge_v[ok], graph.edge_length[ok]
    tail = np.concatenate([u, v])
    head = np.concatenate([v, u])
    alen = np.concatenate([length, length])
    return tail, head, alen


def distance_table(graph: NavGraph, vehicle: Optional[VehicleProfile] = None) -> np.ndarray:
    """All-pairs shortest path length in metres (no turn penalties)."""
    tail, head, alen = _arc_arrays(graph, vehicle)
    n = graph.n_nodes
    m = csr_matrix((alen / 1000.0, (tail, head)), shape=(n, n))
    return dijkstra(m, directed=True)


def cost_table(graph: NavGraph, vehicle: VehicleProfile, sources=None) -> np.ndarray:
    """All-pairs route time in seconds including turn penalties.

    Dijkstra runs on the arc graph: one state per directed arc, transitions
    charging the next arc's travel time plus a penalty when heading changes.
    Row ``i`` holds costs from ``sources[i]`` (all nodes by default).
    """
    tail, head, alen = _arc_arrays(graph, vehicle)
    n = graph.n_nodes
    k = len(tail)
    coords = graph.coords
    t = np.array([edge_seconds(x, vehicle) for x in alen])

    by_tail = [[] for _ in range(n)]
    for a in range(k):
        by_tail[tail[a]].append(a)
    rows, cols, vals = [], [], []
    for a in range(k):
        u, v = tail[a], head[a]
        for b in by_tail[v]:
            w = head[b]
            rows.append(n + a)
            cols.append(n + b)
            pen = vehicle.turn_penalty if is_turn(coords, u, v, w) else 0.0
            vals.append(t[b] + pen)
    for a in range(k):
        rows.append(tail[a])
        cols.append(n + a)
        vals.append(t[a])
    size = n + k
    m = csr_matrix((np.array(vals), (np.array(rows), np.array(cols))), shape=(size, size))
    src = np.arange(n) if sources is None else np.asarray(sources, dtype=np.int64)
    d = dijkstra(m, directed=True, indices=src)
    arc_d = d[:, n:]
    out = np.full((len(src), n), np.inf)
    if k:
        order = np.argsort(head, kind="stable")
        heads_sorted = head[order]
        starts = np.flatnonzero(np.r_[True, heads_sorted[1:] != heads_sorted[:-1]])
        mins = np.minimum.reduceat(arc_d[:, order], starts, axis=1)
        out[:, heads_sorted[starts]] = mins
    out[np.arange(len(src)), src] = 0.0
    return out


# -- task sequencing ----------------------------------------------------------

def sequence_inbound_tasks(pending: Iterable, layout) -> list:
    """Order (pallet, slot) tasks left to right by destination slot position."""
    xs, ys = layout.slot_x, layout.slot_y
    return sorted(pending, key=lambda task: (xs[task[1]], ys[task[1]], task[1]))


def next_outbound_target(remaining, truck_node: int, graph: NavGraph,
                         vehicle: VehicleProfile, costs: Optional[np.ndarray] = None) -> int:
    """Greedy nearest-neighbour: slot reachable soonest from the truck.

    ``costs`` may be a precomputed row of node costs from ``truck_node``.
    Ties go to the lower slot id.
    """
    remaining = sorted(int(s) for s in remaining)
    if not remaining:
        raise ValueError("no remaining targets")
    best, best_cost = None, math.inf
    for s in remaining:
        node = int(graph.slot_node[s])
        if costs is not None:
            c = float(costs[node])
        else:
            try:
                c = shortest_path(graph, truck_node, node, vehicle).seconds
            except Unreachable:
                c = math.inf
        if c < best_cost:
            best, best_cost = s, c
    if best is None:
        raise Unreachable("all remaining targets are unreachable")
    return best
