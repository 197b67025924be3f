"""Storage assignment and retrieval selection policies."""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np

from .layout import ZONE_CODE, Layout, Zone
from .model import ConfigError, Pallet, SkuClass


class PolicyKind(str, Enum):
    RANDOM = "Random"
    CLASS_DISTANCE = "ClassDistance"
    FLYING_V_RANDOM = "FlyingVRandom"
    FLYING_V_ABC = "FlyingVAbc"
    CPU_ZONE = "CpuZone"


COMPATIBLE = {
    PolicyKind.RANDOM: ("conventional", "current"),
    PolicyKind.CLASS_DISTANCE: ("conventional", "current"),
    PolicyKind.FLYING_V_RANDOM: ("flying_v",),
    PolicyKind.FLYING_V_ABC: ("flying_v",),
    PolicyKind.CPU_ZONE: ("cpu",),
}


def check_compatible(kind: PolicyKind, variant: str) -> None:
    if variant not in COMPATIBLE[PolicyKind(kind)]:
        raise ConfigError(f"policy {PolicyKind(kind).value} cannot run on a {variant} layout")


class StorageFull(RuntimeError):
    def __init__(self, sku_class, zone=None):
        self.sku_class = sku_class
        self.zone = zone
        super().__init__(f"no admissible slot for class {getattr(sku_class, 'value', sku_class)}"
                         + (f" (zone {zone} overflowed)" if zone else ""))


class StockOut(LookupError):
    def __init__(self, sku, blocked=()):
        self.sku = sku
        self.blocked = tuple(blocked)
        what = "only blocked rear positions" if self.blocked else "no stock"
        super().__init__(f"sku {sku}: {what}")


class InventoryState:
    """Slot occupancy plus the per-SKU index, kept mutually consistent.

    A slot is *admissible* for storage when it is empty, not promised to an
    inbound truck and, for a rear position, its front position is empty too.
    """

    def __init__(self, layout: Layout, n_skus: int):
        n = layout.n_slots
        self.partner = layout.slot_partner
        self.is_rear = layout.slot_depth == 1
        self.occ = np.full(n, -1, dtype=np.int64)
        self.slot_sku = np.full(n, -1, dtype=np.int64)
        self.collars = np.zeros(n, dtype=np.int64)
        self.incoming = np.zeros(n, dtype=bool)
        self.outgoing = np.zeros(n, dtype=bool)
        self.admissible = np.ones(n, dtype=bool)
        self.by_sku = [set() for _ in range(n_skus)]
        self.n_stored = 0

    # -- low-level state changes ------------------------------------------
    def _empty(self, s: int) -> bool:
        return self.occ[s] < 0 and not self.incoming[s]

    def _refresh(self, s: int) -> None:
        for t in (s, self.partner[s]):
            if t < 0:
                continue
            ok = self._empty(t)
            other = self.partner[t]
            if ok and other >= 0:
                if self.is_rear[t]:
                    ok = self._empty(other)
                else:
                    # do not wall in a rear pallet that a truck is on its way to fetch
                    ok = not self.outgoing[other]
            self.admissible[t] = ok

    def reserve_incoming(self, s: int) -> None:
        if not self._empty(s):
            raise ValueError(f"slot {s} is not free")
        self.incoming[s] = True
        self._refresh(s)

    def release_incoming(self, s: int) -> None:
        self.incoming[s] = False
        self._refresh(s)

    def store(self, s: int, pallet: Pallet) -> None:
        if self.occ[s] >= 0:
            raise ValueError(f"slot {s} already holds pallet {self.occ[s]}")
        self.incoming[s] = False
        self.occ[s] = pallet.id
        self.slot_sku[s] = pallet.sku
        self.collars[s] = pallet.collars
        self.by_sku[pallet.sku].add(s)
        self.n_stored += 1
        self._refresh(s)

    def reserve_outgoing(self, s: int) -> None:
        if self.occ[s] < 0 or self.outgoing[s]:
            raise ValueError(f"slot {s} holds no available pallet")
        self.outgoing[s] = True
        self.by_sku[self.slot_sku[s]].discard(s)
        self._refresh(s)

    def remove(self, s: int) -> int:
        pid = int(self.occ[s])
        if pid < 0:
            raise ValueError(f"slot {s} is empty")
        self.by_sku[self.slot_sku[s]].discard(s)
        self.occ[s] = -1
        self.slot_sku[s] = -1
        self.collars[s] = 0
        self.outgoing[s] = False
        self.n_stored -= 1
        self._refresh(s)
        return pid

    def unblocked(self, s: int) -> bool:
        """A stored pallet can be reached: front position, or rear with empty front."""
        if not self.is_rear[s]:
            return True
        front = self.partner[s]
        return front < 0 or self._empty(front)

    def check(self) -> None:
        """Raise AssertionError if occupancy and the SKU index disagree."""
        held = np.flatnonzero(self.occ >= 0)
        assert len(held) == self.n_stored
        assert len(set(self.occ[held].tolist())) == len(held), "pallet in two slots"
        indexed = set()
        for sku, slots in enumerate(self.by_sku):
            for s in slots:
                assert self.slot_sku[s] == sku and self.occ[s] >= 0 and not self.outgoing[s]
            indexed |= slots
        avail = {int(s) for s in held if not self.outgoing[s]}
        assert indexed == avail, "sku index out of sync with occupancy"


def distance_rank(layout: Layout, slot=None, vehicle=None):
    """How far a slot is from outbound staging.

    Nav distance in metres, or with ``vehicle`` the truck's travel time
    (turns included), which is what a dispatcher actually pays for. With
    ``slot=None`` the whole per-slot array is returned.
    """
    if vehicle is None:
        rank = layout.outbound_distance()
    else:
        rank = layout.costs(vehicle)[layout.outbound_staging][layout.slot_node]
    return rank if slot is None else float(rank[slot])


_CLASS_INDEX = {SkuClass.A: 0, SkuClass.B: 1, SkuClass.C: 2}


@dataclass(frozen=True)
class PolicyParams:
    p_zone_max_collars: int = 4
    class_band_shares: tuple = (0.20, 0.30, 0.50)

    def __post_init__(self):
        if not 1 <= self.p_zone_max_collars <= 6:
            raise ConfigError("p_zone_max_collars must lie in 1..6")
        shares = tuple(float(x) for x in self.class_band_shares)
        if len(shares) != 3 or min(shares) < 0 or abs(sum(shares) - 1) > 1e-9:
            raise ConfigError("class_band_shares must be three non-negative values summing to 1")
        object.__setattr__(self, "class_band_shares", shares)


class Slotter:
    """Precomputed slot preference orders for one (policy, layout) pair."""

    def __init__(self, kind: PolicyKind, layout: Layout, params: PolicyParams | None = None,
                 vehicle=None):
        self.kind = PolicyKind(kind)
        self.layout = layout
        self.params = params or PolicyParams()
        dist = distance_rank(layout, None, vehicle)
        ids = np.arange(layout.n_slots)
        level = layout.slot_level
        rear_first = 1 - layout.slot_depth
        self.by_distance = np.lexsort((ids, rear_first, level, dist))
        self.by_level = np.lexsort((ids, rear_first, dist, level))
        if vehicle is not None:
            # one-way access time: travel plus mast lift
            access = dist + 2 * level * (layout.spec.level_height / 1000.0) / vehicle.lift_speed
            self.by_access = np.lexsort((ids, rear_first, level, access))
        else:
            self.by_access = self.by_level
        self.orders = {}
        if self.kind in (PolicyKind.CLASS_DISTANCE, PolicyKind.FLYING_V_ABC):
            self._build_bands()
        elif self.kind is PolicyKind.CPU_ZONE:
            self._build_zones()

    def _build_bands(self):
        shares = np.asarray(self.params.class_band_shares, dtype=float)
        n = self.layout.n_slots
        cuts = np.round(np.cumsum(shares) * n).astype(int)
        a, b = self.by_distance[: cuts[0]], self.by_distance[cuts[0]: cuts[1]]
        c = self.by_distance[cuts[1]:]
        # own band first, then outward, then inward
        self.orders = {
            (SkuClass.A, False): np.concatenate([a, b, c]),
            (SkuClass.B, False): np.concatenate([b, c, a]),
            (SkuClass.C, False): np.concatenate([c, b, a]),
        }
        for cls in (SkuClass.A, SkuClass.B, SkuClass.C):
            self.orders[(cls, True)] = self.orders[(cls, False)]
        self.band_of = np.empty(n, dtype=np.int8)
        for k, band in enumerate((a, b, c)):
            self.band_of[band] = k

    def _build_zones(self):
        zone = self.layout.slot_zone
        level = self.layout.slot_level
        order = self.by_access

        def pick(mask):
            return order[mask[order]]

        p = pick(zone == ZONE_CODE[Zone.P])
        s = pick(zone == ZONE_CODE[Zone.S])
        e = pick(zone == ZONE_CODE[Zone.E])
        s_up = pick((zone == ZONE_CODE[Zone.S]) & (level > 0))
        not_p = pick(zone != ZONE_CODE[Zone.P])
        # overflow: P -> S, E -> S, S -> any
        self.orders = {
            (SkuClass.A, False): np.concatenate([p, s, order]),
            (SkuClass.A, True): np.concatenate([s_up, e, not_p]),
            (SkuClass.B, False): np.concatenate([s, order]),
            (SkuClass.B, True): np.concatenate([s_up, e, not_p]),
            (SkuClass.C, False): np.concatenate([e, s, order]),
            (SkuClass.C, True): np.concatenate([e, s_up, not_p]),
        }

    def assign(self, pallet: Pallet, inv: InventoryState, rng: np.random.Generator) -> int:
        ok = inv.admissible
        if pallet.collars > 1:
            ok = ok & (self.layout.slot_max_collars >= pallet.collars)
        if self.kind in (PolicyKind.RANDOM, PolicyKind.FLYING_V_RANDOM):
            free = np.flatnonzero(ok)
            if len(free) == 0:
                raise StorageFull(pallet.sku_class)
            return int(free[rng.integers(len(free))])
        tall = pallet.collars > self.params.p_zone_max_collars
        order = self.orders[(pallet.sku_class, tall)]
        hits = ok[order]
        i = int(hits.argmax())
        if not hits[i]:
            raise StorageFull(pallet.sku_class, self._home_zone(pallet.sku_class))
        return int(order[i])

    def _home_zone(self, cls):
        if self.kind is PolicyKind.CPU_ZONE:
            return {SkuClass.A: "P", SkuClass.B: "S", SkuClass.C: "E"}[cls]
        return None


_SLOTTERS: dict = {}


def assign_slot(policy, pallet: Pallet, inv: InventoryState, layout: Layout,
                rng: np.random.Generator, params: PolicyParams | None = None) -> int:
    """Choose a storage slot for ``pallet`` under ``policy``."""
    kind = PolicyKind(policy)
    key = (kind, id(layout), params)
    slotter = _SLOTTERS.get(key)
    if slotter is None or slotter.layout is not layout:
        slotter = Slotter(kind, layout, params)
        _SLOTTERS[key] = slotter
    return slotter.assign(pallet, inv, rng)


def select_pallet_for_line(sku: int, inv: InventoryState, layout: Layout, truck_node: int,
                           dist_row=None) -> int:
    """Nearest reachable stored pallet of ``sku`` from the truck's node.

    Raises StockOut when the SKU has no available pallet; when every pallet
    sits behind an occupied front position the exception lists those slots.
    """
    slots = inv.by_sku[sku]
    if not slots:
        raise StockOut(sku)
    cand = np.fromiter(slots, dtype=np.int64, count=len(slots))
    rear = inv.is_rear[cand]
    if rear.any():
        front = inv.partner[cand[rear]]
        free_front = (inv.occ[front] < 0) & ~inv.incoming[front]
        reach = np.ones(len(cand), dtype=bool)
        reach[np.flatnonzero(rear)] = free_front
        if not reach.any():
            raise StockOut(sku, blocked=sorted(cand.tolist()))
        cand = cand[reach]
    if len(cand) == 1:
        return int(cand[0])
    if dist_row is None:
        dist_row = layout.distances()[truck_node]
    d = dist_row[layout.slot_node[cand]]
    best = np.lexsort((cand, layout.slot_level[cand], d))[0]
    return int(cand[best])
