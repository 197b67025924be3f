"""Warehouse behaviour: inbound arrivals and put-away, outbound waves and retrieval."""

from __future__ import annotations

import heapq
import math
from collections import deque
from dataclasses import dataclass, field
from itertools import islice
from typing import Callable, Iterator, Optional

import numpy as np

from .engine import EmptyWindow, EventKind, EventQueue, ReplicationPlan, RngStreams
from .layout import Layout
from .model import (
    CLASSES, EURO_FULL, EURO_HALF, ConfigError, Order, Pallet, SkuCatalog, draw_sku_class,
)
from .routing import VehicleProfile, lift_seconds, sequence_inbound_tasks
from .slotting import InventoryState, Slotter, StockOut, StorageFull


@dataclass(frozen=True)
class InboundConfig:
    sigma: float = 0.6
    mu: Optional[float] = None  # solved from daily_volume_target when omitted
    daily_volume_target: float = 2050.0
    truck_count: int = 10
    collar_probs: tuple = (1 / 6,) * 6
    euro_full_share: float = 0.7
    initial_stock: int = 2200
    lookahead: int = 8

    def __post_init__(self):
        if self.sigma < 0:
            raise ConfigError("inbound.sigma must be non-negative")
        if self.daily_volume_target <= 0 or self.truck_count < 1:
            raise ConfigError("inbound.daily_volume_target and inbound.truck_count must be positive")
        p = tuple(float(x) for x in self.collar_probs)
        if len(p) != 6 or any(x < 0 for x in p) or abs(sum(p) - 1) > 1e-9:
            raise ConfigError("inbound.collar_probs must be six probabilities summing to 1")
        object.__setattr__(self, "collar_probs", p)
        if not 0 <= self.euro_full_share <= 1:
            raise ConfigError("inbound.euro_full_share must lie in [0, 1]")
        if self.initial_stock < 0 or self.lookahead < 0:
            raise ConfigError("inbound.initial_stock and inbound.lookahead must be non-negative")

    def mu_for(self, day_length: float) -> float:
        if self.mu is not None:
            return float(self.mu)
        return math.log(day_length / self.daily_volume_target) - self.sigma ** 2 / 2

    def mean_gap(self, day_length: float) -> float:
        return math.exp(self.mu_for(day_length) + self.sigma ** 2 / 2)

    def validate(self, day_length: float) -> None:
        ratio = self.mean_gap(day_length) * self.daily_volume_target / day_length
        if abs(ratio - 1) > 0.05:
            raise ConfigError(
                f"inbound: mean interarrival x daily volume is {ratio:.3f} of day_length (limit 5%)")


@dataclass(frozen=True)
class OutboundConfig:
    takt: float = 1500.0
    skus_per_order: int = 8
    qty_mean: float = 6.67
    qty_sd: float = 1.2
    truck_count: int = 10
    proximity_s: float = 90.0

    def __post_init__(self):
        if self.takt <= 0:
            raise ConfigError("outbound.takt must be positive")
        if self.skus_per_order < 1 or self.truck_count < 1:
            raise ConfigError("outbound.skus_per_order and outbound.truck_count must be positive")
        if self.qty_sd < 0 or self.proximity_s < 0:
            raise ConfigError("outbound.qty_sd and outbound.proximity_s must be non-negative")


# -- generators ----------------------------------------------------------------

def _weighted_member(catalog: SkuCatalog, cls, rng) -> int:
    members = [s.id for s in catalog.skus if s.sku_class == cls]
    w = catalog.weights[members]
    return int(members[rng.choice(len(members), p=w / w.sum())])


def generate_arrivals(cfg: InboundConfig, streams: RngStreams, horizon: float,
                      catalog: SkuCatalog, day_length: float = 57_600.0,
                      choose_sku: Optional[Callable] = None, start_id: int = 0,
                      start_time: float = 0.0) -> Iterator[Pallet]:
    """Yield inbound pallets in time order until ``horizon``.

    Gaps are log-normal; class, collars and format each come from their own
    stream. ``choose_sku(cls)`` picks the SKU inside the class; by default a
    demand-weighted draw from the ``skus`` stream.
    """
    mu = cfg.mu_for(day_length)
    split = catalog.class_split
    probs = np.asarray(cfg.collar_probs)
    t = start_time
    pid = start_id
    block = 512  # draws are taken in blocks; each stream is consumed identically in any scenario
    while True:
        gaps = streams.arrivals.lognormal(mu, cfg.sigma, size=block).tolist()
        us = streams.classes.random(block).tolist()
        collars = (streams.collars.choice(6, size=block, p=probs) + 1).tolist()
        full = (streams.formats.random(block) < cfg.euro_full_share).tolist()
        for gap, u, c, f in zip(gaps, us, collars, full):
            t += gap
            if t >= horizon:
                return
            cls = draw_sku_class(u, split)
            sku = choose_sku(cls) if choose_sku else _weighted_member(catalog, cls, streams.skus)
            yield Pallet(pid, sku, cls, EURO_FULL if f else EURO_HALF, c, t)
            pid += 1


def _pps_sample(weights: np.ndarray, k: int, rng: np.random.Generator) -> np.ndarray:
    """k distinct items with inclusion probability k * weight (systematic PPS)."""
    n = len(weights)
    k = min(k, int(np.count_nonzero(weights)))
    incl = k * weights / weights.sum()
    if incl.max() > 1 + 1e-12:
        raise ConfigError("skus_per_order too large for the demand weights (inclusion > 1)")
    perm = rng.permutation(n)
    cum = np.cumsum(incl[perm])
    points = rng.random() + np.arange(k)
    idx = np.searchsorted(cum, points, side="right")
    return perm[np.minimum(idx, n - 1)]


def generate_wave(cfg: OutboundConfig, catalog: SkuCatalog, streams: RngStreams,
                  wave_index: int) -> Order:
    """One outbound order released at ``wave_index * takt``.

    SKUs are drawn without replacement with inclusion probability
    proportional to demand weight; quantities are normal, rounded, floored at 1.
    """
    if wave_index < 0:
        raise ValueError("wave_index must be non-negative")
    skus = _pps_sample(catalog.weights, cfg.skus_per_order, streams.order_skus)
    qty = streams.order_sizes.normal(cfg.qty_mean, cfg.qty_sd, size=len(skus))
    qty = np.maximum(1, np.rint(qty)).astype(int)
    lines = [(int(s), int(q)) for s, q in zip(skus, qty)]
    return Order(wave_index, wave_index, wave_index * cfg.takt, lines)


# -- replication ----------------------------------------------------------------

@dataclass
class ReplicationResult:
    scenario: str
    replication: int
    seed: int
    window: tuple
    order_release: np.ndarray
    order_completion: np.ndarray  # nan when unfinished at the horizon
    order_pallets: np.ndarray
    usage: list  # (start, end, truck_id, role)
    trip_collars: list
    daily_arrivals: list
    samples: list = field(default_factory=list)
    diagnostics: list = field(default_factory=list)
    log: list = field(default_factory=list)
    area_m2: float = float("nan")
    n_trucks: int = 0


class _OrderState:
    __slots__ = ("order", "total", "staged", "targets", "relocate", "pending", "done")

    def __init__(self, order: Order):
        self.order = order
        self.total = order.n_pallets
        self.staged = 0
        self.targets = []
        self.relocate = {}
        self.pending = {}
        self.done = False


class Replication:
    """One replication of one scenario: a single-threaded event loop."""

    def __init__(self, layout: Layout, slotter: Slotter, catalog: SkuCatalog,
                 vehicle: VehicleProfile, inbound: InboundConfig, outbound: OutboundConfig,
                 plan: ReplicationPlan, seed: int, replication: int = 0, name: str = "",
                 log: bool = True, sample_times=()):
        self.layout, self.slotter, self.catalog = layout, slotter, catalog
        self.vehicle, self.inbound, self.outbound, self.plan = vehicle, inbound, outbound, plan
        self.name, self.seed, self.rep = name, seed, replication
        self.streams = RngStreams(seed, replication)
        self.q = EventQueue()
        self.inv = InventoryState(layout, len(catalog))
        self.cost = layout.costs(vehicle)
        self.dist = layout.distances()
        self.snode = layout.slot_node
        self.lift = lift_seconds(layout.slot_level, vehicle, layout.spec.level_height / 1000.0)
        self.zone = layout.slot_zone
        xs = layout.slot_x
        lo, hi = float(xs.min()), float(xs.max())
        span = max(hi - lo, 1e-9)
        self.band = np.minimum(2, ((xs - lo) / span * 3).astype(int))
        self.in_stage, self.out_stage = layout.inbound_staging, layout.outbound_staging
        self.cap = vehicle.capacity_collar_units
        self.handling, self.dock = vehicle.handling_s, vehicle.dock_handling_s
        self.policy_rng = self.streams.policy_ties

        self.logging = log
        self.log = []
        self.pallets = {}
        self.queue = deque()
        n_in, n_out = inbound.truck_count, outbound.truck_count
        self.idle_in = list(range(n_in))
        self.idle_out = list(range(n_in, n_in + n_out))
        self.role = {i: ("in" if i < n_in else "out") for i in range(n_in + n_out)}
        self.usage = []
        self.trip_collars = []
        self.open_orders = []
        self.orders = []
        self.parked = {}
        self.storage_blocked = False
        self.diagnostics = []

        n = len(catalog)
        self.arrived = np.zeros(n, dtype=np.int64)
        self.ordered = np.zeros(n, dtype=np.int64)
        self.initial = np.zeros(n, dtype=np.int64)
        self.members = {c: np.array(catalog.members(c), dtype=np.int64) for c in CLASSES}
        self.daily_arrivals = [0] * (plan.warm_up_days + plan.n_days)

        self.n_generated = 0
        self.n_in_transit_in = 0
        self.n_in_transit_out = 0
        self.n_shipped = 0
        self.samples = []
        self.sample_times = list(sample_times)

    # -- helpers ---------------------------------------------------------------
    def _log(self, *rec):
        if self.logging:
            self.log.append(rec)

    def _diag(self, t, msg):
        self.diagnostics.append((t, msg))
        self._log(t, "diagnostic", msg)

    def _choose_sku(self, cls) -> int:
        m = self.members[cls]
        deficit = self.ordered[m] - self.arrived[m]
        return int(m[int(np.argmax(deficit))])

    # -- setup -------------------------------------------------------------------
    def _stock_initial(self):
        total = self.inbound.initial_stock
        if total <= 0:
            return
        n = len(self.catalog)
        safety = min(int(math.ceil(self.outbound.qty_mean)), total // n)
        rest = total - safety * n
        share = self.catalog.weights * rest
        counts = np.floor(share).astype(int) + safety
        short = total - counts.sum()
        if short > 0:
            counts[np.argsort(-(share - np.floor(share)), kind="stable")[:short]] += 1
        self.initial[:] = counts
        skus = np.repeat(np.arange(n), counts)
        rng = self.streams.initial_stock
        skus = skus[rng.permutation(len(skus))]
        probs = np.asarray(self.inbound.collar_probs)
        collars = rng.choice(6, size=len(skus), p=probs) + 1
        code = self.catalog.classes
        for sku, c in zip(skus.tolist(), collars.tolist()):
            pid = self.n_generated
            p = Pallet(pid, sku, CLASSES[code[sku]], EURO_FULL, c, 0.0)
            try:
                s = self.slotter.assign(p, self.inv, self.policy_rng)
            except StorageFull as exc:
                raise ConfigError(f"initial stock does not fit: {exc}") from exc
            p.stored_time, p.slot = 0.0, s
            self.inv.store(s, p)
            self.pallets[pid] = p
            self.n_generated += 1
            self._log(0.0, "initial", pid, sku, p.sku_class.value, c, s)

    # -- main loop -----------------------------------------------------------------
    def run(self) -> ReplicationResult:
        plan = self.plan
        horizon = plan.horizon
        self._stock_initial()
        self._arrivals = generate_arrivals(
            self.inbound, self.streams, horizon, self.catalog, plan.day_length,
            choose_sku=self._choose_sku, start_id=self.n_generated)
        first = next(self._arrivals, None)
        if first is not None:
            self.q.schedule(first.arrival_time, EventKind.PALLET_ARRIVAL, first)
        self.q.schedule(0.0, EventKind.WAVE_RELEASE, 0)
        for d in range(1, plan.warm_up_days + plan.n_days + 1):
            self.q.schedule(d * plan.day_length, EventKind.END_OF_DAY, d)
        for ts in self.sample_times:
            self.q.schedule(ts, EventKind.SAMPLE, None)

        handlers = {
            EventKind.PALLET_ARRIVAL: self._on_arrival,
            EventKind.WAVE_RELEASE: self._on_wave,
            EventKind.TRUCK_FREE: self._on_truck_free,
            EventKind.TASK_COMPLETE: self._on_task,
            EventKind.END_OF_DAY: self._on_day,
            EventKind.SAMPLE: self._on_sample,
        }
        q = self.q
        heap = q._heap
        pop = heapq.heappop
        while heap and heap[0][0] <= horizon:
            time, _, kind, payload = pop(heap)
            q.clock = time
            handlers[kind](time, payload)
        return self._result()

    def _on_arrival(self, t, pallet: Pallet):
        self.pallets[pallet.id] = pallet
        self.n_generated += 1
        self.arrived[pallet.sku] += 1
        day = int(t // self.plan.day_length)
        if day < len(self.daily_arrivals):
            self.daily_arrivals[day] += 1
        self._log(t, "arrival", pallet.id, pallet.sku, pallet.sku_class.value, pallet.collars,
                  pallet.format.kind.value)
        self.queue.append(pallet)
        nxt = next(self._arrivals, None)
        if nxt is not None:
            self.q.schedule(nxt.arrival_time, EventKind.PALLET_ARRIVAL, nxt)
        self._dispatch_in(t)

    def _on_wave(self, t, k):
        raw = generate_wave(self.outbound, self.catalog, self.streams, k)
        lines = []
        for sku, qty in raw.lines:
            atp = self.initial[sku] + self.arrived[sku] - self.ordered[sku]
            q = int(min(qty, atp))
            if q > 0:
                lines.append((sku, q))
                self.ordered[sku] += q
        order = Order(raw.id, raw.wave_index, raw.release_time, lines)
        st = _OrderState(order)
        self.orders.append(st)
        self._log(t, "release", order.id, k, st.total)
        if st.total == 0:
            self._complete(t, st)
        else:
            self.open_orders.append(st)
            for sku, q in lines:
                st.pending[sku] = q
                self._select_for(st, sku)
        nxt = (k + 1) * self.outbound.takt
        if nxt < self.plan.horizon:
            self.q.schedule(nxt, EventKind.WAVE_RELEASE, k + 1)
        self._dispatch_out(t)

    def _on_truck_free(self, t, truck):
        self._log(t, "free", truck, self.role[truck])
        if self.role[truck] == "in":
            heapq.heappush(self.idle_in, truck)
            self._dispatch_in(t)
        else:
            heapq.heappush(self.idle_out, truck)
            self._dispatch_out(t)

    def _on_task(self, t, payload):
        kind = payload[0]
        if kind == "store":
            _, p, s, truck = payload
            p.stored_time, p.slot = t, s
            self.inv.store(s, p)
            self.n_in_transit_in -= 1
            self._log(t, "store", p.id, s, truck)
            if p.sku in self.parked:
                self._retry(p.sku, t)
        elif kind == "pick":
            _, s, order_id, truck = payload
            pid = self.inv.remove(s)
            self.n_in_transit_out += 1
            self._log(t, "pick", pid, s, order_id, truck)
            rear = self.layout.slot_partner[s]
            if rear >= 0 and self.inv.is_rear[rear]:
                sku = self.inv.slot_sku[rear]
                if sku >= 0 and sku in self.parked:
                    self._retry(int(sku), t)
            if self.storage_blocked:
                self.storage_blocked = False
                self._dispatch_in(t)
        elif kind == "relocate":
            _, src, dst, truck = payload
            pid = int(self.inv.occ[src])
            self.inv.remove(src)
            p = self.pallets[pid]
            p.slot = dst
            self.inv.store(dst, p)
            self._log(t, "relocate", pid, src, dst, truck)
            rear = self.layout.slot_partner[src]
            if rear >= 0 and self.inv.is_rear[rear]:
                sku = self.inv.slot_sku[rear]
                if sku >= 0 and sku in self.parked:
                    self._retry(int(sku), t)
            if p.sku in self.parked:
                self._retry(p.sku, t)
        elif kind == "stage":
            _, pid, st, truck = payload
            self.n_in_transit_out -= 1
            self.n_shipped += 1
            st.staged += 1
            self._log(t, "stage", pid, st.order.id, truck)
            if st.staged == st.total:
                self._complete(t, st)

    def _on_day(self, t, d):
        self._log(t, "day", d)

    def _on_sample(self, t, _):
        self.inv.check()
        self.samples.append(dict(
            time=t, generated=self.n_generated, stored=self.inv.n_stored,
            queued=len(self.queue), in_transit=self.n_in_transit_in + self.n_in_transit_out,
            shipped=self.n_shipped))

    def _complete(self, t, st: _OrderState):
        st.done = True
        st.order.completion_time = t
        if st in self.open_orders:
            self.open_orders.remove(st)
        self._log(t, "complete", st.order.id)

    # -- outbound selection ----------------------------------------------------------
    def _select_for(self, st: _OrderState, sku: int) -> bool:
        """Reserve pallets for the pending quantity of ``sku``; park what cannot be had."""
        got = False
        row = self.dist[self.out_stage]
        while st.pending.get(sku, 0) > 0:
            try:
                s = _select(sku, self.inv, self.layout, row)
                self.inv.reserve_outgoing(s)
                st.targets.append(s)
            except StockOut as exc:
                s = self._relocation_target(exc.blocked, row)
                if s is None:
                    self.parked.setdefault(sku, [])
                    if st not in self.parked[sku]:
                        self.parked[sku].append(st)
                    return got
                front = self.layout.slot_partner[s]
                self.inv.reserve_outgoing(s)
                self.inv.reserve_outgoing(front)
                st.targets.append(s)
                st.relocate[s] = front
            st.pending[sku] -= 1
            got = True
        return got

    def _relocation_target(self, blocked, row):
        best = None
        for s in blocked:
            front = self.layout.slot_partner[s]
            if front < 0 or self.inv.occ[front] < 0 or self.inv.outgoing[front]:
                continue
            key = (row[self.snode[s]], self.layout.slot_level[s], s)
            if best is None or key < best[0]:
                best = (key, s)
        return None if best is None else best[1]

    def _retry(self, sku: int, t: float):
        waiting = self.parked.pop(sku, [])
        got = False
        for st in waiting:
            if not st.done:
                got |= self._select_for(st, sku)
        if got:
            self._dispatch_out(t)

    # -- trips ----------------------------------------------------------------------
    def _dispatch_out(self, t):
        while self.idle_out:
            st = next((o for o in self.open_orders if o.targets), None)
            if st is None:
                return
            truck = heapq.heappop(self.idle_out)
            self._outbound_trip(truck, st, t)

    def _nearest(self, targets, row):
        nodes = self.snode[targets]
        c = row[nodes]
        i = int(np.lexsort((targets, c))[0]) if len(targets) > 1 else 0
        return i, float(c[i])

    def _outbound_trip(self, truck, st: _OrderState, t):
        inv, cost, snode = self.inv, self.cost, self.snode
        node = self.out_stage
        tt = t
        load = 0
        picks = []
        targets = st.targets
        while targets:
            arr = np.asarray(targets)
            i, leg = self._nearest(arr, cost[node])
            s = int(arr[i])
            c = int(inv.collars[s])
            if picks and (load + c > self.cap or leg > self.outbound.proximity_s):
                break
            targets.pop(i)
            tt += leg
            front = st.relocate.pop(s, None)
            if front is not None:
                tt = self._relocate(truck, front, s, tt)
            tt += self.lift[s] + self.handling
            self.q.schedule(tt, EventKind.TASK_COMPLETE, ("pick", s, st.order.id, truck))
            picks.append(int(inv.occ[s]))
            load += c
            node = snode[s]
        tt += cost[node, self.out_stage]
        for pid in picks:
            tt += self.dock
            self.q.schedule(tt, EventKind.TASK_COMPLETE, ("stage", pid, st, truck))
        self._start_trip(truck, t, tt, load)

    def _relocate(self, truck, front, rear, tt):
        """Move the front pallet aside so the rear one can be reached."""
        inv, layout = self.inv, self.layout
        here = self.snode[rear]
        ok = inv.admissible.copy()
        ok[[front, rear]] = False
        same = ok & (self.zone == self.zone[front])
        mask = same if same.any() else ok
        cand = np.flatnonzero(mask)
        tt += self.lift[front] + self.handling
        if len(cand) == 0:
            self._diag(tt, f"no slot to relocate pallet in slot {front}; rear {rear} dug out in place")
            return tt
        d = self.dist[here][self.snode[cand]]
        dst = int(cand[np.lexsort((cand, layout.slot_level[cand], d))[0]])
        inv.reserve_incoming(dst)
        tt += self.cost[here, self.snode[dst]] + self.lift[dst] + self.handling
        self.q.schedule(tt, EventKind.TASK_COMPLETE, ("relocate", front, dst, truck))
        tt +=self.cost[self.snode[dst], here]
        return tt

    def _dispatch_in(self, t):
        while self.idle_in and self.queue and not self.storage_blocked:
            truck = self.idle_in[0]
            if not self._inbound_trip(truck, t):
                return
            heapq.heappop(self.idle_in)

    def _inbound_trip(self, truck, t) -> bool:
        inv, slotter, rng = self.inv, self.slotter, self.policy_rng
        p0 = self.queue[0]
        try:
            s0 = slotter.assign(p0, inv, rng)
        except StorageFull as exc:
            self.storage_blocked = True
            self._diag(t, str(exc))
            return False
        inv.reserve_incoming(s0)
        tasks = [(p0, s0)]
        load = p0.collars
        band = self.band[s0]
        for p in islice(self.queue, 1, 1 + self.inbound.lookahead):
            if load + p.collars > self.cap:
                continue
            try:
                s = slotter.assign(p, inv, rng)
            except StorageFull:
                break
            if self.band[s] != band:
                continue
            inv.reserve_incoming(s)
            tasks.append((p, s))
            load += p.collars
            if load == self.cap:
                break
        taken = {p.id for p, _ in tasks}
        self.queue = deque(p for p in self.queue if p.id not in taken)
        self.n_in_transit_in += len(tasks)

        tt = t + self.dock * len(tasks)  # load at the inbound dock
        node = self.in_stage
        for p, s in sequence_inbound_tasks(tasks, self.layout):
            tt += self.cost[node, self.snode[s]] + self.lift[s] + self.handling
            self.q.schedule(tt, EventKind.TASK_COMPLETE, ("store", p, s, truck))
            node = self.snode[s]
        tt += self.cost[node, self.in_stage]
        self._start_trip(truck, t, tt, load)
        return True

    def _start_trip(self, truck, t, t_end, load):
        if load > self.cap:
            raise AssertionError(f"trip of truck {truck} carries {load} collar units")
        self.usage.append((t, t_end, truck, self.role[truck]))
        self.trip_collars.append(load)
        self._log(t, "busy", truck, self.role[truck], load)
        self.q.schedule(t_end, EventKind.TRUCK_FREE, truck)

    # -- result ------------------------------------------------------------------------
    def _result(self) -> ReplicationResult:
        rel = np.array([o.order.release_time for o in self.orders], dtype=float)
        comp = np.array([np.nan if o.order.completion_time is None else o.order.completion_time
                         for o in self.orders], dtype=float)
        npal = np.array([o.total for o in self.orders], dtype=np.int64)
        from .layout import compute_area
        return ReplicationResult(
            scenario=self.name, replication=self.rep, seed=self.seed,
            window=(self.plan.warm_up, self.plan.horizon),
            order_release=rel, order_completion=comp, order_pallets=npal,
            usage=self.usage, trip_collars=self.trip_collars,
            daily_arrivals=self.daily_arrivals, samples=self.samples,
            diagnostics=self.diagnostics, log=self.log,
            area_m2=_cached_area(self.layout),
            n_trucks=self.inbound.truck_count + self.outbound.truck_count,
        )


def _select(sku, inv, layout, dist_row):
    from .slotting import select_pallet_for_line
    return select_pallet_for_line(sku, inv, layout, layout.outbound_staging, dist_row)


_AREA = {}


def _cached_area(layout: Layout) -> float:
    from .layout import compute_area
    key = id(layout)
    if key not in _AREA or _AREA[key][0] is not layout:
        _AREA[key] = (layout, compute_area(layout))
    return _AREA[key][1]


def simulate_replication(scenario, plan: ReplicationPlan, seed: int, replication: int,
                         log: bool = True, sample_times=()) -> ReplicationResult:
    ctx = scenario.context()
    sim = Replication(ctx.layout, ctx.slotter, ctx.catalog, scenario.vehicle, scenario.inbound,
                      scenario.outbound, plan, seed, replication, name=scenario.name, log=log,
                      sample_times=sample_times)
    result = sim.run()
    if plan.n_days == 0:
        result.diagnostics.append((plan.horizon, "EmptyWindow: no simulated days after warm-up"))
    return result
