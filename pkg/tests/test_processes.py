import math
from collections import deque

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.stats import chi2

from palletsim.config import DEFAULT_SPEC, default_scenario, with_overrides
from palletsim.engine import EventKind, ReplicationPlan, RngStreams
from palletsim.layout import build_conventional
from palletsim.model import EURO_FULL, CLASSES, ConfigError, Order, Pallet, SkuClass, build_catalog
from palletsim.processes import (
    InboundConfig, OutboundConfig, Replication, _OrderState, generate_arrivals, generate_wave,
    simulate_replication,
)
from palletsim.routing import VehicleProfile
from palletsim.slotting import PolicyKind, Slotter

DAY = 57_600.0
CATALOG = build_catalog()


def test_zero_sigma_gives_constant_gaps():
    cfg = InboundConfig(sigma=0.0)
    pallets = list(generate_arrivals(cfg, RngStreams(1), 20 * DAY / 2050, CATALOG,
                                     choose_sku=lambda c: 0))
    times = np.array([p.arrival_time for p in pallets])
    gaps = np.diff(np.r_[0.0, times])
    assert np.allclose(gaps, math.exp(cfg.mu_for(DAY)))
    assert math.exp(cfg.mu_for(DAY)) == pytest.approx(DAY / 2050)


def test_mu_solves_for_daily_volume():
    cfg = InboundConfig()
    assert cfg.mean_gap(DAY) * cfg.daily_volume_target == pytest.approx(DAY)


def test_volume_rule_is_enforced():
    with pytest.raises(ConfigError):
        InboundConfig(mu=math.log(DAY / 2050) + 0.2).validate(DAY)
    InboundConfig(mu=math.log(DAY / 2050) - 0.18).validate(DAY)  # still inside 5%


@pytest.fixture(scope="module")
def eighty_days():
    pallets = list(generate_arrivals(InboundConfig(), RngStreams(2024), 80 * DAY, CATALOG,
                                     choose_sku=lambda c: 0))
    return pallets


def test_daily_volume_over_eighty_days(eighty_days):
    days = np.bincount([int(p.arrival_time // DAY) for p in eighty_days], minlength=80)
    assert 2000 <= days.mean() <= 2100


def test_class_mix_over_eighty_days(eighty_days):
    counts = {c: 0 for c in CLASSES}
    for p in eighty_days:
        counts[p.sku_class] += 1
    n = len(eighty_days)
    for c, share in zip(CLASSES, (0.80, 0.15, 0.05)):
        assert abs(counts[c] / n - share) < 0.01


def test_arrival_attributes_and_order(eighty_days):
    sample = eighty_days[:5000]
    assert all(1 <= p.collars <= 6 for p in sample)
    times = [p.arrival_time for p in sample]
    assert times == sorted(times)
    assert [p.id for p in sample] == list(range(5000))


def test_default_sku_choice_stays_in_class():
    for p in generate_arrivals(InboundConfig(), RngStreams(3), 2 * 3600.0, CATALOG):
        assert CATALOG.skus[p.sku].sku_class is p.sku_class


# -- waves -------------------------------------------------------------------------

def test_wave_release_times():
    streams = RngStreams(1)
    assert [generate_wave(OutboundConfig(), CATALOG, streams, k).release_time
            for k in range(3)] == [0.0, 1500.0, 3000.0]


def test_wave_rejects_negative_index():
    with pytest.raises(ValueError):
        generate_wave(OutboundConfig(), CATALOG, RngStreams(1), -1)


def test_degenerate_quantity():
    cfg = OutboundConfig(qty_mean=3, qty_sd=0)
    order = generate_wave(cfg, CATALOG, RngStreams(1), 0)
    assert all(q == 3 for _, q in order.lines)


def test_quantities_truncated_at_one():
    cfg = OutboundConfig(qty_mean=0.2, qty_sd=2.0)
    streams = RngStreams(4)
    for k in range(200):
        assert all(q >= 1 for _, q in generate_wave(cfg, CATALOG, streams, k).lines)


def test_wave_skus_distinct():
    streams = RngStreams(5)
    for k in range(300):
        skus = [s for s, _ in generate_wave(OutboundConfig(), CATALOG, streams, k).lines]
        assert len(set(skus)) == len(skus) == 8


def test_sku_frequencies_follow_weights():
    streams = RngStreams(6)
    cfg = OutboundConfig()
    counts = np.zeros(len(CATALOG))
    waves = 10_000
    for k in range(waves):
        for s, _ in generate_wave(cfg, CATALOG, streams, k).lines:
            counts[s] += 1
    share = counts / counts.sum()
    w = CATALOG.weights
    # class totals within half a percentage point of their volume share
    for c in CLASSES:
        m = CATALOG.members(c)
        assert abs(share[m].sum() - w[m].sum()) < 0.005
    # per-SKU inclusion counts are binomial(waves, k * weight); pooled chi-square check
    p = cfg.skus_per_order * w
    z = (counts - waves * p) / np.sqrt(waves * p * (1 - p))
    assert chi2.sf(np.sum(z ** 2), df=len(z)) > 0.001


# -- trucks ----------------------------------------------------------------------------

def make_rep(policy=PolicyKind.CLASS_DISTANCE, vehicle=None, n_in=1, n_out=1, **inbound):
    layout = build_conventional(DEFAULT_SPEC["conventional"])
    vehicle = vehicle or VehicleProfile()
    slotter = Slotter(policy, layout, vehicle=vehicle)
    inbound = InboundConfig(truck_count=n_in, initial_stock=0, **inbound)
    outbound = OutboundConfig(truck_count=n_out)
    plan = ReplicationPlan(n_days=1, warm_up_days=0, replications=1)
    return Replication(layout, slotter, CATALOG, vehicle, inbound, outbound, plan, seed=1)


def drain(rep, until=math.inf):
    """Process queued events without the arrival and wave generators."""
    handlers = {EventKind.TRUCK_FREE: rep._on_truck_free, EventKind.TASK_COMPLETE: rep._on_task}
    while len(rep.q) and rep.q.peek_time() <= until:
        ev = rep.q.pop()
        handlers[ev.kind](ev.time, ev.payload)


def _pallet(pid, collars, sku=0):
    return Pallet(pid, sku, CATALOG.skus[sku].sku_class, EURO_FULL, collars, 0.0)


def test_consolidation_takes_nine_and_leaves_one():
    rep = make_rep()
    rep.queue = deque([_pallet(0, 4), _pallet(1, 5), _pallet(2, 1)])
    rep._dispatch_in(0.0)
    assert rep.trip_collars == [9]
    assert [p.id for p in rep.queue] == [2]
    drain(rep)
    # the freed truck comes back for the last pallet
    assert rep.trip_collars == [9, 1]
    assert not rep.queue


def test_empty_queue_truck_idles():
    rep = make_rep()
    rep._dispatch_in(0.0)
    assert rep.usage == [] and rep.idle_in == [0]


def test_single_store_time():
    layout = build_conventional(DEFAULT_SPEC["conventional"])
    probe = VehicleProfile(turn_penalty=0.0)
    slot_rep = make_rep(vehicle=probe)
    s = slot_rep.slotter.assign(_pallet(0, 2), slot_rep.inv, slot_rep.policy_rng)
    metres = layout.distances()[layout.inbound_staging, layout.slot_node[s]]
    assert layout.slot_level[s] == 0
    # speed chosen so the leg takes exactly 60 s, with 20 s handling and no dock time
    v = VehicleProfile(travel_speed=metres / 60.0, turn_penalty=0.0, handling_s=20.0,
                       dock_handling_s=0.0)
    rep = make_rep(vehicle=v)
    rep.queue = deque([_pallet(0, 2)])
    rep._dispatch_in(100.0)
    t, seq, kind, payload = min(rep.q._heap)
    assert payload[0] == "store" and payload[2] == s
    assert t == pytest.approx(180.0)


def _open_order(rep, sku, qty, release=0.0):
    st_ = _OrderState(Order(0, 0, release, [(sku, qty)]))
    rep.orders.append(st_)
    rep.open_orders.append(st_)
    st_.pending[sku] = qty
    rep._select_for(st_, sku)
    return st_


def test_two_near_pallets_one_trip():
    rep = make_rep()
    fronts = np.flatnonzero(rep.layout.slot_depth == 0)
    near = fronts[np.argsort(rep.layout.outbound_distance()[fronts], kind="stable")[:2]]
    for k, s in enumerate(near):
        rep.inv.store(int(s), _pallet(k, 2, sku=5))
    order = _open_order(rep, 5, 2)
    rep._dispatch_out(0.0)
    assert len(rep.usage) == 1 and rep.trip_collars == [4]
    drain(rep)
    stages = [r for r in rep.log if r[1] == "stage"]
    assert len(stages) == 2
    assert order.order.completion_time == max(r[0] for r in stages)


def test_no_open_orders_no_trip():
    rep = make_rep()
    rep._dispatch_out(0.0)
    assert rep.usage == [] and rep.idle_out == [1]


def test_blocked_rear_is_relocated_first():
    rep = make_rep()
    rear = int(np.flatnonzero(rep.layout.slot_depth == 1)[0])
    front = int(rep.layout.slot_partner[rear])
    rep.inv.store(rear, _pallet(0, 2, sku=5))
    rep.inv.store(front, _pallet(1, 2, sku=7))
    rep.pallets.update({0: _pallet(0, 2, sku=5), 1: _pallet(1, 2, sku=7)})
    _open_order(rep, 5, 1)
    rep._dispatch_out(0.0)
    drain(rep)
    kinds = [r[1] for r in rep.log if r[1] in ("relocate", "pick", "stage")]
    assert kinds == ["relocate", "pick", "stage"]
    moved = next(r for r in rep.log if r[1] == "relocate")
    assert moved[3] == front and rep.inv.occ[moved[4]] == 1
    rep.inv.check()


def test_stockout_parks_line_until_stock_arrives():
    rep = make_rep()
    order = _open_order(rep, 9, 1)
    assert 9 in rep.parked and not order.targets
    rep.queue = deque([_pallet(0, 2, sku=9)])
    rep.pallets[0] = rep.queue[0]
    rep._dispatch_in(0.0)
    drain(rep)
    assert order.done


# -- full replications ---------------------------------------------------------------------

@pytest.fixture(scope="module")
def short_run():
    s = default_scenario("conventional")
    plan = ReplicationPlan(n_days=3, warm_up_days=0, replications=1)
    times = np.linspace(100.0, plan.horizon - 100.0, 25)
    return simulate_replication(s, plan, seed=3, replication=0, sample_times=times)


def test_conservation_at_samples(short_run):
    assert len(short_run.samples) == 25
    for smp in short_run.samples:
        assert smp["generated"] == smp["stored"] + smp["queued"] + smp["in_transit"] + smp["shipped"]


def test_no_retrieval_before_release(short_run):
    release = {r[2]: r[0] for r in short_run.log if r[1] == "release"}
    picks = [r for r in short_run.log if r[1] == "pick"]
    assert picks
    assert all(r[0] >= release[r[4]] for r in picks)


def test_shipped_pallets_were_stored(short_run):
    stored = set()
    for rec in short_run.log:
        if rec[1] in ("initial", "store"):
            stored.add(rec[2])
        elif rec[1] == "stage":
            assert rec[2] in stored


def test_trips_within_capacity(short_run):
    assert max(short_run.trip_collars) <= 9
    assert all(r[4] <= 9 for r in short_run.log if r[1] == "busy")


def test_inventory_stays_bounded(short_run):
    stored = np.array([s["stored"] for s in short_run.samples])
    start = default_scenario("conventional").inbound.initial_stock
    assert stored.min() > 0.5 * start and stored.max() < 1.5 * start


def test_orders_release_on_takt(short_run):
    rel = short_run.order_release
    assert np.array_equal(rel, np.arange(len(rel)) * 1500.0)


@settings(max_examples=5, deadline=None)
@given(st.integers(0, 2**31 - 1))
def test_short_runs_conserve_for_any_seed(seed):
    s = with_overrides(default_scenario("cpu"), inbound__initial_stock=1500)
    plan = ReplicationPlan(n_days=1, warm_up_days=0, day_length=14_400.0, replications=1)
    s = with_overrides(s, plan=plan, inbound__daily_volume_target=2050 / 4)
    res = simulate_replication(s, plan, seed, 0, log=False, sample_times=[3600.0, 7200.0, 14_000.0])
    for smp in res.samples:
        assert smp["generated"] == smp["stored"] + smp["queued"] + smp["in_transit"] + smp["shipped"]
    assert max(res.trip_collars) <= 9
