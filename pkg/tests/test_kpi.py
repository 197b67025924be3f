import csv
import json
import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from palletsim.config import default_scenario, with_overrides
from palletsim.engine import EmptyWindow, ReplicationPlan
from palletsim.kpi import (
    CSV_COLUMNS, KpiReport, ReplicationKpi, average_busy, build_report, comparison_table,
    emit_report, load_report_json, mmss, on_time_pct, reduce_event_log, replication_kpis,
    reports_from_json, reports_to_json, required_fte, throughput_time, warmup_profile, write_csv,
)
from palletsim.model import Order
from palletsim.processes import simulate_replication


def test_throughput_time_example():
    o = Order(0, 0, 0.0, [(1, 1)], completion_time=896.0)
    assert throughput_time(o) == 896.0
    assert mmss(throughput_time(o)) == "14:56"


def test_throughput_time_zero_and_incomplete():
    assert throughput_time(Order(0, 0, 30.0, [(1, 1)], completion_time=30.0)) == 0.0
    with pytest.raises(ValueError):
        throughput_time(Order(0, 0, 30.0, [(1, 1)]))


def test_fte_constant_ten_busy():
    usage = [(0.0, 100.0)] * 10
    assert required_fte(usage, (0.0, 100.0)) == 20


def test_fte_zero_activity():
    assert required_fte([], (0.0, 100.0)) == 0


def test_fte_half_eight_half_twelve():
    usage = [(0.0, 50.0)] * 8 + [(50.0, 100.0)] * 12
    assert average_busy(usage, (0.0, 100.0)) == pytest.approx(10.0)
    assert required_fte(usage, (0.0, 100.0)) == 20


def test_fte_rounds_up_and_clips_to_window():
    # 10.25 trucks on average -> 20.5 -> 21
    usage = [(0.0, 100.0)] * 10 + [(-50.0, 25.0)]
    assert average_busy(usage, (0.0, 100.0)) == pytest.approx(10.25)
    assert required_fte(usage, (0.0, 100.0)) == 21


def test_fte_empty_window():
    with pytest.raises(EmptyWindow):
        required_fte([(0.0, 1.0)], (5.0, 5.0))


def test_on_time_examples():
    assert on_time_pct([100.0, 1500.0, 20.0]) == 100.0
    assert on_time_pct([1000.0] * 99 + [1501.0]) == 99.0
    assert on_time_pct([1500.0]) == 100.0
    with pytest.raises(EmptyWindow):
        on_time_pct([])


@given(st.lists(st.floats(0, 5000), min_size=1, max_size=300))
def test_on_time_full_iff_max_within_takt(tp):
    assert (on_time_pct(tp) == 100.0) == (max(tp) <= 1500.0)
    assert 0.0 <= on_time_pct(tp) <= 100.0


# -- from simulation output ------------------------------------------------------------

@pytest.fixture(scope="module")
def runs():
    s = default_scenario("flying_v")
    plan = ReplicationPlan(n_days=2, warm_up_days=1, replications=2)
    return s, [simulate_replication(s, plan, 21, r) for r in range(2)]


def test_event_log_reducer_matches_streaming_kpis(runs):
    _, results = runs
    for r in results:
        a = replication_kpis(r)
        b = reduce_event_log(r.log, r.window, r.area_m2, r.replication, r.seed)
        assert a == b


def test_mean_is_mean_of_orders(runs):
    _, results = runs
    for r in results:
        w0, w1 = r.window
        per_order = [c - rel for rel, c in zip(r.order_release, r.order_completion)
                     if w0 <= rel < w1 and not math.isnan(c)]
        assert replication_kpis(r).throughput_s_mean == pytest.approx(np.mean(per_order), rel=1e-12)
        # warm-up orders are excluded
        assert replication_kpis(r).orders == len(per_order) < len(r.order_release)


def test_area_same_for_every_replication(runs):
    s, results = runs
    rep = build_report(s, results)
    assert len(set(rep.values("area_m2"))) == 1


def _toy_reports():
    def kpi(r, tp):
        return ReplicationKpi(r, 7, tp, 20, 100.0, 4000.0, 9.9, 38, 0)
    return [KpiReport("a", "conventional", "Random", [kpi(r, 900.0 + r) for r in range(3)]),
            KpiReport("b", "cpu", "CpuZone", [kpi(r, 800.0 + r) for r in range(3)])]


def test_csv_rows(tmp_path):
    path = write_csv(_toy_reports(), tmp_path / "k.csv")
    rows = list(csv.reader(path.open()))
    assert tuple(rows[0]) == CSV_COLUMNS
    detail = [r for r in rows[1:] if r[3] != "mean"]
    agg = [r for r in rows[1:] if r[3] == "mean"]
    assert len(detail) == 6 and len(agg) == 2
    assert float(agg[1][4]) == pytest.approx(801.0)


def test_json_round_trip(tmp_path):
    reports = _toy_reports()
    assert reports_from_json(reports_to_json(reports)) == reports
    paths = emit_report(reports, tmp_path, ("json",))
    assert load_report_json(paths[0]) == reports
    assert json.loads(paths[0].read_text())["scenarios"][0]["aggregates"]["fte"]["mean"] == 20


def test_aggregates():
    agg = _toy_reports()[0].aggregates()["throughput_s_mean"]
    assert agg == {"mean": 901.0, "std": 1.0, "min": 900.0, "max": 902.0}


def test_comparison_table_columns():
    table = comparison_table(_toy_reports())
    head = table.splitlines()[0].split()
    assert head[:3] == ["Layout", "Throughput", "FTE"]
    assert "On-Time" in table and "Area" in table
    assert "15:01" in table and "13:21" in table


def test_unwritable_path_names_it(tmp_path):
    blocker = tmp_path / "file"
    blocker.write_text("x")
    with pytest.raises(OSError, match="file"):
        emit_report(_toy_reports(), blocker / "sub")


def test_unknown_format(tmp_path):
    with pytest.raises(ValueError):
        emit_report(_toy_reports(), tmp_path, ("xml",))


def test_mmss():
    assert mmss(968.0) == "16:08"
    assert mmss(float("nan")) == "--:--"


def test_warmup_profile_shape(runs):
    _, results = runs
    prof = warmup_profile(results, 57_600.0, window=1)
    assert prof.shape == (3,)
    assert np.all(np.isfinite(prof))


def test_fte_monotone_in_offered_load():
    base = default_scenario("conventional")
    plan = ReplicationPlan(n_days=2, warm_up_days=1, replications=1)
    fte = []
    for volume in (1500.0, 2050.0, 2600.0):
        s = with_overrides(base, inbound__daily_volume_target=volume)
        fte.append(replication_kpis(simulate_replication(s, plan, 3, 0, log=False)).fte)
    assert fte == sorted(fte)


def test_open_orders_older_than_takt_count_as_late():
    log = [(0.0, "release", 0, 0, 1), (0.0, "busy", 3, "out", 1), (1000.0, "free", 3, "out"),
           (1000.0, "complete", 0),
           (1500.0, "release", 1, 1, 1),  # never finished, 2500 s old at the horizon
           (3000.0, "release", 2, 2, 1)]  # never finished, only 1000 s old: undecided
    k = reduce_event_log(log, (0.0, 4000.0), 100.0)
    assert k.throughput_s_mean == 1000.0
    assert k.on_time_pct == 50.0
    assert (k.orders, k.incomplete) == (1, 2)
    assert k.avg_busy == pytest.approx(0.25)
