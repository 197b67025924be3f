"""The four warehouse KPIs, their aggregation and report files."""

from __future__ import annotations

import csv
import json
import math
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .engine import EmptyWindow

TAKT_S = 1500.0
KPI_FIELDS = ("throughput_s_mean", "fte", "on_time_pct", "area_m2")
CSV_COLUMNS = ("scenario", "layout", "policy", "replication", "throughput_s_mean", "fte",
               "on_time_pct", "area_m2", "seed")


# -- single KPIs ---------------------------------------------------------------------

def throughput_time(order) -> float:
    """Release to last pallet staged, in seconds."""
    if order.completion_time is None:
        raise ValueError(f"order {order.id} is not complete")
    return order.completion_time - order.release_time


def average_busy(usage: Iterable, window: tuple) -> float:
    """Time-weighted mean number of busy trucks over ``window``.

    ``usage`` holds (start, end, ...) busy intervals; overlap with the window
    is summed, so the result is the integral of the busy count divided by
    the window length.
    """
    w0, w1 = window
    if not w1 > w0:
        raise EmptyWindow(f"usage window [{w0}, {w1}] is empty")
    busy = math.fsum(max(0.0, min(iv[1], w1) - max(iv[0], w0)) for iv in usage)
    return busy / (w1 - w0)


def required_fte(usage: Iterable, window: tuple) -> int:
    """Average simultaneous usage times two, rounded up."""
    avg = average_busy(usage, window)
    # guard against 20.000000001 turning into 21
    return int(math.ceil(round(2.0 * avg, 9)))


def on_time_pct(throughputs: Sequence[float], takt: float = TAKT_S) -> float:
    """Share of orders finished within one takt (boundary counts as on time)."""
    tp = np.asarray(throughputs, dtype=float)
    if tp.size == 0:
        raise EmptyWindow("no completed orders in the KPI window")
    return 100.0 * np.count_nonzero(tp <= takt) / tp.size


# -- per replication -----------------------------------------------------------------

@dataclass
class ReplicationKpi:
    replication: int
    seed: int
    throughput_s_mean: float
    fte: int
    on_time_pct: float
    area_m2: float
    avg_busy: float
    orders: int
    incomplete: int


def _kpi(replication, seed, release, completion, usage, window, area) -> ReplicationKpi:
    w0, w1 = window
    release = np.asarray(release, dtype=float)
    completion = np.asarray(completion, dtype=float)
    inside = (release >= w0) & (release < w1)
    done = inside & ~np.isnan(completion)
    tp = (completion - release)[done]
    # still open at the horizon and already older than a takt: certainly late
    late = inside & np.isnan(completion) & (w1 - release > TAKT_S)
    judged = np.concatenate([tp, np.full(np.count_nonzero(late), np.inf)])
    mean_tp = math.fsum(tp.tolist()) / tp.size if tp.size else float("nan")
    ontime = on_time_pct(judged) if judged.size else float("nan")
    avg = average_busy(usage, window)
    return ReplicationKpi(
        replication=int(replication), seed=int(seed), throughput_s_mean=float(mean_tp),
        fte=int(math.ceil(round(2.0 * avg, 9))), on_time_pct=float(ontime),
        area_m2=float(area), avg_busy=float(avg), orders=int(np.count_nonzero(done)),
        incomplete=int(np.count_nonzero(inside & np.isnan(completion))),
    )


def replication_kpis(result) -> ReplicationKpi:
    """KPIs straight from a replication's order and usage records."""
    return _kpi(result.replication, result.seed, result.order_release, result.order_completion,
                result.usage, result.window, result.area_m2)


def reduce_event_log(records: Iterable, window: tuple, area_m2: float,
                     replication: int = 0, seed: int = 0) -> ReplicationKpi:
    """Recompute the KPIs from the raw event log alone.

    Used as a cross-check on ``replication_kpis``: orders come from
    release/complete records, busy intervals from busy/free pairs per truck.
    """
    release, completion = {}, {}
    open_since, usage = {}, []
    for rec in records:
        t, kind = rec[0], rec[1]
        if kind == "release":
            release[rec[2]] = t
        elif kind == "complete":
            completion[rec[2]] = t
        elif kind == "busy":
            open_since[rec[2]] = len(usage)
            usage.append([t, window[1]])
        elif kind == "free":
            usage[open_since.pop(rec[2])][1] = t
    ids = sorted(release)
    rel = [release[i] for i in ids]
    comp = [completion.get(i, float("nan")) for i in ids]
    return _kpi(replication, seed, rel, comp, usage, window, area_m2)


# -- scenario reports ------------------------------------------------------------------

@dataclass
class KpiReport:
    scenario: str
    layout: str
    policy: str
    replications: list = field(default_factory=list)

    def values(self, name: str) -> np.ndarray:
        return np.array([getattr(r, name) for r in self.replications], dtype=float)

    def aggregates(self) -> dict:
        out = {}
        for name in KPI_FIELDS:
            v = self.values(name)
            out[name] = {
                "mean": float(np.mean(v)) if v.size else float("nan"),
                "std": float(np.std(v, ddof=1)) if v.size > 1 else 0.0,
                "min": float(np.min(v)) if v.size else float("nan"),
                "max": float(np.max(v)) if v.size else float("nan"),
            }
        return out

    @property
    def throughput_mean(self) -> float:
        return float(np.mean(self.values("throughput_s_mean")))

    @property
    def pooled_fte(self) -> int:
        return int(math.ceil(round(2.0 * float(np.mean(self.values("avg_busy"))), 9)))

    @property
    def incomplete(self) -> int:
        return int(sum(r.incomplete for r in self.replications))


def build_report(scenario, results) -> KpiReport:
    reps = sorted((replication_kpis(r) for r in results), key=lambda k: k.replication)
    return KpiReport(scenario.name, scenario.variant, scenario.policy.value, reps)


def _fmt(v) -> str:
    if isinstance(v, float):
        return repr(round(v, 6))
    return str(v)


def report_rows(reports: Sequence[KpiReport]) -> list:
    """Detail rows (one per scenario x replication) followed by one aggregate row each."""
    rows = []
    for rep in reports:
        for r in rep.replications:
            rows.append([rep.scenario, rep.layout, rep.policy, r.replication, r.throughput_s_mean,
                         r.fte, r.on_time_pct, r.area_m2, r.seed])
    for rep in reports:
        agg = rep.aggregates()
        seed = rep.replications[0].seed if rep.replications else ""
        rows.append([rep.scenario, rep.layout, rep.policy, "mean",
                     agg["throughput_s_mean"]["mean"], agg["fte"]["mean"],
                     agg["on_time_pct"]["mean"], agg["area_m2"]["mean"], seed])
    return rows


def write_csv(reports: Sequence[KpiReport], path) -> Path:
    path = Path(path)
    try:
        with open(path, "w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(CSV_COLUMNS)
            for row in report_rows(reports):
                w.writerow([_fmt(v) for v in row])
    except OSError as exc:
        raise OSError(f"cannot write report {path}: {exc.strerror or exc}") from exc
    return path


def reports_to_json(reports: Sequence[KpiReport]) -> dict:
    return {"scenarios": [
        {"scenario": r.scenario, "layout": r.layout, "policy": r.policy,
         "replications": [asdict(k) for k in r.replications],
         "aggregates": r.aggregates()}
        for r in reports]}


def reports_from_json(data: dict) -> list:
    return [KpiReport(s["scenario"], s["layout"], s["policy"],
                      [ReplicationKpi(**k) for k in s["replications"]])
            for s in data["scenarios"]]


def write_json(reports: Sequence[KpiReport], path) -> Path:
    path = Path(path)
    try:
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(reports_to_json(reports), fh, indent=2, sort_keys=True)
            fh.write("\n")
    except OSError as exc:
        raise OSError(f"cannot write report {path}: {exc.strerror or exc}") from exc
    return path


def load_report_json(path) -> list:
    with open(path, encoding="utf-8") as fh:
        return reports_from_json(json.load(fh))


def emit_report(reports: Sequence[KpiReport], out_dir, formats=("csv", "json"),
                stem: str = "kpi") -> list:
    """Write the requested report files into ``out_dir``; returns their paths."""
    out_dir = Path(out_dir)
    try:
        out_dir.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise OSError(f"cannot create output directory {out_dir}: {exc.strerror or exc}") from exc
    paths = []
    for fmt in formats:
        if fmt == "csv":
            paths.append(write_csv(reports, out_dir / f"{stem}.csv"))
        elif fmt == "json":
            paths.append(write_json(reports, out_dir / f"{stem}.json"))
        elif fmt == "txt":
            p = out_dir / f"{stem}.txt"
            p.write_text(comparison_table(reports) + "\n", encoding="utf-8")
            paths.append(p)
        else:
            raise ValueError(f"unknown report format {fmt!r}")
    return paths


def mmss(seconds: float) -> str:
    if not math.isfinite(seconds):
        return "--:--"
    s = int(round(seconds))
    return f"{s // 60}:{s % 60:02d}"


def comparison_table(reports: Sequence[KpiReport]) -> str:
    """Layout | throughput (min:sec) | FTE | on-time % | area, one line per scenario."""
    head = f"{'Layout':<22}{'Throughput':>12}{'FTE':>6}{'On-Time (%)':>13}{'Area (m2)':>11}"
    lines = [head, "-" * len(head)]
    for r in reports:
        agg = r.aggregates()
        lines.append(f"{r.scenario:<22}{mmss(agg['throughput_s_mean']['mean']):>12}"
                     f"{r.pooled_fte:>6}{agg['on_time_pct']['mean']:>13.2f}"
                     f"{agg['area_m2']['mean']:>11.0f}")
    return "\n".join(lines)


def warmup_profile(results, day_length: float, window: int = 3) -> np.ndarray:
    """Per-day mean throughput across replications, smoothed by a moving average.

    A Welch-style aid for picking the warm-up length by eye; it does not
    truncate anything itself.
    """
    n_days = max(int(math.ceil(r.window[1] / day_length)) for r in results)
    per_day = np.full((len(results), n_days), np.nan)
    for i, r in enumerate(results):
        day = (r.order_release // day_length).astype(int)
        tp = r.order_completion - r.order_release
        for d in range(n_days):
            sel = (day == d) & ~np.isnan(tp)
            if sel.any():
                per_day[i, d] = tp[sel].mean()
    mean = np.nanmean(per_day, axis=0)
    if window <= 1:
        return mean
    kernel = np.ones(window) / window
    return np.convolve(mean, kernel, mode="valid")
