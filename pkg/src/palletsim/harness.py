"""Experiment orchestration: run scenarios under common random numbers."""

from __future__ import annotations

import dataclasses
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional, Sequence

from .engine import ReplicationPlan, write_event_log
from .kpi import KpiReport, build_report, comparison_table, emit_report
from .processes import simulate_replication


class CompareError(RuntimeError):
    """A scenario failed; reports finished so far were written next to the error."""

    def __init__(self, scenario: str, cause: BaseException, partial: list):
        self.scenario = scenario
        self.partial = partial
        super().__init__(f"scenario {scenario!r} failed: {cause}")


@dataclass
class Comparison:
    seed: int
    plan: ReplicationPlan
    reports: list
    results: dict = field(default_factory=dict)  # scenario name -> list of results
    paths: list = field(default_factory=list)

    def report(self, name: str) -> KpiReport:
        return next(r for r in self.reports if r.scenario == name)

    def table(self) -> str:
        return comparison_table(self.reports)


def _plan_for(scenario, plan: Optional[ReplicationPlan], replications: Optional[int]):
    p = plan or scenario.plan
    if replications is not None:
        p = dataclasses.replace(p, replications=int(replications))
    return p


def _one(args):
    scenario, plan, seed, rep, log = args
    res = simulate_replication(scenario, plan, seed, rep, log=log)
    if not log:
        res.log = []
    return res


def run_scenario(scenario, seed: Optional[int] = None, plan: Optional[ReplicationPlan] = None,
                 replications: Optional[int] = None, parallel: int = 1, log: bool = False):
    """All replications of one scenario; returns (KpiReport, results)."""
    p = _plan_for(scenario, plan, replications)
    s = scenario.master_seed if seed is None else int(seed)
    tasks = [(scenario, p, s, r, log) for r in range(p.replications)]
    results = _map(tasks, parallel)
    return build_report(scenario, results), results


def _map(tasks, parallel: int):
    if parallel <= 1 or len(tasks) <= 1:
        return [_one(t) for t in tasks]
    with ProcessPoolExecutor(max_workers=parallel) as pool:
        return list(pool.map(_one, tasks))


def run_compare(scenarios: Sequence, seed: Optional[int] = None, parallel: int = 1,
                out_dir=None, replications: Optional[int] = None,
                plan: Optional[ReplicationPlan] = None, formats=("csv", "json"),
                keep_results: bool = False, write_logs: bool = False) -> Comparison:
    """Run every scenario on the same seed and replication indices.

    Sharing (seed, replication) means every scenario sees the same arrival
    and order streams, so differences come from layout and policy alone.
    With ``out_dir`` the joint report plus one sub-directory per scenario is
    written; a failing scenario leaves the finished ones on disk.
    """
    if len(scenarios) < 2:
        raise ValueError("a comparison needs at least two scenarios")
    names = [s.name for s in scenarios]
    if len(set(names)) != len(names):
        raise ValueError("scenario names must be unique")
    seed = scenarios[0].master_seed if seed is None else int(seed)
    base_plan = _plan_for(scenarios[0], plan, replications)
    out = Path(out_dir) if out_dir is not None else None

    tasks = [(s, _plan_for(s, plan or base_plan, replications), seed, r, write_logs)
             for s in scenarios for r in range(base_plan.replications)]
    reports, kept, paths = [], {}, []
    current = "<parallel batch>"
    try:
        if parallel > 1:
            flat = _map(tasks, parallel)
            by_name = {n: [] for n in names}
            for res in flat:
                by_name[res.scenario].append(res)
            groups = [(s, by_name[s.name]) for s in scenarios]
        else:
            groups = None
        for i, s in enumerate(scenarios):
            current = s.name
            if groups is None:
                res = [_one(t) for t in tasks if t[0] is s]
            else:
                res = groups[i][1]
            res.sort(key=lambda r: r.replication)
            rep = build_report(s, res)
            reports.append(rep)
            if keep_results:
                kept[s.name] = res
            if out is not None:
                sub = out / s.name
                paths += emit_report([rep], sub, formats)
                if write_logs:
                    for r in res:
                        p = sub / f"events_rep{r.replication:02d}.ndjson"
                        write_event_log(r.log, p)
                        paths.append(p)
    except Exception as exc:  # keep what finished, then fail loudly
        if out is not None and reports:
            emit_report(reports, out, formats, stem="kpi_partial")
        raise CompareError(current, exc, reports) from exc
    if out is not None:
        paths = emit_report(reports, out, tuple(formats) + ("txt",)) + paths
    return Comparison(seed, base_plan, reports, kept, paths)
