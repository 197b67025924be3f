"""Sweep the CPU performance-zone share and watch throughput and area.

The P zone is ground level only, so a bigger P needs more wide aisles.
Throughput tends to improve while the footprint grows.

    python demos/zone_size_sweep.py
"""

import dataclasses

from palletsim.config import default_scenario
from palletsim.engine import ReplicationPlan
from palletsim.harness import run_scenario
from palletsim.kpi import mmss

PLAN = ReplicationPlan(n_days=4, warm_up_days=1, replications=2)
SPLITS = [(0.05, 0.65, 0.30), (0.10, 0.60, 0.30), (0.15, 0.55, 0.30), (0.20, 0.50, 0.30)]


def main():
    base = default_scenario("cpu")
    print(f"{'P/E/S':>16}  {'throughput':>10}  {'FTE':>4}  {'area m2':>8}")
    for split in SPLITS:
        spec = dataclasses.replace(base.layout, zone_fractions=split)
        s = dataclasses.replace(base, name=f"cpu_{split[0]:.2f}", layout=spec)
        report, _ = run_scenario(s, plan=PLAN)
        label = "/".join(f"{x:.2f}" for x in split)
        print(f"{label:>16}  {mmss(report.throughput_mean):>10}  "
              f"{report.values('fte').mean():4.1f}  {report.values('area_m2')[0]:8.0f}")


if __name__ == "__main__":
    main()
