"""Five-layout comparison at reduced scale.

Runs the shipped bundle under common random numbers and prints the KPI
table. The default is 3 replications of 5 days so it finishes in under a
minute; pass ``--full`` for 10 replications of 20 days.

    python demos/compare_layouts.py [--full] [--out DIR]
"""

import argparse

from palletsim.config import table2_scenarios
from palletsim.engine import ReplicationPlan
from palletsim.harness import run_compare


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--full", action="store_true")
    ap.add_argument("--out", default=None, help="also write CSV/JSON reports here")
    args = ap.parse_args()

    plan = (ReplicationPlan(n_days=20, warm_up_days=2, replications=10) if args.full
            else ReplicationPlan(n_days=5, warm_up_days=1, replications=3))
    cmp = run_compare(table2_scenarios(), plan=plan, out_dir=args.out)
    print(cmp.table())

    base = cmp.report("conv_random").throughput_mean
    print()
    for rep in cmp.reports:
        change = rep.throughput_mean / base - 1.0
        print(f"{rep.scenario:16s} {change:+7.1%} throughput vs conv_random")


if __name__ == "__main__":
    main()
