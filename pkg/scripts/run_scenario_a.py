"""Scenario A experiment: low-dimensional regime p < T.

Reproduces the boxplot data comparing the projected least-squares estimator,
its infeasible oracle counterpart, and classical pooled CCE at
(n, T) = (50, 50) for p in {15, 30, 45}.  Full scale is 1000 runs; pass
--runs to shrink it for a quick look.
"""

import argparse
from pathlib import Path

from hdcce import ScenarioSpec, run_scenario, summarize
from hdcce.io import write_deviations_csv, write_json, write_summary_csv


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--runs", type=int, default=1000)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--threads", type=int, default=1)
    ap.add_argument("--out", type=Path, default=Path("results/scenario_a"))
    args = ap.parse_args()

    for p in (15, 30, 45):
        spec = ScenarioSpec(
            label="A", n=50, T=50, p=p,
            estimators=("hd_ls", "oracle_ls", "cce"),
            runs=args.runs, master_seed=args.seed,
        )
        report = run_scenario(spec, threads=args.threads)
        out = args.out / f"p{p}"
        out.mkdir(parents=True, exist_ok=True)
        write_deviations_csv(out / "deviations.csv", report)
        write_summary_csv(out / "summary.csv", summarize(report))
        write_json(out / "meta.json", {"n": 50, "T": 50, "p": p, "runs": args.runs,
                                       "master_seed": args.seed})
        print(f"p={p}: wrote {out}")


if __name__ == "__main__":
    main()
