"""Scenario B experiment: moderately high-dimensional regime T <= p < nT.

Runs the lasso estimator with 10-fold cross-validated penalty against its
oracle counterpart at (n, T) = (50, 50) for p in {150, 300}.  Full scale is
1000 runs; pass --runs to shrink it.
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
    ap.add_argument("--out", type=Path, default=Path("results/scenario_b"))
    args = ap.parse_args()

    for p in (150, 300):
        spec = ScenarioSpec(
            label="B", n=50, T=50, p=p,
            estimators=("hd_lasso", "oracle_lasso"),
            runs=args.runs, master_seed=args.seed,
            lambda_rule="cv", cv_folds=10,
        )
        report = run_scenario(spec, threads=args.threads)
        out = args.out / f"p{p}"
        out.mkdir(parents=True, exist_ok=True)
        write_deviations_csv(out / "deviations.csv", report)
        write_summary_csv(out / "summary.csv", summarize(report))
        write_json(out / "meta.json", {"n": 50, "T": 50, "p": p, "runs": args.runs,
                                       "master_seed": args.seed, "lambda_rule": "cv"})
        print(f"p={p}: wrote {out}")


if __name__ == "__main__":
    main()
