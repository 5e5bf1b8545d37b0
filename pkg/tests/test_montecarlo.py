import numpy as np
import pytest

from hdcce import ConfigError, McReport, RunRecord, ScenarioSpec, run_one, run_scenario, summarize
from hdcce.montecarlo import _run_seed


def small_spec(**kw):
    base = dict(
        label="custom",
        n=20,
        T=20,
        p=9,
        estimators=("hd_ls", "oracle_ls"),
        runs=6,
        master_seed=0,
    )
    base.update(kw)
    return ScenarioSpec(**base)


def test_spec_validation():
    with pytest.raises(ConfigError):
        small_spec(p=10).validate()  # not 3 + 3d
    with pytest.raises(ConfigError):
        small_spec(estimators=("nope",)).validate()
    with pytest.raises(ConfigError):
        small_spec(runs=0).validate()
    with pytest.raises(ConfigError):
        small_spec(label="A", p=21).validate()  # p >= T contradicts regime A
    small_spec(label="A", p=9).validate()
    small_spec(label="B", n=10, T=10, p=15).validate()
    small_spec(label="C", n=4, T=5, p=21).validate()


def test_representative_coordinates():
    assert small_spec(p=3).representative_coordinates() == (1,)
    assert small_spec(p=9).representative_coordinates() == (1, 4, 6, 8)
    assert small_spec(n=30, T=30, p=15).representative_coordinates() == (1, 4, 8, 12)


def test_run_seeds_distinct_across_runs():
    seeds = [_run_seed(0, r) for r in range(50)]
    assert len(set(seeds)) == 50


def test_runs_use_independent_panels():
    spec = small_spec(runs=4)
    report = run_scenario(spec)
    d = report.deltas("hd_ls", 1)
    assert d.size == 4
    assert np.unique(d).size == 4  # distinct draws, not repeats


def test_results_independent_of_estimator_list():
    # hd_ls deviations must not change when other estimators join the batch
    r1 = run_scenario(small_spec(estimators=("hd_ls",), runs=5))
    r2 = run_scenario(small_spec(estimators=("hd_ls", "oracle_ls", "cce"), runs=5))
    assert np.array_equal(r1.deltas("hd_ls", 1), r2.deltas("hd_ls", 1))


def test_prefix_property_when_extending_runs():
    r1 = run_scenario(small_spec(runs=3))
    r2 = run_scenario(small_spec(runs=6))
    assert np.array_equal(r1.deltas("hd_ls", 4), r2.deltas("hd_ls", 4)[:3])


def test_parallel_matches_serial():
    spec = small_spec(runs=6)
    serial = run_scenario(spec, threads=1)
    parallel = run_scenario(spec, threads=2)
    for est in spec.estimators:
        for j in spec.representative_coordinates():
            assert np.array_equal(serial.deltas(est, j), parallel.deltas(est, j))


def test_run_one_records_every_estimator():
    spec = small_spec(estimators=("hd_ls", "oracle_ls", "cce"), runs=1)
    recs = run_one(spec, 0)
    assert [r.estimator for r in recs] == ["hd_ls", "oracle_ls", "cce"]
    assert all(not r.failed for r in recs)
    assert all(set(r.beta_at) == {1, 4, 6, 8} for r in recs)


def test_summary_quantiles_match_sort_oracle():
    spec = small_spec(runs=12)
    report = run_scenario(spec)
    rows = summarize(report)
    row = next(r for r in rows if r["estimator"] == "hd_ls" and r["coordinate"] == "1")
    deltas = report.deltas("hd_ls", 1)
    assert row["n_runs"] == 12
    for key, q in zip(("q05", "q25", "median", "q75", "q95"), (0.05, 0.25, 0.5, 0.75, 0.95)):
        assert abs(row[key] - np.quantile(np.sort(deltas), q)) <= 1e-12
    assert abs(row["mean"] - deltas.mean()) <= 1e-12


def test_summary_single_run_collapses_quantiles():
    report = run_scenario(small_spec(runs=1))
    row = summarize(report)[0]
    assert row["q05"] == row["median"] == row["q95"]


def test_summary_l1_row_present():
    report = run_scenario(small_spec(runs=3))
    rows = summarize(report)
    l1 = [r for r in rows if r["coordinate"] == "l1"]
    assert {r["estimator"] for r in l1} == {"hd_ls", "oracle_ls"}
    assert all(r["median"] >= 0 for r in l1)


def test_share_exact_zero_counts_lasso_zeros():
    spec = small_spec(estimators=("hd_lasso",), runs=5, lambda_rule="cv", cv_folds=5)
    rows = summarize(run_scenario(spec))
    null_row = next(r for r in rows if r["coordinate"] == "4")
    assert 0.0 <= null_row["share_exact_zero"] <= 1.0
    signal_row = next(r for r in rows if r["coordinate"] == "1")
    assert signal_row["share_exact_zero"] <= null_row["share_exact_zero"]


def test_excluded_records_dropped_from_quantiles():
    report = run_scenario(small_spec(runs=3))
    reps = report.rep_coords
    report.records.append(
        RunRecord(
            run=99,
            estimator="hd_ls",
            beta_at={j: float("nan") for j in reps},
            l1_error=float("nan"),
            k_used=-1,
            converged=False,
            degenerate=False,
            failed=True,
            error="boom",
        )
    )
    rows = summarize(report)
    row = next(r for r in rows if r["estimator"] == "hd_ls" and r["coordinate"] == "1")
    assert row["n_runs"] == 3
    assert row["n_excluded"] == 1
    assert np.isfinite(row["median"])


def test_empty_report_rejected():
    spec = small_spec()
    report = McReport(spec=spec, records=[], rep_coords=(1,), true_beta=np.ones(9))
    with pytest.raises(ConfigError):
        summarize(report)


def test_cce_degenerate_runs_are_kept_but_flagged():
    # p = T = 15: classical CCE collapses, harness records degenerate fits
    spec = small_spec(n=10, T=15, p=15, estimators=("cce",), runs=2)
    report = run_scenario(spec)
    assert all(r.degenerate for r in report.records)
    assert all(not r.excluded for r in report.records)
    assert np.all(report.deltas("cce", 1) == -1.0)  # zero estimate, true value 1
