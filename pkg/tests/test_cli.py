import json

import numpy as np
import pytest

from hdcce import read_x_csv, read_y_csv, write_x_csv, write_y_csv
from hdcce.cli import main


def run_cli(args):
    return main([str(a) for a in args])


def read(path):
    return path.read_bytes()


def test_simulate_writes_reproducible_files(tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    for out in (a, b):
        assert run_cli(["simulate", "--n", 8, "--T", 6, "--d", 1, "--seed", 3, "--out", out]) == 0
    for name in ("y.csv", "x.csv", "truth.json"):
        assert read(a / name) == read(b / name)
    X = read_x_csv(a / "x.csv")
    Y = read_y_csv(a / "y.csv")
    assert X.shape == (8, 6, 6) and Y.shape == (8, 6)


def test_simulate_missing_required_flag_is_config_error(tmp_path):
    assert run_cli(["simulate", "--n", 5, "--T", 5, "--out", tmp_path]) == 2


def test_simulate_config_file_with_flag_override(tmp_path):
    cfgf = tmp_path / "cfg.json"
    cfgf.write_text(json.dumps({"n": 4, "T": 5, "d": 0, "seed": 9}))
    out1, out2 = tmp_path / "o1", tmp_path / "o2"
    assert run_cli(["simulate", "--config", cfgf, "--out", out1]) == 0
    assert run_cli(["simulate", "--n", 4, "--T", 5, "--d", 0, "--seed", 9, "--out", out2]) == 0
    assert read(out1 / "x.csv") == read(out2 / "x.csv")


def test_csv_round_trip_lossless(tmp_path):
    rng = np.random.default_rng(0)
    X = rng.standard_normal((3, 4, 2)) * np.pi
    Y = rng.standard_normal((3, 4)) / 3.0
    write_x_csv(tmp_path / "x.csv", X)
    write_y_csv(tmp_path / "y.csv", Y)
    assert np.array_equal(read_x_csv(tmp_path / "x.csv"), X)
    assert np.array_equal(read_y_csv(tmp_path / "y.csv"), Y)


def test_scree_output_table(tmp_path, capsys):
    assert run_cli(["simulate", "--n", 50, "--T", 50, "--d", 4, "--seed", 0, "--out", tmp_path]) == 0
    assert run_cli(["scree", "--x", tmp_path / "x.csv"]) == 0
    lines = capsys.readouterr().out.strip().splitlines()
    assert lines[0] == "k,eigval,share,cumshare"
    body = [l for l in lines[1:] if not l.startswith("#")]
    assert len(body) == 15
    eig = [float(l.split(",")[1]) for l in body]
    assert eig == sorted(eig, reverse=True)
    trailer = {l.split(",")[0]: l.split(",")[1] for l in lines if l.startswith("#")}
    assert int(trailer["# khat"]) == 3
    assert float(trailer["# tau"]) == pytest.approx(0.05 * eig[0])
    assert int(trailer["# ktilde"]) >= 1


def test_estimate_default_cv_lasso(tmp_path):
    assert run_cli(["simulate", "--n", 30, "--T", 30, "--d", 2, "--seed", 1, "--out", tmp_path]) == 0
    out = tmp_path / "fit"
    assert run_cli([
        "estimate", "--x", tmp_path / "x.csv", "--y", tmp_path / "y.csv",
        "--cv", 5, "--seed", 0, "--out", out, "--diagnostics",
        "--truth", tmp_path / "truth.json",
    ]) == 0
    fit = json.loads((out / "fit.json").read_text())
    assert fit["method"] == "hd_lasso"
    assert fit["k_used"] == 3
    assert fit["lambda_used"] > 0
    assert fit["converged"] is True
    assert fit["diagnostics"]["proj_factor_ratio"] <= 0.5
    beta_lines = (out / "beta.csv").read_text().strip().splitlines()
    assert beta_lines[0] == "j,beta_hat"
    assert len(beta_lines) == 10
    assert (out / "diagnostics.csv").exists()


def test_estimate_fixed_lambda_and_ls(tmp_path):
    assert run_cli(["simulate", "--n", 20, "--T", 25, "--d", 1, "--seed", 2, "--out", tmp_path]) == 0
    base = ["estimate", "--x", tmp_path / "x.csv", "--y", tmp_path / "y.csv"]
    assert run_cli(base + ["--lambda", 0.5, "--out", tmp_path / "f1"]) == 0
    fit = json.loads((tmp_path / "f1" / "fit.json").read_text())
    assert fit["lambda_used"] == 0.5
    assert run_cli(base + ["--method", "ls", "--out", tmp_path / "f2"]) == 0
    assert json.loads((tmp_path / "f2" / "fit.json").read_text())["method"] == "hd_ls"
    assert run_cli(base + ["--cce", "--out", tmp_path / "f3"]) == 0
    assert json.loads((tmp_path / "f3" / "fit.json").read_text())["method"] == "cce"


def test_estimate_raw_columns_one_based(tmp_path):
    assert run_cli(["simulate", "--n", 15, "--T", 20, "--d", 1, "--seed", 4, "--out", tmp_path]) == 0
    base = ["estimate", "--x", tmp_path / "x.csv", "--y", tmp_path / "y.csv", "--lambda", 0.2]
    assert run_cli(base + ["--raw-columns", "1,2,3", "--out", tmp_path / "ok"]) == 0
    assert run_cli(base + ["--raw-columns", "0,1", "--out", tmp_path / "bad"]) == 2


def test_estimate_nan_in_x_names_cell(tmp_path, capsys):
    assert run_cli(["simulate", "--n", 3, "--T", 4, "--d", 0, "--seed", 5, "--out", tmp_path]) == 0
    xcsv = tmp_path / "x.csv"
    lines = xcsv.read_text().splitlines()
    parts = lines[5].split(",")  # some interior cell
    lines[5] = ",".join(parts[:3] + ["nan"])
    xcsv.write_text("\n".join(lines) + "\n")
    rc = run_cli(["estimate", "--x", xcsv, "--y", tmp_path / "y.csv", "--lambda", 0.1,
                  "--out", tmp_path / "f"])
    assert rc == 3
    err = capsys.readouterr().err
    assert f"unit={parts[0]}" in err and f"time={parts[1]}" in err and f"j={parts[2]}" in err


def test_estimate_shape_mismatch_is_data_error(tmp_path):
    assert run_cli(["simulate", "--n", 4, "--T", 5, "--d", 0, "--seed", 6, "--out", tmp_path]) == 0
    write_y_csv(tmp_path / "y.csv", np.zeros((4, 6)))
    rc = run_cli(["estimate", "--x", tmp_path / "x.csv", "--y", tmp_path / "y.csv",
                  "--lambda", 0.1, "--out", tmp_path / "f"])
    assert rc == 3


def test_mc_writes_all_outputs(tmp_path):
    rc = run_cli([
        "mc", "--n", 15, "--T", 15, "--p", 9, "--runs", 3, "--seed", 1,
        "--estimators", "hd_ls,cce", "--out", tmp_path, "--diagnostics",
    ])
    assert rc == 0
    for name in ("deviations.csv", "summary.csv", "meta.json", "diagnostics.csv"):
        assert (tmp_path / name).exists()
    meta = json.loads((tmp_path / "meta.json").read_text())
    assert meta["runs"] == 3 and meta["estimators"] == ["hd_ls", "cce"]
    dev = (tmp_path / "deviations.csv").read_text().splitlines()
    assert dev[0] == "run,estimator,j,delta"
    # 3 runs x 2 estimators x 4 representative coordinates
    assert len(dev) == 1 + 3 * 2 * 4


def test_mc_byte_identical_across_thread_counts(tmp_path, monkeypatch):
    args = ["mc", "--n", 12, "--T", 12, "--p", 9, "--runs", 4, "--seed", 7,
            "--estimators", "hd_ls,oracle_ls"]
    out1, out2, out3 = tmp_path / "t1", tmp_path / "t2", tmp_path / "env"
    assert run_cli(args + ["--threads", 1, "--out", out1]) == 0
    assert run_cli(args + ["--threads", 2, "--out", out2]) == 0
    monkeypatch.setenv("HDCCE_THREADS", "2")
    assert run_cli(args + ["--threads", 1, "--out", out3]) == 0
    assert read(out1 / "deviations.csv") == read(out2 / "deviations.csv")
    assert read(out1 / "summary.csv") == read(out2 / "summary.csv")
    assert read(out1 / "deviations.csv") == read(out3 / "deviations.csv")
    assert json.loads((out3 / "meta.json").read_text())["threads"] == 2


def test_mc_invalid_estimator_is_config_error(tmp_path):
    rc = run_cli(["mc", "--n", 10, "--T", 10, "--p", 9, "--runs", 1,
                  "--estimators", "bogus", "--out", tmp_path])
    assert rc == 2


def test_mc_scenario_label_checked(tmp_path):
    rc = run_cli(["mc", "--scenario", "A", "--n", 10, "--T", 10, "--p", 15,
                  "--runs", 1, "--out", tmp_path])
    assert rc == 2
