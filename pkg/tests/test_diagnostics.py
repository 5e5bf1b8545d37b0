import numpy as np
import pytest

from hdcce import (
    ConfigError,
    SimulationConfig,
    cross_sectional_means,
    eigen_spike_report,
    hd_projection,
    oracle_projection,
    projection_quality,
    re_condition_sample,
    simulate_panel,
    spectral_summary,
)
from oracles import re_constant_minimize


def test_re_orthonormal_design_is_unit():
    # A'A/nT = I: phi(b) = sqrt(|I|) * ||b||_2 / ||b_I||_1 >= 1 on the cone
    rng = np.random.default_rng(0)
    nT, p = 40, 5
    Q, _ = np.linalg.qr(rng.standard_normal((nT, p)))
    A = Q * np.sqrt(nT)
    est = re_condition_sample(A, I=[0, 2], samples=500, seed=1)
    assert est.phi_lower >= 1.0 - 1e-10


def test_re_duplicated_columns_detected():
    # column 1 duplicates column 0: b = (1, -1, 0) lies in the cone when
    # I covers all columns and gives Ab = 0, so sampling finds tiny phi
    rng = np.random.default_rng(2)
    x = rng.standard_normal(30)
    A = np.column_stack([x, x, rng.standard_normal(30)])
    est = re_condition_sample(A, I=[0, 1, 2], samples=2000, seed=3)
    ref = re_condition_sample(np.column_stack([x, rng.standard_normal(30), A[:, 2]]),
                              I=[0, 1, 2], samples=2000, seed=3)
    assert est.phi_lower < 0.5 * ref.phi_lower


def test_re_sampled_value_upper_bounds_exact_constant():
    # the sampled minimum cannot undercut the true cone infimum
    rng = np.random.default_rng(4)
    A = rng.standard_normal((12, 4))
    I = np.array([0, 1])
    exact = re_constant_minimize(A, I, starts=300, seed=0)
    est = re_condition_sample(A, I, samples=5000, seed=5)
    assert est.phi_lower >= exact * 0.95


def test_re_deterministic_and_monotone_in_samples():
    rng = np.random.default_rng(6)
    A = rng.standard_normal((20, 6))
    e1 = re_condition_sample(A, [0, 1], samples=100, seed=7)
    e2 = re_condition_sample(A, [0, 1], samples=100, seed=7)
    assert e1.phi_lower == e2.phi_lower
    # more samples of the same stream can only lower the running minimum
    e3 = re_condition_sample(A, [0, 1], samples=5000, seed=7)
    assert e3.phi_lower <= e1.phi_lower + 1e-12


def test_re_input_validation():
    A = np.eye(4)
    with pytest.raises(ConfigError):
        re_condition_sample(A, [], samples=10)
    with pytest.raises(ConfigError):
        re_condition_sample(A, [5], samples=10)
    with pytest.raises(ConfigError):
        re_condition_sample(A, [0], samples=0)


def test_projection_quality_oracle_annihilates():
    rng = np.random.default_rng(8)
    F = rng.standard_normal((15, 3))
    q = projection_quality(oracle_projection(F), F)
    assert q["ratio"] <= 1e-10
    assert q["sym_err"] <= 1e-12
    assert q["idem_err"] <= 1e-10


def test_projection_quality_identity_keeps_everything():
    rng = np.random.default_rng(9)
    xbar = rng.standard_normal((10, 3))
    proj = hd_projection(xbar, spectral_summary(xbar), 0)  # identity fallback
    F = rng.standard_normal((10, 2))
    assert projection_quality(proj, F)["ratio"] == pytest.approx(1.0)


def test_projection_quality_shape_mismatch():
    F = np.zeros((4, 2))
    with pytest.raises(ConfigError):
        projection_quality(oracle_projection(np.zeros((5, 1))), F)


def test_eigen_spike_report_examples():
    xbar = np.array([[2.0, 0.0, 0.0], [0.0, 1.0, 0.0]]) * np.sqrt(2)
    spec = spectral_summary(xbar)  # eigvals (4, 1, 0)
    rep = eigen_spike_report(spec, 1)
    assert rep["head"] == [pytest.approx(4.0)]
    assert rep["gap_ratio"] == pytest.approx(4.0)
    assert rep["head_over_p"] == pytest.approx(4.0 / 3)
    rep2 = eigen_spike_report(spec, 2)
    assert rep2["gap_ratio"] == float("inf")  # zero tail sentinel
    with pytest.raises(ConfigError):
        eigen_spike_report(spec, 3)
    with pytest.raises(ConfigError):
        eigen_spike_report(spec, 0)


def test_spike_head_scales_with_n():
    # the spike share lambda_3 / p stabilizes as n grows: estimates at
    # n = 50 and n = 100 agree within 30 percent on average
    def head_over_p(n, seeds):
        vals = []
        for s in seeds:
            panel, _ = simulate_panel(SimulationConfig(n=n, T=50, d=4, seed=s))
            spec = spectral_summary(cross_sectional_means(panel.X))
            vals.append(eigen_spike_report(spec, 3)["head_over_p"])
        return np.median(vals)

    a = head_over_p(50, range(30))
    b = head_over_p(100, range(30))
    assert abs(a - b) / a <= 0.30
