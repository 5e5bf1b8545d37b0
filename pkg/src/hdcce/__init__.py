"""High-dimensional CCE estimation for panels with interactive fixed effects."""

__version__ = "0.1.0"

from .diagnostics import REEstimate, eigen_spike_report, projection_quality, re_condition_sample
from .errors import ConfigError, DataError, NumericError
from .estimators import (
    EstimatorOptions,
    FitReport,
    estimate_cce_pooled,
    estimate_hdcce,
    estimate_oracle,
)
from .io import (
    read_json,
    read_x_csv,
    read_y_csv,
    write_json,
    write_x_csv,
    write_y_csv,
)
from .montecarlo import McReport, RunRecord, ScenarioSpec, run_one, run_scenario, summarize
from .projection import (
    ProjectionMatrix,
    TransformedPanel,
    classical_cce_projection,
    hd_projection,
    oracle_projection,
    transform_panel,
)
from .simulate import (
    FactorStructure,
    PanelDataset,
    SimulationConfig,
    mean_loading_matrix,
    simulate_panel,
)
from .solvers import (
    CvResult,
    LassoFit,
    cv_lambda,
    default_lambda_grid,
    effective_noise_lambda,
    lambda_max,
    lasso,
    least_squares,
    theory_penalty_rate,
)
from .spectral import (
    SpectralSummary,
    cross_sectional_means,
    default_tau,
    khat_threshold,
    ktilde_ratio,
    spectral_summary,
)
