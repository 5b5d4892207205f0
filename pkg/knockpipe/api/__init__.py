"""Public classes and functions of knockpipe, for use from Python code."""

from knockpipe.core.misc import (
    ComputationError,
    ConvergenceError,
    InputError,
    KnockpipeErrorMessage,
    NotPositiveDefiniteError,
    SeparationError,
    get_logger,
)
from knockpipe.modules.data_model import Dataset, FoldAssignment, destandardize, load_csv, make_folds, standardize
from knockpipe.modules.gaussian_knockoffs import (
    KnockoffCopy,
    KnockoffModel,
    compute_s_equicorrelated,
    estimate_covariance,
    fit_knockoff_model,
    knockoff_parameters,
    sample_knockoffs,
)
from knockpipe.modules.inference import (
    PredictionReport,
    RefitEstimates,
    Scale,
    average_marginal_effects,
    cv_prediction_error,
    marginal_effects,
    refit_logistic,
    refit_ols,
)
from knockpipe.modules.knockoff_filter import (
    PipelineSettings,
    SelectionResult,
    Variant,
    WStatistics,
    aggregate_afdr,
    knockoff_select,
    lcd_statistics,
    lsm_statistics,
    make_selector,
    threshold,
)
from knockpipe.modules.sim_harness import (
    MonteCarloReport,
    Scenario,
    SelectionMetrics,
    evaluate_selection,
    generate_synthetic,
    run_monte_carlo,
)
from knockpipe.modules.sparse_glm import (
    LassoFit,
    LassoPath,
    SolverSettings,
    cross_validate_lambda,
    fit_logistic_lasso,
    fit_path,
)
