"""Unpenalized refits, marginal effects and cross-validated prediction error of selection procedures."""

from .prediction import PredictionReport, cv_prediction_error
from .refit import (
    INTERCEPT,
    RefitEstimates,
    RefitKind,
    Scale,
    average_marginal_effects,
    design_matrix,
    marginal_effects,
    refit_logistic,
    refit_ols,
    significance_stars,
)
from .tables import (
    AME,
    LOGISTIC,
    OLS_ALL,
    OLS_CONTINUOUS,
    check_refit_shrinkage,
    inference_frame,
    prediction_frame,
    prediction_rows,
    render_inference,
    render_prediction,
    run_refits,
)
