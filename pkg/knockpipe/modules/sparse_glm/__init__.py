"""l1-penalized logistic regression, regularization paths and cross-validated penalty choice."""

from .cv import cross_validate_lambda
from .path import LassoPath, entry_levels, fit_path, fit_path_on_grid, make_grid
from .solver import (
    LassoFit,
    SolverSettings,
    fit_logistic_lasso,
    kkt_violation,
    lambda_max,
    mean_nll,
    nll_gradient,
)
