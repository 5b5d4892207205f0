"""Gaussian model-X knockoff construction and sampling."""

from .knockoffs import (
    DEFAULT_SHRINKAGE_LADDER,
    KnockoffCopy,
    KnockoffModel,
    compute_s_equicorrelated,
    estimate_covariance,
    fit_knockoff_model,
    knockoff_parameters,
    sample_knockoffs,
    shrink_to_positive_definite,
)
