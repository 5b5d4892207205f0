"""Datasets, standardization, CSV ingestion and cross-validation folds."""

from .dataset import Dataset, destandardize, load_csv, standardize
from .folds import FoldAssignment, make_folds
