"""Synthetic sparse logistic designs and Monte Carlo estimates of FDR, power and Hamming distance."""

from .evaluation import SelectionMetrics, evaluate_selection
from .monte_carlo import MonteCarloReport, ReplicateResult, run_monte_carlo, run_replicate
from .scenario import CORRELATIONS, SCENARIO_STATISTICS, Scenario
from .synthetic import generate_synthetic, replicate_rng
