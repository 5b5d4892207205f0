"""Monte Carlo estimation of FDR, power and Hamming distance over replicates of a scenario."""

from __future__ import annotations

import dataclasses
import time

import numpy as np
import pandas as pd
from joblib import Parallel, delayed

from knockpipe.core.misc import ComputationError, KnockpipeErrorMessage, get_logger, spawn_seeds
from knockpipe.modules.knockoff_filter import PipelineSettings, SelectionResult, knockoff_select, lasso_cv_select
from knockpipe.modules.sim_harness.evaluation import SelectionMetrics, evaluate_selection
from knockpipe.modules.sim_harness.scenario import Scenario
from knockpipe.modules.sim_harness.synthetic import generate_synthetic

logger = get_logger(__name__)

METRICS = ("fdp", "tp", "fp", "fn", "hd", "power", "size")


@dataclasses.dataclass(frozen=True)
class ReplicateResult:
    """Outcome of one replicate: the metrics, or the error that made it fail."""

    replicate: int
    metrics: SelectionMetrics | None
    selected: tuple[int, ...] = ()
    error: str | None = None

    @property
    def failed(self) -> bool:
        """Whether the replicate failed."""
        return self.metrics is None


@dataclasses.dataclass(frozen=True, eq=False)
class MonteCarloReport:
    """Per-replicate metrics and their aggregates.

    Attributes:
        scenario: The scenario.
        method: Label of the selection procedure.
        replicates: One result per replicate, in replicate order.
        runtime: Wall-clock seconds (logged, never written to the output files).
    """

    scenario: Scenario
    method: str
    replicates: tuple[ReplicateResult, ...]
    runtime: float = 0.0

    @property
    def successful(self) -> list[ReplicateResult]:
        """The replicates that did not fail."""
        return [result for result in self.replicates if not result.failed]

    @property
    def failures(self) -> int:
        """Number of failed replicates."""
        return len(self.replicates) - len(self.successful)

    def _values(self, metric: str) -> np.ndarray:
        return np.array([getattr(result.metrics, metric) for result in self.successful], dtype=float)

    def mean(self, metric: str) -> float:
        """Mean of a metric over the successful replicates."""
        return float(np.mean(self._values(metric)))

    def standard_error(self, metric: str) -> float:
        """Sample standard deviation over sqrt(R) of a metric; nan with fewer than two replicates."""
        values = self._values(metric)
        if len(values) < 2:
            return float("nan")
        return float(np.std(values, ddof=1) / np.sqrt(len(values)))

    @property
    def mean_fdr(self) -> float:
        """Estimated FDR, the mean false discovery proportion."""
        return self.mean("fdp")

    @property
    def fdr_se(self) -> float:
        """Standard error of `mean_fdr`."""
        return self.standard_error("fdp")

    @property
    def mean_power(self) -> float:
        """Mean power."""
        return self.mean("power")

    def to_frame(self) -> pd.DataFrame:
        """Return one row per replicate, failed replicates included with nan metrics."""
        rows = []
        for result in self.replicates:
            row = {"replicate": result.replicate}
            for metric in METRICS:
                row[metric] = getattr(result.metrics, metric) if result.metrics else np.nan
            row["empty_truth"] = result.metrics.empty_truth if result.metrics else np.nan
            row["selected"] = " ".join(str(j + 1) for j in result.selected)
            row["error"] = result.error or ""
            rows.append(row)
        return pd.DataFrame.from_records(
            rows, columns=["replicate", *METRICS, "empty_truth", "selected", "error"]
        )

    def summary(self) -> dict:
        """Return the aggregates as a JSON-compatible structure."""
        summary = {
            "scenario": self.scenario.to_dict(),
            "method": self.method,
            "replicates": len(self.replicates),
            "successful": len(self.successful),
            "failures": self.failures,
            "failed_replicates": [
                {"replicate": result.replicate, "error": result.error} for result in self.replicates if result.failed
            ],
            "mean_fdr": self.mean_fdr,
            "fdr_se": self.fdr_se,
        }
        for metric in ("power", "tp", "fp", "fn", "hd", "size"):
            summary[f"mean_{metric}"] = self.mean(metric)
            summary[f"{metric}_se"] = self.standard_error(metric)
        summary["empty_truth"] = any(result.metrics.empty_truth for result in self.successful)
        return summary


def run_replicate(sc: Scenario, replicate: int, settings: PipelineSettings) -> ReplicateResult:
    """Generate one replicate, run the selection procedure on it and evaluate the selection.

    Args:
        sc: The scenario.
        replicate: Replicate index.
        settings: Pipeline settings with the scenario applied.

    Returns:
        The result; knockpipe errors are caught and recorded.
    """
    try:
        d, true_support, _ = generate_synthetic(sc, replicate)
        seed = spawn_seeds([sc.base_seed, replicate], 1)[0]
        selection: SelectionResult
        if sc.statistic == "lasso-cv":
            selection = lasso_cv_select(d, settings, seed)
        else:
            selection = knockoff_select(d, settings, seed)
    except KnockpipeErrorMessage as e:
        return ReplicateResult(replicate, None, error=e.one_line())
    return ReplicateResult(replicate, evaluate_selection(selection.selected, true_support), selection.selected)


def run_monte_carlo(
    sc: Scenario,
    settings: PipelineSettings | None = None,
    n_jobs: int = 1,
    max_failure_rate: float = 0.05,
) -> MonteCarloReport:
    """Run the selection procedure on every replicate of a scenario.

    Replicates are generated from (base_seed, replicate index), so the report does not depend on the number of
    workers or on the order in which replicates finish. Failed replicates are excluded from the aggregates.

    Args:
        sc: The scenario.
        settings: Base pipeline settings; the scenario's q, k, variant and statistic override them.
        n_jobs: Number of replicates run in parallel.
        max_failure_rate: Largest tolerated fraction of failed replicates.

    Returns:
        The report.

    Raises:
        ComputationError: If more than `max_failure_rate` of the replicates (or all of them) fail.
    """
    settings = sc.to_settings(settings or PipelineSettings())
    # Parallel over replicates only
    settings = dataclasses.replace(settings, n_jobs=1)
    logger.info("Running %d replicates of %s", sc.replicates, sc.label)
    start = time.perf_counter()
    results = Parallel(n_jobs=n_jobs)(
        delayed(run_replicate)(sc, replicate, settings) for replicate in range(sc.replicates)
    )
    report = MonteCarloReport(sc, sc.label, tuple(results), time.perf_counter() - start)

    for result in report.replicates:
        if result.failed:
            logger.warning("Replicate %d excluded: %s", result.replicate, result.error)
    if report.failures == sc.replicates or report.failures > max_failure_rate * sc.replicates:
        raise ComputationError(
            f"{report.failures} of {sc.replicates} replicates failed (tolerated fraction {max_failure_rate:g})",
            "sim_harness",
            "run_monte_carlo",
        )
    logger.info(
        "%s: mean FDP %.4f (SE %.4f), mean power %.4f over %d replicates in %.1f s",
        report.method,
        report.mean_fdr,
        report.fdr_se,
        report.mean_power,
        len(report.successful),
        report.runtime,
    )
    return report
