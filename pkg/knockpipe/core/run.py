"""Implementations of the knockpipe subcommands.

Every command reads its input files, runs the wrapped modules with the merged config and writes its outputs.
Errors are raised as `KnockpipeErrorMessage` and turned into exit codes by the caller.
"""

# ruff: noqa: T201
from __future__ import annotations

import argparse
import json
from pathlib import Path

from knockpipe.core import config as knockpipe_config
from knockpipe.core import io
from knockpipe.core.misc import ComputationError, InputError, get_logger, parse_index_list, spawn_seeds
from knockpipe.core.schema import build_schema
from knockpipe.modules.data_model import Dataset, load_csv, make_folds, standardize
from knockpipe.modules.gaussian_knockoffs import fit_knockoff_model, sample_knockoffs
from knockpipe.modules.inference import (
    cv_prediction_error,
    inference_frame,
    prediction_frame,
    prediction_rows,
    render_inference,
    render_prediction,
    run_refits,
)
from knockpipe.modules.knockoff_filter import (
    PipelineSettings,
    fit_at_cv_penalty,
    knockoff_select,
    make_selector,
    render_selection,
    selection_to_dict,
)
from knockpipe.modules.sim_harness import Scenario, run_monte_carlo
from knockpipe.modules.sparse_glm import fit_path

logger = get_logger(__name__)


def _out_dir(args: argparse.Namespace) -> Path | None:
    return Path(args.out) if args.out else None


def _seed(args: argparse.Namespace) -> int:
    return args.seed if args.seed is not None else 0


def _load(args: argparse.Namespace) -> Dataset:
    if not args.input:
        raise InputError("no input file given (use --input)", "cli", args.command)
    return standardize(load_csv(args.input, args.response))


def knockoff_names(column_names: tuple[str, ...]) -> list[str]:
    """Return the column names of a knockoff matrix."""
    return [f"{name}_knockoff" for name in column_names]


def cmd_knockoffs(args: argparse.Namespace, cfg: dict) -> None:
    """Estimate the knockoff model, sample one knockoff copy and write it with the model summary."""
    d = _load(args)
    settings = PipelineSettings.from_config(cfg)
    model = fit_knockoff_model(d, settings.slack, settings.shrinkage_ladder, settings.min_eigenvalue)
    copy = sample_knockoffs(d, model, _seed(args))
    out = _out_dir(args) or Path.cwd()
    summary = {
        **model.summary(),
        "seed": copy.seed,
        "parent_checksum": copy.parent_hash,
        "column_names": d.column_names,
        "response": d.response_name,
        "n": d.n,
    }
    io.write_matrix(out / "xtilde.csv", copy.x_tilde, knockoff_names(d.column_names))
    io.write_json(out / "model.json", summary)
    if args.path:
        path = fit_path(copy.augmented(d), d.y, settings.grid_size, settings.min_ratio, settings.solver)
        io.write_table(out / "path.csv", path.to_frame([*d.column_names, *knockoff_names(d.column_names)]))
    print(
        f"Knockoffs for {d.p} columns written to {out}: shrinkage {model.shrinkage:g}, "
        f"smallest eigenvalue of V {model.v_min_eigenvalue:.6g}"
    )


def cmd_select(args: argparse.Namespace, cfg: dict) -> None:
    """Run the (aggregated) knockoff filter and report the selection."""
    d = _load(args)
    settings = PipelineSettings.from_config(cfg)
    result = knockoff_select(d, settings, _seed(args))
    text = render_selection(result, d.column_names)
    if out := _out_dir(args):
        report = selection_to_dict(result, d.column_names)
        report["seed"] = _seed(args)
        io.write_json(out / "selection.json", report)
        io.write_text(out / "selection.txt", text)
    print(text, end="")


def cmd_refit(args: argparse.Namespace, cfg: dict) -> None:
    """Refit the least-squares and logistic models on a given support and print the inference table.

    The logistic refit is checked for shrinkage against the penalized fit on all columns at the cross-validated
    penalty.
    """
    d = _load(args)
    support = parse_index_list(args.support, d.p)
    penalized = None
    if support:
        try:
            fit, _ = fit_at_cv_penalty(d.x, d.y, PipelineSettings.from_config(cfg), spawn_seeds(_seed(args), 1)[0])
            penalized = fit.beta
        except ComputationError as e:
            logger.warning("Shrinkage check skipped: %s", e.message)
    refits = run_refits(
        d, support, cfg["inference"]["irls_tol"], cfg["inference"]["irls_max_iter"], penalized=penalized
    )
    text = render_inference(refits)
    if out := _out_dir(args):
        io.write_table(out / "inference.csv", inference_frame(refits))
        io.write_text(out / "inference.txt", text)
    print(text, end="")


def cmd_simulate(args: argparse.Namespace, cfg: dict) -> None:
    """Run the Monte Carlo harness on a scenario file."""
    scenario = Scenario.from_file(args.scenario)
    if args.seed is not None:
        scenario = Scenario.from_dict({**scenario.to_dict(), "base_seed": args.seed})
    report = run_monte_carlo(
        scenario,
        PipelineSettings.from_config(cfg),
        n_jobs=cfg["parallel"]["n_jobs"],
        max_failure_rate=cfg["simulation"]["max_failure_rate"],
    )
    out = _out_dir(args) or Path.cwd()
    io.write_table(out / "replicates.csv", report.to_frame())
    io.write_json(out / "summary.json", report.summary())
    print(
        f"{report.method}: mean FDP {report.mean_fdr:.4f} (SE {report.fdr_se:.4f}), "
        f"mean power {report.mean_power:.4f}, {report.failures} of {len(report.replicates)} replicates failed"
    )


def cmd_report(args: argparse.Namespace, cfg: dict) -> None:
    """Compute the prediction-performance table, or re-render it from a stored JSON report."""
    if args.results:
        stored = io.read_json(args.results)
        try:
            rows = [{**row, "pred_error": io.from_json_float(row["pred_error"])} for row in stored["methods"]]
        except (KeyError, TypeError):
            raise InputError(f"{args.results} is not a prediction report", "cli", "report") from None
    else:
        if not args.input:
            raise InputError("either --input or --results is required", "cli", "report")
        d = load_csv(args.input, args.response)
        settings = PipelineSettings.from_config(cfg)
        fold_seed, selection_seed = spawn_seeds(_seed(args), 2)
        folds = make_folds(d.n, cfg["inference"]["folds"], d.y if cfg["cv"]["stratify"] else None, seed=fold_seed)
        reports = [
            cv_prediction_error(
                d,
                make_selector(method, settings),
                folds,
                seed=selection_seed,
                irls_tol=cfg["inference"]["irls_tol"],
                irls_max_iter=cfg["inference"]["irls_max_iter"],
                n_jobs=settings.n_jobs,
            )
            for method in cfg["inference"]["methods"]
        ]
        rows = prediction_rows(reports)
        if out := _out_dir(args):
            io.write_json(
                out / "prediction.json",
                {
                    "seed": _seed(args),
                    "folds": folds.k,
                    "methods": [report.to_dict(d.column_names) for report in reports],
                },
            )
    text = render_prediction(rows)
    if out := _out_dir(args):
        io.write_table(out / "prediction.csv", prediction_frame(rows))
        io.write_text(out / "prediction.txt", text)
    print(text, end="")


def cmd_config(args: argparse.Namespace, cfg: dict) -> None:
    """Print the effective config, or only the given keys."""
    if not args.options:
        print(knockpipe_config.dump(cfg), end="")
        return
    for option in args.options:
        value = knockpipe_config.get(option, config_dict=cfg)
        if value is None:
            raise InputError(f"unknown config key {option!r}", "cli", "config")
        print(knockpipe_config.dump({option: value}), end="")


def cmd_schema(args: argparse.Namespace, _cfg: dict | None = None) -> None:
    """Print the JSON schema of the config."""
    print(json.dumps(build_schema(), indent=None if args.compact else 2))


COMMANDS = {
    "knockoffs": cmd_knockoffs,
    "select": cmd_select,
    "refit": cmd_refit,
    "simulate": cmd_simulate,
    "report": cmd_report,
    "config": cmd_config,
    "schema": cmd_schema,
}
