"""End-to-end tests of the knockpipe command line interface."""

import json
from pathlib import Path

import pandas as pd
import pytest

from . import utils

pytestmark = pytest.mark.cli

FAST = ["--grid-size", "20", "--min-ratio", "0.01", "--cv-folds", "3"]


@pytest.fixture
def dataset_csv(tmp_path: Path) -> Path:
    """A small dataset with two signal columns out of six."""
    d = utils.make_dataset(n=150, p=6, signal={0: 2.0, 3: -2.0}, seed=17, binary_columns=(5,))
    return utils.write_csv(tmp_path / "data.csv", d)


def test_non_binary_response_is_an_input_error(tmp_path: Path) -> None:
    """A response with other values than 0 and 1 exits with code 2 and a one-line error."""
    path = tmp_path / "bad.csv"
    path.write_text("a,b,y\n1.0,2.0,0\n2.0,1.0,2\n3.0,0.5,1\n", encoding="utf-8")
    code, output = utils.run_knockpipe("select", "--input", path, "--out", tmp_path / "out")
    assert code == 2
    assert any(line.startswith("error[") and "non-binary response" in line for line in output)


def test_refit_support_out_of_range(tmp_path: Path) -> None:
    """Column numbers beyond the dataset width are rejected."""
    d = utils.make_dataset(n=40, p=5)
    path = utils.write_csv(tmp_path / "data.csv", d)
    code, output = utils.run_knockpipe("refit", "--input", path, "--support", "1,4,7")
    assert code == 2
    assert any("index out of range" in line for line in output)


def test_unknown_argument(tmp_path: Path) -> None:
    """Argument errors use the same one-line format and exit code."""
    code, output = utils.run_knockpipe("select", "--threshold", "0.1")
    assert code == 2
    assert any(line.startswith("error[cli:arguments]") for line in output)


def test_invalid_config_value(dataset_csv: Path, tmp_path: Path) -> None:
    """Config values are validated before anything runs."""
    code, output = utils.run_knockpipe("select", "--input", dataset_csv, "--q", "1.5")
    assert code == 2
    assert any("invalid configuration" in line for line in output)


def test_select_is_reproducible(dataset_csv: Path, tmp_path: Path) -> None:
    """Three runs with the same seed write byte-identical files."""
    results = []
    for run in range(3):
        out = tmp_path / f"run{run}"
        code, output = utils.run_knockpipe("select", "--input", dataset_csv, "--out", out, "--seed", "7", *FAST)
        assert code == 0, output
        results.append(utils.checksums(out))
    assert set(results[0]) == {"selection.json", "selection.txt"}
    assert results[0] == results[1] == results[2]
    report = json.loads((tmp_path / "run0" / "selection.json").read_text(encoding="utf-8"))
    assert report["k"] == 3
    assert report["seed"] == 7
    assert report["method"] == "AFDR LSM"
    assert all(1 <= j <= 6 for j in report["selected"])


def test_select_lcd_label(dataset_csv: Path) -> None:
    """The method label follows the statistic and k."""
    code, output = utils.run_knockpipe(
        "select", "--input", dataset_csv, "--statistic", "lcd-cv", "--k", "3", "--seed", "1", *FAST
    )
    assert code == 0, output
    assert "Method: AFDR LCD_CV" in output


def test_knockoffs_command(dataset_csv: Path, tmp_path: Path) -> None:
    """The knockoff matrix has one column per original column; the model summary records its provenance."""
    out = tmp_path / "out"
    code, output = utils.run_knockpipe(
        "knockoffs", "--input", dataset_csv, "--out", out, "--path", "--grid-size", "15", "--min-ratio", "0.01"
    )
    assert code == 0, output
    x_tilde = pd.read_csv(out / "xtilde.csv")
    assert x_tilde.shape == (150, 6)
    assert list(x_tilde.columns) == [f"x{j + 1}_knockoff" for j in range(6)]
    model = json.loads((out / "model.json").read_text(encoding="utf-8"))
    assert model["seed"] == 0
    assert model["n"] == 150
    assert model["column_names"] == [f"x{j + 1}" for j in range(6)]
    assert len(pd.read_csv(out / "path.csv")) == 15


def test_refit_command(dataset_csv: Path, tmp_path: Path) -> None:
    """The inference table lists every model for the requested columns."""
    out = tmp_path / "out"
    code, output = utils.run_knockpipe("refit", "--input", dataset_csv, "--support", "1,4,6", "--out", out)
    assert code == 0, output
    frame = pd.read_csv(out / "inference.csv")
    assert set(frame["model"]) == {"OLS (standardized)", "OLS (continuous standardized)", "Logistic", "AME"}
    assert set(frame["variable"]) == {"(Intercept)", "x1", "x4", "x6"}
    assert (out / "inference.txt").read_text(encoding="utf-8").rstrip("\n") in "\n".join(output)


def test_simulate_command(tmp_path: Path) -> None:
    """One row per replicate and a summary with the aggregates."""
    scenario = tmp_path / "scenario.txt"
    scenario.write_text("n = 100\np = 6\ns0 = 2\namplitude = 3\nk = 1\nq = 0.2\nreplicates = 3\n", encoding="utf-8")
    config = tmp_path / "config.yaml"
    config.write_text("path:\n    grid_size: 20\n    min_ratio: 0.01\n", encoding="utf-8")
    out = tmp_path / "out"
    code, output = utils.run_knockpipe(
        "simulate", "--scenario", scenario, "--config", config, "--out", out, "--seed", "4"
    )
    assert code == 0, output
    replicates = pd.read_csv(out / "replicates.csv")
    assert len(replicates) == 3
    summary = json.loads((out / "summary.json").read_text(encoding="utf-8"))
    assert summary["replicates"] == 3
    assert summary["scenario"]["base_seed"] == 4
    assert summary["method"] == "FDR LSM"


def test_report_command(dataset_csv: Path, tmp_path: Path) -> None:
    """The prediction table is written and can be re-rendered from the stored JSON."""
    out = tmp_path / "out"
    code, output = utils.run_knockpipe(
        "report", "--input", dataset_csv, "--methods", "full,empty", "--folds", "5", "--out", out
    )
    assert code == 0, output
    text = (out / "prediction.txt").read_text(encoding="utf-8")
    header = text.splitlines()[0].split()
    assert header == ["Method", "Model", "size", "Pred.", "error"]
    frame = pd.read_csv(out / "prediction.csv")
    assert list(frame["method"]) == ["Full", "Empty"]
    assert list(frame["model_size"]) == [6, 0]

    rerendered = tmp_path / "rerendered"
    code, output = utils.run_knockpipe("report", "--results", out / "prediction.json", "--out", rerendered)
    assert code == 0, output
    assert (rerendered / "prediction.txt").read_text(encoding="utf-8") == text


def test_config_and_schema() -> None:
    """The effective config and its schema can be printed."""
    code, output = utils.run_knockpipe("config", "filter.q", "path.grid_size")
    assert code == 0, output
    assert output == ["filter.q: 0.1", "path.grid_size: 100"]
    code, output = utils.run_knockpipe("schema", "--compact")
    assert code == 0
    schema = json.loads(output[0])
    assert "filter" in schema["properties"]


@pytest.fixture
def fast_config(tmp_path: Path) -> Path:
    """Config with a short path and few folds."""
    path = tmp_path / "fast.yaml"
    path.write_text("path:\n    grid_size: 20\n    min_ratio: 0.01\ncv:\n    folds: 3\n", encoding="utf-8")
    return path


@pytest.mark.parametrize(
    ("command", "args", "files"),
    [
        ("knockoffs", ["--path"], {"xtilde.csv", "model.json", "path.csv"}),
        ("refit", ["--support", "1,4"], {"inference.csv", "inference.txt"}),
        ("simulate", [], {"replicates.csv", "summary.json"}),
        (
            "report",
            ["--methods", "lasso-cv,fdr-lsm,full,empty", "--folds", "3"],
            {"prediction.csv", "prediction.json", "prediction.txt"},
        ),
    ],
)
def test_commands_are_reproducible(
    command: str, args: list[str], files: set[str], dataset_csv: Path, fast_config: Path, tmp_path: Path
) -> None:
    """Every command writes byte-identical files when rerun with the same inputs and seed."""
    if command == "simulate":
        scenario = tmp_path / "scenario.txt"
        scenario.write_text("n = 100\np = 6\ns0 = 2\namplitude = 3\nk = 1\nq = 0.2\nreplicates = 3\n", encoding="utf-8")
        inputs = ["--scenario", scenario]
    else:
        inputs = ["--input", dataset_csv]
    results = []
    for run in range(3):
        out = tmp_path / f"{command}{run}"
        code, output = utils.run_knockpipe(
            command, *inputs, *args, "--config", fast_config, "--seed", "3", "--out", out
        )
        assert code == 0, output
        results.append(utils.checksums(out))
    assert set(results[0]) == files
    assert results[0] == results[1] == results[2]
