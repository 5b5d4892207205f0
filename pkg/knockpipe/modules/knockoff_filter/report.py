"""JSON and text rendering of selection results."""

from __future__ import annotations

from collections.abc import Sequence

from rich.table import Table

from knockpipe.core.console import plain_console
from knockpipe.modules.knockoff_filter.selection import SelectionResult


def _names(indices: Sequence[int], column_names: Sequence[str]) -> list[str]:
    return [column_names[j] for j in indices]


def selection_to_dict(result: SelectionResult, column_names: Sequence[str]) -> dict:
    """Convert a selection into the JSON report structure, using 1-based column numbers.

    Args:
        result: The selection.
        column_names: Names of the candidate columns.

    Returns:
        Dictionary ready for `knockpipe.core.io.write_json`.
    """
    runs = []
    for record in result.runs:
        run = {
            "q": record.q,
            "seed": record.seed,
            "threshold": record.threshold,
            "selected": [j + 1 for j in record.selected],
            "selected_names": _names(record.selected, column_names),
        }
        if record.w is not None:
            run["w"] = record.w.w
            run["truncated_path"] = record.w.truncated
        runs.append(run)
    return {
        "method": result.method,
        "kind": result.kind.value if result.kind else None,
        "variant": result.variant.value if result.variant else None,
        "q": result.q,
        "k": result.k,
        "p": result.p,
        "threshold": result.threshold,
        "thresholds": [record.threshold for record in result.runs],
        "selected": [j + 1 for j in result.selected],
        "selected_names": _names(result.selected, column_names),
        "runs": runs,
    }


def _number(value: float | None) -> str:
    return "-" if value is None else f"{value:.6g}"


def render_selection(result: SelectionResult, column_names: Sequence[str]) -> str:
    """Render a selection as an aligned text table.

    Args:
        result: The selection.
        column_names: Names of the candidate columns.

    Returns:
        The text.
    """
    console = plain_console()
    console.print(f"Method: {result.method or '-'}")
    if result.q is not None:
        console.print(f"Target level q: {_number(result.q)}  Variant: {result.variant.value}  Runs k: {result.k}")
        thresholds = ", ".join(_number(record.threshold) for record in result.runs)
        console.print(f"Threshold{'s' if result.k > 1 else ''}: {thresholds}")
        truncated = [str(i + 1) for i, record in enumerate(result.runs) if record.w is not None and record.w.truncated]
        if truncated:
            console.print(f"Truncated path in run: {', '.join(truncated)}")
    count = result.size
    console.print(f"{count} variable{'' if count == 1 else 's'} selected out of {result.p}")

    if result.selected or any(record.w is not None for record in result.runs):
        table = Table(box=None, show_edge=False, pad_edge=False)
        table.add_column("#", justify="right")
        table.add_column("Name")
        w_runs = [record for record in result.runs if record.w is not None]
        for i in range(len(w_runs)):
            table.add_column("W" if len(w_runs) == 1 else f"W run {i + 1}", justify="right")
        table.add_column("Selected", justify="center")
        selected = set(result.selected)
        for j, name in enumerate(column_names):
            row = [str(j + 1), name, *(f"{record.w.w[j]:.6g}" for record in w_runs), "*" if j in selected else ""]
            table.add_row(*row)
        console.print()
        console.print(table)
    return console.file.getvalue()
