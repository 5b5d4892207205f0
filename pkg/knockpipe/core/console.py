"""Provide a Console instance for pretty-printing."""

from __future__ import annotations

import io

from rich.console import Console
from rich.theme import Theme

# Remove some automatic highlighting from the default theme to keep numeric output plain
_theme = Theme(
    {
        "repr.ipv6": "none",
        "repr.eui48": "none",
        "repr.eui64": "none",
        "repr.number": "none",
    }
)

# Initialize rich console for pretty-printing
console = Console(theme=_theme)

# Console used for errors, so stdout stays clean for scripted use
err_console = Console(theme=_theme, stderr=True)


def plain_console(width: int = 120) -> Console:
    """Create a console that renders to a string buffer without colors or terminal detection.

    Used when writing aligned text tables to files, where the output must be identical between runs.

    Args:
        width: Fixed output width.

    Returns:
        Console writing to an in-memory buffer; read it back with `console.file.getvalue()`.
    """
    return Console(
        file=io.StringIO(), width=width, color_system=None, force_terminal=False, highlight=False, theme=_theme
    )
