"""Paths used by knockpipe."""

from __future__ import annotations

from pathlib import Path


class KnockpipePaths:
    """Paths used by knockpipe."""

    def __init__(self) -> None:
        """Initialize paths."""
        # Path to the 'knockpipe' package
        self.package_path = Path(__file__).parent.parent

        # Package-internal resources
        self.resources_dir = self.package_path / "resources"
        self.config_dir = self.resources_dir / "config"
        self.default_config_file = self.config_dir / "config_default.yaml"

        # Output-relative paths
        self.log_dir = Path("logs")
        self.log_file = "knockpipe.log"


paths = KnockpipePaths()
