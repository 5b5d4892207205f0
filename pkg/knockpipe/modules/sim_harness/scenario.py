"""Monte Carlo scenarios and their key=value file format."""

from __future__ import annotations

import dataclasses
import re
from pathlib import Path

import numpy as np
import scipy.linalg

from knockpipe.core.misc import InputError, get_logger
from knockpipe.modules.knockoff_filter import PipelineSettings, Variant

logger = get_logger(__name__)

CORRELATIONS = ("identity", "equicorrelated", "ar1")
SCENARIO_STATISTICS = ("lsm", "lcd-cv", "lasso-cv")

_CORRELATION_CALL = re.compile(r"^\s*(\w+)\s*\(\s*([^)]*)\s*\)\s*$")


@dataclasses.dataclass(frozen=True)
class Scenario:
    """A synthetic sparse logistic design and the selection procedure run on it.

    Attributes:
        n: Number of observations.
        p: Number of columns.
        s0: Size of the true support.
        amplitude: Absolute value of the nonzero coefficients, on standardized columns.
        correlation: Structure of the design covariance: 'identity', 'equicorrelated' or 'ar1'.
        rho: Correlation parameter of 'equicorrelated' and 'ar1'.
        q: Target (aggregated) FDR level.
        k: Number of knockoff runs.
        variant: Threshold variant.
        statistic: 'lsm', 'lcd-cv', or 'lasso-cv' for the plain cross-validated lasso baseline.
        replicates: Number of replicates R.
        base_seed: Seed from which every replicate seed is derived.
    """

    n: int = 500
    p: int = 50
    s0: int = 10
    amplitude: float = 10.0
    correlation: str = "identity"
    rho: float = 0.0
    q: float = 0.1
    k: int = 3
    variant: Variant = Variant.knockoff_plus
    statistic: str = "lsm"
    replicates: int = 100
    base_seed: int = 0

    def __post_init__(self) -> None:
        """Validate the scenario.

        Raises:
            InputError: If a field is out of range.
        """
        object.__setattr__(self, "variant", Variant(self.variant))
        problems = []
        if self.n < 2:
            problems.append(f"n must be at least 2, got {self.n}")
        if self.p < 1:
            problems.append(f"p must be at least 1, got {self.p}")
        if not 0 <= self.s0 <= self.p:
            problems.append(f"s0 must be between 0 and p={self.p}, got {self.s0}")
        if self.amplitude < 0:
            problems.append(f"amplitude must be non-negative, got {self.amplitude}")
        if self.correlation not in CORRELATIONS:
            problems.append(f"correlation must be one of {', '.join(CORRELATIONS)}, got {self.correlation!r}")
        if not 0 <= self.rho < 1:
            problems.append(f"rho must be in [0, 1), got {self.rho}")
        if not 0 <= self.q <= 1:
            problems.append(f"q must be in [0, 1], got {self.q}")
        if self.k < 1:
            problems.append(f"k must be at least 1, got {self.k}")
        if self.statistic not in SCENARIO_STATISTICS:
            problems.append(f"statistic must be one of {', '.join(SCENARIO_STATISTICS)}, got {self.statistic!r}")
        if self.replicates < 1:
            problems.append(f"replicates must be at least 1, got {self.replicates}")
        if problems:
            raise InputError(f"invalid scenario: {'; '.join(problems)}", "sim_harness", "Scenario")

    def covariance(self) -> np.ndarray:
        """Return the covariance matrix of the design rows."""
        if self.correlation == "equicorrelated":
            return (1 - self.rho) * np.eye(self.p) + self.rho * np.ones((self.p, self.p))
        if self.correlation == "ar1":
            return scipy.linalg.toeplitz(self.rho ** np.arange(self.p))
        return np.eye(self.p)

    def to_settings(self, base: PipelineSettings) -> PipelineSettings:
        """Return `base` with the scenario's filter parameters applied.

        The 'lasso-cv' baseline keeps the statistic of `base`; it only uses the path, CV and solver parts.
        """
        statistic = base.statistic if self.statistic == "lasso-cv" else self.statistic
        return dataclasses.replace(base, q=self.q, k=self.k, variant=self.variant, statistic=statistic)

    @property
    def label(self) -> str:
        """Method label of the procedure run on every replicate."""
        if self.statistic == "lasso-cv":
            return "LASSO"
        return f"{'AFDR' if self.k > 1 else 'FDR'} {'LSM' if self.statistic == 'lsm' else 'LCD_CV'}"

    def to_dict(self) -> dict:
        """Return the scenario as a flat dictionary."""
        result = dataclasses.asdict(self)
        result["variant"] = self.variant.value
        return result

    @classmethod
    def from_file(cls, path: str | Path) -> Scenario:
        """Read a scenario from a key=value text file.

        One key per line; everything after '#' is a comment; missing keys take their default values. The
        correlation may be written as 'equicorrelated(0.3)' instead of giving `rho` separately.

        Args:
            path: Scenario file.

        Returns:
            The scenario.

        Raises:
            InputError: If the file is missing, a line is malformed, a key is unknown or a value has the wrong type.
        """
        try:
            lines = Path(path).read_text(encoding="utf-8").splitlines()
        except FileNotFoundError:
            raise InputError(f"file not found: {path}", "sim_harness", "Scenario.from_file") from None
        values = {}
        for number, line in enumerate(lines, start=1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            key, sep, value = line.partition("=")
            if not sep:
                raise InputError(
                    f"{path}, line {number}: expected 'key = value', got {line!r}", "sim_harness", "Scenario.from_file"
                )
            values[key.strip()] = value.strip()
        return cls.from_dict(values, source=str(path))

    @classmethod
    def from_dict(cls, values: dict[str, object], source: str = "scenario") -> Scenario:
        """Create a scenario from string or typed values, converting them to the field types.

        Args:
            values: Field values; strings are converted.
            source: Name used in error messages.

        Returns:
            The scenario.

        Raises:
            InputError: If a key is unknown or a value cannot be converted.
        """
        values = dict(values)
        if isinstance(values.get("correlation"), str) and (match := _CORRELATION_CALL.match(values["correlation"])):
            values["correlation"], values["rho"] = match.group(1), match.group(2)
        fields = {field.name: field for field in dataclasses.fields(cls)}
        converters = {"int": int, "float": float, "str": str, "Variant": Variant}
        kwargs = {}
        for key, value in values.items():
            if key not in fields:
                raise InputError(f"{source}: unknown key {key!r}", "sim_harness", "Scenario.from_dict")
            converter = converters[fields[key].type]
            try:
                kwargs[key] = converter(value)
            except ValueError:
                raise InputError(
                    f"{source}: invalid value {value!r} for {key!r}", "sim_harness", "Scenario.from_dict"
                ) from None
        return cls(**kwargs)
