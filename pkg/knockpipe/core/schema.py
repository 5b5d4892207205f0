"""Functions for creating and validating the JSON schema of the knockpipe config."""

from __future__ import annotations

import re
from collections.abc import Iterable, Sequence
from typing import Any as AnyType

from knockpipe.core.misc import InputError

STATISTICS = ("lsm", "lcd-cv")
VARIANTS = ("knockoff", "knockoff_plus")
METHODS = ("lasso-cv", "fdr-lsm", "afdr-lsm", "fdr-lcd-cv", "afdr-lcd-cv", "full", "empty")


class BaseProperty:
    """Base class for other property types."""

    def __init__(self, prop_type: str | None, **kwargs: AnyType) -> None:
        """Initialize the class.

        Args:
            prop_type: The type of the property.
            **kwargs: Additional keyword arguments.
        """
        self.schema = {"type": prop_type, **kwargs} if prop_type else kwargs


class String(BaseProperty):
    """Class representing a string."""

    def __init__(self, choices: Iterable[str] | None = None, **kwargs: AnyType) -> None:
        """Initialize the class.

        Args:
            choices: An iterable of possible choices.
            **kwargs: Additional keyword arguments.
        """
        if choices:
            kwargs["enum"] = list(choices)
        super().__init__("string", **kwargs)


class Integer(BaseProperty):
    """Class representing an integer."""

    def __init__(self, min_value: int | None = None, max_value: int | None = None, **kwargs: AnyType) -> None:
        """Initialize the class.

        Args:
            min_value: The minimum value.
            max_value: The maximum value.
            **kwargs: Additional keyword arguments.
        """
        if min_value is not None:
            kwargs["minimum"] = min_value
        if max_value is not None:
            kwargs["maximum"] = max_value
        super().__init__("integer", **kwargs)


class Number(BaseProperty):
    """Class representing either a float or an integer."""

    def __init__(
        self,
        min_value: float | None = None,
        max_value: float | None = None,
        exclusive_min: float | None = None,
        exclusive_max: float | None = None,
        **kwargs: AnyType,
    ) -> None:
        """Initialize the class.

        Args:
            min_value: The minimum value (inclusive).
            max_value: The maximum value (inclusive).
            exclusive_min: The minimum value (exclusive).
            exclusive_max: The maximum value (exclusive).
            **kwargs: Additional keyword arguments.
        """
        if min_value is not None:
            kwargs["minimum"] = min_value
        if max_value is not None:
            kwargs["maximum"] = max_value
        if exclusive_min is not None:
            kwargs["exclusiveMinimum"] = exclusive_min
        if exclusive_max is not None:
            kwargs["exclusiveMaximum"] = exclusive_max
        super().__init__("number", **kwargs)


class Boolean(BaseProperty):
    """Class representing a boolean."""

    def __init__(self, **kwargs: AnyType) -> None:
        """Initialize the class.

        Args:
            **kwargs: Additional keyword arguments.
        """
        super().__init__("boolean", **kwargs)


class Array(BaseProperty):
    """Class representing an array of values."""

    def __init__(self, items: BaseProperty | None = None, **kwargs: AnyType) -> None:
        """Initialize the class.

        Args:
            items: The property describing every item in the array.
            **kwargs: Additional keyword arguments.
        """
        if items:
            kwargs["items"] = items.schema
        super().__init__("array", **kwargs)


class Object:
    """Class representing an object."""

    def __init__(self, additional_properties: bool = False, description: str | None = None) -> None:
        """Initialize the class.

        Args:
            additional_properties: Whether additional properties are allowed.
            description: A description of the object.
        """
        self.obj_schema: dict[str, AnyType] = {"type": "object", "additionalProperties": additional_properties}
        if description:
            self.obj_schema["description"] = description
        self.properties: dict[str, BaseProperty | Object] = {}
        self.required: list[str] = []

    def add_property(self, name: str, prop_obj: BaseProperty | Object, required: bool = False) -> Object:
        """Add a property to the object.

        Args:
            name: The name of the property.
            prop_obj: The property object.
            required: Whether the property is required.

        Returns:
            The object itself, to allow chaining.
        """
        self.properties[name] = prop_obj
        if required:
            self.required.append(name)
        return self

    @property
    def schema(self) -> dict:
        """Return the schema of the object."""
        schema = dict(self.obj_schema)
        if self.properties:
            schema["properties"] = {name: prop.schema for name, prop in self.properties.items()}
        if self.required:
            schema["required"] = list(self.required)
        return schema


def build_schema() -> dict:
    """Build the JSON schema for the knockpipe config.

    Returns:
        The JSON schema as a dictionary.
    """
    knockoffs = (
        Object(description="Knockoff construction")
        .add_property(
            "slack",
            Number(exclusive_min=0, max_value=1, description="Factor applied to the equicorrelated s-vector"),
        )
        .add_property(
            "shrinkage_ladder",
            Array(Number(min_value=0, exclusive_max=1), minItems=1, description="Covariance shrinkage levels"),
        )
        .add_property("min_eigenvalue", Number(exclusive_min=0, description="Smallest accepted eigenvalue"))
    )
    solver = (
        Object(description="Coordinate descent solver")
        .add_property("tol", Number(exclusive_min=0, description="Largest coefficient change at convergence"))
        .add_property("max_passes", Integer(min_value=1, description="Maximum number of passes"))
        .add_property("kkt_tol", Number(exclusive_min=0, description="KKT certificate tolerance"))
    )
    path = (
        Object(description="Regularization path")
        .add_property("grid_size", Integer(min_value=2, description="Number of penalty levels"))
        .add_property(
            "min_ratio", Number(exclusive_min=0, exclusive_max=1, description="Smallest/largest penalty ratio")
        )
    )
    cv = (
        Object(description="Penalty calibration by cross-validation")
        .add_property("folds", Integer(min_value=2, description="Number of folds"))
        .add_property("stratify", Boolean(description="Stratify folds by the response"))
    )
    knockoff_filter = (
        Object(description="Knockoff filter")
        .add_property("q", Number(min_value=0, max_value=1, description="Target (aggregated) FDR level"))
        .add_property("k", Integer(min_value=1, description="Number of aggregated knockoff runs"))
        .add_property("variant", String(choices=VARIANTS, description="Threshold variant"))
        .add_property("statistic", String(choices=STATISTICS, description="Knockoff statistic"))
    )
    inference = (
        Object(description="Refits and prediction error")
        .add_property("irls_tol", Number(exclusive_min=0, description="IRLS score tolerance"))
        .add_property("irls_max_iter", Integer(min_value=1, description="Maximum number of IRLS iterations"))
        .add_property("folds", Integer(min_value=2, description="Number of prediction-error folds"))
        .add_property("methods", Array(String(choices=METHODS), minItems=1, description="Compared methods"))
    )
    simulation = Object(description="Monte Carlo harness").add_property(
        "max_failure_rate", Number(min_value=0, max_value=1, description="Largest tolerated failure fraction")
    )
    parallel = Object(description="Parallel execution").add_property(
        "n_jobs", Integer(description="Number of parallel workers (-1 for all cores)")
    )

    root = Object(description="knockpipe configuration")
    for name, section in (
        ("knockoffs", knockoffs),
        ("solver", solver),
        ("path", path),
        ("cv", cv),
        ("filter", knockoff_filter),
        ("inference", inference),
        ("simulation", simulation),
        ("parallel", parallel),
    ):
        root.add_property(name, section, required=True)
    return {"$schema": "https://json-schema.org/draft/2020-12/schema", **root.schema}


def validate(cfg: dict, schema: dict | None = None) -> None:
    """Validate a config using a JSON schema.

    Args:
        cfg: The config to validate.
        schema: The JSON schema to validate against. Defaults to `build_schema()`.

    Raises:
        InputError: If the config is invalid.
    """
    import jsonschema  # noqa: PLC0415

    def build_path_string(path: Sequence) -> str:
        parts = []
        for part in path:
            if isinstance(part, str):
                parts.append(part)
            elif isinstance(part, int):
                parts[-1] += f"[{part}]"
        return ".".join(parts)

    try:
        jsonschema.validate(cfg, schema or build_schema())
    except jsonschema.ValidationError as e:
        msg = ["invalid configuration:"]

        # Rephrase messages about unexpected keys
        unknown_key = re.search(r"properties are not allowed \('(.+)' was unexpected", e.message)
        if unknown_key:
            full_path = ".".join([*list(e.absolute_path), unknown_key[1]])
            msg.append(f"unexpected key {full_path!r}")
        else:
            if e.absolute_path:
                msg.append(f"{build_path_string(e.absolute_path)}:")
            msg.append(e.message)
            if "description" in e.schema:
                msg.append(f"({e.schema['description']})")

        raise InputError(" ".join(msg), "config", "validate") from None
