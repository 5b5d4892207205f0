"""Unit tests for knockpipe.core.config and knockpipe.core.schema."""

import copy
from pathlib import Path

import pytest

from knockpipe.core import config, schema
from knockpipe.core.misc import InputError

pytestmark = pytest.mark.unit


def test_merge_dicts() -> None:
    """Test merging two dictionaries."""
    dict1 = {"a": 1, "b": 2, "d": 3, "f": {"g": 6}}
    dict2 = {"b": 3, "c": 4, "d": {"e": 5}, "f": {"g": 0, "h": 7}}
    dict2_original = copy.deepcopy(dict2)
    config._merge_dicts(dict1, dict2)
    assert dict1 == {"a": 1, "b": 2, "c": 4, "d": 3, "f": {"g": 6, "h": 7}}
    assert dict2 == dict2_original


def test_default_config_is_valid() -> None:
    """The default config passes schema validation and carries the documented defaults."""
    cfg = config.load_config()
    schema.validate(cfg)
    assert cfg["filter"] == {"q": 0.1, "k": 3, "variant": "knockoff_plus", "statistic": "lsm"}
    assert cfg["knockoffs"]["slack"] == 0.999
    assert cfg["path"]["grid_size"] == 100


def test_user_config_is_merged_over_defaults(tmp_path: Path) -> None:
    """Values from a user file replace the defaults, other keys keep their default values."""
    user_file = tmp_path / "config.yaml"
    user_file.write_text("filter:\n  q: 0.2\ncv:\n  folds: 5\n", encoding="utf-8")
    cfg = config.load_config(user_file)
    assert cfg["filter"]["q"] == 0.2
    assert cfg["filter"]["k"] == 3
    assert cfg["cv"] == {"folds": 5, "stratify": True}


def test_overrides_skip_missing_values() -> None:
    """Command line overrides use dot notation and ignore flags that were not given."""
    cfg = config.load_config()
    config.apply_overrides({"filter.k": 1, "filter.q": None, "parallel.n_jobs": 2}, cfg)
    assert cfg["filter"]["k"] == 1
    assert cfg["filter"]["q"] == 0.1
    assert config.get("parallel.n_jobs", config_dict=cfg) == 2
    assert config.get("no.such.key", "fallback", config_dict=cfg) == "fallback"


@pytest.mark.parametrize(
    ("key", "value"),
    [("filter.q", 1.5), ("filter.k", 0), ("filter.statistic", "lasso"), ("knockoffs.slack", 0.0)],
)
def test_invalid_values_are_rejected(key: str, value: object) -> None:
    """Out-of-range values raise an input error naming the offending key."""
    cfg = config.load_config()
    config.set_value(key, value, config_dict=cfg)
    with pytest.raises(InputError, match=key.split(".")[-1]) as excinfo:
        schema.validate(cfg)
    assert excinfo.value.exit_code == 2


def test_unknown_key_is_rejected() -> None:
    """Keys that are not part of the schema are reported."""
    cfg = config.load_config(config_dict={"filter": {"threshold": 3}})
    with pytest.raises(InputError, match="unexpected key 'filter.threshold'"):
        schema.validate(cfg)


def test_dump_round_trips_through_yaml(tmp_path: Path) -> None:
    """The dumped config can be read back as a user config."""
    cfg = config.load_config()
    dumped = tmp_path / "dumped.yaml"
    dumped.write_text(config.dump(cfg), encoding="utf-8")
    assert config.read_yaml(dumped) == cfg
