# This code is part of tollsim.
#
# (C) Copyright the tollsim developers 2024
#
# This code is licensed under the Apache License, Version 2.0. You may
# obtain a copy of this license in the LICENSE.txt file in the root directory
# of this source tree or at http://www.apache.org/licenses/LICENSE-2.0.
#
# Any modifications or derivative works of this code must retain this
# copyright notice, and modified files need to carry a notice indicating
# that they have been altered from the originals.

import json
from pathlib import Path

import pydantic as pdt
import pytest

from tollsim.errors import ScenarioFormatError
from tollsim.scenario import (
    OUTPUT_DIR_ENV,
    ScenarioConfig,
    default_output_dir,
    load_config,
    load_scenario,
)
from tollsim.tolling import TollConfig


def write_json(path: Path, data: object) -> Path:
    """Write `data` as JSON to `path`."""
    path.write_text(json.dumps(data), encoding="utf-8")
    return path


def test_load_config_resolves_paths(tmp_path: Path) -> None:
    """Check that input paths are relative to the configuration file."""
    config_path = write_json(
        tmp_path / "config.json",
        {"network": "net.json", "population": "inputs/pop.json", "seed": 4},
    )

    config = load_config(config_path)

    assert config.network == (tmp_path / "net.json").resolve()
    assert config.population == (tmp_path / "inputs" / "pop.json").resolve()
    assert config.transit is None
    assert config.seed == 4
    assert config.iterations == 50


def test_load_config_missing(tmp_path: Path) -> None:
    """A missing configuration file is a format error."""
    with pytest.raises(ScenarioFormatError, match="no such configuration file"):
        load_config(tmp_path / "config.json")


def test_load_config_malformed(tmp_path: Path) -> None:
    """JSON syntax errors report their position."""
    path = tmp_path / "config.json"
    path.write_text('{"network": "net.json",\n  "population": }', encoding="utf-8")

    with pytest.raises(ScenarioFormatError, match="line 2"):
        load_config(path)


def test_load_config_invalid_field(tmp_path: Path) -> None:
    """Check that validation errors name the offending field and file."""
    path = write_json(
        tmp_path / "config.json",
        {"network": "n.json", "population": "p.json", "iterations": 0},
    )

    with pytest.raises(ScenarioFormatError, match=r"config\.json: iterations: ") as excinfo:
        load_config(path)

    assert isinstance(excinfo.value, ValueError)


def test_unknown_field(tmp_path: Path) -> None:
    """Unknown configuration fields are rejected."""
    path = write_json(
        tmp_path / "config.json",
        {"network": "n.json", "population": "p.json", "iteration": 3},
    )
    with pytest.raises(ScenarioFormatError, match="iteration: extra fields not permitted"):
        load_config(path)


def test_options_update() -> None:
    """Check partial updates and that a failed update keeps the configuration."""
    config = ScenarioConfig(network="n.json", population="p.json")
    config.update_options(seed=9, toll=TollConfig(preset="nyc-cbd-base"))

    assert config.seed == 9
    assert config.toll is not None and config.toll.preset == "nyc-cbd-base"

    with pytest.raises(pdt.ValidationError):
        config.update_options(scale=1.5)
    assert config.scale == 1.0


def test_snapshot_round_trip() -> None:
    """A snapshot parses back to an equal configuration."""
    config = ScenarioConfig(
        network="n.json", population="p.json", cordon=["c"], toll=TollConfig(preset="nyc-cbd-base")
    )
    assert ScenarioConfig.parse_raw(config.snapshot()) == config


def test_default_output_dir(monkeypatch: pytest.MonkeyPatch, tmp_path: Path) -> None:
    """The default run directory comes from the environment."""
    monkeypatch.delenv(OUTPUT_DIR_ENV, raising=False)
    assert default_output_dir(load_dotenv=False) is None

    monkeypatch.setenv(OUTPUT_DIR_ENV, str(tmp_path / "runs"))
    assert default_output_dir(load_dotenv=False) == tmp_path / "runs"


def test_load_scenario(two_route_dir: Path) -> None:
    """Check that the toll region defaults to the configured cordon."""
    scenario = load_scenario(load_config(two_route_dir))

    assert len(scenario.population) == 10
    assert scenario.transit is not None and len(scenario.transit) == 2
    assert scenario.toll is not None and scenario.toll.kind == "cordon"
    assert scenario.cordon is not None
    assert sorted(scenario.cordon.inside_nodes) == ["c", "w"]
    assert scenario.toll.charged_links == {"j-c", "d-c", "c-j", "c-d"}


def test_load_scenario_missing_file(two_route_dir: Path) -> None:
    """Missing scenario files are reported with their path."""
    config = load_config(two_route_dir)
    config.population.unlink()

    with pytest.raises(ScenarioFormatError, match="Population file not found"):
        load_scenario(config)


def test_load_scenario_invalid_network(two_route_dir: Path) -> None:
    """Check that network diagnostics are reported together."""
    config = load_config(two_route_dir)
    data = json.loads(config.network.read_text(encoding="utf-8"))
    data["links"][0]["capacity"] = 0
    data["links"][1]["length"] = -5
    write_json(config.network, data)

    with pytest.raises(ScenarioFormatError, match="capacity: must be > 0.*length: must be > 0"):
        load_scenario(config)
