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

"""Pytest fixtures for tollsim.

This module is exposed as pytest plugin for this project.
"""

from dataclasses import dataclass
from pathlib import Path

import pytest

from tollsim import generators, runs
from tollsim.network import Network
from tollsim.scenario import load_config
from tollsim.scoring import ScoringParams
from tollsim.test.scenarios import cordon_line, line_network


@dataclass(frozen=True)
class RunPair:
    """Baseline and tolled runs of the same scenario."""

    scenario: Path
    """Configuration file of the tolled scenario."""

    baseline: Path
    policy: Path


@pytest.fixture(name="line_net")
def fixture_line_net() -> Network:
    """One-way line ``a - b - c - d`` with 1 km links at 10 m/s."""
    return line_network(["a", "b", "c", "d"])


@pytest.fixture(name="cordon_net")
def fixture_cordon_net() -> Network:
    """Bidirectional line ``h - j - c - w``, cordon around ``c`` and ``w``."""
    return cordon_line()


@pytest.fixture(name="scoring_params")
def fixture_scoring_params() -> ScoringParams:
    """Default scoring coefficients."""
    return ScoringParams()


@pytest.fixture(name="two_route_dir")
def fixture_two_route_dir(tmp_path: Path) -> Path:
    """Small two-route cordon scenario written to disk; returns the configuration file."""
    return generators.generate("two-route-cordon", persons=10, iterations=2).write(
        tmp_path / "scenario"
    )


@pytest.fixture(name="run_pair", scope="session")
def fixture_run_pair(tmp_path_factory: pytest.TempPathFactory) -> RunPair:
    """Completed baseline and tolled runs of a small two-route cordon scenario."""
    root = tmp_path_factory.mktemp("runs")
    config_path = generators.generate(
        "two-route-cordon", persons=20, departure_window=600, iterations=3
    ).write(root / "scenario")

    policy_config = load_config(config_path)
    baseline_config = load_config(config_path).update_options(toll=None)

    baseline = runs.execute_run(baseline_config, root / "baseline")
    policy = runs.execute_run(policy_config, root / "policy")
    return RunPair(scenario=config_path, baseline=baseline, policy=policy)
