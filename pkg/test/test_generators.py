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

from pathlib import Path

import pydantic as pdt
import pytest

from tollsim import generators
from tollsim.network import validate
from tollsim.scenario import load_config, load_scenario
from tollsim.utils import SECONDS_PER_HOUR


def activity_links(scenario: generators.GeneratedScenario) -> set:
    """Links that hold an activity of a generated person."""
    return {
        activity.link
        for person in scenario.persons
        for plan in person.plan_memory
        for activity in plan.activities
    }


def test_grid_city() -> None:
    """Check the grid layout, the central cordon and the bus lines."""
    scenario = generators.generate("grid-city", persons=50)

    assert len(scenario.net.nodes) == 100
    assert len(scenario.net.links) == 4 * 10 * 9
    assert scenario.config.cordon is not None and len(scenario.config.cordon) == 16
    assert "n3_3" in scenario.config.cordon and "n6_6" in scenario.config.cordon
    assert scenario.transit is not None
    assert [line.id for line in scenario.transit] == ["east", "east-back", "north", "north-back"]
    assert scenario.config.toll is not None and scenario.config.toll.preset == "nyc-cbd-base"
    assert len(scenario.persons) == 50
    assert validate(scenario.net, activity_links=activity_links(scenario)) == []


def test_grid_city_is_seeded() -> None:
    """Equal seeds generate equal scenarios."""
    first = generators.generate("grid-city", size=5, cordon_size=1, persons=20, seed=3)
    second = generators.generate("grid-city", size=5, cordon_size=1, persons=20, seed=3)
    other = generators.generate("grid-city", size=5, cordon_size=1, persons=20, seed=4)

    assert first.persons == second.persons
    assert first.persons != other.persons


def test_grid_city_commute_times() -> None:
    """Check that departures lie in the morning peak and work lasts 7 to 10 hours."""
    scenario = generators.generate("grid-city", size=5, cordon_size=1, persons=200)

    for person in scenario.persons:
        home, work, _ = person.selected_plan.activities
        assert home.end_time is not None and work.end_time is not None
        assert 6 * SECONDS_PER_HOUR <= home.end_time <= 10 * SECONDS_PER_HOUR
        assert 7 * SECONDS_PER_HOUR <= work.end_time - home.end_time < 10 * SECONDS_PER_HOUR


def test_pigou_defaults() -> None:
    """Check the two parallel routes and the departure wave of the Pigou scenario."""
    scenario = generators.generate("pigou")

    assert len(scenario.persons) == 1000
    assert len(scenario.net.links) == 5
    fast = scenario.net.link(generators.PIGOU_FAST_LINK)
    slow = scenario.net.link(generators.PIGOU_SLOW_LINK)
    assert fast.capacity == 1800.0
    assert fast.free_flow_time == pytest.approx(300.0)
    assert slow.free_flow_time == pytest.approx(600.0)
    assert (fast.from_node, fast.to_node) == (slow.from_node, slow.to_node)

    departures = [person.selected_plan.activities[0].end_time for person in scenario.persons]
    assert departures[0] == 8 * SECONDS_PER_HOUR
    assert max(departures) < 9 * SECONDS_PER_HOUR
    assert departures == sorted(departures)
    assert scenario.config.strategy.modes == ["car"]
    assert scenario.transit is None
    assert scenario.config.toll is None


def test_two_route_cordon() -> None:
    """Two-route scenario with its default parameters."""
    scenario = generators.generate("two-route-cordon", once_per_day=False)

    assert len(scenario.persons) == 100
    assert len(scenario.net.links) == 10
    assert scenario.transit is not None and len(scenario.transit) == 2
    assert scenario.config.cordon == ["c", "w"]
    assert scenario.config.toll is not None and not scenario.config.toll.once_per_day
    assert generators.generate("two-route-cordon", toll=False).config.toll is None


def test_unknown_kind() -> None:
    """Unknown scenario kinds are rejected."""
    with pytest.raises(ValueError, match="Unknown scenario kind 'manhattan'"):
        generators.generate("manhattan")


@pytest.mark.parametrize(
    ("kind", "params"),
    [
        ("grid-city", {"size": 4, "cordon_size": 4}),
        ("grid-city", {"persons": 0}),
        ("pigou", {"fast_capacity": 0.0}),
        ("two-route-cordon", {"lanes": 2}),
    ],
)
def test_invalid_parameters(kind: str, params: dict) -> None:
    """Generator parameters are validated."""
    with pytest.raises(pdt.ValidationError):
        generators.generate(kind, **params)


@pytest.mark.parametrize("kind", ["grid-city", "pigou", "two-route-cordon"])
def test_written_scenario_loads(kind: str, tmp_path: Path) -> None:
    """Check that every generated scenario passes the loader's checks."""
    params = {"grid-city": {"size": 5, "cordon_size": 1}}.get(kind, {})
    config_path = generators.generate(kind, persons=15, **params).write(tmp_path)

    assert config_path == tmp_path / "config.json"
    scenario = load_scenario(load_config(config_path))
    assert len(scenario.population) == 15
