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

import math
from collections import Counter
from typing import Dict

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from tollsim.errors import RoutingError
from tollsim.network import Network
from tollsim.replanning.mode_choice import (
    change_mode,
    choose_mode,
    mode_probabilities,
    plan_alternatives,
)
from tollsim.replanning.router import ReplanningContext
from tollsim.replanning.travel_times import TravelTimeField
from tollsim.scoring import ScoringParams
from tollsim.test.scenarios import cordon_toll, crossing_commuter, flat_periods

utilities = st.dictionaries(
    st.sampled_from(["car", "pt", "walk", "bike"]),
    st.floats(min_value=-1e3, max_value=1e3),
    min_size=1,
)


@given(utilities=utilities, shift=st.floats(min_value=-1e3, max_value=1e3))
def test_shift_invariance(utilities: Dict[str, float], shift: float) -> None:
    """Check that adding a constant to all utilities leaves the probabilities unchanged."""
    shifted = {mode: value + shift for mode, value in utilities.items()}

    original = mode_probabilities(utilities, mu=1.0)
    assert mode_probabilities(shifted, mu=1.0) == pytest.approx(original, rel=1e-6, abs=1e-9)
    assert math.fsum(original.values()) == pytest.approx(1.0)


def test_invalid_utilities() -> None:
    """Non-finite utilities and negative scales are rejected."""
    with pytest.raises(ValueError, match="At least one mode"):
        mode_probabilities({}, mu=1.0)
    with pytest.raises(ValueError, match="finite"):
        mode_probabilities({"car": -math.inf, "pt": 0.0}, mu=1.0)


def test_zero_scale_is_uniform() -> None:
    """A zero logit scale gives equal probabilities."""
    probabilities = mode_probabilities({"car": -10.0, "pt": 0.0, "walk": 3.0}, mu=0.0)
    assert probabilities == pytest.approx({"car": 1 / 3, "pt": 1 / 3, "walk": 1 / 3})


def test_symmetric_choice_is_uniform() -> None:
    """Check that 10^4 draws among equal utilities stay within three standard deviations."""
    rng = np.random.default_rng(1234)
    draws = 10_000
    counts = Counter(
        choose_mode({"car": -2.0, "pt": -2.0, "walk": -2.0}, 1.0, rng) for _ in range(draws)
    )

    p = 1 / 3
    sigma = math.sqrt(draws * p * (1 - p))
    assert set(counts) == {"car", "pt", "walk"}
    for count in counts.values():
        assert abs(count - draws * p) <= 3 * sigma


def test_car_probability_decreases_with_toll(cordon_net: Network) -> None:
    """Check that the car share of a cordon commuter never grows with the toll amount."""
    person = crossing_commuter("p", 25200, 64800)
    params = ScoringParams()
    ttf = TravelTimeField.free_flow(cordon_net)

    car_probabilities = []
    for amount in (0.0, 2.0, 5.0, 9.0, 15.0, 25.0):
        toll = cordon_toll(cordon_net, flat_periods(amount))
        context = ReplanningContext(net=cordon_net, ttf=ttf, params=params, toll=toll)
        alternatives = plan_alternatives(person.selected_plan, person, context, ["car", "walk"])
        probabilities = mode_probabilities(
            {mode: routed.travel_utility(params) for mode, routed in alternatives.items()},
            mu=1.0,
        )
        car_probabilities.append(probabilities["car"])

    assert car_probabilities == sorted(car_probabilities, reverse=True)
    assert car_probabilities[0] > car_probabilities[-1]


def test_alternatives_skip_unserved_modes(cordon_net: Network) -> None:
    """Check that transit is not offered without a schedule."""
    person = crossing_commuter("p", 25200, 64800)
    context = ReplanningContext(
        net=cordon_net, ttf=TravelTimeField.free_flow(cordon_net), params=ScoringParams()
    )

    alternatives = plan_alternatives(
        person.selected_plan, person, context, ["car", "pt", "walk", "bike"]
    )

    assert list(alternatives) == ["bike", "car", "walk"]
    for mode, routed in alternatives.items():
        assert {leg.mode for leg in routed.plan.legs} == {mode}

    with pytest.raises(RoutingError, match="no mode can serve"):
        change_mode(
            person.selected_plan, person, context, ["pt"], 1.0, np.random.default_rng(0)
        )


def test_change_mode_returns_routed_plan(cordon_net: Network) -> None:
    """Mode change returns a plan routed for the new mode."""
    person = crossing_commuter("p", 25200, 64800)
    context = ReplanningContext(
        net=cordon_net, ttf=TravelTimeField.free_flow(cordon_net), params=ScoringParams()
    )

    mode, plan = change_mode(
        person.selected_plan, person, context, ["walk"], 1.0, np.random.default_rng(0)
    )

    assert mode == "walk"
    assert plan.is_routed()
    assert plan.score is None
