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

from tollsim.replanning.mode_choice import choose_mode, mode_probabilities
from tollsim.replanning.router import ReplanningContext, route_car, route_plan
from tollsim.replanning.strategies import (
    StrategyConfig,
    mutate_departure_time,
    select_best,
    select_plan,
)
from tollsim.replanning.travel_times import TravelTimeField, build_travel_time_field

__all__ = [
    "ReplanningContext",
    "StrategyConfig",
    "TravelTimeField",
    "build_travel_time_field",
    "choose_mode",
    "mode_probabilities",
    "mutate_departure_time",
    "route_car",
    "route_plan",
    "select_best",
    "select_plan",
]
