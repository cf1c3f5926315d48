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

"""Multinomial logit mode choice over whole plans."""

import logging
import math
from typing import Dict, Iterable, Mapping, Tuple

import numpy as np

from tollsim.errors import RoutingError
from tollsim.network import Mode
from tollsim.population import Person, Plan
from tollsim.replanning.router import ReplanningContext, RoutedPlan, route_plan

LOG = logging.getLogger(__name__)


def mode_probabilities(utilities: Mapping[Mode, float], mu: float) -> Dict[Mode, float]:
    """Logit choice probabilities, computed with the maximum utility shifted to zero.

    Examples:
        >>> mode_probabilities({"car": -1.0, "pt": -1.0}, mu=1.0)
        {'car': 0.5, 'pt': 0.5}

        >>> mode_probabilities({"car": 1000.0, "pt": 1000.0}, mu=1.0)
        {'car': 0.5, 'pt': 0.5}
    """
    if not utilities:
        raise ValueError("At least one mode must be available.")
    if not all(math.isfinite(value) for value in utilities.values()):
        raise ValueError(f"Utilities must be finite, got {dict(utilities)}.")

    modes = sorted(utilities)
    scaled = mu * np.array([utilities[mode] for mode in modes], dtype=np.float64)
    weights = np.exp(scaled - scaled.max())
    probabilities = weights / weights.sum()
    return {mode: float(p) for mode, p in zip(modes, probabilities)}


def choose_mode(utilities: Mapping[Mode, float], mu: float, rng: np.random.Generator) -> Mode:
    """Sample a mode from the logit distribution over the available modes."""
    probabilities = mode_probabilities(utilities, mu)
    modes = list(probabilities)
    return modes[int(rng.choice(len(modes), p=list(probabilities.values())))]


def plan_alternatives(
    plan: Plan, person: Person, context: ReplanningContext, modes: Iterable[Mode]
) -> Dict[Mode, RoutedPlan]:
    """Route `plan` with each mode applied to all its legs.

    Modes that cannot serve every leg (no car route, no transit service) are left out.
    """
    alternatives: Dict[Mode, RoutedPlan] = {}
    for mode in sorted(set(modes)):
        try:
            alternatives[mode] = route_plan(plan, person, context, mode=mode)
        except RoutingError as e:
            LOG.debug("person %s: %s unavailable (%s)", person.id, mode, e)
    return alternatives


def change_mode(
    plan: Plan,
    person: Person,
    context: ReplanningContext,
    modes: Iterable[Mode],
    mu: float,
    rng: np.random.Generator,
) -> Tuple[Mode, Plan]:
    """Pick a new plan-level mode by logit over estimated travel utilities.

    Returns:
        The chosen mode and the routed plan using it.

    Raises:
        RoutingError: no mode can serve the plan.
    """
    alternatives = plan_alternatives(plan, person, context, modes)
    if not alternatives:
        raise RoutingError(f"person {person.id!r}: no mode can serve the plan.")

    utilities = {
        mode: routed.travel_utility(context.params) for mode, routed in alternatives.items()
    }
    mode = choose_mode(utilities, mu, rng)
    return mode, alternatives[mode].plan
