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

"""Plan selection and innovation strategies."""

import logging
from typing import Any, Dict, List, Literal

import numpy as np
import pydantic as pdt
from typing_extensions import Annotated, Self, TypeAlias

from tollsim.network import MODES, Mode
from tollsim.population import DEFAULT_MAX_PLANS, Activity, Person, Plan, add_plan
from tollsim.replanning.mode_choice import change_mode
from tollsim.replanning.router import ReplanningContext, route_plan
from tollsim.utils import HORIZON

LOG = logging.getLogger(__name__)

Strategy: TypeAlias = Literal["select", "reroute", "mode_choice", "time_mutation"]


class StrategyConfig(pdt.BaseModel, extra=pdt.Extra.forbid, validate_assignment=True):
    """Replanning strategy weights and parameters."""

    weights: Dict[Strategy, pdt.NonNegativeFloat] = {
        "select": 0.70,
        "reroute": 0.15,
        "mode_choice": 0.10,
        "time_mutation": 0.05,
    }
    """Probability weights of the strategies applied to a person per iteration."""

    mu_select: Annotated[float, pdt.Field(ge=0.0)] = 1.0
    """Logit scale of plan selection, per unit of score."""

    mu_mode: Annotated[float, pdt.Field(ge=0.0)] = 1.0
    """Logit scale of mode choice, per unit of estimated utility."""

    time_mutation_range: Annotated[int, pdt.Field(ge=0)] = 1800
    """Largest departure-time shift, in seconds."""

    innovation_stop_fraction: Annotated[float, pdt.Field(ge=0.0, le=1.0)] = 0.8
    """Fraction of the iterations after which only selection remains."""

    modes: List[Mode] = list(MODES)
    """Modes offered by mode choice."""

    max_plans: Annotated[int, pdt.Field(ge=1)] = DEFAULT_MAX_PLANS
    learning_rate: Annotated[float, pdt.Field(gt=0.0, le=1.0)] = 1.0
    """Weight of a new execution score in the memorized plan score."""

    @pdt.validator("weights")
    @classmethod
    def check_weights(cls, value: Dict[Strategy, float]) -> Dict[Strategy, float]:
        if sum(value.values()) <= 0.0:
            raise ValueError("strategy weights must sum to a positive value.")
        return value

    @pdt.validator("modes")
    @classmethod
    def check_modes(cls, value: List[Mode]) -> List[Mode]:
        if not value:
            raise ValueError("at least one mode must be offered.")
        return value

    def update_options(self, **kwargs: Any) -> Self:
        """Update fields by name, validating the result as a whole."""
        update = self.dict()
        update.update(kwargs)

        for key, value in self.validate(update).dict().items():
            setattr(self, key, value)

        return self

    def innovation_iterations(self, iterations: int) -> int:
        """Number of leading iterations in which innovation is enabled.

        Examples:
            >>> StrategyConfig().innovation_iterations(50)
            40
        """
        return int(iterations * self.innovation_stop_fraction)

    def draw_strategy(self, rng: np.random.Generator) -> Strategy:
        names = sorted(self.weights)
        weights = np.array([self.weights[name] for name in names], dtype=np.float64)
        return names[int(rng.choice(len(names), p=weights / weights.sum()))]


def select_plan(person: Person, mu: float, rng: np.random.Generator) -> int:
    """Choose a memorized plan by logit over scores.

    An unscored plan is always tried first (the oldest one if several).
    """
    for index, plan in enumerate(person.plan_memory):
        if plan.score is None:
            return index

    if len(person.plan_memory) == 1:
        return 0

    scores = mu * np.array([plan.score for plan in person.plan_memory], dtype=np.float64)
    weights = np.exp(scores - scores.max())
    return int(rng.choice(len(weights), p=weights / weights.sum()))


def select_best(person: Person) -> int:
    """Index of the best-scored plan, lowest index on ties; unscored plans rank last.

    Examples:
        >>> from tollsim.test.scenarios import person_with_scores
        >>> select_best(person_with_scores([1.0, 3.0, 2.0]))
        1
    """
    return int(np.argmax([plan.sort_score for plan in person.plan_memory]))


def mutate_departure_time(plan: Plan, time_range: int, rng: np.random.Generator) -> Plan:
    """Shift the end time of one randomly chosen non-final activity.

    The shift is uniform in ``[-time_range, time_range]`` seconds and clamped between
    the neighboring end times (and to ``[0, horizon)``) so that activity order holds.

    Returns:
        An unscored copy of `plan`.
    """
    mutated = plan.copy(deep=True)
    mutated.score = None
    activities: List[Activity] = mutated.activities[:-1]
    if not activities:
        return mutated

    chosen = int(rng.integers(len(activities)))
    shift = int(rng.integers(-time_range, time_range + 1))

    lower = activities[chosen - 1].end_time if chosen > 0 else 0
    upper = activities[chosen + 1].end_time if chosen + 1 < len(activities) else HORIZON - 1
    assert lower is not None and upper is not None  # noqa: S101

    end_time = activities[chosen].end_time
    assert end_time is not None  # noqa: S101
    activities[chosen].end_time = min(max(end_time + shift, lower), upper)
    return mutated


def innovate(
    person: Person,
    strategy: Strategy,
    context: ReplanningContext,
    config: StrategyConfig,
    rng: np.random.Generator,
) -> Plan:
    """Derive a new plan from the person's selected plan with an innovative strategy."""
    plan = person.selected_plan

    if strategy == "reroute":
        return route_plan(plan, person, context).plan

    if strategy == "time_mutation":
        mutated = mutate_departure_time(plan, config.time_mutation_range, rng)
        return route_plan(mutated, person, context).plan

    if strategy == "mode_choice":
        _, new_plan = change_mode(plan, person, context, config.modes, config.mu_mode, rng)
        return new_plan

    raise ValueError(f"{strategy!r} is not an innovative strategy.")


def replan_person(
    person: Person,
    context: ReplanningContext,
    config: StrategyConfig,
    rng: np.random.Generator,
    *,
    innovation: bool,
) -> Strategy:
    """Apply one replanning step to `person` (modified in place).

    Returns:
        The applied strategy.
    """
    if not innovation:
        person.selected = select_best(person)
        return "select"

    strategy = config.draw_strategy(rng)
    if strategy == "select":
        person.selected = select_plan(person, config.mu_select, rng)
    else:
        new_plan = innovate(person, strategy, context, config, rng)
        add_plan(person, new_plan, max_plans=config.max_plans)
    return strategy


def strategy_counts(applied: List[Strategy]) -> Dict[str, int]:
    """Number of persons per applied strategy, in strategy order."""
    return {name: applied.count(name) for name in sorted(set(applied))}
