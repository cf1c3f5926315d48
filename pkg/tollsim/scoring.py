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

"""Utility scoring of executed plans.

Activities earn a logarithmic performance utility; legs pay a mode constant, a
travel-time disutility, monetary costs and the toll term ``beta_money * tau``, with
``tau = -toll_paid``.
"""

import logging
import math
from dataclasses import dataclass
from typing import Any, Dict, Iterable, List, Literal, Mapping, Optional, Sequence, Tuple

import pydantic as pdt
from typing_extensions import Annotated, Self

from tollsim.errors import PlanMismatchError, ScenarioFormatError
from tollsim.events import Event
from tollsim.network import Mode
from tollsim.population import Activity, Leg, Plan, PtRoute
from tollsim.utils import SECONDS_PER_DAY, SECONDS_PER_HOUR, parse_time

LOG = logging.getLogger(__name__)

ZERO_UTILITY_HOURS = 10.0
"""Hours below the typical duration at which an activity earns zero utility."""


class ScoringParams(pdt.BaseModel, extra=pdt.Extra.forbid, validate_assignment=True):
    """Coefficients of the scoring function. Utilities per hour unless noted."""

    beta_perf: Annotated[float, pdt.Field(gt=0.0)] = 6.0
    """Marginal utility of performing an activity."""

    beta_trav: Dict[Mode, float] = {"car": -6.0, "pt": -6.0, "walk": -12.0, "bike": -8.0}
    """Marginal utility of traveling, per mode."""

    mode_constant: Dict[Mode, float] = {"car": -1.0, "pt": 0.0, "walk": 0.0, "bike": 0.0}
    """Per-leg constant, in utils."""

    beta_money: Annotated[float, pdt.Field(gt=0.0)] = 0.5
    """Marginal utility of money, in utils per dollar."""

    monetary_rate: Dict[Mode, float] = {"car": 0.0, "pt": 0.0, "walk": 0.0, "bike": 0.0}
    """Distance cost, in dollars per kilometer."""

    pt_fare: Annotated[float, pdt.Field(ge=0.0)] = 2.75
    """Flat fare per boarded transit trip, in dollars."""

    typical_duration: Dict[str, int] = {
        "home": 12 * 3600,
        "work": 8 * 3600,
        "education": 6 * 3600,
        "shop": 3600,
        "leisure": 2 * 3600,
    }
    """Typical duration per activity kind, in seconds."""

    stuck_score: float = -1000.0
    """Score given to a plan that did not complete within the horizon."""

    @pdt.validator("beta_trav")
    @classmethod
    def check_travel_disutility(cls, value: Dict[Mode, float]) -> Dict[Mode, float]:
        for mode, beta in value.items():
            if beta > 0.0:
                raise ValueError(f"beta_trav[{mode}] must be <= 0.")
        return value

    @pdt.validator("monetary_rate")
    @classmethod
    def check_rates(cls, value: Dict[Mode, float]) -> Dict[Mode, float]:
        for mode, rate in value.items():
            if rate < 0.0:
                raise ValueError(f"monetary_rate[{mode}] must be >= 0.")
        return value

    @pdt.validator("typical_duration", pre=True)
    @classmethod
    def parse_durations(cls, value: Any) -> Any:
        if not isinstance(value, Mapping):
            return value
        durations = {kind: parse_time(duration) for kind, duration in value.items()}
        for kind, duration in durations.items():
            if duration <= 0:
                raise ValueError(f"typical_duration[{kind}] must be > 0.")
        return durations

    def update_options(self, **kwargs: Any) -> Self:
        """Update coefficients by name, validating the result as a whole."""
        update = self.dict()
        update.update(kwargs)

        for key, value in self.validate(update).dict().items():
            setattr(self, key, value)

        return self

    def travel_coefficient(self, mode: Mode) -> float:
        return self.beta_trav.get(mode, 0.0)

    def typical_duration_of(self, activity: Activity) -> int:
        """Typical duration of `activity`, its own value taking precedence.

        Raises:
            ScenarioFormatError: the activity kind has no typical duration.
        """
        if activity.typical_duration is not None:
            return activity.typical_duration
        try:
            return self.typical_duration[activity.kind]
        except KeyError:
            raise ScenarioFormatError(
                f"Unknown activity kind {activity.kind!r}: no typical duration configured."
            ) from None


def activity_utility(duration: float, typical_duration: float, params: ScoringParams) -> float:
    """Logarithmic performance utility of an activity.

    The utility is zero at ``t0 = t_typ * exp(-10h / t_typ)`` and concave increasing
    in the duration, which is clamped below at one second.

    Args:
        duration: performed duration, in seconds
        typical_duration: typical duration of the activity kind, in seconds
        params: scoring coefficients.

    Examples:
        >>> round(activity_utility(8 * 3600, 8 * 3600, ScoringParams()), 9)
        60.0
    """
    if duration < 0:
        raise ValueError("Activity duration must be >= 0.")

    t_typ = float(typical_duration)
    t_zero = t_typ * math.exp(-ZERO_UTILITY_HOURS * SECONDS_PER_HOUR / t_typ)
    return params.beta_perf * (t_typ / SECONDS_PER_HOUR) * math.log(max(duration, 1.0) / t_zero)


def leg_utility(
    leg: Leg, travel_time: float, distance: float, toll_paid: float, params: ScoringParams
) -> float:
    """Utility of one executed leg.

    Args:
        leg: the leg; its mode selects the coefficients and a boarded transit route
            pays the fare
        travel_time: door-to-door time, in seconds
        distance: traveled distance, in meters
        toll_paid: tolls charged during the leg, in dollars (>= 0)
        params: scoring coefficients.

    Examples:
        >>> params = ScoringParams(mode_constant={"car": 0.0}, pt_fare=0.0)
        >>> leg_utility(Leg(mode="car"), 0.0, 0.0, 9.0, params)
        -4.5
    """
    if travel_time < 0:
        raise ValueError("Travel time must be >= 0.")

    mode = leg.mode
    fare = params.pt_fare if _boarded(leg) else 0.0
    monetary = -params.monetary_rate.get(mode, 0.0) * distance / 1000.0 - fare
    toll = -toll_paid

    return (
        params.mode_constant.get(mode, 0.0)
        + params.travel_coefficient(mode) * travel_time / SECONDS_PER_HOUR
        + params.beta_money * monetary
        + params.beta_money * toll
    )


def _boarded(leg: Leg) -> bool:
    return leg.mode == "pt" and isinstance(leg.route, PtRoute) and not leg.route.walk_only


@dataclass(frozen=True)
class ElementScore:
    """Utility contributed by one plan element."""

    index: int
    """Index of the element in the plan; the merged overnight activity uses 0."""

    kind: Literal["activity", "leg"]
    label: str
    utility: float


@dataclass(frozen=True)
class ScoredPlan:
    plan: Plan
    total: float
    breakdown: Tuple[ElementScore, ...]


@dataclass
class _LegRecord:
    departure: int
    arrival: Optional[int] = None
    toll_paid: float = 0.0


def _trace_plan(
    plan: Plan, events: Iterable[Event]
) -> Tuple[Dict[int, int], Dict[int, int], List[_LegRecord]]:
    """Match a person's events against the plan structure.

    Returns:
        Activity start times and end times by activity index, and the executed legs.
    """
    activities = plan.activities
    legs = plan.legs
    starts: Dict[int, int] = {}
    ends: Dict[int, int] = {}
    records: List[_LegRecord] = []
    current: Optional[_LegRecord] = None
    position = 0

    def mismatch(event: Event, message: str) -> PlanMismatchError:
        return PlanMismatchError(
            f"person {event.person!r}, t={event.time}, {event.kind}: {message}"
        )

    for event in events:
        if event.kind == "act_end":
            if current is not None or position >= len(legs) or position in ends:
                raise mismatch(event, "unexpected activity end")
            if event.link is not None and event.link != activities[position].link:
                raise mismatch(event, f"activity {position} is not on link {event.link!r}")
            ends[position] = event.time
        elif event.kind == "depart":
            if current is not None or position not in ends:
                raise mismatch(event, "departure before the preceding activity ended")
            if event.mode is not None and event.mode != legs[position].mode:
                raise mismatch(event, f"leg {position} is not a {event.mode} leg")
            current = _LegRecord(departure=event.time)
        elif event.kind == "arrive":
            if current is None:
                raise mismatch(event, "arrival without departure")
            current.arrival = event.time
            records.append(current)
            current = None
            position += 1
        elif event.kind == "act_start":
            if current is not None or position == 0 or position in starts:
                raise mismatch(event, "unexpected activity start")
            starts[position] = event.time
        elif event.kind == "money":
            if current is None:
                raise mismatch(event, "money event outside of a leg")
            current.toll_paid -= event.amount or 0.0
        elif current is None:
            raise mismatch(event, "traffic event outside of a leg")

    if current is not None or len(records) != len(legs):
        raise PlanMismatchError(
            f"{len(records)} of {len(legs)} legs completed (missing arrive event)."
        )
    if sorted(starts) != list(range(1, len(activities))):
        raise PlanMismatchError("activity start events do not match the plan.")

    return starts, ends, records


def score_plan(plan: Plan, events: Sequence[Event], params: ScoringParams) -> ScoredPlan:
    """Score an executed plan from the person's events.

    The day wraps: if the first and last activities share a kind, they are scored as
    one activity lasting from the last arrival to the first departure on the next day.

    Args:
        plan: the executed plan
        events: all events of the person, in stream order
        params: scoring coefficients.

    Raises:
        PlanMismatchError: the events do not describe a complete execution of `plan`.
    """
    starts, ends, records = _trace_plan(plan, events)
    activities = plan.activities
    last = len(activities) - 1
    breakdown: List[ElementScore] = []

    def score_activity(index: int, element_index: int, duration: float, label: str) -> None:
        t_typ = params.typical_duration_of(activities[index])
        breakdown.append(
            ElementScore(
                element_index, "activity", label, activity_utility(duration, t_typ, params)
            )
        )

    if last == 0:
        score_activity(0, 0, SECONDS_PER_DAY, activities[0].kind)
    elif activities[0].kind == activities[last].kind:
        overnight = max(0, ends[0] + SECONDS_PER_DAY - starts[last])
        score_activity(0, 0, overnight, activities[0].kind)
    else:
        score_activity(0, 0, ends[0], activities[0].kind)
        score_activity(
            last, 2 * last, max(0, SECONDS_PER_DAY - starts[last]), activities[last].kind
        )

    for index in range(1, last):
        duration = max(0, ends[index] - starts[index])
        score_activity(index, 2 * index, duration, activities[index].kind)

    for index, (leg, record) in enumerate(zip(plan.legs, records)):
        assert record.arrival is not None  # noqa: S101
        distance = leg.route.distance if leg.route is not None else 0.0
        utility = leg_utility(
            leg, record.arrival - record.departure, distance, record.toll_paid, params
        )
        breakdown.append(ElementScore(2 * index + 1, "leg", leg.mode, utility))

    breakdown.sort(key=lambda element: element.index)
    total = sum(element.utility for element in breakdown)
    return ScoredPlan(plan=plan, total=total, breakdown=tuple(breakdown))
