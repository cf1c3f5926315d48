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

"""Road-pricing schemes: time-of-day cordon and link tolls, charged on link entry."""

import logging
from dataclasses import dataclass, field
from typing import Any, Dict, Final, FrozenSet, List, Literal, Optional, Set, Tuple

import pydantic as pdt
from typing_extensions import Annotated, Self, TypeAlias

from tollsim.errors import ScenarioFormatError
from tollsim.network import Cordon, Mode, Network, build_cordon
from tollsim.population import Person
from tollsim.utils import SECONDS_PER_DAY, format_time, parse_time

LOG = logging.getLogger(__name__)

TollKind: TypeAlias = Literal["cordon", "link"]
Direction: TypeAlias = Literal["enter", "exit", "both"]

DEFAULT_RESET_TIME: Final = 3 * 3600
"""Time of day at which the once-daily charge history rolls over."""


class TollPeriod(pdt.BaseModel, extra=pdt.Extra.forbid, frozen=True):
    """Charging period ``[start, end)`` within a day; wraps midnight if ``end < start``."""

    start: int
    end: int
    amount: Annotated[float, pdt.Field(ge=0.0)]
    """Charge in dollars."""

    @pdt.validator("start", "end", pre=True)
    @classmethod
    def parse_bound(cls, value: Any) -> int:
        seconds = parse_time(value)
        if not 0 <= seconds <= SECONDS_PER_DAY:
            raise ValueError("period bounds must lie within [00:00:00, 24:00:00].")
        return seconds

    @pdt.root_validator(skip_on_failure=True)
    @classmethod
    def check_nonempty(cls, values: Any) -> Any:
        if values["start"] % SECONDS_PER_DAY == values["end"] % SECONDS_PER_DAY:
            if (values["start"], values["end"]) != (0, SECONDS_PER_DAY):
                raise ValueError("period must not be empty.")
        return values

    def intervals(self) -> List[Tuple[int, int]]:
        """Non-wrapping pieces of the period within ``[0, 24h)``."""
        if self.start < self.end:
            return [(self.start, self.end)]
        return [(self.start, SECONDS_PER_DAY), (0, self.end)]

    def contains(self, t: int) -> bool:
        tod = t % SECONDS_PER_DAY
        return any(lower <= tod < upper for lower, upper in self.intervals())


def check_coverage(periods: List[TollPeriod]) -> None:
    """Require `periods` to cover ``[0, 24h)`` exactly once.

    Raises:
        ValueError: the periods leave a gap or overlap.

    Examples:
        >>> check_coverage([TollPeriod(start="06:00", end="20:00", amount=9),
        ...                 TollPeriod(start="20:00", end="22:00", amount=7)])
        Traceback (most recent call last):
        ...
        ValueError: Toll periods leave 00:00:00-06:00:00 uncovered.
    """
    pieces = sorted(
        piece for period in periods for piece in period.intervals() if piece[0] < piece[1]
    )
    cursor = 0
    for lower, upper in pieces:
        if lower > cursor:
            raise ValueError(
                f"Toll periods leave {format_time(cursor)}-{format_time(lower)} uncovered."
            )
        if lower < cursor:
            raise ValueError(f"Toll periods overlap at {format_time(lower)}.")
        cursor = upper

    if cursor < SECONDS_PER_DAY:
        raise ValueError(
            f"Toll periods leave {format_time(cursor)}-{format_time(SECONDS_PER_DAY)} uncovered."
        )


class TollScheme(pdt.BaseModel, extra=pdt.Extra.forbid, frozen=True):
    """Immutable charging rule consulted by the mobsim on every link entry."""

    kind: TollKind
    cordon: Optional[Cordon] = None
    tolled_links: FrozenSet[str] = frozenset()
    periods: Tuple[TollPeriod, ...]
    once_per_day: bool = True
    charged_modes: FrozenSet[Mode] = frozenset({"car"})
    direction: Direction = "both"
    reset_time: int = DEFAULT_RESET_TIME

    _charged_links: FrozenSet[str] = pdt.PrivateAttr(default_factory=frozenset)

    def __init__(self, **data: Any) -> None:
        super().__init__(**data)
        if self.kind == "link":
            self._charged_links = self.tolled_links
        else:
            assert self.cordon is not None  # noqa: S101
            entry, exit_ = set(self.cordon.entry_links), set(self.cordon.exit_links)
            self._charged_links = frozenset(
                {"enter": entry, "exit": exit_, "both": entry | exit_}[self.direction]
            )

    @pdt.root_validator(skip_on_failure=True)
    @classmethod
    def check_scheme(cls, values: Any) -> Any:
        if (values["kind"] == "cordon") != (values["cordon"] is not None):
            raise ValueError("a cordon must be given iff kind is 'cordon'.")
        if values["kind"] == "link" and not values["tolled_links"]:
            raise ValueError("a link toll needs at least one tolled link.")
        check_coverage(list(values["periods"]))
        return values

    @property
    def charged_links(self) -> FrozenSet[str]:
        """Links whose entry triggers a charge, given kind and direction."""
        return self._charged_links

    @property
    def max_rate(self) -> float:
        return max(period.amount for period in self.periods)

    def rate_at(self, t: int) -> float:
        """Amount of the period containing ``t mod 24h``.

        Examples:
            >>> scheme = preset_scheme("nyc-cbd-base", kind="link", tolled_links={"x"})
            >>> [scheme.rate_at(parse_time(t)) for t in ("12:00", "21:00", "03:00", "27:00")]
            [9.0, 7.0, 5.0, 5.0]
        """
        for period in self.periods:
            if period.contains(t):
                return period.amount
        raise AssertionError("unreachable: periods cover the day")  # pragma: no cover

    def charge_day(self, t: int) -> int:
        """Index of the charging day containing `t`; days roll over at `reset_time`."""
        return (t - self.reset_time) // SECONDS_PER_DAY

    def with_amount(self, amount: float) -> "TollScheme":
        """Copy of this scheme charging `amount` in every period."""
        periods = tuple(period.copy(update={"amount": amount}) for period in self.periods)
        return TollScheme(**{**self._field_values(), "periods": periods})

    def _field_values(self) -> Dict[str, Any]:
        return {name: getattr(self, name) for name in self.__fields__}


@dataclass
class ChargeHistory:
    """Charges already levied during one mobsim run."""

    charged_days: Dict[str, Set[int]] = field(default_factory=dict)
    total: Dict[str, float] = field(default_factory=dict)

    def record(self, person_id: str, day: int, amount: float) -> None:
        self.charged_days.setdefault(person_id, set()).add(day)
        self.total[person_id] = self.total.get(person_id, 0.0) + amount

    def was_charged(self, person_id: str, day: int) -> bool:
        return day in self.charged_days.get(person_id, ())


def on_link_enter(
    scheme: TollScheme,
    person: Person,
    link_id: str,
    t: int,
    history: ChargeHistory,
    *,
    mode: Mode = "car",
) -> float:
    """Decide the charge for a vehicle entering a link.

    Args:
        scheme: active toll scheme
        person: the driver
        link_id: link being entered
        t: entry time, in seconds
        history: charges levied so far in this run (updated)
        mode: mode of the entering vehicle.

    Returns:
        Money event amount in dollars: the negated rate if a charge applies, else 0.
        Zero-rate charges are not recorded in `history`.
    """
    if link_id not in scheme.charged_links:
        return 0.0
    if person.toll_exempt or mode not in scheme.charged_modes:
        return 0.0

    day = scheme.charge_day(t)
    if scheme.once_per_day and history.was_charged(person.id, day):
        return 0.0

    rate = scheme.rate_at(t)
    if rate == 0.0:
        return 0.0

    history.record(person.id, day, rate)
    return -rate


PRESETS: Final[Dict[str, Tuple[Tuple[str, str, float], ...]]] = {
    "nyc-cbd-base": (
        ("06:00:00", "20:00:00", 9.0),
        ("20:00:00", "22:00:00", 7.0),
        ("22:00:00", "06:00:00", 5.0),
    ),
}
"""Named period tables. The base plan charges once daily in both directions."""


def preset_periods(name: str) -> Tuple[TollPeriod, ...]:
    """Charging periods of a named preset."""
    try:
        table = PRESETS[name]
    except KeyError:
        raise ScenarioFormatError(
            f"Unknown toll preset {name!r}; known presets: {', '.join(sorted(PRESETS))}."
        ) from None
    return tuple(TollPeriod(start=start, end=end, amount=amount) for start, end, amount in table)


def preset_scheme(name: str, **overrides: Any) -> TollScheme:
    """Build a scheme from a named preset.

    Args:
        name: preset name
        overrides: scheme fields (``cordon`` or ``kind``/``tolled_links`` at least).
    """
    values: Dict[str, Any] = {"kind": "cordon", "once_per_day": True, "direction": "both"}
    values.update(overrides)
    values["periods"] = preset_periods(name)
    return TollScheme(**values)


class TollConfig(pdt.BaseModel, extra=pdt.Extra.forbid, validate_assignment=True):
    """Toll section of a scenario configuration.

    Either name a `preset` or give explicit `periods`. Explicit fields override the
    preset's defaults.
    """

    preset: Optional[str] = None
    kind: TollKind = "cordon"
    region: Optional[List[str]] = None
    """Node ids inside the charging region (cordon kind)."""

    links: Optional[List[str]] = None
    """Tolled link ids (link kind)."""

    periods: Optional[List[TollPeriod]] = None
    once_per_day: bool = True
    direction: Direction = "both"
    charged_modes: List[Mode] = ["car"]
    reset_time: int = DEFAULT_RESET_TIME
    flat_amount: Optional[float] = pdt.Field(default=None, ge=0.0)
    """If set, replaces the amount of every period."""

    @pdt.validator("reset_time", pre=True)
    @classmethod
    def parse_reset_time(cls, value: Any) -> int:
        return parse_time(value) % SECONDS_PER_DAY

    @pdt.root_validator(skip_on_failure=True)
    @classmethod
    def check_source(cls, values: Any) -> Any:
        if values["preset"] is None and values["periods"] is None:
            raise ValueError("either 'preset' or 'periods' is required.")
        if values["preset"] is not None and values["preset"] not in PRESETS:
            raise ValueError(f"unknown toll preset {values['preset']!r}.")
        return values

    def update_options(self, **kwargs: Any) -> Self:
        """Update fields by name, validating the resulting configuration as a whole."""
        update = self.dict()
        update.update(kwargs)

        for key, value in self.validate(update).dict().items():
            setattr(self, key, value)

        return self

    def resolve(self, net: Network) -> TollScheme:
        """Build the scheme this configuration describes on `net`.

        Raises:
            ScenarioFormatError: the region, links or periods are invalid for `net`.
        """
        periods = (
            tuple(self.periods) if self.periods is not None else preset_periods(str(self.preset))
        )
        if self.flat_amount is not None:
            periods = tuple(period.copy(update={"amount": self.flat_amount}) for period in periods)

        values: Dict[str, Any] = {
            "kind": self.kind,
            "periods": periods,
            "once_per_day": self.once_per_day,
            "direction": self.direction,
            "charged_modes": frozenset(self.charged_modes),
            "reset_time": self.reset_time,
        }

        if self.kind == "cordon":
            if not self.region:
                raise ScenarioFormatError("toll.region: a cordon toll needs a region.")
            values["cordon"] = build_cordon(net, self.region)
        else:
            unknown = sorted(link_id for link_id in self.links or () if not net.has_link(link_id))
            if unknown:
                raise ScenarioFormatError(f"toll.links: unknown links {unknown}.")
            values["tolled_links"] = frozenset(self.links or ())

        try:
            scheme = TollScheme(**values)
        except pdt.ValidationError as e:
            raise ScenarioFormatError.from_validation_error(e, source="toll") from e

        LOG.debug(
            "Resolved %s toll: %d charged links, max rate $%.2f",
            scheme.kind,
            len(scheme.charged_links),
            scheme.max_rate,
        )
        return scheme
