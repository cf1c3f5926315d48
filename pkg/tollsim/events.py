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

"""Mobsim event records and their CSV representation.

The event CSV (columns ``time,kind,person,link,mode,amount``) is the contract between
the mobsim, scoring, and analysis stages.
"""

import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Dict, Final, Iterable, Iterator, List, Literal, Optional, Sequence, Union

import pandas as pd
from typing_extensions import TypeAlias, get_args

from tollsim.errors import ScenarioFormatError

LOG = logging.getLogger(__name__)

EventKind: TypeAlias = Literal[
    "act_end",
    "depart",
    "link_enter",
    "link_leave",
    "arrive",
    "act_start",
    "board",
    "alight",
    "money",
]

EVENT_KINDS: Final = frozenset(get_args(EventKind))

CSV_COLUMNS: Final = ("time", "kind", "person", "link", "mode", "amount")


@dataclass(frozen=True)
class Event:
    """A single mobsim event.

    For ``board``/``alight`` events, `link` carries the transit line id. Money events
    carry a nonzero `amount`, negative for charges.
    """

    time: int
    kind: EventKind
    person: str
    link: Optional[str] = None
    mode: Optional[str] = None
    amount: Optional[float] = None


class EventStream(Sequence[Event]):
    """Time-ordered, append-only sequence of events."""

    def __init__(self, events: Iterable[Event] = ()) -> None:
        self._events: List[Event] = list(events)

    def append(self, event: Event) -> None:
        if self._events and event.time < self._events[-1].time:
            raise ValueError(
                f"Event at t={event.time} appended after t={self._events[-1].time}."
            )
        self._events.append(event)

    def __len__(self) -> int:
        return len(self._events)

    def __getitem__(self, index):  # type: ignore[no-untyped-def]
        return self._events[index]

    def __iter__(self) -> Iterator[Event]:
        return iter(self._events)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, EventStream):
            return NotImplemented
        return self._events == other._events

    def __repr__(self) -> str:
        return f"EventStream({len(self._events)} events)"

    def of_kind(self, *kinds: str) -> Iterator[Event]:
        return (event for event in self._events if event.kind in kinds)

    def by_person(self) -> Dict[str, List[Event]]:
        """Events grouped per person, each group in stream order."""
        groups: Dict[str, List[Event]] = {}
        for event in self._events:
            groups.setdefault(event.person, []).append(event)
        return groups

    def to_frame(self) -> pd.DataFrame:
        """Tabular view with the CSV columns; missing values are ``None``/``NaN``."""
        return pd.DataFrame(
            [
                (event.time, event.kind, event.person, event.link, event.mode, event.amount)
                for event in self._events
            ],
            columns=list(CSV_COLUMNS),
        ).astype({"time": "int64", "amount": "float64"})


def write_events(events: Iterable[Event], path: Union[str, Path]) -> None:
    """Write an event CSV. Missing fields are empty cells; amounts keep full precision."""
    frame = EventStream(events).to_frame()
    frame.to_csv(path, index=False, na_rep="")


def read_events(path: Union[str, Path]) -> EventStream:
    """Read an event CSV written by :func:`write_events`.

    Raises:
        ScenarioFormatError: header or rows do not follow the event format.
    """
    try:
        frame = pd.read_csv(path, dtype=str, keep_default_na=False)
    except pd.errors.EmptyDataError as e:
        raise ScenarioFormatError(f"{path}: missing header row.") from e

    if tuple(frame.columns) != CSV_COLUMNS:
        raise ScenarioFormatError(
            f"{path}: expected columns {','.join(CSV_COLUMNS)}, got {','.join(frame.columns)}."
        )

    stream = EventStream()
    for row_index, row in enumerate(frame.itertuples(index=False), start=2):
        if row.kind not in EVENT_KINDS:
            raise ScenarioFormatError(
                f"{path}: line {row_index}: unknown event kind {row.kind!r}."
            )
        try:
            stream.append(
                Event(
                    time=int(row.time),
                    kind=row.kind,  # type: ignore[arg-type]
                    person=row.person,
                    link=row.link or None,
                    mode=row.mode or None,
                    amount=float(row.amount) if row.amount else None,
                )
            )
        except ValueError as e:
            raise ScenarioFormatError(f"{path}: line {row_index}: {e}") from e

    LOG.debug("Read %d events from %s", len(stream), path)
    return stream
