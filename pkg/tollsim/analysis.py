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

"""Evaluation of executed runs: link flows, ridership, mode shares, scores, cordon metrics."""

import json
import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import (
    Any,
    ClassVar,
    Dict,
    Final,
    Iterable,
    List,
    Mapping,
    Optional,
    Sequence,
    Set,
    Tuple,
)

import numpy as np
import numpy.typing as npt
import pandas as pd
from shapely.geometry import LineString, mapping
from tabulate import tabulate

from tollsim.errors import RunMismatchError
from tollsim.events import Event
from tollsim.network import Cordon, Network, StrPath
from tollsim.population import Person, PtRoute
from tollsim.runs import RunArtifacts, load_run
from tollsim.utils import hour_bin

LOG = logging.getLogger(__name__)

N_HOURS: Final = 25
"""Hourly report bins: 0 to 23, then one bin for everything from 24:00 on."""

HOUR_LABELS: Final = tuple(str(hour) for hour in range(24)) + ("24+",)

MAP_HOURS: Final = (8, 11, 12, 17, 20)
"""Hours exported as congestion maps by default."""

MODE_CATEGORIES: Final = (
    "car",
    "pt",
    "walk",
    "bike",
    "access_walk",
    "egress_walk",
    "transit_walk",
)

ENTRY_REDUCTION_TARGET: Final = -10.0
"""Targeted change of daily cordon entries, in percent."""

VKT_REDUCTION_TARGET: Final = -5.0
"""Targeted change of the distance driven inside the cordon, in percent."""

UNCHANGED_TOLERANCE: Final = 0.05


def report_hour(t: float) -> int:
    """Report bin of a time of day.

    Examples:
        >>> report_hour(8 * 3600 + 600), report_hour(25 * 3600)
        (8, 24)
    """
    return min(hour_bin(t), N_HOURS - 1)


def change_ratio(baseline: float, policy: float) -> Optional[float]:
    """Relative change in percent, unset when the baseline is zero.

    Examples:
        >>> round(change_ratio(369908, 363878), 2)
        -1.63
        >>> change_ratio(0, 5) is None
        True
    """
    if baseline == 0:
        return None
    return (policy - baseline) / baseline * 100.0


def format_ratio(ratio: Optional[float]) -> str:
    """Percentage text of a change ratio, or ``n/a``."""
    return "n/a" if ratio is None else f"{ratio:.2f}%"


@dataclass(frozen=True)
class LinkVolumeTable:
    """Completed car traversals per link and hourly bin of their entry time."""

    link_ids: Tuple[str, ...]
    volumes: npt.NDArray[np.int64]
    """Shape ``(links, hours)``."""

    travel_times: npt.NDArray[np.float64]
    """Summed traversal times, same shape as `volumes`."""

    free_flow: npt.NDArray[np.float64]
    unpaired: int = 0
    """Link events without a matching enter/leave partner."""

    def row(self, link_id: str) -> int:
        return self.link_ids.index(link_id)

    def volume(self, link_id: str, hour: int) -> int:
        return int(self.volumes[self.row(link_id), hour])

    def daily_volumes(self) -> Dict[str, int]:
        return dict(zip(self.link_ids, self.volumes.sum(axis=1).tolist()))

    def congestion_index(self, link_id: str, hour: int) -> Optional[float]:
        """Mean experienced over free-flow traversal time; unset without traffic."""
        index = self.row(link_id)
        count = self.volumes[index, hour]
        if count == 0:
            return None
        return float(self.travel_times[index, hour] / count / self.free_flow[index])

    def to_frame(self) -> pd.DataFrame:
        records = [
            (link_id, HOUR_LABELS[hour], self.volume(link_id, hour), ci)
            for link_id in self.link_ids
            for hour in range(N_HOURS)
            for ci in (self.congestion_index(link_id, hour),)
        ]
        return pd.DataFrame(records, columns=["link_id", "hour", "volume", "congestion_index"])


def link_volumes(events: Iterable[Event], net: Network) -> LinkVolumeTable:
    """Hour-binned paired link traversals per link.

    Examples:
        >>> from tollsim.events import Event
        >>> from tollsim.test.scenarios import line_network
        >>> net = line_network(["a", "b"], length=1000.0, free_speed=10.0)
        >>> events = [
        ...     Event(8 * 3600 + 600, "link_enter", "p1", link="a-b"),
        ...     Event(8 * 3600 + 700, "link_leave", "p1", link="a-b"),
        ... ]
        >>> table = link_volumes(events, net)
        >>> table.volume("a-b", 8), table.congestion_index("a-b", 8)
        (1, 1.0)
    """
    index = {link.id: i for i, link in enumerate(net.links)}
    volumes = np.zeros((len(net.links), N_HOURS), dtype=np.int64)
    travel_times = np.zeros((len(net.links), N_HOURS), dtype=np.float64)
    unpaired = 0

    open_entries: Dict[str, Tuple[str, int]] = {}
    for event in events:
        if event.kind == "link_enter" and event.link is not None:
            if event.person in open_entries:
                unpaired += 1
            open_entries[event.person] = (event.link, event.time)
        elif event.kind == "link_leave":
            entry = open_entries.pop(event.person, None)
            if entry is None or entry[0] != event.link:
                unpaired += 1
                continue
            link_id, enter_time = entry
            volumes[index[link_id], report_hour(enter_time)] += 1
            travel_times[index[link_id], report_hour(enter_time)] += event.time - enter_time

    unpaired += len(open_entries)
    if unpaired:
        LOG.warning("%d unpaired link events ignored", unpaired)

    return LinkVolumeTable(
        link_ids=tuple(link.id for link in net.links),
        volumes=volumes,
        travel_times=travel_times,
        free_flow=np.array([link.free_flow_time for link in net.links], dtype=np.float64),
        unpaired=unpaired,
    )


@dataclass(frozen=True)
class Ridership:
    """Transit boardings and on-board passengers per hour."""

    boardings: npt.NDArray[np.int64]
    occupancy: npt.NDArray[np.int64]
    """Passengers on board at the end of each hour."""

    by_line: Dict[str, int] = field(default_factory=dict)
    """Daily boardings per line."""

    unpaired: int = 0

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame(
            {
                "hour": HOUR_LABELS,
                "boardings": self.boardings,
                "occupancy": self.occupancy,
            }
        )


def pt_ridership(events: Iterable[Event]) -> Ridership:
    """Hourly transit boardings and cumulative occupancy.

    Examples:
        >>> from tollsim.events import Event
        >>> board = Event(8 * 3600, "board", "p", link="L1")
        >>> ridership = pt_ridership([board, Event(9 * 3600, "alight", "p", link="L1")])
        >>> ridership.boardings.tolist()[8], ridership.occupancy.tolist()[8:10]
        (1, [1, 0])
    """
    boardings = np.zeros(N_HOURS, dtype=np.int64)
    alightings = np.zeros(N_HOURS, dtype=np.int64)
    by_line: Dict[str, int] = {}
    on_board: Dict[str, str] = {}
    unpaired = 0

    for event in events:
        if event.kind == "board":
            if event.person in on_board:
                unpaired += 1
            on_board[event.person] = str(event.link)
            boardings[report_hour(event.time)] += 1
            by_line[str(event.link)] = by_line.get(str(event.link), 0) + 1
        elif event.kind == "alight":
            if on_board.pop(event.person, None) != event.link:
                unpaired += 1
                continue
            alightings[report_hour(event.time)] += 1

    if unpaired:
        LOG.warning("%d unpaired board/alight events", unpaired)

    return Ridership(
        boardings=boardings,
        occupancy=np.cumsum(boardings) - np.cumsum(alightings),
        by_line=dict(sorted(by_line.items())),
        unpaired=unpaired,
    )


def leg_categories(persons: Iterable[Person]) -> Dict[str, int]:
    """Count the executed legs per mode category.

    A transit leg counts as one ``pt`` trip plus an ``access_walk`` and an
    ``egress_walk`` when it walks to and from the stops. A transit leg that walks
    the whole way counts as ``transit_walk`` only.
    """
    counts = {category: 0 for category in MODE_CATEGORIES}
    for person in persons:
        for leg in person.selected_plan.legs:
            route = leg.route
            if leg.mode != "pt":
                counts[leg.mode] += 1
            elif isinstance(route, PtRoute) and route.walk_only:
                counts["transit_walk"] += 1
            else:
                counts["pt"] += 1
                if isinstance(route, PtRoute) and route.access_distance > 0.0:
                    counts["access_walk"] += 1
                if isinstance(route, PtRoute) and route.egress_distance > 0.0:
                    counts["egress_walk"] += 1
    return counts


@dataclass(frozen=True)
class ModeShareTable:
    """Leg counts per mode category without and with pricing."""

    baseline: Dict[str, int]
    policy: Dict[str, int]

    headers: ClassVar[Tuple[str, ...]] = ("",) + MODE_CATEGORIES

    def change_ratio(self, category: str) -> Optional[float]:
        return change_ratio(self.baseline[category], self.policy[category])

    def table(self) -> List[List[Any]]:
        return [
            ["Without pricing"] + [self.baseline[c] for c in MODE_CATEGORIES],
            ["With pricing"] + [self.policy[c] for c in MODE_CATEGORIES],
            ["Change ratio %"] + [format_ratio(self.change_ratio(c)) for c in MODE_CATEGORIES],
        ]

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame(
            {
                "category": MODE_CATEGORIES,
                "without_pricing": [self.baseline[c] for c in MODE_CATEGORIES],
                "with_pricing": [self.policy[c] for c in MODE_CATEGORIES],
                "change_ratio_pct": [self.change_ratio(c) for c in MODE_CATEGORIES],
            }
        )

    def __str__(self) -> str:
        """Text table representation."""
        return tabulate(self.table(), headers=self.headers, tablefmt="fancy_grid")

    def _repr_html_(self) -> str:
        """HTML representation (for IPython)."""
        return tabulate(self.table(), headers=self.headers, tablefmt="html")  # pragma: no cover


def _require_same_persons(baseline: Sequence[Person], policy: Sequence[Person]) -> None:
    if sorted(p.id for p in baseline) != sorted(p.id for p in policy):
        raise RunMismatchError("The two populations contain different persons.")


def mode_share(policy: Sequence[Person], baseline: Sequence[Person]) -> ModeShareTable:
    """Compare the executed mode categories of two populations.

    Raises:
        RunMismatchError: the populations contain different persons.
    """
    _require_same_persons(baseline, policy)
    return ModeShareTable(baseline=leg_categories(baseline), policy=leg_categories(policy))


SCORE_COLUMNS: Final = ("Mean", "Std", "Minimum", "Maximum", "Median")


@dataclass(frozen=True)
class ScoreStats:
    """Five-number summary of executed plan scores."""

    mean: float
    std: float
    minimum: float
    maximum: float
    median: float

    def values(self) -> List[float]:
        return [self.mean, self.std, self.minimum, self.maximum, self.median]

    @classmethod
    def of(cls, scores: Sequence[float]) -> "ScoreStats":
        """Summary of `scores`; the standard deviation is the population one.

        Examples:
            >>> stats = ScoreStats.of([1.0, 2.0, 3.0])
            >>> stats.mean, stats.median, stats.minimum, stats.maximum
            (2.0, 2.0, 1.0, 3.0)
        """
        if not scores:
            raise ValueError("Cannot summarize an empty set of scores.")
        values = np.asarray(scores, dtype=np.float64)
        return cls(
            mean=float(values.mean()),
            std=float(values.std()),
            minimum=float(values.min()),
            maximum=float(values.max()),
            median=float(np.median(values)),
        )


def score_stats(
    persons: Iterable[Person], executed: Optional[Mapping[str, float]] = None
) -> ScoreStats:
    """Summary of the scores of the selected plans.

    Args:
        persons: the population
        executed: unsmoothed score of each person's last execution, by person id.
            Persons missing here count with their selected plan's memorized score.

    Raises:
        ValueError: a selected plan is unscored.
    """
    executed = executed or {}
    scores: List[float] = []
    for person in persons:
        score = executed.get(person.id, person.selected_plan.score)
        if score is None:
            raise ValueError(f"Person {person.id!r}: selected plan is unscored.")
        scores.append(score)
    return ScoreStats.of(scores)


@dataclass(frozen=True)
class ScoreComparison:
    """Score summaries of a scenario pair and their difference."""

    baseline: ScoreStats
    policy: ScoreStats

    headers: ClassVar[Tuple[str, ...]] = ("",) + SCORE_COLUMNS

    @property
    def difference(self) -> List[float]:
        """Column-wise ``policy - baseline``."""
        return [b - a for a, b in zip(self.baseline.values(), self.policy.values())]

    @property
    def mean_change(self) -> Optional[float]:
        """Relative change of the mean score, in percent."""
        if self.baseline.mean == 0.0:
            return None
        return (self.policy.mean - self.baseline.mean) / abs(self.baseline.mean) * 100.0

    def table(self) -> List[List[Any]]:
        return [
            ["Without pricing"] + self.baseline.values(),
            ["With pricing"] + self.policy.values(),
            ["Difference"] + self.difference,
        ]

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame(
            [row[1:] for row in self.table()],
            columns=list(SCORE_COLUMNS),
            index=pd.Index(["without_pricing", "with_pricing", "difference"], name="row"),
        )

    def __str__(self) -> str:
        """Text table representation."""
        text = tabulate(self.table(), headers=self.headers, tablefmt="fancy_grid", floatfmt=".2f")
        return f"{text}\nMean change: {format_ratio(self.mean_change)}"

    def _repr_html_(self) -> str:
        """HTML representation (for IPython)."""
        return tabulate(self.table(), headers=self.headers, tablefmt="html")  # pragma: no cover


@dataclass(frozen=True)
class CordonMetrics:
    entries: npt.NDArray[np.int64]
    """Car entries into the region per hour."""

    entering_persons: int
    vkt_inside: float
    """Kilometers driven on links with both ends inside the region."""

    revenue: float
    """Toll revenue of the whole run, in dollars."""

    @property
    def daily_entries(self) -> int:
        return int(self.entries.sum())

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame({"hour": HOUR_LABELS, "entries": self.entries})


def toll_revenue(events: Iterable[Event]) -> float:
    """Sum of all money charged in an event stream, in dollars."""
    return -sum(event.amount or 0.0 for event in events if event.kind == "money")


def cordon_metrics(events: Sequence[Event], cordon: Cordon, net: Network) -> CordonMetrics:
    """Entries, entering persons, inside distance and revenue of a cordon region.

    Every entry into the region counts, including one by a vehicle stuck afterwards.
    Distance counts completed link traversals only, as :func:`link_volumes` does.
    """
    entry_links = set(cordon.entry_links)
    entries = np.zeros(N_HOURS, dtype=np.int64)
    entering: Set[str] = set()
    open_links: Dict[str, str] = {}
    vkt = 0.0

    for event in events:
        if event.link is None:
            continue
        if event.kind == "link_enter":
            open_links[event.person] = event.link
            if event.link in entry_links:
                entries[report_hour(event.time)] += 1
                entering.add(event.person)
        elif event.kind == "link_leave" and open_links.pop(event.person, None) == event.link:
            link = net.link(event.link)
            if cordon.is_inside(link):
                vkt += link.length / 1000.0

    return CordonMetrics(
        entries=entries,
        entering_persons=len(entering),
        vkt_inside=vkt,
        revenue=toll_revenue(events),
    )


def export_geojson(net: Network, table: LinkVolumeTable, hour: int) -> Dict[str, Any]:
    """Line features of every link with its volume and congestion index at `hour`.

    Raises:
        ValueError: `hour` is not a report bin.
    """
    if not 0 <= hour < N_HOURS:
        raise ValueError(f"hour must lie in [0, {N_HOURS}), got {hour}.")

    features = []
    for link in net.links:
        start, end = net.node(link.from_node), net.node(link.to_node)
        features.append(
            {
                "type": "Feature",
                "geometry": mapping(LineString([(start.x, start.y), (end.x, end.y)])),
                "properties": {
                    "link_id": link.id,
                    "volume": table.volume(link.id, hour),
                    "congestion_index": table.congestion_index(link.id, hour),
                },
            }
        )
    return {"type": "FeatureCollection", "features": features}


def write_geojson(collection: Dict[str, Any], path: StrPath) -> None:
    """Write a GeoJSON feature collection to `path`."""
    Path(path).write_text(json.dumps(collection, indent=1) + "\n", encoding="utf-8")


@dataclass(frozen=True)
class RunAnalysis:
    """All single-run evaluation outputs."""

    volumes: LinkVolumeTable
    ridership: Ridership
    modes: Dict[str, int]
    scores: ScoreStats
    cordon: Optional[CordonMetrics]
    revenue: float

    def summary(self) -> str:
        lines = [
            tabulate(
                [[self.modes[c] for c in MODE_CATEGORIES]],
                headers=MODE_CATEGORIES,
                tablefmt="fancy_grid",
            ),
            tabulate(
                [self.scores.values()],
                headers=SCORE_COLUMNS,
                tablefmt="fancy_grid",
                floatfmt=".2f",
            ),
            f"Transit boardings: {int(self.ridership.boardings.sum())}",
            f"Toll revenue: ${self.revenue:.2f}",
        ]
        if self.cordon is not None:
            lines += [
                f"Cordon entries: {self.cordon.daily_entries}"
                f" ({self.cordon.entering_persons} persons)",
                f"Distance driven inside the cordon: {self.cordon.vkt_inside:.2f} km",
            ]
        return "\n".join(lines) + "\n"


def analyze(run: RunArtifacts) -> RunAnalysis:
    """Compute all single-run reports of a loaded run."""
    cordon = run.cordon
    return RunAnalysis(
        volumes=link_volumes(run.events, run.net),
        ridership=pt_ridership(run.events),
        modes=leg_categories(run.persons),
        scores=score_stats(run.persons, run.executed_scores),
        cordon=cordon_metrics(run.events, cordon, run.net) if cordon is not None else None,
        revenue=toll_revenue(run.events),
    )


def analyze_run(
    directory: StrPath, out: Optional[StrPath] = None, *, hours: Sequence[int] = MAP_HOURS
) -> Path:
    """Write the single-run reports of a run directory.

    Args:
        directory: completed run directory
        out: report directory, ``<directory>/analysis`` by default
        hours: hours exported as congestion maps.

    Returns:
        The report directory.
    """
    run = load_run(directory)
    out = Path(out) if out is not None else run.directory / "analysis"
    out.mkdir(parents=True, exist_ok=True)

    result = analyze(run)
    result.volumes.to_frame().to_csv(
        out / "link_volumes.csv", index=False, float_format="%.4f", na_rep=""
    )
    result.ridership.to_frame().to_csv(out / "pt_ridership.csv", index=False)
    modes = pd.DataFrame(
        {"category": MODE_CATEGORIES, "legs": [result.modes[c] for c in MODE_CATEGORIES]}
    )
    modes.to_csv(out / "mode_share.csv", index=False)
    pd.DataFrame([result.scores.values()], columns=list(SCORE_COLUMNS)).to_csv(
        out / "score_stats.csv", index=False, float_format="%.6f"
    )
    if result.cordon is not None:
        result.cordon.to_frame().to_csv(out / "cordon_entries.csv", index=False)

    for hour in hours:
        write_geojson(
            export_geojson(run.net, result.volumes, hour), out / f"link_volumes_{hour:02d}.geojson"
        )

    (out / "summary.txt").write_text(result.summary(), encoding="utf-8")
    LOG.info("Analysis of %s written to %s", run.directory, out)
    return out


@dataclass(frozen=True)
class LinkChanges:
    decreased: int
    increased: int
    unchanged: int


def classify_link_changes(
    baseline: Dict[str, int], policy: Dict[str, int], tolerance: float = UNCHANGED_TOLERANCE
) -> Tuple[LinkChanges, Dict[str, str]]:
    """Sort links by the change of their daily volume.

    A link is unchanged when its volume moves by less than `tolerance` of the
    baseline volume, and by less than one vehicle in any case.

    Examples:
        >>> baseline = {"a": 100, "b": 100, "c": 0}
        >>> changes, _ = classify_link_changes(baseline, {"a": 80, "b": 103, "c": 2})
        >>> changes
        LinkChanges(decreased=1, increased=1, unchanged=1)
    """
    labels: Dict[str, str] = {}
    for link_id in sorted(baseline):
        delta = policy.get(link_id, 0) - baseline[link_id]
        if abs(delta) < max(1.0, tolerance * baseline[link_id]):
            labels[link_id] = "unchanged"
        else:
            labels[link_id] = "decreased" if delta < 0 else "increased"

    values = list(labels.values())
    return (
        LinkChanges(
            decreased=values.count("decreased"),
            increased=values.count("increased"),
            unchanged=values.count("unchanged"),
        ),
        labels,
    )


@dataclass(frozen=True)
class GoalAttainment:
    """Program targets checked on a scenario pair."""

    entries_change: Optional[float]
    vkt_change: Optional[float]

    @property
    def entries_met(self) -> bool:
        return self.entries_change is not None and self.entries_change <= ENTRY_REDUCTION_TARGET

    @property
    def vkt_met(self) -> bool:
        return self.vkt_change is not None and self.vkt_change <= VKT_REDUCTION_TARGET

    def summary(self) -> str:
        def status(met: bool) -> str:
            return "met" if met else "not met"

        return (
            f"Daily cordon entries: {format_ratio(self.entries_change)}"
            f" (target {ENTRY_REDUCTION_TARGET:.0f}%, {status(self.entries_met)})\n"
            f"Distance driven inside the cordon: {format_ratio(self.vkt_change)}"
            f" (target {VKT_REDUCTION_TARGET:.0f}%, {status(self.vkt_met)})\n"
        )


@dataclass(frozen=True)
class Comparison:
    modes: ModeShareTable
    scores: ScoreComparison
    link_deltas: pd.DataFrame
    link_changes: LinkChanges
    cordon_deltas: Optional[pd.DataFrame]
    goals: Optional[GoalAttainment]

    def summary(self) -> str:
        parts = [
            "Change in mode choice",
            str(self.modes),
            "Change in trip score",
            str(self.scores),
            f"Links: {self.link_changes.decreased} decreased,"
            f" {self.link_changes.increased} increased,"
            f" {self.link_changes.unchanged} unchanged",
        ]
        if self.goals is not None:
            parts.append(self.goals.summary().rstrip("\n"))
        return "\n".join(parts) + "\n"


def _check_comparable(baseline: RunArtifacts, policy: RunArtifacts) -> None:
    if baseline.metadata.seed != policy.metadata.seed:
        raise RunMismatchError(
            f"Seeds differ: {baseline.metadata.seed} and {policy.metadata.seed}."
        )
    if baseline.metadata.network_sha256 != policy.metadata.network_sha256:
        raise RunMismatchError("The runs used different networks.")


def compare(baseline: RunArtifacts, policy: RunArtifacts, *, force: bool = False) -> Comparison:
    """Compare a policy run against its baseline.

    Args:
        baseline: run without pricing
        policy: run with pricing
        force: compare even if seeds or networks differ.

    Raises:
        RunMismatchError: the runs are not comparable.
    """
    if not force:
        _check_comparable(baseline, policy)

    modes = mode_share(policy.persons, baseline.persons)
    scores = ScoreComparison(
        score_stats(baseline.persons, baseline.executed_scores),
        score_stats(policy.persons, policy.executed_scores),
    )

    before = link_volumes(baseline.events, baseline.net).daily_volumes()
    after = link_volumes(policy.events, baseline.net).daily_volumes()
    link_changes, labels = classify_link_changes(before, after)
    link_deltas = pd.DataFrame(
        [
            (link_id, before[link_id], after.get(link_id, 0), label)
            for link_id, label in labels.items()
        ],
        columns=["link_id", "baseline", "policy", "change"],
    )
    link_deltas.insert(3, "delta", link_deltas["policy"] - link_deltas["baseline"])

    cordon = baseline.cordon if baseline.cordon is not None else policy.cordon
    cordon_deltas: Optional[pd.DataFrame] = None
    goals: Optional[GoalAttainment] = None
    if cordon is not None:
        base_metrics = cordon_metrics(baseline.events, cordon, baseline.net)
        policy_metrics = cordon_metrics(policy.events, cordon, baseline.net)
        cordon_deltas = pd.DataFrame(
            {
                "hour": HOUR_LABELS,
                "baseline": base_metrics.entries,
                "policy": policy_metrics.entries,
                "delta": policy_metrics.entries - base_metrics.entries,
            }
        )
        goals = GoalAttainment(
            entries_change=change_ratio(base_metrics.daily_entries, policy_metrics.daily_entries),
            vkt_change=change_ratio(base_metrics.vkt_inside, policy_metrics.vkt_inside),
        )

    return Comparison(
        modes=modes,
        scores=scores,
        link_deltas=link_deltas,
        link_changes=link_changes,
        cordon_deltas=cordon_deltas,
        goals=goals,
    )


def compare_runs(
    baseline_dir: StrPath, policy_dir: StrPath, out: StrPath, *, force: bool = False
) -> Path:
    """Write the comparison reports of two run directories.

    Returns:
        The report directory.
    """
    comparison = compare(load_run(baseline_dir), load_run(policy_dir), force=force)
    out = Path(out)
    out.mkdir(parents=True, exist_ok=True)

    comparison.modes.to_frame().to_csv(
        out / "mode_share.csv", index=False, float_format="%.4f", na_rep="n/a"
    )
    comparison.scores.to_frame().to_csv(out / "score_stats.csv", float_format="%.6f")
    comparison.link_deltas.to_csv(out / "link_deltas.csv", index=False)
    if comparison.cordon_deltas is not None:
        comparison.cordon_deltas.to_csv(out / "cordon_deltas.csv", index=False)
    (out / "summary.txt").write_text(comparison.summary(), encoding="utf-8")

    LOG.info("Comparison written to %s", out)
    return out
