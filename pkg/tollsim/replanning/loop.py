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

"""The co-evolutionary loop: execute, score, replan, repeat."""

import logging
import math
from dataclasses import dataclass, field
from typing import Any, Dict, Final, List, NoReturn, Optional, Sequence, Union

import numpy as np
from tqdm import tqdm
from typing_extensions import Self

from tollsim import mobsim
from tollsim.errors import IterationError, RoutingError
from tollsim.events import EventStream
from tollsim.mobsim import MobsimResult
from tollsim.network import MODES, Cordon
from tollsim.population import Person
from tollsim.replanning.router import ReplanningContext, route_plan
from tollsim.replanning.strategies import Strategy, replan_person, select_plan, strategy_counts
from tollsim.replanning.travel_times import TravelTimeField, build_travel_time_field
from tollsim.scenario import Scenario
from tollsim.scoring import ScoringParams, score_plan
from tollsim.utils import stable_seed

LOG = logging.getLogger(__name__)

CONVERGENCE_WINDOW: Final = 5
CONVERGENCE_THRESHOLD: Final = 0.01


@dataclass
class _MockProgressBar:
    """Minimal tqdm-compatible progress bar mock."""

    total: int
    """Total number of iterations."""

    n: int = 0
    """Number of completed iterations."""

    def update(self, n: int = 1) -> None:
        """Update the number of completed iterations by `n`."""
        self.n += n

    def set_postfix_str(self, s: str) -> None:
        ...

    def __enter__(self) -> Self:
        return self

    def __exit__(*args: Any) -> None:
        ...


@dataclass(frozen=True)
class IterationStats:
    """Summary of one executed iteration."""

    iteration: int
    mean_score: float
    std_score: float
    mode_shares: Dict[str, float]
    """Fraction of executed legs per mode."""

    cordon_entries: int
    n_stuck: int
    convergence_metric: float
    strategies: Dict[str, int] = field(default_factory=dict)
    """Number of persons per applied strategy (empty in iteration 0)."""

    @property
    def converged(self) -> bool:
        return self.convergence_metric < CONVERGENCE_THRESHOLD

    def as_row(self) -> Dict[str, Any]:
        """Flat record for the per-iteration statistics table."""
        row: Dict[str, Any] = {
            "iteration": self.iteration,
            "mean_score": self.mean_score,
            "std_score": self.std_score,
        }
        row.update({f"share_{mode}": self.mode_shares.get(mode, 0.0) for mode in MODES})
        row.update(
            {
                "cordon_entries": self.cordon_entries,
                "n_stuck": self.n_stuck,
                "convergence_metric": self.convergence_metric,
            }
        )
        return row


@dataclass(frozen=True)
class ScoreRecord:
    """Memorized score of one plan after one iteration."""

    iteration: int
    person: str
    plan: int
    score: Optional[float]
    executed: bool
    executed_score: Optional[float] = None
    """Unsmoothed score of this iteration's execution; set on the executed plan only."""


@dataclass
class IterationResult:
    """Outcome of a complete run of the loop."""

    persons: List[Person]
    stats: List[IterationStats]
    scores: List[ScoreRecord]
    last: MobsimResult
    """Mobsim outcome of the final iteration."""

    @property
    def convergence_metric(self) -> float:
        return self.stats[-1].convergence_metric

    @property
    def converged(self) -> bool:
        return self.stats[-1].converged


def convergence_metric(means: Sequence[float], window: int = CONVERGENCE_WINDOW) -> float:
    """Largest relative change of the mean score over the last `window` iterations.

    Examples:
        >>> convergence_metric([10.0])
        inf
        >>> convergence_metric([10.0, 11.0, 11.0], window=1)
        0.0
        >>> round(convergence_metric([0.0, 9.0, 9.0], window=2), 3)
        0.9
    """
    deltas = [abs(new - old) / (abs(new) + 1.0) for old, new in zip(means[:-1], means[1:])]
    return max(deltas[-window:]) if deltas else math.inf


def mode_shares(persons: Sequence[Person]) -> Dict[str, float]:
    """Fraction of the legs of the selected plans using each mode."""
    counts = {mode: 0 for mode in MODES}
    for person in persons:
        for leg in person.selected_plan.legs:
            counts[leg.mode] += 1
    total = sum(counts.values())
    return {mode: (count / total if total else 0.0) for mode, count in counts.items()}


def cordon_entries(events: EventStream, cordon: Optional[Cordon]) -> int:
    """Number of car entries into the cordon in one event stream."""
    if cordon is None:
        return 0
    entry_links = set(cordon.entry_links)
    return sum(1 for event in events.of_kind("link_enter") if event.link in entry_links)


def score_executed(
    persons: Sequence[Person], result: MobsimResult, params: ScoringParams, learning_rate: float
) -> List[float]:
    """Score the executed plans and update their memorized scores.

    Persons that did not complete their plan receive the stuck score.

    Returns:
        The executed scores, in person order.
    """
    by_person = result.events.by_person()
    stuck = result.stuck_persons
    executed: List[float] = []

    for person in persons:
        plan = person.selected_plan
        if person.id in stuck:
            score = params.stuck_score
        else:
            score = score_plan(plan, by_person.get(person.id, []), params).total

        if plan.score is None:
            plan.score = score
        else:
            plan.score = (1.0 - learning_rate) * plan.score + learning_rate * score
        executed.append(score)

    if stuck:
        LOG.warning("%d persons received the stuck score %s", len(stuck), params.stuck_score)
    return executed


def _route_initial_plans(persons: Sequence[Person], context: ReplanningContext) -> None:
    for person in persons:
        for index, plan in enumerate(person.plan_memory):
            if not plan.is_routed():
                person.plan_memory[index] = route_plan(
                    plan, person, context, only_unrouted=True
                ).plan


def run_iterations(
    scenario: Scenario,
    iterations: Optional[int] = None,
    *,
    seed: Optional[int] = None,
    with_progress_bar: bool = False,
) -> IterationResult:
    """Run the co-evolutionary loop.

    Iteration 0 executes the initial plans (legs without a route are routed on
    free-flow travel times first). Each later iteration replans every person, then
    executes and scores the selected plans. Innovation is switched off for the
    final iterations, where persons only select their best plan.

    Args:
        scenario: loaded scenario; its population is not modified
        iterations: number of iterations, including iteration 0; defaults to the
            scenario configuration
        seed: master seed; defaults to the scenario configuration
        with_progress_bar: whether to display a progress bar.

    Raises:
        IterationError: a stage failed; carries the iteration index and stage name.
    """
    config = scenario.config
    n_iterations = iterations if iterations is not None else config.iterations
    master_seed = seed if seed is not None else config.seed
    if n_iterations < 1:
        raise ValueError("At least one iteration is required.")

    strategy = config.strategy
    params = config.scoring
    innovation_iterations = strategy.innovation_iterations(n_iterations)
    persons = [person.copy(deep=True) for person in scenario.population]

    ttf = TravelTimeField.free_flow(scenario.net)
    stats: List[IterationStats] = []
    scores: List[ScoreRecord] = []
    means: List[float] = []
    result: Optional[MobsimResult] = None

    if with_progress_bar:
        context: Union[tqdm[NoReturn], _MockProgressBar] = tqdm(
            total=n_iterations, desc="iterations"
        )
    else:
        context = _MockProgressBar(total=n_iterations)

    with context as progress_bar:
        for iteration in range(n_iterations):
            stage = "replanning"
            try:
                replanning = ReplanningContext(
                    net=scenario.net,
                    ttf=ttf,
                    params=params,
                    toll=scenario.toll,
                    transit=scenario.transit,
                )
                applied: List[Strategy] = []
                if iteration == 0:
                    _route_initial_plans(persons, replanning)
                else:
                    innovation = iteration < innovation_iterations
                    for person in persons:
                        rng = np.random.default_rng(stable_seed(master_seed, person.id, iteration))
                        try:
                            applied.append(
                                replan_person(
                                    person, replanning, strategy, rng, innovation=innovation
                                )
                            )
                        except RoutingError as e:
                            LOG.debug("person %s keeps its plans: %s", person.id, e)
                            person.selected = select_plan(person, strategy.mu_select, rng)
                            applied.append("select")

                stage = "mobsim"
                result = mobsim.run(
                    scenario.net,
                    persons,
                    scenario.toll,
                    transit=scenario.transit,
                    scale=config.scale,
                    seed=master_seed,
                )

                stage = "scoring"
                executed = score_executed(persons, result, params, strategy.learning_rate)
                for person, executed_score in zip(persons, executed):
                    scores.extend(
                        ScoreRecord(
                            iteration,
                            person.id,
                            index,
                            plan.score,
                            index == person.selected,
                            executed_score if index == person.selected else None,
                        )
                        for index, plan in enumerate(person.plan_memory)
                    )

                stage = "travel times"
                ttf = build_travel_time_field(result.events, scenario.net)
            except IterationError:
                raise
            except Exception as e:
                raise IterationError(iteration, stage, e) from e

            means.append(float(np.mean(executed)) if executed else 0.0)
            iteration_stats = IterationStats(
                iteration=iteration,
                mean_score=means[-1],
                std_score=float(np.std(executed)) if executed else 0.0,
                mode_shares=mode_shares(persons),
                cordon_entries=cordon_entries(result.events, scenario.cordon),
                n_stuck=len(result.stuck_persons),
                convergence_metric=convergence_metric(means),
                strategies=strategy_counts(applied),
            )
            stats.append(iteration_stats)

            LOG.info(
                "iteration %d: mean score %.3f, shares %s, cordon entries %d, stuck %d",
                iteration,
                iteration_stats.mean_score,
                {mode: round(share, 3) for mode, share in iteration_stats.mode_shares.items()},
                iteration_stats.cordon_entries,
                iteration_stats.n_stuck,
            )
            progress_bar.set_postfix_str(f"mean score {iteration_stats.mean_score:.2f}")
            progress_bar.update(1)

    assert result is not None  # noqa: S101
    if not stats[-1].converged:
        LOG.warning(
            "Not converged after %d iterations (metric %.4f)",
            n_iterations,
            stats[-1].convergence_metric,
        )
    return IterationResult(persons=persons, stats=stats, scores=scores, last=result)
