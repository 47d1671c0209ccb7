"""
On-line permissive supervisor.

At step k in product state x the supervisor enables every event whose
successor has rank below max(rank(x), level(k)). While the permissiveness
level is high, rank-preserving (neutral) moves are allowed; once it has
decayed to zero only rank-decreasing moves remain, so the plant is driven
to acceptance.

This module provides:
- Permissiveness schedules (linear clamp and tabulated)
- Supervisor: the control-pattern function and its realizations
- SupervisorSession: the closed loop, one observed event at a time
- JSON-lines session transcripts
"""

import logging
import math
from abc import ABC, abstractmethod
from collections import deque
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Optional, Sequence, Union

from pydantic import BaseModel

from .config import settings
from .des import Des
from .dfa import Dfa
from .errors import (
    IllegalObservationError,
    ResourceLimitError,
    ScheduleError,
    SessionStoppedError,
    UndefinedTransitionError,
    UnenforceableError,
)
from .product import ProductAutomaton, ProductState
from .ranking import RankingFunction, TransitionClass, classify

logger = logging.getLogger(__name__)


# Schedules


class PermissivenessSchedule(ABC):
    """A nonincreasing level η(k) that reaches zero after finitely many steps."""

    @abstractmethod
    def level(self, k: int) -> float: ...

    @abstractmethod
    def zero_step(self) -> int:
        """The first k with level(k) == 0."""

    def validate(self, alpha: int) -> None:
        """
        Raises:
            ScheduleError: If level(0) exceeds alpha, or the level is not
                nonincreasing up to its zero step
        """
        if self.level(0) > alpha:
            raise ScheduleError(f"initial level {self.level(0)} exceeds alpha={alpha}")
        last = self.zero_step()
        previous = self.level(0)
        for k in range(1, last + 1):
            current = self.level(k)
            if current > previous:
                raise ScheduleError(f"level increases at step {k}")
            previous = current
        if self.level(last) != 0:
            raise ScheduleError(f"level at the zero step {last} is {self.level(last)}")


@dataclass(frozen=True)
class LinearSchedule(PermissivenessSchedule):
    """η(k) = max(a·k + b, 0) with a < 0."""

    a: float
    b: float

    def __post_init__(self):
        if not self.a < 0:
            raise ScheduleError(f"slope a must be negative, got {self.a}")

    def level(self, k: int) -> float:
        return max(self.a * k + self.b, 0.0)

    def zero_step(self) -> int:
        k = max(0, math.ceil(-self.b / self.a))
        while self.level(k) > 0:
            k += 1
        return k

    def validate(self, alpha: int) -> None:
        if self.b > alpha:
            raise ScheduleError(f"intercept b={self.b} exceeds alpha={alpha}")
        super().validate(alpha)


@dataclass(frozen=True)
class TabulatedSchedule(PermissivenessSchedule):
    """Explicit levels for the first steps, zero afterwards."""

    levels: tuple[float, ...]

    def __post_init__(self):
        if any(value < 0 for value in self.levels):
            raise ScheduleError("levels must be nonnegative")
        if any(later > earlier for earlier, later in zip(self.levels, self.levels[1:])):
            raise ScheduleError("levels must be nonincreasing")

    def level(self, k: int) -> float:
        return float(self.levels[k]) if k < len(self.levels) else 0.0

    def zero_step(self) -> int:
        for k, value in enumerate(self.levels):
            if value == 0:
                return k
        return len(self.levels)


# Transcripts


class TranscriptEntry(BaseModel):
    k: int
    state: tuple[str, int]
    rank: int
    level: float
    pattern: list[str]
    observed: str


def write_transcript(entries: Iterable[TranscriptEntry], path: Union[str, Path]) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as handle:
        for entry in entries:
            handle.write(entry.model_dump_json() + "\n")


def read_transcript(path: Union[str, Path]) -> list[TranscriptEntry]:
    with open(path, encoding="utf-8") as handle:
        return [TranscriptEntry.model_validate_json(line) for line in handle if line.strip()]


# Supervisor


class Supervisor:
    """
    The control-pattern function for one product, ranking and schedule.

    Args:
        product: Product of the plant and the specification DFA
        ranking: Its ranking function
        schedule: Permissiveness schedule, validated against the ranking bound

    Raises:
        ScheduleError: If the schedule is not valid for this ranking
    """

    def __init__(self, product: ProductAutomaton, ranking: RankingFunction, schedule: PermissivenessSchedule):
        schedule.validate(ranking.alpha)
        self.product = product
        self.ranking = ranking
        self.schedule = schedule

    def online(self, state: ProductState, k: int) -> frozenset[str]:
        bound = max(self.ranking[state], self.schedule.level(k))
        return frozenset(
            event for event, target in self.product.delta[state].items() if self.ranking[target] < bound
        )

    def start(self, record_transcript: bool = True) -> "SupervisorSession":
        """
        Open a session at the initial product state.

        Raises:
            UnenforceableError: If the initial state has rank alpha
        """
        initial = self.product.initial
        rank = self.ranking[initial]
        if rank == self.ranking.alpha:
            raise UnenforceableError(rank, self.ranking.alpha)
        session = SupervisorSession(self, initial, stopped=rank == 0, record_transcript=record_transcript)
        logger.info("session started at rank %d (alpha=%d)", rank, self.ranking.alpha)
        return session

    def realized_pattern(self, events: Sequence[str]) -> frozenset[str]:
        """Pattern issued after `events` by the finite-state realization."""
        return self.online(self.product.run_string(events), len(events))

    def path_pattern(self, events: Sequence[str], g: Des, d: Dfa) -> frozenset[str]:
        """
        Pattern after `events` computed from the path itself.

        Replays the string on the plant, feeds the label word to the DFA and
        evaluates each enabled event without using the product's
        transition table.
        """
        vocabulary = frozenset(d.ap)
        des_state = g.initial
        dfa_state = d.step(d.initial, g.label(des_state) & vocabulary)
        for event in events:
            des_state = g.step(des_state, event)
            dfa_state = d.step(dfa_state, g.label(des_state) & vocabulary)
        bound = max(self.ranking[ProductState(des_state, dfa_state)], self.schedule.level(len(events)))
        pattern = set()
        for event in g.enabled(des_state):
            target = g.step(des_state, event)
            successor = ProductState(target, d.step(dfa_state, g.label(target) & vocabulary))
            if self.ranking[successor] < bound:
                pattern.add(event)
        return frozenset(pattern)

    def supervised_language(self, depth: int, budget: Optional[int] = None) -> set[tuple[str, ...]]:
        """
        Closed-loop language up to length `depth`.

        The empty string belongs to it, and s·σ does when s does, σ is
        enabled after s and σ is in the pattern issued after s.

        Raises:
            ResourceLimitError: If more than `budget` strings are produced
        """
        limit = budget if budget is not None else settings.language_budget
        result = {()}
        frontier = deque([((), self.product.initial)])
        while frontier:
            string, state = frontier.popleft()
            if len(string) == depth:
                continue
            for event in sorted(self.online(state, len(string))):
                extended = string + (event,)
                result.add(extended)
                if len(result) > limit:
                    raise ResourceLimitError(f"supervised language exceeded {limit} strings")
                frontier.append((extended, self.product.delta[state][event]))
        return result


@dataclass
class SupervisorSession:
    """
    Mutable closed-loop state: product state m, step counter k, stop flag.

    A session belongs to one caller; independent sessions may share the
    same Supervisor.
    """

    supervisor: Supervisor
    state: ProductState
    k: int = 0
    stopped: bool = False
    record_transcript: bool = True
    events: list[str] = field(default_factory=list)
    legal_count: int = 0
    neutral_count: int = 0
    transcript: list[TranscriptEntry] = field(default_factory=list)
    _pattern: Optional[frozenset[str]] = field(default=None, repr=False)

    @property
    def rank(self) -> int:
        return self.supervisor.ranking[self.state]

    @property
    def level(self) -> float:
        return self.supervisor.schedule.level(self.k)

    def pattern(self) -> frozenset[str]:
        """The pattern issued for the next event."""
        if self.stopped:
            raise SessionStoppedError("the supervisor has stopped; no further patterns are issued")
        if self._pattern is None:
            self._pattern = self.supervisor.online(self.state, self.k)
        return self._pattern

    def observe(self, event: str) -> "SupervisorSession":
        """
        Advance the session by one observed event.

        Raises:
            SessionStoppedError: If the session already stopped
            UndefinedTransitionError: If the event is not enabled
            IllegalObservationError: If the event was not in the issued pattern
        """
        pattern = self.pattern()
        product = self.supervisor.product
        if event not in product.delta[self.state]:
            raise UndefinedTransitionError(f"event '{event}' is not enabled at {self.state}")
        if event not in pattern:
            raise IllegalObservationError(f"event '{event}' was not in the issued pattern {sorted(pattern)}")

        target = product.delta[self.state][event]
        kind = classify(product, self.supervisor.ranking, (self.state, event, target))
        if kind is TransitionClass.LEGAL:
            self.legal_count += 1
        else:
            self.neutral_count += 1
        if self.record_transcript:
            self.transcript.append(
                TranscriptEntry(
                    k=self.k,
                    state=(self.state.des, self.state.dfa),
                    rank=self.rank,
                    level=self.level,
                    pattern=sorted(pattern),
                    observed=event,
                )
            )
        logger.debug("k=%d %s -> %s (%s)", self.k, event, target, kind.value)

        self.state = target
        self.k += 1
        self.events.append(event)
        self._pattern = None
        self.stopped = self.rank == 0
        return self


def start_session(
    product: ProductAutomaton, ranking: RankingFunction, schedule: PermissivenessSchedule
) -> SupervisorSession:
    return Supervisor(product, ranking, schedule).start()


def observe(session: SupervisorSession, event: str) -> SupervisorSession:
    return session.observe(event)
