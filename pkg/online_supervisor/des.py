"""
Labeled discrete event systems.

This module provides:
- The Des type: a deterministic transition system whose events are split
  into controllable and uncontrollable, with a labeling of states by
  atomic propositions
- Synchronous product composition
- JSON loading and saving
"""

import json
import logging
from collections import deque
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Iterator, Mapping, Sequence, Union

from pydantic import BaseModel, ConfigDict, Field, ValidationError

from .errors import (
    ControllabilityConflictError,
    NondeterminismError,
    SchemaViolationError,
    UndefinedTransitionError,
    UnknownStateError,
)

logger = logging.getLogger(__name__)


# File schema


class EventSpec(BaseModel):
    name: str
    controllable: bool


class StateSpec(BaseModel):
    id: str
    labels: list[str] = Field(default_factory=list)


class TransitionSpec(BaseModel):
    model_config = ConfigDict(populate_by_name=True)

    source: str = Field(alias="from")
    event: str
    target: str = Field(alias="to")


class DesFile(BaseModel):
    ap: list[str]
    events: list[EventSpec]
    states: list[StateSpec]
    initial: str
    transitions: list[TransitionSpec]


@dataclass(frozen=True, eq=False)
class Des:
    """
    A labeled deterministic transition system G = ((X, Σ, δ, x0), AP, L).

    `delta[x][σ]` is the successor of x under σ; missing entries mean the
    transition is undefined. Events not in `controllable` are
    uncontrollable.
    """

    ap: frozenset[str]
    states: tuple[str, ...]
    events: tuple[str, ...]
    controllable: frozenset[str]
    initial: str
    labels: Mapping[str, frozenset[str]]
    delta: Mapping[str, Mapping[str, str]]

    def __post_init__(self):
        known = set(self.states)
        if len(known) != len(self.states):
            raise SchemaViolationError("duplicate state ids")
        if len(set(self.events)) != len(self.events):
            raise SchemaViolationError("duplicate event names")
        if self.initial not in known:
            raise SchemaViolationError(f"initial state '{self.initial}' is not a state")
        if not self.controllable <= set(self.events):
            raise SchemaViolationError(f"unknown controllable events {sorted(self.controllable - set(self.events))}")
        if set(self.labels) != known:
            raise SchemaViolationError("labeling must be defined on every state")
        for state, label in self.labels.items():
            if not label <= self.ap:
                raise SchemaViolationError(f"state '{state}' uses labels outside ap: {sorted(label - self.ap)}")
        for source, moves in self.delta.items():
            if source not in known:
                raise SchemaViolationError(f"transition from unknown state '{source}'")
            for event, target in moves.items():
                if event not in self.events:
                    raise SchemaViolationError(f"transition on unknown event '{event}'")
                if target not in known:
                    raise SchemaViolationError(f"transition to unknown state '{target}'")

    def _moves(self, state: str) -> Mapping[str, str]:
        if state not in self.labels:
            raise UnknownStateError(f"unknown state '{state}'")
        return self.delta.get(state, {})

    @property
    def uncontrollable(self) -> frozenset[str]:
        return frozenset(self.events) - self.controllable

    def enabled(self, state: str) -> frozenset[str]:
        """Σ(x): events whose transition is defined at x."""
        return frozenset(self._moves(state))

    def enabled_controllable(self, state: str) -> frozenset[str]:
        return self.enabled(state) & self.controllable

    def enabled_uncontrollable(self, state: str) -> frozenset[str]:
        return self.enabled(state) - self.controllable

    def successors(self, state: str) -> set[str]:
        return set(self._moves(state).values())

    def step(self, state: str, event: str) -> str:
        moves = self._moves(state)
        if event not in moves:
            raise UndefinedTransitionError(f"event '{event}' is not enabled at state '{state}'")
        return moves[event]

    def run_string(self, state: str, events: Iterable[str]) -> str:
        """Extended transition function; the empty string leaves x unchanged."""
        for event in events:
            state = self.step(state, event)
        return state

    def label(self, state: str) -> frozenset[str]:
        if state not in self.labels:
            raise UnknownStateError(f"unknown state '{state}'")
        return self.labels[state]

    def transitions(self) -> Iterator[tuple[str, str, str]]:
        for source in self.states:
            for event, target in self.delta.get(source, {}).items():
                yield source, event, target

    @property
    def num_transitions(self) -> int:
        return sum(len(moves) for moves in self.delta.values())

    def is_history(self, history: Sequence[str]) -> bool:
        """Check an alternating sequence x0 σ1 x1 ... xn against δ."""
        if len(history) % 2 == 0 or history[0] != self.initial:
            return False
        for j in range(0, len(history) - 1, 2):
            moves = self.delta.get(history[j], {})
            if moves.get(history[j + 1]) != history[j + 2]:
                return False
        return True


def make_des(
    ap: Iterable[str],
    states: Iterable[str],
    events: Iterable[str],
    controllable: Iterable[str],
    initial: str,
    labels: Mapping[str, Iterable[str]],
    transitions: Iterable[tuple[str, str, str]],
) -> Des:
    """
    Build a Des from plain collections.

    Raises:
        NondeterminismError: If a (state, event) pair has two targets
        SchemaViolationError: On any other structural problem
    """
    delta: dict[str, dict[str, str]] = {}
    for source, event, target in transitions:
        moves = delta.setdefault(source, {})
        previous = moves.setdefault(event, target)
        if previous != target:
            raise NondeterminismError(
                f"state '{source}' has two targets for event '{event}': '{previous}' and '{target}'"
            )
    states = tuple(states)
    return Des(
        ap=frozenset(ap),
        states=states,
        events=tuple(events),
        controllable=frozenset(controllable),
        initial=initial,
        labels={state: frozenset(labels.get(state, ())) for state in states},
        delta=delta,
    )


def accessible(g: Des) -> Des:
    """Restrict g to the states reachable from its initial state."""
    order = [g.initial]
    seen = {g.initial}
    queue = deque(order)
    while queue:
        state = queue.popleft()
        for target in g.delta.get(state, {}).values():
            if target not in seen:
                seen.add(target)
                order.append(target)
                queue.append(target)
    kept = [s for s in g.states if s in seen]
    return Des(
        ap=g.ap,
        states=tuple(kept),
        events=g.events,
        controllable=g.controllable,
        initial=g.initial,
        labels={s: g.labels[s] for s in kept},
        delta={s: dict(g.delta[s]) for s in kept if s in g.delta},
    )


def pair_id(first: str, second: str) -> str:
    """
    Id of a composite state, "(first,second)".

    Backslashes and commas inside the components are escaped, so the
    separating comma is the only unescaped one and distinct pairs never
    share an id.
    """
    return f"({_escape(first)},{_escape(second)})"


def _escape(part: str) -> str:
    return part.replace("\\", "\\\\").replace(",", "\\,")


def synchronous_product(g1: Des, g2: Des) -> Des:
    """
    Synchronous composition of two DESs.

    Shared events move both components and are enabled only when both
    enable them; private events interleave. Only the reachable part is
    built. Labels are the union of the component labels.

    Raises:
        ControllabilityConflictError: If a shared event is controllable in
            one operand and uncontrollable in the other
    """
    shared = set(g1.events) & set(g2.events)
    for event in sorted(shared):
        if (event in g1.controllable) != (event in g2.controllable):
            raise ControllabilityConflictError(f"shared event '{event}' has conflicting controllability")

    events = list(g1.events) + [e for e in g2.events if e not in shared]
    controllable = g1.controllable | g2.controllable

    start = (g1.initial, g2.initial)
    order = [start]
    seen = {start}
    queue = deque([start])
    delta: dict[str, dict[str, str]] = {}
    while queue:
        a, b = queue.popleft()
        moves1, moves2 = g1.delta.get(a, {}), g2.delta.get(b, {})
        moves = {}
        for event in events:
            if event in shared:
                if event not in moves1 or event not in moves2:
                    continue
                target = (moves1[event], moves2[event])
            elif event in moves1:
                target = (moves1[event], b)
            elif event in moves2:
                target = (a, moves2[event])
            else:
                continue
            moves[event] = pair_id(*target)
            if target not in seen:
                seen.add(target)
                order.append(target)
                queue.append(target)
        if moves:
            delta[pair_id(a, b)] = moves

    composite = Des(
        ap=g1.ap | g2.ap,
        states=tuple(pair_id(a, b) for a, b in order),
        events=tuple(events),
        controllable=frozenset(controllable),
        initial=pair_id(*start),
        labels={pair_id(a, b): g1.labels[a] | g2.labels[b] for a, b in order},
        delta=delta,
    )
    logger.info(
        "composed DES: %d states, %d transitions", len(composite.states), composite.num_transitions
    )
    return composite


def generated_strings(g: Des, depth: int) -> set[tuple[str, ...]]:
    """L(G) up to length `depth`, by brute-force enumeration."""
    result = {()}
    frontier = [((), g.initial)]
    for _ in range(depth):
        following = []
        for string, state in frontier:
            for event, target in g.delta.get(state, {}).items():
                extended = string + (event,)
                result.add(extended)
                following.append((extended, target))
        frontier = following
    return result


# Files


def des_from_model(model: DesFile) -> Des:
    names = [e.name for e in model.events]
    return make_des(
        ap=model.ap,
        states=[s.id for s in model.states],
        events=names,
        controllable=[e.name for e in model.events if e.controllable],
        initial=model.initial,
        labels={s.id: s.labels for s in model.states},
        transitions=[(t.source, t.event, t.target) for t in model.transitions],
    )


def des_to_model(g: Des) -> DesFile:
    return DesFile(
        ap=sorted(g.ap),
        events=[EventSpec(name=e, controllable=e in g.controllable) for e in g.events],
        states=[StateSpec(id=s, labels=sorted(g.labels[s])) for s in g.states],
        initial=g.initial,
        transitions=[TransitionSpec(source=x, event=e, target=y) for x, e, y in g.transitions()],
    )


def parse_des(text: str, source: str = "<string>") -> Des:
    try:
        model = DesFile.model_validate_json(text)
    except ValidationError as err:
        raise SchemaViolationError(f"{source}: {err}") from err
    return des_from_model(model)


def load_des(path: Union[str, Path]) -> Des:
    """
    Load a DES from its JSON file.

    Raises:
        SchemaViolationError: If the file does not match the schema
        NondeterminismError: If a (from, event) pair is listed with two
            different targets
    """
    path = Path(path)
    g = parse_des(path.read_text(encoding="utf-8"), str(path))
    logger.info("loaded %s: %d states, %d transitions", path.name, len(g.states), g.num_transitions)
    return g


def save_des(g: Des, path: Union[str, Path]) -> None:
    data = des_to_model(g).model_dump(mode="json", by_alias=True)
    Path(path).write_text(json.dumps(data, indent=2) + "\n", encoding="utf-8")
