"""
Product of a DES with a specification DFA.

The DFA reads the label of every DES state the plant enters, starting with
the label of the initial state, so a product state records both where the
plant is and how much of the specification has been witnessed.
"""

import json
import logging
from collections import deque
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Iterator, Mapping, NamedTuple, Optional, Union

import networkx as nx
from pydantic import BaseModel, Field, ValidationError

from .des import Des, DesFile, EventSpec, StateSpec, TransitionSpec, pair_id
from .dfa import Dfa
from .errors import (
    SchemaViolationError,
    UndefinedTransitionError,
    UnknownStateError,
    VocabularyMismatchError,
)

logger = logging.getLogger(__name__)


class ProductState(NamedTuple):
    des: str
    dfa: int


def product_id(state: ProductState) -> str:
    return pair_id(state.des, str(state.dfa))


@dataclass(frozen=True, eq=False)
class ProductAutomaton:
    """
    Reachable part of P = G ⊗ A.

    `full_state_count` and `full_accepting_count` describe the whole of
    X × X_A (unreachable pairs included); the ranking bound is derived
    from them.
    """

    states: tuple[ProductState, ...]
    events: tuple[str, ...]
    controllable: frozenset[str]
    delta: Mapping[ProductState, Mapping[str, ProductState]]
    initial: ProductState
    accepting: frozenset[ProductState]
    full_state_count: int
    full_accepting_count: int
    labels: Mapping[str, frozenset[str]]

    def _moves(self, state: ProductState) -> Mapping[str, ProductState]:
        if state not in self.delta:
            raise UnknownStateError(f"unknown product state {state}")
        return self.delta[state]

    def project(self, state: ProductState) -> tuple[str, int]:
        """(J_G(x), J_A(x))."""
        self._moves(state)
        return state.des, state.dfa

    def is_accepting(self, state: ProductState) -> bool:
        return state in self.accepting

    def label(self, state: ProductState) -> frozenset[str]:
        return self.labels[state.des]

    def enabled(self, state: ProductState) -> frozenset[str]:
        return frozenset(self._moves(state))

    def enabled_controllable(self, state: ProductState) -> frozenset[str]:
        return self.enabled(state) & self.controllable

    def enabled_uncontrollable(self, state: ProductState) -> frozenset[str]:
        return self.enabled(state) - self.controllable

    def successor(self, state: ProductState, event: str) -> ProductState:
        moves = self._moves(state)
        if event not in moves:
            raise UndefinedTransitionError(f"event '{event}' is not enabled at {product_id(state)}")
        return moves[event]

    def successors(self, state: ProductState) -> set[ProductState]:
        return set(self._moves(state).values())

    def run_string(self, events: Iterable[str], state: Optional[ProductState] = None) -> ProductState:
        current = self.initial if state is None else state
        for event in events:
            current = self.successor(current, event)
        return current

    def transitions(self) -> Iterator[tuple[ProductState, str, ProductState]]:
        for source in self.states:
            for event, target in self.delta[source].items():
                yield source, event, target

    @property
    def num_transitions(self) -> int:
        return sum(len(moves) for moves in self.delta.values())

    def to_networkx(self) -> nx.MultiDiGraph:
        """Transition graph with one edge per event, keyed by the event name."""
        graph = nx.MultiDiGraph()
        for state in self.states:
            graph.add_node(state, accepting=state in self.accepting)
        for source, event, target in self.transitions():
            graph.add_edge(source, target, key=event, controllable=event in self.controllable)
        return graph


def build_product(g: Des, d: Dfa) -> ProductAutomaton:
    """
    Compose a DES with a DFA over (a subset of) its vocabulary.

    Args:
        g: The plant
        d: Complete DFA whose atoms all belong to g.ap

    Returns:
        The reachable part of the product, found by forward search from
        (x0, δ_A(z0, L(x0)))

    Raises:
        VocabularyMismatchError: If the DFA uses atoms the plant never labels
    """
    missing = set(d.ap) - set(g.ap)
    if missing:
        raise VocabularyMismatchError(f"DFA atoms {sorted(missing)} are not in the DES vocabulary")
    vocabulary = frozenset(d.ap)

    def read(dfa_state: int, des_state: str) -> int:
        return d.step(dfa_state, g.labels[des_state] & vocabulary)

    start = ProductState(g.initial, read(d.initial, g.initial))
    order = [start]
    delta: dict[ProductState, dict[str, ProductState]] = {}
    queue = deque([start])
    seen = {start}
    while queue:
        state = queue.popleft()
        moves = {}
        for event, des_target in g.delta.get(state.des, {}).items():
            target = ProductState(des_target, read(state.dfa, des_target))
            moves[event] = target
            if target not in seen:
                seen.add(target)
                order.append(target)
                queue.append(target)
        delta[state] = moves

    product = ProductAutomaton(
        states=tuple(order),
        events=tuple(g.events),
        controllable=frozenset(g.controllable),
        delta=delta,
        initial=start,
        accepting=frozenset(s for s in order if s.dfa in d.accepting),
        full_state_count=len(g.states) * d.num_states,
        full_accepting_count=len(g.states) * len(d.accepting),
        labels=dict(g.labels),
    )
    logger.info(
        "built product: %d reachable states, %d transitions (%d states in full)",
        len(product.states),
        product.num_transitions,
        product.full_state_count,
    )
    return product


# Files


class FullCounts(BaseModel):
    states: int
    accepting: int


class ProductFile(DesFile):
    accepting: list[str]
    full_counts: FullCounts
    components: dict[str, tuple[str, int]] = Field(default_factory=dict)


def save_product(p: ProductAutomaton, path: Union[str, Path]) -> None:
    """Write the product in the DES schema plus accepting states and full counts."""
    ids = {state: product_id(state) for state in p.states}
    ap = sorted(set().union(*p.labels.values())) if p.labels else []
    model = ProductFile(
        ap=ap,
        events=[EventSpec(name=e, controllable=e in p.controllable) for e in p.events],
        states=[StateSpec(id=ids[s], labels=sorted(p.label(s))) for s in p.states],
        initial=ids[p.initial],
        transitions=[TransitionSpec(source=ids[x], event=e, target=ids[y]) for x, e, y in p.transitions()],
        accepting=[ids[s] for s in p.states if s in p.accepting],
        full_counts=FullCounts(states=p.full_state_count, accepting=p.full_accepting_count),
        components={ids[s]: (s.des, s.dfa) for s in p.states},
    )
    data = model.model_dump(mode="json", by_alias=True)
    Path(path).write_text(json.dumps(data, indent=2) + "\n", encoding="utf-8")


def load_product(path: Union[str, Path]) -> ProductAutomaton:
    path = Path(path)
    try:
        model = ProductFile.model_validate_json(path.read_text(encoding="utf-8"))
    except ValidationError as err:
        raise SchemaViolationError(f"{path}: {err}") from err

    by_id = {}
    labels = {}
    for spec in model.states:
        if spec.id not in model.components:
            raise SchemaViolationError(f"{path}: state '{spec.id}' has no components")
        des_state, dfa_state = model.components[spec.id]
        by_id[spec.id] = ProductState(des_state, dfa_state)
        labels[des_state] = frozenset(spec.labels)

    def lookup(state_id: str) -> ProductState:
        try:
            return by_id[state_id]
        except KeyError:
            raise SchemaViolationError(f"{path}: unknown state '{state_id}'") from None

    delta: dict[ProductState, dict[str, ProductState]] = {state: {} for state in by_id.values()}
    for t in model.transitions:
        delta[lookup(t.source)][t.event] = lookup(t.target)

    return ProductAutomaton(
        states=tuple(by_id[s.id] for s in model.states),
        events=tuple(e.name for e in model.events),
        controllable=frozenset(e.name for e in model.events if e.controllable),
        delta=delta,
        initial=lookup(model.initial),
        accepting=frozenset(lookup(s) for s in model.accepting),
        full_state_count=model.full_counts.states,
        full_accepting_count=model.full_counts.accepting,
        labels=labels,
    )
