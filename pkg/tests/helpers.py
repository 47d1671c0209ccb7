"""Builders for small hand-made and random automata used across the tests."""

import random
from typing import Iterable, Optional

from online_supervisor.des import Des, make_des
from online_supervisor.product import ProductAutomaton, ProductState


def random_des(rng: random.Random, n_states: int, n_events: int, ap: Iterable[str] = ("a", "b")) -> Des:
    """A random deterministic DES; each (state, event) pair is defined with probability 1/2."""
    names = sorted(ap)
    states = [f"s{i}" for i in range(n_states)]
    events = [f"e{j}" for j in range(n_events)]
    controllable = [e for e in events if rng.random() < 0.6]
    labels = {s: [a for a in names if rng.random() < 0.4] for s in states}
    transitions = [
        (s, e, rng.choice(states)) for s in states for e in events if rng.random() < 0.5
    ]
    return make_des(names, states, events, controllable, states[0], labels, transitions)


def make_product(
    transitions: Iterable[tuple[str, str, str]],
    accepting: Iterable[str],
    controllable: Iterable[str],
    states: Optional[Iterable[str]] = None,
    initial: Optional[str] = None,
) -> ProductAutomaton:
    """
    A product automaton over named states (DFA component fixed at 0).

    The full counts equal the given state and accepting counts.
    """
    transitions = list(transitions)
    names = list(states) if states is not None else []
    for source, _, target in transitions:
        for name in (source, target):
            if name not in names:
                names.append(name)
    by_name = {name: ProductState(name, 0) for name in names}
    delta = {by_name[name]: {} for name in names}
    events = []
    for source, event, target in transitions:
        delta[by_name[source]][event] = by_name[target]
        if event not in events:
            events.append(event)
    accepting = frozenset(by_name[name] for name in accepting)
    return ProductAutomaton(
        states=tuple(by_name[name] for name in names),
        events=tuple(events),
        controllable=frozenset(controllable),
        delta=delta,
        initial=by_name[initial if initial is not None else names[0]],
        accepting=accepting,
        full_state_count=len(names),
        full_accepting_count=len(accepting),
        labels={name: frozenset() for name in names},
    )


def random_product(rng: random.Random, max_states: int, n_events: int = 4) -> ProductAutomaton:
    """
    A random product with absorbing accepting states.

    Accepting states only move to accepting states, as in every product
    built from a DFA.
    """
    n = rng.randint(1, max_states)
    names = [f"s{i}" for i in range(n)]
    accepting = [name for name in names if rng.random() < 0.2]
    events = [f"e{j}" for j in range(n_events)]
    controllable = [e for e in events if rng.random() < 0.6]
    transitions = []
    for name in names:
        targets = accepting if name in accepting else names
        for event in events:
            if targets and rng.random() < 0.45:
                transitions.append((name, event, rng.choice(targets)))
    return make_product(transitions, accepting, controllable, states=names)
