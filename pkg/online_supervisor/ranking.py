"""
Off-line ranking of product states.

A ranking function assigns each product state the number of steps within
which the supervisor can force the product into an accepting state,
whatever uncontrollable events occur. The bound alpha marks states from
which acceptance cannot be forced.

This module provides:
- compute_ranking: worklist solver for the least fixpoint
- compute_ranking_naive: full scans until stable, used as an oracle
- classify: legal / neutral / illegal transitions
- verify_ranking and check_definition: executable property checks
"""

import csv
import logging
from collections import defaultdict, deque
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import Mapping, Union

import networkx as nx

from .errors import UndefinedTransitionError, UnknownStateError
from .product import ProductAutomaton, ProductState, product_id

logger = logging.getLogger(__name__)


class TransitionClass(Enum):
    LEGAL = "legal"
    NEUTRAL = "neutral"
    ILLEGAL = "illegal"


@dataclass(frozen=True)
class RankingFunction:
    """Ranks in [0, alpha] for every reachable product state."""

    rank: Mapping[ProductState, int]
    alpha: int
    lifts: int = 0

    def __getitem__(self, state: ProductState) -> int:
        try:
            return self.rank[state]
        except KeyError:
            raise UnknownStateError(f"no rank for product state {state}") from None

    def __len__(self) -> int:
        return len(self.rank)


def alpha_of(p: ProductAutomaton) -> int:
    """|X_P| - |F_P| + 1 over the full product, unreachable pairs included."""
    return p.full_state_count - p.full_accepting_count + 1


def _estimate(p: ProductAutomaton, rank: Mapping[ProductState, int], state: ProductState, alpha: int) -> int:
    moves = p.delta[state]
    if not moves:
        return alpha
    forced = [target for event, target in moves.items() if event not in p.controllable]
    if not forced:
        return min(rank[target] for target in moves.values())
    return max(rank[target] for target in forced)


def _lift(p: ProductAutomaton, value: int, state: ProductState, alpha: int) -> int:
    if state not in p.accepting and value < alpha:
        return value + 1
    return value


def compute_ranking(p: ProductAutomaton) -> RankingFunction:
    """
    Least fixpoint of the ranking equations by worklist lifting.

    Ranks start at zero and only increase. A state is re-evaluated only
    after one of its successors was lifted. Accepting states keep rank 0.

    Returns:
        RankingFunction with the number of lift operations performed
    """
    alpha = alpha_of(p)
    rank = {state: 0 for state in p.states}
    predecessors: dict[ProductState, set[ProductState]] = defaultdict(set)
    for source, _, target in p.transitions():
        predecessors[target].add(source)

    pending = deque(s for s in p.states if s not in p.accepting)
    queued = set(pending)
    lifts = 0
    while pending:
        state = pending.popleft()
        queued.discard(state)
        value = _lift(p, _estimate(p, rank, state, alpha), state, alpha)
        if value <= rank[state]:
            continue
        rank[state] = value
        lifts += 1
        for source in predecessors[state]:
            if source not in queued and source not in p.accepting:
                queued.add(source)
                pending.append(source)
        logger.debug("lifted %s to %d", product_id(state), value)

    ranking = RankingFunction(rank=rank, alpha=alpha, lifts=lifts)
    logger.info(
        "ranking: alpha=%d, initial rank=%d, %d lifts", alpha, rank[p.initial], lifts
    )
    return ranking


def compute_ranking_naive(p: ProductAutomaton) -> RankingFunction:
    """Scan all states, updating in place, until a scan changes nothing."""
    alpha = alpha_of(p)
    rank = {state: 0 for state in p.states}
    lifts = 0
    changed = True
    while changed:
        changed = False
        for state in p.states:
            if state in p.accepting:
                continue
            value = _lift(p, _estimate(p, rank, state, alpha), state, alpha)
            if value != rank[state]:
                rank[state] = value
                lifts += 1
                changed = True
    return RankingFunction(rank=rank, alpha=alpha, lifts=lifts)


def classify(
    p: ProductAutomaton,
    ranking: RankingFunction,
    transition: tuple[ProductState, str, ProductState],
) -> TransitionClass:
    """
    Classify a transition (x, σ, x').

    Illegal if x' has rank alpha, legal if the rank strictly decreases,
    neutral otherwise.
    """
    source, event, target = transition
    if p.delta.get(source, {}).get(event) != target:
        raise UndefinedTransitionError(
            f"({product_id(source)}, {event}, {product_id(target)}) is not a transition"
        )
    if ranking[target] == ranking.alpha:
        return TransitionClass.ILLEGAL
    if ranking[source] > ranking[target]:
        return TransitionClass.LEGAL
    return TransitionClass.NEUTRAL


def legal_events(p: ProductAutomaton, ranking: RankingFunction, state: ProductState) -> frozenset[str]:
    return frozenset(
        event for event, target in p.delta[state].items() if ranking[target] < ranking[state]
    )


def check_definition(p: ProductAutomaton, ranking: RankingFunction) -> list[str]:
    """
    Pointwise check of the ranking equations.

    Returns:
        One message per violating state (empty when ranking is a ranking
        function for p)
    """
    problems = []
    for state in p.states:
        value = ranking[state]
        if (value == 0) != (state in p.accepting):
            problems.append(f"{product_id(state)}: rank {value} but accepting={state in p.accepting}")
            continue
        if state in p.accepting:
            continue
        expected = _lift(p, _estimate(p, ranking.rank, state, ranking.alpha), state, ranking.alpha)
        if value != expected:
            problems.append(f"{product_id(state)}: rank {value}, equations give {expected}")
    return problems


CHECKS = ("lower_successor", "reaches_acceptance", "uncontrollable_decrease", "uncontrollable_closure")


@dataclass
class RankingReport:
    failures: dict[str, list[ProductState]] = field(
        default_factory=lambda: {name: [] for name in CHECKS}
    )

    @property
    def passed(self) -> bool:
        return not any(self.failures.values())


def verify_ranking(p: ProductAutomaton, ranking: RankingFunction) -> RankingReport:
    """
    Check the properties a ranking function guarantees.

    - lower_successor: a state with 0 < rank < alpha has a strictly lower-ranked successor
    - reaches_acceptance: from a state with rank < alpha an accepting state is reachable
    - uncontrollable_decrease: at a non-accepting state with rank < alpha every uncontrollable
      event strictly decreases the rank
    - uncontrollable_closure: states with rank < alpha are closed under uncontrollable strings

    Returns:
        Report listing witness states per violated property
    """
    report = RankingReport()
    alpha = ranking.alpha
    graph = p.to_networkx()

    can_accept = set(p.accepting)
    for state in p.accepting:
        can_accept |= nx.ancestors(graph, state)

    forced = nx.DiGraph()
    forced.add_nodes_from(p.states)
    forced.add_edges_from(
        (u, v) for u, v, data in graph.edges(data=True) if not data["controllable"]
    )

    for state in p.states:
        value = ranking[state]
        if value >= alpha:
            continue
        successors = p.delta[state].values()
        if value > 0 and not any(ranking[t] < value for t in successors):
            report.failures["lower_successor"].append(state)
        if state not in can_accept:
            report.failures["reaches_acceptance"].append(state)
        if state not in p.accepting:
            for event in p.enabled_uncontrollable(state):
                if ranking[p.delta[state][event]] >= value:
                    report.failures["uncontrollable_decrease"].append(state)
                    break
        if any(ranking[t] >= alpha for t in nx.descendants(forced, state)):
            report.failures["uncontrollable_closure"].append(state)

    for name, states in report.failures.items():
        if states:
            logger.warning("%s fails at %d states, e.g. %s", name, len(states), product_id(states[0]))
    return report


def save_ranking_csv(p: ProductAutomaton, ranking: RankingFunction, path: Union[str, Path]) -> None:
    with open(path, "w", newline="", encoding="utf-8") as handle:
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow(["state", "des", "dfa", "rank"])
        for state in p.states:
            writer.writerow([product_id(state), state.des, state.dfa, ranking[state]])
