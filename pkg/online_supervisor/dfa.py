"""
Deterministic finite acceptors of good prefixes.

This module provides:
- The Dfa type: a complete transition table over 2^AP with absorbing
  accepting states
- Translation from scLTL by formula progression, followed by Hopcroft
  minimization
- Language checks: equivalence with a counterexample word, and lasso
  validation against the progression oracle
- JSON import/export with symbolic guards
"""

import itertools
import json
import logging
from collections import defaultdict, deque
from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path
from typing import Iterable, Literal, Mapping, Optional, Sequence, Union

from pydantic import BaseModel, ConfigDict, Field, ValidationError

from .config import settings
from .errors import (
    NondeterminismError,
    ResourceLimitError,
    SchemaViolationError,
    VocabularyMismatchError,
)
from .formula import TRUE, Formula, Letter, atoms, letters, progress, satisfies_loop, simplify

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class Dfa:
    """
    A complete DFA over the alphabet 2^AP.

    States are the integers 0..n-1. `table[s][i]` is the successor of
    state s under the i-th letter of `letters(ap)`.
    """

    ap: tuple[str, ...]
    table: tuple[tuple[int, ...], ...]
    initial: int
    accepting: frozenset[int]

    def __post_init__(self):
        if list(self.ap) != sorted(set(self.ap)):
            raise SchemaViolationError("DFA vocabulary must be sorted and duplicate-free")
        width = 1 << len(self.ap)
        n = len(self.table)
        if not 0 <= self.initial < n:
            raise SchemaViolationError(f"initial state {self.initial} out of range")
        for state, row in enumerate(self.table):
            if len(row) != width:
                raise SchemaViolationError(f"state {state} has {len(row)} transitions, expected {width}")
            if any(not 0 <= target < n for target in row):
                raise SchemaViolationError(f"state {state} has a transition out of range")
        for state in self.accepting:
            if not 0 <= state < n:
                raise SchemaViolationError(f"accepting state {state} out of range")
            if any(target not in self.accepting for target in self.table[state]):
                raise SchemaViolationError(f"accepting state {state} is not absorbing")

    @property
    def num_states(self) -> int:
        return len(self.table)

    @property
    def states(self) -> range:
        return range(len(self.table))

    @cached_property
    def alphabet(self) -> list[Letter]:
        return letters(self.ap)

    @cached_property
    def _bits(self) -> dict[str, int]:
        return {name: 1 << i for i, name in enumerate(self.ap)}

    def letter_index(self, letter: Iterable[str]) -> int:
        index = 0
        for name in letter:
            bit = self._bits.get(name)
            if bit is None:
                raise VocabularyMismatchError(f"atom '{name}' is not in the DFA vocabulary {list(self.ap)}")
            index |= bit
        return index

    def step(self, state: int, letter: Iterable[str]) -> int:
        return self.table[state][self.letter_index(letter)]

    def run(self, word: Iterable[Iterable[str]]) -> list[int]:
        """States visited while reading `word`, initial state included."""
        visited = [self.initial]
        for letter in word:
            visited.append(self.step(visited[-1], letter))
        return visited

    def accepts(self, word: Iterable[Iterable[str]]) -> bool:
        """
        Prefix acceptance: true iff the run visits an accepting state.

        Because accepting states are absorbing this equals final-state
        acceptance.
        """
        return any(state in self.accepting for state in self.run(word))


def accepts(dfa: Dfa, word: Iterable[Iterable[str]]) -> bool:
    return dfa.accepts(word)


def has_absorbing_acceptance(dfa: Dfa) -> bool:
    """Every state reachable from an accepting state is accepting."""
    frontier = list(dfa.accepting)
    seen = set(frontier)
    while frontier:
        state = frontier.pop()
        for target in dfa.table[state]:
            if target not in dfa.accepting:
                return False
            if target not in seen:
                seen.add(target)
                frontier.append(target)
    return True


# Construction


def translate(
    formula: Formula,
    ap: Optional[Iterable[str]] = None,
    state_cap: Optional[int] = None,
    minimal: bool = True,
) -> Dfa:
    """
    Translate an scLTL formula into a DFA for its good prefixes.

    States are the distinct simplified formulas (reduced DNF over
    elementary subformulas) reachable by progression, a finite set;
    the state `true` is the only accepting one and both constants are
    absorbing.

    Args:
        formula: The specification
        ap: Vocabulary of the alphabet (defaults to the formula's atoms)
        state_cap: Maximum number of formula states (defaults to settings)
        minimal: Minimize the result (otherwise only renumber it)

    Returns:
        Complete DFA, minimal unless `minimal` is False

    Raises:
        VocabularyMismatchError: If the formula uses atoms outside `ap`
        ResourceLimitError: If more than `state_cap` formula states appear,
            or the formula is nested too deeply to process
    """
    try:
        used = atoms(formula)
    except RecursionError as err:
        raise ResourceLimitError("formula is nested too deeply to translate") from err
    names = tuple(sorted(set(ap) if ap is not None else used))
    missing = used - set(names)
    if missing:
        raise VocabularyMismatchError(f"formula atoms {sorted(missing)} are not in {list(names)}")
    cap = state_cap if state_cap is not None else settings.translator_state_cap

    alphabet = letters(names)
    try:
        order, rows = _explore(simplify(formula), alphabet, cap)
    except RecursionError as err:
        raise ResourceLimitError("formula is nested too deeply to translate") from err

    raw = Dfa(
        ap=names,
        table=tuple(rows),
        initial=0,
        accepting=frozenset(i for i, f in enumerate(order) if f == TRUE),
    )
    result = minimize(raw) if minimal else canonicalize(raw)
    logger.info(
        "translated formula into %d formula states, %d DFA states", len(order), result.num_states
    )
    return result


def _explore(start: Formula, alphabet: list[Letter], cap: int) -> tuple[list[Formula], list[tuple[int, ...]]]:
    index = {start: 0}
    order = [start]
    rows = []
    cursor = 0
    while cursor < len(order):
        current = order[cursor]
        cursor += 1
        row = []
        for letter in alphabet:
            successor = progress(current, letter)
            if successor not in index:
                if len(order) >= cap:
                    raise ResourceLimitError(f"translation exceeded {cap} formula states")
                index[successor] = len(order)
                order.append(successor)
            row.append(index[successor])
        rows.append(tuple(row))
        logger.debug("translator: %d states discovered, %d expanded", len(order), cursor)
    return order, rows


def canonicalize(dfa: Dfa) -> Dfa:
    """Keep the reachable part and renumber states in breadth-first order."""
    ids = {dfa.initial: 0}
    order = [dfa.initial]
    cursor = 0
    while cursor < len(order):
        for target in dfa.table[order[cursor]]:
            if target not in ids:
                ids[target] = len(order)
                order.append(target)
        cursor += 1
    return Dfa(
        ap=dfa.ap,
        table=tuple(tuple(ids[t] for t in dfa.table[s]) for s in order),
        initial=0,
        accepting=frozenset(ids[s] for s in order if s in dfa.accepting),
    )


def minimize(dfa: Dfa) -> Dfa:
    """
    Hopcroft partition refinement.

    Returns the language-equivalent minimal DFA, renumbered canonically.
    """
    reachable = canonicalize(dfa)
    n = reachable.num_states
    width = 1 << len(reachable.ap)

    inverse = [defaultdict(list) for _ in range(width)]
    for source, row in enumerate(reachable.table):
        for index, target in enumerate(row):
            inverse[index][target].append(source)

    accepting = set(reachable.accepting)
    rejecting = set(range(n)) - accepting
    blocks = [b for b in (accepting, rejecting) if b]
    block_of = [0] * n
    for b, members in enumerate(blocks):
        for state in members:
            block_of[state] = b

    work = set()
    if len(blocks) == 2:
        work.add(0 if len(blocks[0]) <= len(blocks[1]) else 1)

    while work:
        splitter = set(blocks[work.pop()])
        for index in range(width):
            affected = defaultdict(set)
            for target in splitter:
                for source in inverse[index].get(target, ()):
                    affected[block_of[source]].add(source)
            for b, overlap in affected.items():
                if len(overlap) == len(blocks[b]):
                    continue
                rest = blocks[b] - overlap
                blocks[b] = overlap
                new = len(blocks)
                blocks.append(rest)
                for state in rest:
                    block_of[state] = new
                if b in work:
                    work.add(new)
                else:
                    work.add(b if len(overlap) <= len(rest) else new)

    table = []
    for members in blocks:
        representative = next(iter(members))
        table.append(tuple(block_of[t] for t in reachable.table[representative]))
    quotient = Dfa(
        ap=reachable.ap,
        table=tuple(table),
        initial=block_of[reachable.initial],
        accepting=frozenset(b for b, members in enumerate(blocks) if members <= accepting),
    )
    return canonicalize(quotient)


def equivalent(first: Dfa, second: Dfa) -> Optional[list[Letter]]:
    """
    Check language equivalence by searching the product for a state that
    one DFA accepts and the other rejects.

    Returns:
        None if the languages agree, otherwise a shortest word in the
        symmetric difference
    """
    if first.ap != second.ap:
        raise VocabularyMismatchError(f"vocabularies differ: {list(first.ap)} vs {list(second.ap)}")
    alphabet = first.alphabet
    start = (first.initial, second.initial)
    parent: dict[tuple[int, int], Optional[tuple[tuple[int, int], int]]] = {start: None}
    queue = deque([start])
    while queue:
        pair = queue.popleft()
        if (pair[0] in first.accepting) != (pair[1] in second.accepting):
            word = []
            while parent[pair] is not None:
                pair, index = parent[pair]
                word.append(alphabet[index])
            return list(reversed(word))
        for index in range(len(alphabet)):
            successor = (first.table[pair[0]][index], second.table[pair[1]][index])
            if successor not in parent:
                parent[successor] = (pair, index)
                queue.append(successor)
    return None


# Lasso validation


@dataclass
class LassoMismatch:
    kind: Literal["finite", "lasso"]
    prefix: tuple[Letter, ...]
    loop: tuple[Letter, ...]
    dfa_accepts: bool
    formula_holds: bool


@dataclass
class LassoReport:
    words_covered: int
    lassos_covered: int
    configurations: int
    mismatches: list[LassoMismatch] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return not self.mismatches


def _dfa_accepts_loop(dfa: Dfa, state: int, visited: bool, loop: Sequence[int]) -> bool:
    seen = set()
    while not visited:
        if state in seen:
            return False
        seen.add(state)
        for index in loop:
            state = dfa.table[state][index]
            visited = visited or state in dfa.accepting
    return True


def lasso_check(
    dfa: Dfa,
    formula: Formula,
    prefix_bound: int,
    loop_bound: int,
    budget: Optional[int] = None,
    max_ap: Optional[int] = None,
) -> LassoReport:
    """
    Compare a DFA with the progression oracle on bounded words and lassos.

    Every finite word w with |w| <= prefix_bound must satisfy
    accepts(dfa, w) == is_good_prefix(formula, w), and every lasso u·v^ω
    with |u| <= prefix_bound, 1 <= |v| <= loop_bound must be accepted on
    some finite prefix exactly when it satisfies the formula.

    Both verdicts depend on a prefix only through the configuration
    (DFA state, accepting-visited flag, progressed formula) it reaches,
    so prefixes are enumerated layer by layer with one representative per
    configuration. The coverage is the same as enumerating every word.

    Raises:
        ResourceLimitError: If the vocabulary is too large or the work
            exceeds the budget
    """
    if prefix_bound < 1 or loop_bound < 1:
        raise ValueError("bounds must be at least 1")
    limit_ap = max_ap if max_ap is not None else settings.lasso_max_ap
    limit_work = budget if budget is not None else settings.lasso_budget
    if len(dfa.ap) > limit_ap:
        raise ResourceLimitError(f"{len(dfa.ap)} atoms exceed the enumeration limit of {limit_ap}")
    missing = atoms(formula) - set(dfa.ap)
    if missing:
        raise VocabularyMismatchError(f"formula atoms {sorted(missing)} are not in {list(dfa.ap)}")

    alphabet = dfa.alphabet
    width = len(alphabet)
    words_covered = sum(width**i for i in range(prefix_bound + 1))
    loop_count = sum(width**j for j in range(1, loop_bound + 1))

    start_formula = simplify(formula)
    start = (dfa.initial, dfa.initial in dfa.accepting, start_formula)
    representatives: dict[tuple, tuple[int, ...]] = {start: ()}
    frontier = {start: ()}
    mismatches: list[LassoMismatch] = []
    work = 0

    for length in range(prefix_bound + 1):
        for (state, visited, current), prefix in frontier.items():
            holds = current == TRUE
            if visited != holds:
                mismatches.append(
                    LassoMismatch("finite", tuple(alphabet[i] for i in prefix), (), visited, holds)
                )
        if length == prefix_bound:
            break
        following = {}
        for (state, visited, current), prefix in frontier.items():
            for index, letter in enumerate(alphabet):
                work += 1
                target = dfa.table[state][index]
                config = (target, visited or target in dfa.accepting, progress(current, letter))
                if config not in following:
                    following[config] = prefix + (index,)
        if work > limit_work:
            raise ResourceLimitError(f"lasso enumeration exceeded the budget of {limit_work}")
        frontier = following
        for config, prefix in following.items():
            representatives.setdefault(config, prefix)

    work += len(representatives) * loop_count
    if work > limit_work:
        raise ResourceLimitError(f"lasso enumeration exceeded the budget of {limit_work}")

    for (state, visited, current), prefix in representatives.items():
        for size in range(1, loop_bound + 1):
            for loop in itertools.product(range(width), repeat=size):
                loop_letters = tuple(alphabet[i] for i in loop)
                accepted = _dfa_accepts_loop(dfa, state, visited, loop)
                holds = satisfies_loop(current, loop_letters)
                if accepted != holds:
                    mismatches.append(
                        LassoMismatch(
                            "lasso", tuple(alphabet[i] for i in prefix), loop_letters, accepted, holds
                        )
                    )

    logger.info(
        "lasso check: %d configurations, %d loops each, %d mismatches",
        len(representatives),
        loop_count,
        len(mismatches),
    )
    return LassoReport(
        words_covered=words_covered,
        lassos_covered=words_covered * loop_count,
        configurations=len(representatives),
        mismatches=mismatches,
    )


def lasso_validate(
    dfa: Dfa,
    formula: Formula,
    prefix_bound: int,
    loop_bound: int,
    budget: Optional[int] = None,
    max_ap: Optional[int] = None,
) -> bool:
    """Run lasso_check and report mismatches through the log."""
    report = lasso_check(dfa, formula, prefix_bound, loop_bound, budget, max_ap)
    for mismatch in report.mismatches[:10]:
        logger.warning(
            "%s mismatch: prefix=%s loop=%s dfa=%s formula=%s",
            mismatch.kind,
            [sorted(letter) for letter in mismatch.prefix],
            [sorted(letter) for letter in mismatch.loop],
            mismatch.dfa_accepts,
            mismatch.formula_holds,
        )
    return report.passed


# JSON import/export

StateId = Union[int, str]


class GuardModel(BaseModel):
    """Conjunction of literals: atoms in `pos` hold, atoms in `neg` do not."""

    pos: list[str] = Field(default_factory=list)
    neg: list[str] = Field(default_factory=list)


class DfaTransitionModel(BaseModel):
    model_config = ConfigDict(populate_by_name=True)

    source: StateId = Field(alias="from")
    guard: Union[Literal["true"], GuardModel]
    target: StateId = Field(alias="to")


class DfaFile(BaseModel):
    ap: list[str]
    states: list[StateId]
    initial: StateId
    accepting: list[StateId]
    transitions: list[DfaTransitionModel]


def dfa_from_model(model: DfaFile, strict: bool = True) -> Dfa:
    """
    Build a Dfa from its file model, expanding guards over 2^AP.

    Args:
        model: Parsed file contents
        strict: Reject non-total or non-absorbing automata; otherwise add
            a rejecting sink and make accepting states absorbing

    Raises:
        SchemaViolationError: On unknown ids or atoms, or invariant
            violations in strict mode
        NondeterminismError: If two guards of one state overlap with
            different targets
    """
    names = sorted(set(model.ap))
    if len(names) != len(model.ap):
        raise SchemaViolationError("duplicate atoms in 'ap'")
    ids = [str(s) for s in model.states]
    if len(set(ids)) != len(ids):
        raise SchemaViolationError("duplicate state ids")
    position = {state: i for i, state in enumerate(ids)}

    def lookup(state_id: StateId, where: str) -> int:
        try:
            return position[str(state_id)]
        except KeyError:
            raise SchemaViolationError(f"unknown state '{state_id}' in {where}") from None

    initial = lookup(model.initial, "initial")
    accepting = {lookup(s, "accepting") for s in model.accepting}

    alphabet = letters(names)
    rows: list[dict[int, int]] = [{} for _ in ids]
    for transition in model.transitions:
        source = lookup(transition.source, "transition source")
        target = lookup(transition.target, "transition target")
        if transition.guard == "true":
            pos, neg = set(), set()
        else:
            pos, neg = set(transition.guard.pos), set(transition.guard.neg)
        unknown = (pos | neg) - set(names)
        if unknown:
            raise SchemaViolationError(f"guard uses unknown atoms {sorted(unknown)}")
        if pos & neg:
            raise SchemaViolationError(f"guard of state '{ids[source]}' is contradictory on {sorted(pos & neg)}")
        for index, letter in enumerate(alphabet):
            if pos <= letter and not (neg & letter):
                previous = rows[source].setdefault(index, target)
                if previous != target:
                    raise NondeterminismError(
                        f"state '{ids[source]}' has overlapping guards on letter {sorted(letter)}"
                    )

    if strict:
        for state, row in enumerate(rows):
            if len(row) != len(alphabet):
                raise SchemaViolationError(
                    f"transition function is not total: state '{ids[state]}' misses "
                    f"{len(alphabet) - len(row)} letters"
                )

    for state in accepting:
        if len(rows[state]) == len(alphabet) and all(t in accepting for t in rows[state].values()):
            continue
        if strict:
            raise SchemaViolationError(f"accepting state '{ids[state]}' is not absorbing")
        rows[state] = {index: state for index in range(len(alphabet))}

    return canonicalize(complete(names, rows, initial, accepting))


def is_complete(rows: Sequence[Mapping[int, int]], width: int) -> bool:
    return all(len(row) == width for row in rows)


def complete(
    ap: Sequence[str], rows: Sequence[Mapping[int, int]], initial: int, accepting: Iterable[int]
) -> Dfa:
    """
    Build a DFA from a partial table (letter index -> target per state).

    Missing letters lead to a fresh rejecting sink, added only when some
    letter is missing.
    """
    names = tuple(sorted(ap))
    width = 1 << len(names)
    table = [dict(row) for row in rows]
    if not is_complete(table, width):
        sink = len(table)
        for row in table:
            for index in range(width):
                row.setdefault(index, sink)
        table.append({index: sink for index in range(width)})
    return Dfa(
        ap=names,
        table=tuple(tuple(row[i] for i in range(width)) for row in table),
        initial=initial,
        accepting=frozenset(accepting),
    )


def import_dfa(path: Union[str, Path], strict: bool = True) -> Dfa:
    """Read a DFA from its JSON file (see dfa_from_model)."""
    path = Path(path)
    try:
        model = DfaFile.model_validate_json(path.read_text(encoding="utf-8"))
    except ValidationError as err:
        raise SchemaViolationError(f"{path}: {err}") from err
    return dfa_from_model(model, strict=strict)


def _cube(group: list[Letter], ap: Sequence[str]) -> Optional[GuardModel]:
    """The single conjunction matching exactly `group`, if there is one."""
    pos = set.intersection(*(set(letter) for letter in group))
    neg = set(ap) - set.union(*(set(letter) for letter in group))
    if len(group) == 1 << (len(ap) - len(pos) - len(neg)):
        return GuardModel(pos=sorted(pos), neg=sorted(neg))
    return None


def dfa_to_model(dfa: Dfa) -> DfaFile:
    transitions = []
    alphabet = dfa.alphabet
    for state, row in enumerate(dfa.table):
        by_target: dict[int, list[Letter]] = defaultdict(list)
        for index, target in enumerate(row):
            by_target[target].append(alphabet[index])
        for target in sorted(by_target):
            group = by_target[target]
            if len(group) == len(alphabet):
                guards = ["true"]
            else:
                cube = _cube(group, dfa.ap)
                guards = [cube] if cube else [
                    GuardModel(pos=sorted(letter), neg=sorted(set(dfa.ap) - letter)) for letter in group
                ]
            for guard in guards:
                transitions.append(DfaTransitionModel(source=state, guard=guard, target=target))
    return DfaFile(
        ap=list(dfa.ap),
        states=list(dfa.states),
        initial=dfa.initial,
        accepting=sorted(dfa.accepting),
        transitions=transitions,
    )


def export_dfa(dfa: Dfa, path: Union[str, Path]) -> None:
    """Write a DFA as JSON, one guard per target where a single cube suffices."""
    data = dfa_to_model(dfa).model_dump(mode="json", by_alias=True)
    Path(path).write_text(json.dumps(data, indent=2) + "\n", encoding="utf-8")
