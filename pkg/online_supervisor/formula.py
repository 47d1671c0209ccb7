"""
Syntactically co-safe LTL formulas.

This module provides:
- An immutable abstract syntax where negation can only sit on an atom
- A parser for the ASCII surface syntax (true, !, &, |, X, F, U)
- A printer whose output parses back to the same tree
- One-step progression over a canonical reduced DNF, used as a semantic oracle
  and as the state space of the DFA translator
"""

import logging
import random
from dataclasses import dataclass
from functools import lru_cache
from typing import Iterable, Optional, Sequence, Union

from lark import Lark, Transformer, v_args
from lark.exceptions import UnexpectedInput, VisitError

from .errors import FormulaSyntaxError, NegationOnNonAtomError, UnknownAtomError

logger = logging.getLogger(__name__)

# A letter is the set of atomic propositions that hold at one step.
Letter = frozenset


@dataclass(frozen=True)
class TrueFormula:
    pass


@dataclass(frozen=True)
class FalseFormula:
    """Only produced by progression; the surface syntax has no `false`."""


@dataclass(frozen=True)
class Atom:
    name: str


@dataclass(frozen=True)
class NegAtom:
    name: str


@dataclass(frozen=True)
class And:
    left: "Formula"
    right: "Formula"


@dataclass(frozen=True)
class Or:
    left: "Formula"
    right: "Formula"


@dataclass(frozen=True)
class Next:
    sub: "Formula"


@dataclass(frozen=True)
class Until:
    left: "Formula"
    right: "Formula"


Formula = Union[TrueFormula, FalseFormula, Atom, NegAtom, And, Or, Next, Until]

TRUE = TrueFormula()
FALSE = FalseFormula()


def eventually(sub: Formula) -> Formula:
    """F sub is sugar for true U sub."""
    return Until(TRUE, sub)


# Parsing

_GRAMMAR = r"""
?start: disj

?disj: disj "|" conj -> lor
     | conj

?conj: conj "&" until -> land
     | until

?until: unary "U" until -> until
      | unary

?unary: "!" unary -> neg
      | "X" unary -> next
      | "F" unary -> eventually
      | primary

?primary: "true" -> true
        | NAME -> atom
        | "(" disj ")"

NAME: /[a-z_][A-Za-z0-9_]*/

%import common.WS
%ignore WS
"""

_PARSER = Lark(_GRAMMAR, parser="lalr", propagate_positions=True)


class _FormulaBuilder(Transformer):
    """Turn the parse tree into Formula nodes, checking atoms and negations."""

    def __init__(self, vocabulary: Optional[frozenset[str]]):
        super().__init__()
        self.vocabulary = vocabulary

    def true(self, children):
        return TRUE

    def atom(self, children):
        (token,) = children
        name = str(token)
        if name == "false":
            raise FormulaSyntaxError("'false' is not part of the surface syntax", token.start_pos)
        if self.vocabulary is not None and name not in self.vocabulary:
            raise UnknownAtomError(f"unknown atom '{name}'", token.start_pos)
        return Atom(name)

    @v_args(meta=True)
    def neg(self, meta, children):
        (sub,) = children
        if not isinstance(sub, Atom):
            raise NegationOnNonAtomError("negation on non-atom", meta.start_pos)
        return NegAtom(sub.name)

    def next(self, children):
        return Next(children[0])

    def eventually(self, children):
        return eventually(children[0])

    def until(self, children):
        return Until(children[0], children[1])

    def land(self, children):
        return And(children[0], children[1])

    def lor(self, children):
        return Or(children[0], children[1])


def parse_formula(text: str, ap: Optional[Iterable[str]] = None) -> Formula:
    """
    Parse an scLTL formula.

    Precedence from tightest to loosest: `!`, then `X`/`F`, then `U`
    (right-associative), then `&`, then `|`. Atom names start with a
    lowercase letter or underscore.

    Args:
        text: Formula text
        ap: Declared vocabulary; when given, every atom must belong to it

    Returns:
        The formula tree, with F desugared into `true U`

    Raises:
        FormulaSyntaxError: On malformed text (with the offending position)
        NegationOnNonAtomError: If `!` is applied to anything but an atom
        UnknownAtomError: If an atom is not in the vocabulary
    """
    try:
        tree = _PARSER.parse(text)
    except UnexpectedInput as err:
        position = getattr(err, "pos_in_stream", None)
        summary = str(err).strip().splitlines()[0]
        raise FormulaSyntaxError(f"syntax error: {summary}", position) from err

    vocabulary = frozenset(ap) if ap is not None else None
    try:
        return _FormulaBuilder(vocabulary).transform(tree)
    except VisitError as err:
        raise err.orig_exc from None


# Printing


@lru_cache(maxsize=None)
def format_formula(formula: Formula) -> str:
    """Render a formula so that parse_formula gives back the same tree."""
    if isinstance(formula, TrueFormula):
        return "true"
    if isinstance(formula, FalseFormula):
        return "false"
    if isinstance(formula, Atom):
        return formula.name
    if isinstance(formula, NegAtom):
        return f"!{formula.name}"
    if isinstance(formula, Next):
        return f"X {_operand(formula.sub)}"
    if isinstance(formula, And):
        return f"{_operand(formula.left)} & {_operand(formula.right)}"
    if isinstance(formula, Or):
        return f"{_operand(formula.left)} | {_operand(formula.right)}"
    if isinstance(formula, Until):
        return f"{_operand(formula.left)} U {_operand(formula.right)}"
    raise TypeError(f"not a formula: {formula!r}")


def _operand(formula: Formula) -> str:
    text = format_formula(formula)
    if isinstance(formula, (And, Or, Until)):
        return f"({text})"
    return text


# Structure helpers


def atoms(formula: Formula) -> frozenset[str]:
    """Names of all atoms referenced by the formula."""
    if isinstance(formula, (Atom, NegAtom)):
        return frozenset([formula.name])
    if isinstance(formula, Next):
        return atoms(formula.sub)
    if isinstance(formula, (And, Or, Until)):
        return atoms(formula.left) | atoms(formula.right)
    return frozenset()


def conjuncts(formula: Formula) -> list[Formula]:
    """Top-level conjuncts, left to right."""
    if isinstance(formula, And):
        return conjuncts(formula.left) + conjuncts(formula.right)
    return [formula]


def letters(ap: Iterable[str]) -> list[Letter]:
    """
    Enumerate 2^AP.

    The i-th letter contains the atoms whose bit is set in i, atoms being
    taken in sorted order. The DFA module relies on this ordering.
    """
    names = sorted(set(ap))
    return [
        frozenset(name for bit, name in enumerate(names) if mask >> bit & 1)
        for mask in range(1 << len(names))
    ]


# Simplification and progression


# A clause is a conjunction of elementary formulas (literals, Next, Until);
# a DNF is a disjunction of clauses. The empty clause is true, the empty
# DNF false.
Clause = frozenset
Dnf = frozenset


@lru_cache(maxsize=65536)
def simplify(formula: Formula) -> Formula:
    """
    Canonical form: constant folding plus a reduced DNF.

    The Boolean structure is put in disjunctive normal form over
    elementary subformulas whose own arguments are simplified. Clauses
    holding a literal and its negation are dropped, and so is every clause
    that contains another one (absorption). Clauses and their members are
    sorted by printed form. Formulas equal up to these laws become
    structurally equal, and progressing a simplified formula only ever
    produces combinations of finitely many elementary subformulas.
    """
    return from_dnf(to_dnf(formula))


def to_dnf(formula: Formula) -> Dnf:
    if isinstance(formula, TrueFormula):
        return Dnf([Clause()])
    if isinstance(formula, FalseFormula):
        return Dnf()
    if isinstance(formula, Or):
        return _reduce(to_dnf(formula.left) | to_dnf(formula.right))
    if isinstance(formula, And):
        left, right = to_dnf(formula.left), to_dnf(formula.right)
        return _reduce(Dnf(a | b for a in left for b in right))
    if isinstance(formula, Next):
        sub = simplify(formula.sub)
        if isinstance(sub, (TrueFormula, FalseFormula)):
            return to_dnf(sub)
        return Dnf([Clause([Next(sub)])])
    if isinstance(formula, Until):
        left, right = simplify(formula.left), simplify(formula.right)
        if isinstance(right, (TrueFormula, FalseFormula)) or left == FALSE:
            return to_dnf(right)
        return Dnf([Clause([Until(left, right)])])
    return Dnf([Clause([formula])])


def _reduce(clauses: Iterable[Clause]) -> Dnf:
    consistent = [
        clause for clause in clauses
        if not any(isinstance(item, Atom) and NegAtom(item.name) in clause for item in clause)
    ]
    consistent.sort(key=len)
    kept: list[Clause] = []
    for clause in consistent:
        if not any(smaller <= clause for smaller in kept):
            kept.append(clause)
    return Dnf(kept)


def from_dnf(dnf: Dnf) -> Formula:
    if not dnf:
        return FALSE
    if Clause() in dnf:
        return TRUE
    terms = [_nest(And, sorted(clause, key=format_formula)) for clause in dnf]
    return _nest(Or, sorted(terms, key=format_formula))


def _nest(kind: type, operands: Sequence[Formula]) -> Formula:
    result = operands[-1]
    for item in reversed(operands[:-1]):
        result = kind(item, result)
    return result


def _join(kind: type, operands: Sequence[Formula]) -> Formula:
    absorbing, neutral = (FALSE, TRUE) if kind is And else (TRUE, FALSE)
    flat: set[Formula] = set()
    pending = list(operands)
    while pending:
        item = pending.pop()
        if isinstance(item, kind):
            pending.extend((item.left, item.right))
        elif item == absorbing:
            return absorbing
        elif item != neutral:
            flat.add(item)

    if not flat:
        return neutral
    return _nest(kind, sorted(flat, key=format_formula))


def _progress(formula: Formula, letter: Letter) -> Formula:
    if isinstance(formula, (TrueFormula, FalseFormula)):
        return formula
    if isinstance(formula, Atom):
        return TRUE if formula.name in letter else FALSE
    if isinstance(formula, NegAtom):
        return FALSE if formula.name in letter else TRUE
    if isinstance(formula, And):
        return _join(And, [_progress(formula.left, letter), _progress(formula.right, letter)])
    if isinstance(formula, Or):
        return _join(Or, [_progress(formula.left, letter), _progress(formula.right, letter)])
    if isinstance(formula, Next):
        return formula.sub
    if isinstance(formula, Until):
        now = _progress(formula.right, letter)
        later = _join(And, [_progress(formula.left, letter), formula])
        return _join(Or, [now, later])
    raise TypeError(f"not a formula: {formula!r}")


def progress(formula: Formula, letter: Letter) -> Formula:
    """
    Progress a formula through one letter.

    The result holds on a suffix exactly when the input held on the word
    starting with `letter`. Results are simplified, so progression over a
    finite alphabet reaches finitely many distinct formulas.
    """
    return simplify(_progress(formula, letter))


def is_good_prefix(formula: Formula, word: Iterable[Letter]) -> bool:
    """
    Check whether a finite word is a good prefix of the formula.

    Folds progression over the word and accepts when the result is the
    constant true. This test is sound; a progressed formula that is valid
    without being syntactically true is not recognised.
    """
    current = simplify(formula)
    for letter in word:
        if current == TRUE:
            return True
        current = progress(current, letter)
    return current == TRUE


def satisfies_lasso(formula: Formula, prefix: Sequence[Letter], loop: Sequence[Letter]) -> bool:
    """
    Decide whether the infinite word prefix·loop^ω satisfies the formula.

    Progression is applied around the loop until the formula becomes a
    constant or repeats at a loop boundary; a repeat means the good
    prefix never comes.
    """
    if not loop:
        raise ValueError("loop must be nonempty")
    current = simplify(formula)
    for letter in prefix:
        current = progress(current, letter)
    return satisfies_loop(current, tuple(loop))


@lru_cache(maxsize=65536)
def satisfies_loop(formula: Formula, loop: tuple[Letter, ...]) -> bool:
    """Whether loop^ω satisfies an already simplified formula."""
    seen = set()
    current = formula
    while True:
        if current == TRUE:
            return True
        if current == FALSE or current in seen:
            return False
        seen.add(current)
        for letter in loop:
            current = progress(current, letter)


def random_formula(rng: random.Random, ap: Sequence[str], depth: int) -> Formula:
    """
    Draw a random scLTL formula of nesting depth at most `depth`.

    Leaves are atoms, negated atoms or (rarely) true.
    """
    names = sorted(ap)
    if depth <= 0 or rng.random() < 0.2:
        roll = rng.random()
        if roll < 0.1:
            return TRUE
        name = rng.choice(names)
        return Atom(name) if roll < 0.6 else NegAtom(name)

    operator = rng.choice(["and", "or", "next", "until", "eventually"])
    if operator == "next":
        return Next(random_formula(rng, names, depth - 1))
    if operator == "eventually":
        return eventually(random_formula(rng, names, depth - 1))
    left = random_formula(rng, names, depth - 1)
    right = random_formula(rng, names, depth - 1)
    return {"and": And, "or": Or, "until": Until}[operator](left, right)
