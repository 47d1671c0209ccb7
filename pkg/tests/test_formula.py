"""Tests for formula parsing, printing and progression."""

import itertools
import random

import pytest

from online_supervisor.errors import FormulaSyntaxError, NegationOnNonAtomError, UnknownAtomError
from online_supervisor.formula import (
    FALSE,
    TRUE,
    And,
    Atom,
    NegAtom,
    Next,
    Or,
    Until,
    atoms,
    conjuncts,
    eventually,
    format_formula,
    is_good_prefix,
    letters,
    parse_formula,
    progress,
    random_formula,
    satisfies_lasso,
    simplify,
)
from online_supervisor.surveillance import surveillance_formula_text

a, b, c = Atom("a"), Atom("b"), Atom("c")


def test_parse_true():
    assert parse_formula("true") == TRUE


def test_parse_surveillance_formula():
    formula = parse_formula(surveillance_formula_text())
    parts = conjuncts(formula)

    print("\n" + "=" * 80)
    print("SURVEILLANCE SPECIFICATION")
    print("=" * 80)
    for part in parts:
        print(format_formula(part))
    print("=" * 80 + "\n")

    assert len(parts) == 4
    assert parts[0] == Next(Until(NegAtom("p0"), And(Atom("p3"), Atom("qs"))))
    assert parts[3] == Next(eventually(And(Atom("p0"), NegAtom("qs"))))
    assert atoms(formula) == {"p0", "p3", "p4", "qs"}


def test_negation_on_compound_is_rejected():
    with pytest.raises(NegationOnNonAtomError, match="negation on non-atom"):
        parse_formula("!(a U b)")
    with pytest.raises(NegationOnNonAtomError):
        parse_formula("!X a")


def test_unknown_atom_reports_position():
    with pytest.raises(UnknownAtomError) as info:
        parse_formula("a & zz", ap=["a"])
    assert info.value.position == 4


def test_syntax_errors():
    for text in ["a &", "a U", "(a", "a b", "A", "false"]:
        with pytest.raises(FormulaSyntaxError):
            parse_formula(text)


def test_precedence_and_associativity():
    assert parse_formula("a | b & c") == Or(a, And(b, c))
    assert parse_formula("a U b U c") == Until(a, Until(b, c))
    assert parse_formula("!a U b") == Until(NegAtom("a"), b)
    assert parse_formula("X a U b") == Until(Next(a), b)
    assert parse_formula("a & b & c") == And(And(a, b), c)


def test_eventually_is_sugar():
    assert parse_formula("F a") == parse_formula("true U a") == eventually(a)


@pytest.mark.parametrize("seed", range(40))
def test_print_then_parse_is_identity(seed):
    rng = random.Random(seed)
    formula = random_formula(rng, ["a", "b", "c"], depth=4)
    assert parse_formula(format_formula(formula)) == formula


def test_progress_examples():
    assert progress(eventually(a), frozenset({"a"})) == TRUE
    assert progress(Until(a, b), frozenset()) == FALSE
    assert progress(Next(Until(a, b)), frozenset({"b"})) == Until(a, b)
    assert progress(TRUE, frozenset()) == TRUE
    assert progress(NegAtom("a"), frozenset({"a"})) == FALSE


def test_simplify_normal_form():
    assert simplify(And(b, And(a, b))) == simplify(And(a, b))
    assert simplify(Or(a, TRUE)) == TRUE
    assert simplify(And(a, FALSE)) == FALSE
    assert simplify(Next(TRUE)) == TRUE


def test_simplify_absorbs_and_drops_contradictions():
    assert simplify(Or(a, And(b, a))) == a
    assert simplify(And(a, NegAtom("a"))) == FALSE
    assert simplify(Or(And(a, NegAtom("a")), b)) == b
    assert simplify(And(Or(a, b), a)) == a
    assert simplify(Until(Or(a, And(a, b)), b)) == Until(a, b)


@pytest.mark.parametrize(
    "text", ["(F X (b | a)) U (F X X b)", "(!a & (true U (true U a))) U X (true U a)"]
)
def test_progression_reaches_finitely_many_formulas(text):
    start = simplify(parse_formula(text))
    seen = {start}
    frontier = [start]
    while frontier:
        current = frontier.pop()
        for letter in letters(["a", "b"]):
            successor = progress(current, letter)
            if successor not in seen:
                seen.add(successor)
                frontier.append(successor)
        assert len(seen) < 500


def test_letters_order():
    assert letters(["b", "a"]) == [frozenset(), {"a"}, {"b"}, {"a", "b"}]


def test_is_good_prefix_examples():
    assert is_good_prefix(eventually(a), [frozenset({"a"})])
    assert not is_good_prefix(eventually(a), [frozenset(), frozenset()])
    assert is_good_prefix(TRUE, [])
    assert not is_good_prefix(Next(a), [frozenset({"a"})])


@pytest.mark.parametrize("seed", range(20))
def test_good_prefixes_are_extension_closed(seed):
    rng = random.Random(seed)
    ap = ["a", "b"]
    formula = random_formula(rng, ap, depth=3)
    alphabet = letters(ap)
    for length in range(3):
        for word in itertools.product(alphabet, repeat=length):
            if not is_good_prefix(formula, word):
                continue
            for extra in range(1, 4):
                for tail in itertools.product(alphabet, repeat=extra):
                    assert is_good_prefix(formula, word + tail)


def test_satisfies_lasso():
    assert satisfies_lasso(eventually(a), [frozenset()], [frozenset(), frozenset({"a"})])
    assert not satisfies_lasso(eventually(a), [], [frozenset({"b"})])
    assert not satisfies_lasso(Until(a, b), [frozenset({"a"})], [frozenset({"a"})])
    with pytest.raises(ValueError):
        satisfies_lasso(TRUE, [], [])
