"""Tests for schedules, the on-line pattern function and sessions."""

import pytest

from online_supervisor.des import generated_strings, make_des
from online_supervisor.dfa import translate
from online_supervisor.errors import (
    IllegalObservationError,
    ScheduleError,
    SessionStoppedError,
    UndefinedTransitionError,
    UnenforceableError,
)
from online_supervisor.formula import parse_formula
from online_supervisor.harness import run_session
from online_supervisor.product import ProductState, build_product
from online_supervisor.ranking import compute_ranking
from online_supervisor.supervisor import (
    LinearSchedule,
    Supervisor,
    TabulatedSchedule,
    observe,
    read_transcript,
    start_session,
    write_transcript,
)
from tests.helpers import make_product

NEVER = TabulatedSchedule(())


def S(name):
    return ProductState(name, 0)


@pytest.fixture
def chain():
    """x -c1-> y -c2-> z with a neutral self-loop n at x; z accepting."""
    p = make_product(
        [("x", "c1", "y"), ("y", "c2", "z"), ("x", "n", "x")],
        accepting=["z"],
        controllable=["c1", "c2", "n"],
    )
    return p, compute_ranking(p)


def test_linear_schedule():
    schedule = LinearSchedule(-0.5, 20)
    assert schedule.level(0) == 20
    assert schedule.level(10) == 15
    assert schedule.zero_step() == 40
    assert schedule.level(41) == 0
    schedule.validate(91)
    with pytest.raises(ScheduleError):
        LinearSchedule(0, 5)
    with pytest.raises(ScheduleError):
        LinearSchedule(-1, 92).validate(91)


def test_tabulated_schedule():
    schedule = TabulatedSchedule((3, 2, 2, 1))
    assert [schedule.level(k) for k in range(6)] == [3, 2, 2, 1, 0, 0]
    assert schedule.zero_step() == 4
    assert NEVER.zero_step() == 0
    with pytest.raises(ScheduleError):
        TabulatedSchedule((1, 2))
    with pytest.raises(ScheduleError):
        Supervisor(*make_chain_parts(), TabulatedSchedule((10,)))


def make_chain_parts():
    p = make_product([("x", "c", "z")], accepting=["z"], controllable=["c"])
    return p, compute_ranking(p)


def test_chain_ranks(chain):
    p, ranking = chain
    assert [ranking[S(n)] for n in "xyz"] == [2, 1, 0]
    assert ranking.alpha == 3


def test_high_permissiveness_enables_neutral_loop(chain):
    supervisor = Supervisor(*chain, LinearSchedule(-1, 3))
    assert supervisor.online(S("x"), 0) == {"c1", "n"}
    assert supervisor.online(S("x"), 3) == {"c1"}


def test_zero_permissiveness_allows_only_legal_moves(chain, product, ranking):
    assert Supervisor(*chain, NEVER).online(S("x"), 0) == {"c1"}
    supervisor = Supervisor(product, ranking, NEVER)
    for state in product.states:
        if 0 < ranking[state] < ranking.alpha:
            assert supervisor.online(state, 0) == {
                e for e, t in product.delta[state].items() if ranking[t] < ranking[state]
            }


@pytest.mark.parametrize("params", [(-0.5, 20), (-0.5, 30), (-2, 30)])
def test_patterns_are_safe_and_controllable(product, ranking, params):
    supervisor = Supervisor(product, ranking, LinearSchedule(*params))
    for state in product.states:
        if not 0 < ranking[state] < ranking.alpha:
            continue
        for k in (0, 10, 30, 60, 200):
            pattern = supervisor.online(state, k)
            assert pattern
            assert product.enabled_uncontrollable(state) <= pattern
            assert all(ranking[product.delta[state][e]] < ranking.alpha for e in pattern)


def test_surveillance_session_starts(product, ranking):
    session = start_session(product, ranking, LinearSchedule(-0.5, 20))
    assert session.state == product.initial
    assert session.k == 0
    assert session.rank == 14
    assert not session.stopped


def test_unenforceable_specification():
    g = make_des(["a"], ["s"], ["e"], ["e"], "s", {"s": ["a"]}, [("s", "e", "s")])
    p = build_product(g, translate(parse_formula("F (a & !a)"), ap=["a"]))
    ranking = compute_ranking(p)
    assert ranking[p.initial] == ranking.alpha
    with pytest.raises(UnenforceableError) as info:
        start_session(p, ranking, NEVER)
    assert info.value.exit_code == 3


def test_immediately_satisfied_specification():
    g = make_des(["a"], ["s"], ["e"], ["e"], "s", {"s": ["a"]}, [("s", "e", "s")])
    p = build_product(g, translate(parse_formula("a"), ap=["a"]))
    session = start_session(p, compute_ranking(p), NEVER)
    assert session.stopped
    assert session.k == 0
    with pytest.raises(SessionStoppedError):
        session.pattern()


def test_observe_protocol(chain):
    session = Supervisor(*chain, NEVER).start()
    with pytest.raises(IllegalObservationError):
        observe(session, "n")
    with pytest.raises(UndefinedTransitionError):
        observe(session, "c2")
    observe(session, "c1")
    assert (session.state, session.k, session.stopped) == (S("y"), 1, False)
    observe(session, "c2")
    assert session.stopped
    assert session.legal_count == 2
    assert session.neutral_count == 0
    with pytest.raises(SessionStoppedError):
        observe(session, "c2")


def test_neutral_observation_is_counted(chain):
    session = Supervisor(*chain, LinearSchedule(-1, 3)).start()
    session.observe("n").observe("c1").observe("c2")
    assert session.neutral_count == 1
    assert session.legal_count == 2
    assert [entry.observed for entry in session.transcript] == ["n", "c1", "c2"]


def test_supervised_language_examples(chain):
    supervisor = Supervisor(*chain, NEVER)
    assert supervisor.supervised_language(0) == {()}
    assert supervisor.supervised_language(3) == {(), ("c1",), ("c1", "c2")}


def test_supervised_language_within_plant_language(product, ranking):
    supervisor = Supervisor(product, ranking, LinearSchedule(-0.5, 20))
    for depth in range(5):
        assert supervisor.supervised_language(depth) <= generated_strings(product, depth)


def test_realized_pattern_matches_path_definition(plant, spec_dfa, product, ranking):
    supervisor = Supervisor(product, ranking, LinearSchedule(-2, 12))
    assert supervisor.realized_pattern(()) == supervisor.online(product.initial, 0)
    for string in generated_strings(product, 4):
        assert supervisor.realized_pattern(string) == supervisor.path_pattern(string, plant, spec_dfa)


def test_realized_pattern_along_accepting_run(plant, spec_dfa, product, ranking):
    supervisor = Supervisor(product, ranking, LinearSchedule(-0.5, 20))
    record, _ = run_session(supervisor, seed=11)
    for k in range(record.steps):
        prefix = record.events[:k]
        assert supervisor.realized_pattern(prefix) == supervisor.path_pattern(prefix, plant, spec_dfa)
        assert record.events[k] in supervisor.realized_pattern(prefix)


def test_transcript_round_trip(tmp_path, product, ranking):
    supervisor = Supervisor(product, ranking, LinearSchedule(-0.5, 30))
    record, session = run_session(supervisor, seed=5, record_transcript=True)
    path = tmp_path / "run.jsonl"
    write_transcript(session.transcript, path)
    entries = read_transcript(path)
    assert entries == session.transcript
    assert len(entries) == record.steps
    assert [e.rank for e in entries] == record.rank_trace[:-1]
    assert [e.observed for e in entries] == record.events
    assert all(e.observed in e.pattern for e in entries)
