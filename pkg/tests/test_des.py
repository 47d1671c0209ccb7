"""Tests for DES construction, composition and files."""

import json
import random

import pytest

from online_supervisor.des import (
    accessible,
    generated_strings,
    load_des,
    make_des,
    pair_id,
    save_des,
    synchronous_product,
)
from online_supervisor.errors import (
    ControllabilityConflictError,
    NondeterminismError,
    SchemaViolationError,
    UndefinedTransitionError,
    UnknownStateError,
)
from online_supervisor.surveillance import g_pos, g_task, write_fixtures
from tests.helpers import random_des


def toggle(name: str, event: str, controllable: bool = True):
    return make_des(
        ap=[],
        states=[f"{name}0", f"{name}1"],
        events=[event],
        controllable=[event] if controllable else [],
        initial=f"{name}0",
        labels={},
        transitions=[(f"{name}0", event, f"{name}1"), (f"{name}1", event, f"{name}0")],
    )


def test_fixture_sizes():
    pos, task = g_pos(), g_task()
    assert (len(pos.states), pos.num_transitions) == (6, 16)
    assert (len(task.states), task.num_transitions) == (3, 10)
    assert task.uncontrollable == {"sigma_comp", "sigma_idle"}


def test_surveillance_composite(plant):
    print("\n" + "=" * 80)
    print("SURVEILLANCE PLANT")
    print("=" * 80)
    print(f"States: {len(plant.states)}, transitions: {plant.num_transitions}")
    print("=" * 80 + "\n")

    assert len(plant.states) == 18
    assert plant.num_transitions == 40
    assert plant.initial == "(x0,y0)"


def test_composite_labeling(plant):
    for state in plant.states:
        room, task = state.strip("()").split(",")
        label = plant.label(state)
        for i in range(6):
            assert (f"p{i}" in label) == (room == f"x{i}")
        assert ("qs" in label) == (task == "y2")


def test_sensing_state_only_allows_idle():
    task = g_task()
    assert task.enabled("y2") == {"sigma_idle"}
    assert task.enabled_uncontrollable("y2") == {"sigma_idle"}
    assert task.enabled_controllable("y2") == set()


@pytest.mark.parametrize("seed", range(10))
def test_enabled_partition(seed):
    g = random_des(random.Random(seed), 6, 4)
    for state in g.states:
        assert g.enabled(state) == g.enabled_controllable(state) | g.enabled_uncontrollable(state)
        assert not g.enabled_controllable(state) & g.enabled_uncontrollable(state)
        assert g.successors(state) == {g.step(state, e) for e in g.enabled(state)}


def test_deadlock_has_no_events():
    g = make_des([], ["s", "t"], ["e"], ["e"], "s", {}, [("s", "e", "t")])
    assert g.enabled("t") == set()
    with pytest.raises(UnknownStateError):
        g.enabled("nowhere")


def test_step_matches_fixture_arrows():
    pos = g_pos()
    for source, event, target in pos.transitions():
        assert pos.step(source, event) == target
    assert pos.run_string("x3", []) == "x3"
    assert pos.run_string("x0", ["sigma_1", "sigma_2", "sigma_2"]) == "x2"
    with pytest.raises(UndefinedTransitionError):
        pos.step("x0", "sigma_3")


def test_composition_with_trivial_system():
    g = g_pos()
    unit = make_des([], ["only"], [], [], "only", {}, [])
    composite = synchronous_product(g, unit)
    assert len(composite.states) == len(g.states)
    assert composite.num_transitions == g.num_transitions
    assert composite.label("(x2,only)") == g.label("x2")


def test_composition_interleaves_private_events():
    composite = synchronous_product(toggle("a", "e"), toggle("b", "f"))
    assert len(composite.states) == 4
    assert composite.num_transitions == 8
    assert composite.enabled("(a0,b0)") == {"e", "f"}


def test_shared_events_synchronise():
    composite = synchronous_product(toggle("a", "e"), toggle("b", "e"))
    assert set(composite.states) == {"(a0,b0)", "(a1,b1)"}


def test_component_ids_with_commas_stay_distinct():
    g1 = make_des([], ["a,b", "a"], ["e"], ["e"], "a,b", {}, [("a,b", "e", "a"), ("a", "e", "a,b")])
    g2 = make_des([], ["c", "b,c"], ["f"], ["f"], "c", {}, [("c", "f", "b,c"), ("b,c", "f", "c")])
    composite = synchronous_product(g1, g2)
    assert len(composite.states) == 4
    assert len(set(composite.states)) == 4
    assert pair_id("a,b", "c") != pair_id("a", "b,c")
    assert pair_id("x0", "y0") == "(x0,y0)"
    assert composite.enabled(pair_id("a,b", "c")) == {"e", "f"}


def test_nested_composition():
    composite = synchronous_product(synchronous_product(toggle("a", "e"), toggle("b", "f")), toggle("c", "g"))
    assert len(composite.states) == 8
    assert composite.initial == "((a0\\,b0),c0)"


def test_controllability_conflict():
    with pytest.raises(ControllabilityConflictError):
        synchronous_product(toggle("a", "e", True), toggle("b", "e", False))


def test_composition_is_reachable_and_deterministic(plant):
    strings = generated_strings(plant, 8)
    reached = {plant.run_string(plant.initial, s) for s in strings}
    assert reached == set(plant.states)
    assert accessible(plant).states == plant.states


def test_accessible_prunes():
    g = make_des([], ["s", "t", "u"], ["e"], ["e"], "s", {}, [("s", "e", "t"), ("u", "e", "s")])
    assert accessible(g).states == ("s", "t")


def test_is_history():
    pos = g_pos()
    assert pos.is_history(["x0", "sigma_1", "x1", "sigma_1", "x1"])
    assert not pos.is_history(["x0", "sigma_1", "x2"])
    assert not pos.is_history(["x1"])


def test_save_load_round_trip(tmp_path, plant):
    path = tmp_path / "plant.json"
    save_des(plant, path)
    loaded = load_des(path)
    assert set(loaded.states) == set(plant.states)
    assert set(loaded.transitions()) == set(plant.transitions())
    assert loaded.controllable == plant.controllable
    assert dict(loaded.labels) == dict(plant.labels)


def test_fixture_files_compose(tmp_path):
    write_fixtures(tmp_path)
    composite = synchronous_product(load_des(tmp_path / "g_pos.json"), load_des(tmp_path / "g_task.json"))
    assert (len(composite.states), composite.num_transitions) == (18, 40)


def test_duplicate_transition_rejected(tmp_path):
    data = {
        "ap": [],
        "events": [{"name": "e", "controllable": True}],
        "states": [{"id": "s"}, {"id": "t"}],
        "initial": "s",
        "transitions": [
            {"from": "s", "event": "e", "to": "s"},
            {"from": "s", "event": "e", "to": "t"},
        ],
    }
    path = tmp_path / "g.json"
    path.write_text(json.dumps(data))
    with pytest.raises(NondeterminismError):
        load_des(path)


def test_schema_violations(tmp_path):
    path = tmp_path / "g.json"
    path.write_text(json.dumps({"ap": [], "events": [], "states": [{"id": "s"}], "transitions": []}))
    with pytest.raises(SchemaViolationError):
        load_des(path)

    path.write_text(
        json.dumps(
            {"ap": [], "events": [], "states": [{"id": "s", "labels": ["p"]}], "initial": "s", "transitions": []}
        )
    )
    with pytest.raises(SchemaViolationError, match="outside ap"):
        load_des(path)
