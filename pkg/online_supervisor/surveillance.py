"""
The bundled surveillance example.

A robot moves along a corridor of six rooms (G_pos, labels p0..p5) and
runs a sensing task (G_task) that it can start only while idle; the
sensing completes and the robot goes idle again through uncontrollable
events, and the sensed state is labeled qs. The specification asks the
robot to sense in room 3 and in room 4, not to enter room 0 before both,
to sense in room 4 only after room 3 and finally to return to room 0
without sensing.
"""

from importlib.resources import files
from pathlib import Path
from typing import Union

from .des import Des, parse_des, synchronous_product
from .dfa import Dfa, DfaFile, dfa_from_model
from .formula import Formula, parse_formula

FIXTURES = files("online_supervisor") / "fixtures"
FIXTURE_NAMES = ("g_pos.json", "g_task.json", "surveillance.ltl", "surveillance_dfa.json")


def _read(name: str) -> str:
    return (FIXTURES / name).read_text(encoding="utf-8")


def g_pos() -> Des:
    return parse_des(_read("g_pos.json"), "g_pos.json")


def g_task() -> Des:
    return parse_des(_read("g_task.json"), "g_task.json")


def surveillance_formula_text() -> str:
    return _read("surveillance.ltl").strip()


def build_surveillance_example() -> tuple[Des, Formula]:
    """
    Compose the position and task models and parse the specification.

    Returns:
        The composite plant (18 states, 40 transitions) and the formula
    """
    composite = synchronous_product(g_pos(), g_task())
    formula = parse_formula(surveillance_formula_text(), ap=composite.ap)
    return composite, formula


def surveillance_dfa() -> Dfa:
    """The hand-written guard-notation DFA of the specification."""
    return dfa_from_model(DfaFile.model_validate_json(_read("surveillance_dfa.json")))


def write_fixtures(out_dir: Union[str, Path]) -> list[Path]:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    written = []
    for name in FIXTURE_NAMES:
        target = out / name
        target.write_text(_read(name), encoding="utf-8")
        written.append(target)
    return written
