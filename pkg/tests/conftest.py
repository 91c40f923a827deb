from __future__ import annotations

from importlib import resources

import pytest

from uatmsim.reasoner import Program, merge_programs, parse_program
from uatmsim.world import ScenarioDoc, fig1_scenario


def load_program_text(name: str) -> str:
    return (resources.files("uatmsim") / "data" / name).read_text()


def load_program(name: str) -> Program:
    return parse_program(load_program_text(name))


def base_plus(name: str) -> Program:
    """fig1 fact base combined with one of the bundled query programs."""
    return merge_programs(load_program("fig1_base.lp"), load_program(name))


@pytest.fixture(scope="session")
def fig1() -> ScenarioDoc:
    return fig1_scenario()
