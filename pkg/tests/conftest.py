import random

import pytest

from iroplan.knowledge import Edit, P, Predicate
from iroplan.session import Session
from iroplan.world import pick_and_place

TEACH_SCENE = {
    "positions": [
        {"name": "A", "pose": [0.40, -0.15, 0.0]},
        {"name": "B", "pose": [0.40, -0.05, 0.0]},
        {"name": "C", "pose": [0.40, 0.05, 0.0]},
        {"name": "D", "pose": [0.40, 0.15, 0.0]},
    ],
    "objects": [
        {"name": "base1", "bbox": [0.12, 0.12, 0.03], "on": "A"},
        {"name": "roof1", "bbox": [0.02, 0.08, 0.09], "on": "B"},
    ],
    "config": {"proximity_threshold_d": 0.05, "occlude_stacked": False},
}

GENERALIZE_EDITS = [
    Edit(op="add_pre", predicate=P("clear", "?o")),
    Edit(op="add_pre", predicate=P("stackable", "?o", "?B")),
    Edit(op="retype_param", var="?o", new_type="object"),
    Edit(op="retype_param", var="?A", new_type="element"),
    Edit(op="retype_param", var="?B", new_type="element"),
]


def teach_two_actions(session: Session) -> None:
    """Teach the standard pair: a suction move for flat objects and a claw
    move for thin ones, generalized to any object on any element."""
    session.load_scene(TEACH_SCENE)
    session.demonstrate("move_suction", pick_and_place("base1", "C"),
                        arm="suction")
    session.edit("move_suction", GENERALIZE_EDITS
                 + [Edit(op="add_pre", predicate=P("flat", "?o"))])
    session.demonstrate("move_claw", pick_and_place("roof1", "D"), arm="claw")
    session.edit("move_claw", GENERALIZE_EDITS
                 + [Edit(op="add_pre", predicate=P("thin", "?o"))])


@pytest.fixture
def taught_session() -> Session:
    session = Session()
    teach_two_actions(session)
    return session


@pytest.fixture
def rng() -> random.Random:
    return random.Random(0xC0FFEE)
