import pytest

from iroplan.errors import IroplanError, NameClash, NoPlanFound
from iroplan.knowledge import P
from iroplan.scenarios import (
    ScenarioFailure,
    load_scenario,
    run_scenario,
)
from iroplan.session import Session
from iroplan.world import pick_and_place

from conftest import TEACH_SCENE, teach_two_actions


def test_demonstration_drafts_conditions_when_inference_on():
    session = Session()
    session.load_scene(TEACH_SCENE)
    model, diags = session.demonstrate("move", pick_and_place("base1", "C"))
    assert model.pre
    assert model.eff_add
    assert model.keyframes
    assert [v for v, _ in model.params] == ["?o", "?A", "?B"]


def test_demonstration_keeps_only_keyframes_when_inference_off():
    session = Session(condition_inference_on=False)
    session.load_scene(TEACH_SCENE)
    model, diags = session.demonstrate("move", pick_and_place("base1", "C"))
    assert model.pre == frozenset()
    assert model.eff_add == frozenset()
    assert model.eff_del == frozenset()
    assert model.params == ()
    assert len(model.keyframes) == 4


def test_duplicate_action_name_rejected():
    session = Session()
    session.load_scene(TEACH_SCENE)
    session.demonstrate("move", pick_and_place("base1", "C"))
    with pytest.raises(NameClash):
        session.demonstrate("move", pick_and_place("roof1", "D"))


def test_problem_defaults_to_perceived_state(taught_session):
    problem = taught_session.create_problem(
        "p", goal={P("on", "roof1", "A")})
    assert P("on", "base1", "C") in problem.init  # demo moved base1 to C
    assert ("roof1", "roof") in problem.objects


def test_solve_execute_round_trip(taught_session):
    taught_session.create_problem("p", goal={P("on", "roof1", "A")})
    result = taught_session.solve("p", strategy="astar_uniform")
    assert len(result) == 1
    trace = taught_session.execute("p")
    assert len(trace) == 1
    assert P("on", "roof1", "A") in taught_session.perceived_state()


def test_failed_solve_is_remembered_for_debugging(taught_session):
    # roof1 is not flat, so the suction move can never pick it; claw can,
    # but a goal stacking onto a non-flat object has no stackable support.
    taught_session.create_problem("p", goal={P("on", "base1", "roof1")})
    with pytest.raises(NoPlanFound):
        taught_session.solve("p")
    report = taught_session.debug_report("p")
    assert len(report) >= 1


def test_execute_without_plan_rejected(taught_session):
    taught_session.create_problem("p", goal={P("on", "roof1", "A")})
    with pytest.raises(IroplanError):
        taught_session.execute("p")


def test_version_increases_on_every_mutation():
    session = Session()
    v0 = session.version
    session.load_scene(TEACH_SCENE)
    v1 = session.version
    session.demonstrate("move", pick_and_place("base1", "C"))
    v2 = session.version
    assert v0 < v1 < v2


def test_project_round_trip(taught_session):
    taught_session.create_problem("p", goal={P("on", "roof1", "A")})
    data = taught_session.to_project_json()
    again = Session.from_project_json(data)
    assert again.kb == taught_session.kb
    assert again.problems["p"] == taught_session.problems["p"]
    assert again.condition_inference_on == \
           taught_session.condition_inference_on


# --- scenario runner ---------------------------------------------------------

BUNDLED = ["task3.scn", "task4.scn", "task5.scn", "task6.scn", "task7.scn",
           "task8.scn", "hanoi3.scn", "bench.scn"]


@pytest.mark.parametrize("name", BUNDLED)
def test_bundled_scenarios_pass(name):
    report = run_scenario(load_scenario(name))
    assert report["ok"]


def test_scenario_failure_carries_command_index():
    scenario = {
        "scene": TEACH_SCENE,
        "commands": [
            {"cmd": "new_problem", "name": "p",
             "goal": [["on", "base1", "D"]]},
            {"cmd": "solve", "problem": "p", "expect": "no_plan"},
        ],
    }
    session = Session()
    teach_two_actions(session)
    with pytest.raises(ScenarioFailure) as err:
        run_scenario(scenario, session=session)
    assert err.value.index == 1  # a plan exists, the expectation is wrong


def test_scenario_assert_state():
    scenario = {
        "scene": TEACH_SCENE,
        "commands": [
            {"cmd": "assert_state", "facts": [["on", "base1", "A"]],
             "absent": [["on", "base1", "B"]]},
            {"cmd": "assert_state", "facts": [["on", "base1", "B"]]},
        ],
    }
    with pytest.raises(ScenarioFailure) as err:
        run_scenario(scenario)
    assert err.value.index == 1


def test_bench_uses_exactly_two_taught_actions():
    report = run_scenario(load_scenario("bench.scn"))
    assert report["taught_actions"] == ["move_claw", "move_suction"]
