import pytest

from iroplan.debug import CATEGORIES, generate_debug_report
from iroplan.errors import NoPlanFound
from iroplan.knowledge import ActionModel, KnowledgeBase, P
from iroplan.pddl import PlanningProblem
from iroplan.planner import plan


def _move(param_type="object", pre_extra=()):
    return ActionModel(
        name="move",
        params=(("?o", param_type), ("?a", "element"), ("?b", "element")),
        pre=frozenset({P("on", "?o", "?a"), P("clear", "?o"),
                       P("clear", "?b")} | set(pre_extra)),
        eff_add=frozenset({P("on", "?o", "?b"), P("clear", "?a")}),
        eff_del=frozenset({P("on", "?o", "?a"), P("clear", "?b")}),
    )


def _problem(objects, init, goal):
    return PlanningProblem(name="p", objects=tuple(objects),
                           init=frozenset(init), goal=frozenset(goal))


def _solve_failure(kb, problem):
    with pytest.raises(NoPlanFound) as err:
        plan(kb, problem)
    return err.value


def test_success_yields_empty_report():
    kb = KnowledgeBase().with_action(_move())
    problem = _problem(
        [("a", "position"), ("b", "position"), ("x", "base")],
        {P("on", "x", "a"), P("clear", "x"), P("clear", "b")},
        {P("on", "x", "b")})
    result = plan(kb, problem)
    report = generate_debug_report(kb, problem, result)
    assert len(report) == 0


def test_parameter_type_mismatch_hint():
    # The operator only accepts cubes but the scene only contains bases,
    # so it grounds to nothing.
    kb = KnowledgeBase().with_action(_move(param_type="cube"))
    problem = _problem(
        [("a", "position"), ("b", "position"), ("x", "base")],
        {P("on", "x", "a"), P("clear", "x"), P("clear", "b")},
        {P("on", "x", "b")})
    outcome = _solve_failure(kb, problem)
    report = generate_debug_report(kb, problem, outcome)
    assert set(report.categories()) == {"parameters"}
    assert any(h.rule == "parameters_no_instance" for h in report.hints)


def test_unsatisfiable_precondition_hint():
    # thin(?o) can never become true for a base, with no action adding it.
    kb = KnowledgeBase().with_action(_move(pre_extra={P("thin", "?o")}))
    problem = _problem(
        [("a", "position"), ("b", "position"), ("x", "base")],
        {P("on", "x", "a"), P("clear", "x"), P("clear", "b"),
         P("flat", "x")},
        {P("on", "x", "b")})
    outcome = _solve_failure(kb, problem)
    report = generate_debug_report(kb, problem, outcome)
    assert set(report.categories()) == {"preconditions"}
    assert report.hints[0].rule == "preconditions_unsatisfiable"


def test_effects_cannot_achieve_goal_hint():
    # No action adds flat facts, so this goal is out of reach of any edit
    # to the parameters.
    kb = KnowledgeBase().with_action(_move())
    problem = _problem(
        [("a", "position"), ("b", "position"), ("x", "roof")],
        {P("on", "x", "a"), P("clear", "x"), P("clear", "b")},
        {P("flat", "x")})
    outcome = _solve_failure(kb, problem)
    report = generate_debug_report(kb, problem, outcome)
    assert set(report.categories()) == {"effects"}
    assert "effects" in report.hints[0].message


def test_object_missing_from_initial_state_hint():
    # y is declared but the initial state never says where it is.
    kb = KnowledgeBase().with_action(_move())
    problem = _problem(
        [("a", "position"), ("b", "position"), ("x", "base"), ("y", "base")],
        {P("on", "x", "a"), P("clear", "x"), P("clear", "b"),
         P("clear", "y")},
        {P("on", "y", "x")})
    outcome = _solve_failure(kb, problem)
    report = generate_debug_report(kb, problem, outcome)
    assert "initial_state" in report.categories()
    missing = [h for h in report.hints if h.category == "initial_state"]
    assert missing[0].subjects == ("y",)


def test_goal_contradiction_hint():
    kb = KnowledgeBase().with_action(_move())
    problem = _problem(
        [("a", "position"), ("b", "position"), ("x", "base")],
        {P("on", "x", "a"), P("clear", "x"), P("clear", "b")},
        {P("on", "x", "b"), P("clear", "b")})
    outcome = _solve_failure(kb, problem)
    assert outcome.reason == "goal_inconsistent"
    report = generate_debug_report(kb, problem, outcome)
    assert "goal" in report.categories()
    goal_hints = [h for h in report.hints if h.category == "goal"]
    assert "contradict" in goal_hints[0].subjects[0]


def test_goal_blocked_by_parameter_types_hint():
    # A lifted achiever for the goal exists, but typing stops it from
    # grounding onto the objects involved.
    kb = KnowledgeBase().with_action(_move(param_type="cube"))
    problem = _problem(
        [("a", "position"), ("b", "position"), ("x", "base"),
         ("c", "cube")],
        {P("on", "x", "a"), P("on", "c", "x"), P("clear", "c"),
         P("clear", "b")},
        {P("on", "x", "b")})
    outcome = _solve_failure(kb, problem)
    report = generate_debug_report(kb, problem, outcome)
    assert "parameters" in report.categories()
    assert any(h.rule == "parameters_goal_blocked" for h in report.hints)


def test_report_is_never_empty_after_a_failure():
    # Dead-end without any specific rule firing still yields a hint.
    blocked = ActionModel(
        name="swap",
        params=(("?o", "object"), ("?a", "element"), ("?b", "element")),
        pre=frozenset({P("on", "?o", "?a"), P("clear", "?b"),
                       P("clear", "?o"), P("stackable", "?o", "?b")}),
        eff_add=frozenset({P("on", "?o", "?b")}),
        eff_del=frozenset({P("on", "?o", "?a"), P("clear", "?b")}),
    )
    kb = KnowledgeBase().with_action(blocked)
    problem = _problem(
        [("a", "position"), ("b", "position"), ("x", "base"), ("y", "base")],
        {P("on", "x", "a"), P("on", "y", "b"), P("clear", "x"),
         P("clear", "y"), P("stackable", "x", "b"), P("stackable", "y", "a"),
         P("stackable", "x", "y"), P("stackable", "y", "x")},
        {P("on", "x", "b"), P("on", "y", "a")})
    outcome = _solve_failure(kb, problem)
    report = generate_debug_report(kb, problem, outcome)
    assert len(report) >= 1


def test_hints_sorted_by_category_order():
    kb = KnowledgeBase().with_action(_move(param_type="cube"))
    problem = _problem(
        [("a", "position"), ("b", "position"), ("x", "base"), ("y", "base")],
        {P("on", "x", "a"), P("clear", "x"), P("clear", "b"),
         P("clear", "y")},
        {P("on", "x", "b"), P("clear", "b")})
    report = generate_debug_report(kb, problem, NoPlanFound("exhausted"))
    cats = report.categories()
    order = {c: i for i, c in enumerate(CATEGORIES)}
    assert list(cats) == sorted(cats, key=order.__getitem__)


def test_report_serializes():
    kb = KnowledgeBase().with_action(_move(param_type="cube"))
    problem = _problem(
        [("a", "position"), ("b", "position"), ("x", "base")],
        {P("on", "x", "a"), P("clear", "x"), P("clear", "b")},
        {P("on", "x", "b")})
    report = generate_debug_report(kb, problem, NoPlanFound("exhausted"))
    data = report.to_json()
    assert data["hints"]
    assert {"category", "rule", "message", "subjects"} <= set(data["hints"][0])
