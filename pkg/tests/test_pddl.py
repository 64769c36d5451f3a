import random
from pathlib import Path

import pytest

from iroplan.errors import (
    PddlSyntaxError,
    UndeclaredConstant,
    UnsupportedFeature,
)
from iroplan.knowledge import KnowledgeBase, P
from iroplan.pddl import (
    PlanningProblem,
    emit_domain,
    emit_plan,
    emit_problem,
    parse_domain,
    parse_plan,
    parse_problem,
)

from generators import random_knowledge_base, random_problem

GOLDEN = Path(__file__).parent / "golden" / "domain.pddl"


def test_emitted_domain_matches_golden_file(taught_session):
    assert emit_domain(taught_session.kb) == GOLDEN.read_text()


def test_emission_is_deterministic(taught_session):
    assert emit_domain(taught_session.kb) == emit_domain(taught_session.kb)


def test_domain_round_trip_for_taught_actions(taught_session):
    kb = taught_session.kb
    assert parse_domain(emit_domain(kb)) == kb.canonical()


def test_problem_round_trip(taught_session):
    problem = PlanningProblem(
        name="t", objects=(("a", "position"), ("b", "position"),
                           ("c1", "cube")),
        init=frozenset({P("on", "c1", "a"), P("clear", "b"),
                        P("clear", "c1")}),
        goal=frozenset({P("on", "c1", "b")}))
    assert parse_problem(emit_problem(problem)) == problem.canonical()


def test_random_round_trips():
    rng = random.Random(2024)
    for _ in range(100):
        kb = random_knowledge_base(rng)
        assert parse_domain(emit_domain(kb)) == kb.canonical()
        problem = random_problem(rng, kb)
        assert parse_problem(emit_problem(problem)) == problem.canonical()


def test_problem_validation_rejects_undeclared_constants():
    problem = PlanningProblem(name="t", objects=(("a", "position"),),
                              init=frozenset({P("clear", "zz")}),
                              goal=frozenset())
    with pytest.raises(UndeclaredConstant):
        emit_problem(problem)


def test_plan_round_trip():
    steps = [("move", ("c1", "a", "b")), ("move", ("c2", "b", "a"))]
    assert parse_plan(emit_plan(steps)) == steps


def test_plan_parser_accepts_bare_and_commented_lines():
    text = "; header\n(move c1 a b)\n\n1: (move c2 b a) ; trailing\n"
    assert parse_plan(text) == [("move", ("c1", "a", "b")),
                                ("move", ("c2", "b", "a"))]


@pytest.mark.parametrize("text,line,col", [
    ("(define (domain d)", 1, 1),           # unclosed paren
    ("(define (domain d)))", 1, 20),        # extra paren
    ("x (define)", 1, 1),                   # symbol at top level
])
def test_syntax_errors_carry_positions(text, line, col):
    with pytest.raises(PddlSyntaxError) as err:
        parse_domain(text)
    assert err.value.line == line
    assert err.value.col == col


def test_syntax_error_line_numbers_span_lines():
    text = "(define (domain d)\n  (:bogus))\n"
    with pytest.raises(PddlSyntaxError) as err:
        parse_domain(text)
    assert err.value.line == 2


@pytest.mark.parametrize("snippet", [
    "(:requirements :adl)",
    "(:requirements :fluents)",
    "(:functions (cost))",
    "(:constants a - object)",
    ("(:action x :parameters (?o - object) "
     ":precondition (or (clear ?o)) :effect (and))"),
    ("(:action x :parameters (?o - object) "
     ":precondition (not (clear ?o)) :effect (and))"),
    ("(:action x :parameters (?o - object) "
     ":precondition (and) :effect (forall (?y) (clear ?y)))"),
    "(:durative-action x)",
])
def test_unsupported_features_rejected(snippet):
    text = f"(define (domain d)\n  {snippet})\n"
    with pytest.raises(UnsupportedFeature):
        parse_domain(text)


def test_negative_goal_rejected():
    text = ("(define (problem p) (:domain d) (:objects a - position)\n"
            "  (:init) (:goal (not (clear a))))")
    with pytest.raises(UnsupportedFeature):
        parse_problem(text)


def test_empty_domain_round_trip():
    kb = KnowledgeBase()
    parsed = parse_domain(emit_domain(kb))
    assert parsed == kb.canonical()


def test_bare_root_type_survives_round_trip():
    # A bare type name ahead of 'x - t' entries would be absorbed into the
    # following type group, so the emitter must put roots last.
    kb = KnowledgeBase()
    text = emit_domain(kb)
    lines = [l.strip() for l in text.splitlines()]
    types_start = lines.index("(:types")
    block = []
    for line in lines[types_start + 1:]:
        block.append(line.rstrip(")"))
        if line.endswith(")"):
            break
    assert block[-1] == "element"
    assert parse_domain(text).hierarchy.parent["element"] is None
