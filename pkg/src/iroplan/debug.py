"""Natural-language troubleshooting hints for failed planning attempts.

Each hint belongs to one of five failure categories: action parameters,
preconditions, effects, initial states, or the goal.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

from .knowledge import KnowledgeBase, Predicate, check_goal_consistency
from .pddl import PlanningProblem
from .planner import GroundAction, ground, ground_action_schema

CATEGORIES = ("parameters", "preconditions", "effects", "initial_state",
              "goal")

HINTS = {
    "parameters_no_instance": (
        "parameters",
        "An action is not considered by the planner if its parameter types "
        "do not match the objects in the initial state. Check the types of "
        "the action parameters."),
    "parameters_goal_blocked": (
        "parameters",
        "A goal state can only be reached by an action whose parameter "
        "types match the objects involved. Widen the action parameter "
        "types so the action applies to them."),
    "preconditions_unsatisfiable": (
        "preconditions",
        "All stated preconditions must hold in a world state in order to "
        "apply the action. Check that every precondition can actually "
        "become true."),
    "effects_goal": (
        "effects",
        "Make sure the action effects can achieve the goal states."),
    "initial_state_missing_on": (
        "initial_state",
        "An object is not mentioned in the initial states at all. Check "
        "that the initial state describes where every object is."),
    "goal_contradiction": (
        "goal",
        "The goal should not include contradicting states (e.g. 'object is "
        "on A' and 'A is clear')."),
}


@dataclass(frozen=True)
class Hint:
    category: str
    rule: str
    message: str
    subjects: tuple[str, ...] = ()

    def to_json(self) -> dict:
        return {"category": self.category, "rule": self.rule,
                "message": self.message, "subjects": list(self.subjects)}


@dataclass(frozen=True)
class DebugReport:
    hints: tuple[Hint, ...]

    def __len__(self):
        return len(self.hints)

    def categories(self) -> tuple[str, ...]:
        return tuple(h.category for h in self.hints)

    def to_json(self) -> dict:
        return {"hints": [h.to_json() for h in self.hints]}


def _matches_lifted(fact: Predicate, kb: KnowledgeBase) -> bool:
    """Could any schema add this fact if types were no obstacle?"""
    for model in kb.actions.values():
        for eff in model.eff_add:
            if eff.name == fact.name and len(eff.args) == len(fact.args):
                return True
    return False


def _relaxed_reachable(init, actions) -> frozenset:
    facts = set(init)
    remaining = list(actions)
    changed = True
    while changed:
        changed = False
        for ga in list(remaining):
            if ga.pre <= facts:
                remaining.remove(ga)
                new = ga.eff_add - facts
                if new:
                    facts |= new
                    changed = True
    return frozenset(facts)


def generate_debug_report(kb: KnowledgeBase, problem: PlanningProblem,
                          outcome=None) -> DebugReport:
    """Rule-based hints after a plan attempt; empty when a plan was found.

    outcome is the Plan on success, or the NoPlanFound error (or None) on
    failure.
    """
    from .planner import Plan  # local import avoids a cycle at module load

    if isinstance(outcome, Plan):
        return DebugReport(hints=())

    hints: list[Hint] = []
    actions = ground(kb, problem.objects)

    # (b) schema with zero ground instances
    for name, model in sorted(kb.actions.items()):
        if not ground_action_schema(kb, model, problem.objects):
            hints.append(_hint("parameters_no_instance", (name,)))

    # (e) schema whose preconditions never hold in the relaxed reachable set
    reachable = _relaxed_reachable(problem.init, actions)
    for name, model in sorted(kb.actions.items()):
        instances = [ga for ga in actions if ga.name == name]
        if instances and not any(ga.pre <= reachable for ga in instances):
            hints.append(_hint("preconditions_unsatisfiable", (name,)))

    # (a) goal facts no ground action can add; distinguish "types block it"
    # from "no effect produces it at all"
    param_blocked: list[str] = []
    effect_blocked: list[str] = []
    for fact in sorted(problem.goal):
        if fact in problem.init:
            continue
        if any(fact in ga.eff_add for ga in actions):
            continue
        if _matches_lifted(fact, kb):
            param_blocked.append(str(fact))
        else:
            effect_blocked.append(str(fact))
    if param_blocked:
        hints.append(_hint("parameters_goal_blocked", tuple(param_blocked)))
    if effect_blocked:
        hints.append(_hint("effects_goal", tuple(effect_blocked)))

    # (d) declared object with no 'on' fact in the initial state
    object_names = {n for n, t in problem.objects
                    if t in kb.hierarchy and kb.hierarchy.is_subtype(t, "object")}
    placed = {f.args[0] for f in problem.init
              if f.name == "on" and len(f.args) == 2}
    missing = sorted(object_names - placed)
    if missing:
        hints.append(_hint("initial_state_missing_on", tuple(missing)))

    # (c) contradicting goal states
    contradictions = check_goal_consistency(problem.goal)
    if contradictions:
        hints.append(_hint("goal_contradiction", tuple(contradictions)))

    if not hints and problem.goal and outcome is not None:
        # Search failed but no rule fired: point at the precondition level,
        # the usual culprit for dead-ended but relaxed-reachable goals.
        hints.append(_hint("preconditions_unsatisfiable",
                           tuple(sorted(kb.actions))))

    order = {c: i for i, c in enumerate(CATEGORIES)}
    hints.sort(key=lambda h: (order[h.category], h.rule))
    return DebugReport(hints=tuple(hints))


def _hint(rule: str, subjects: tuple[str, ...]) -> Hint:
    category, message = HINTS[rule]
    return Hint(category=category, rule=rule, message=message,
                subjects=subjects)
