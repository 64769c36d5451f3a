"""Typed operator grounding, forward search, and independent plan validation.

Strategies: greedy best-first on a delete-relaxation heuristic (the
default), uniform-cost search (optimal in action count), and a plain
breadth-first oracle used by tests.
"""

from __future__ import annotations

import itertools
import threading
import time
from dataclasses import dataclass, field
from heapq import heappop, heappush
from typing import Iterable, Optional, Sequence

from .errors import NoPlanFound
from .knowledge import (
    ActionModel,
    KnowledgeBase,
    Predicate,
    State,
    check_goal_consistency,
)
from .pddl import PlanningProblem

INFINITY = float("inf")

DEFAULT_NODE_BUDGET = 1_000_000
DEFAULT_TIME_BUDGET = 10.0
_CANCEL_CHECK_INTERVAL = 64  # expansions between token checks


class CancellationToken:
    """Cooperative cancellation for long-running searches."""

    def __init__(self):
        self._event = threading.Event()

    def cancel(self) -> None:
        self._event.set()

    @property
    def cancelled(self) -> bool:
        return self._event.is_set()


@dataclass(frozen=True, order=True)
class GroundAction:
    name: str
    args: tuple[str, ...]
    pre: State = field(compare=False)
    eff_add: State = field(compare=False)
    eff_del: State = field(compare=False)

    def applicable(self, state: State) -> bool:
        return self.pre <= state

    def apply(self, state: State) -> State:
        return (state - self.eff_del) | self.eff_add

    def __str__(self):
        return "(" + " ".join((self.name,) + self.args) + ")"


@dataclass(frozen=True)
class Plan:
    steps: tuple[GroundAction, ...]
    stats: dict = field(default_factory=dict, compare=False)

    def __len__(self):
        return len(self.steps)

    def to_json(self) -> dict:
        return {"steps": [[ga.name, *ga.args] for ga in self.steps],
                "stats": dict(self.stats)}


def ground(kb: KnowledgeBase,
           objects: Sequence[tuple[str, str]]) -> tuple[GroundAction, ...]:
    """All type-respecting instantiations of every action schema.

    Bindings are injective: no two parameters take the same constant, which
    rules out degenerate instances like moving an object onto itself.
    """
    out: list[GroundAction] = []
    for _, model in sorted(kb.actions.items()):
        out.extend(ground_action_schema(kb, model, objects))
    return tuple(sorted(out))


def ground_action_schema(kb: KnowledgeBase, model: ActionModel,
                         objects: Sequence[tuple[str, str]]
                         ) -> list[GroundAction]:
    hierarchy = kb.hierarchy
    candidates: list[list[str]] = []
    for _, ptype in model.params:
        names = [n for n, t in objects
                 if t in hierarchy and hierarchy.is_subtype(t, ptype)]
        candidates.append(sorted(names))
    out = []
    for combo in itertools.product(*candidates):
        if len(set(combo)) != len(combo):
            continue
        binding = {v: c for (v, _), c in zip(model.params, combo)}
        out.append(GroundAction(
            name=model.name, args=tuple(combo),
            pre=frozenset(f.substitute(binding) for f in model.pre),
            eff_add=frozenset(f.substitute(binding) for f in model.eff_add),
            eff_del=frozenset(f.substitute(binding) for f in model.eff_del)))
    return out


# --- delete-relaxation heuristic ---------------------------------------------

def relaxed_plan_length(state: State, goal: State,
                        actions: Sequence[GroundAction]) -> float:
    """Length of a relaxed plan extracted from a planning graph built while
    ignoring delete effects; 0 iff the goal already holds, inf if the goal
    is unreachable even without deletes."""
    if goal <= state:
        return 0
    fact_level: dict[Predicate, int] = {f: 0 for f in state}
    action_level: dict[GroundAction, int] = {}
    achievers: dict[Predicate, list[GroundAction]] = {}
    level = 0
    facts = set(state)
    remaining = [a for a in actions]
    while True:
        new_facts: set[Predicate] = set()
        applied_now = []
        for ga in remaining:
            if ga.pre <= facts:
                action_level[ga] = level
                applied_now.append(ga)
                for f in ga.eff_add:
                    achievers.setdefault(f, []).append(ga)
                    if f not in fact_level:
                        new_facts.add(f)
        for ga in applied_now:
            remaining.remove(ga)
        if goal <= facts:
            break
        if not new_facts:
            return INFINITY
        level += 1
        for f in new_facts:
            fact_level[f] = level
        facts |= new_facts

    return _extract_relaxed_plan(state, goal, fact_level, action_level,
                                 achievers)


def _extract_relaxed_plan(state: State, goal: State,
                          fact_level: dict[Predicate, int],
                          action_level: dict[GroundAction, int],
                          achievers: dict[Predicate, list[GroundAction]]) -> int:
    """Backward pass over the relaxed graph selecting one achiever per open
    goal.  Selected actions are counted once; their add effects become
    available from the level after they apply, which lets later (lower)
    goals reuse them."""
    max_level = max(fact_level[g] for g in goal)
    goals_at: list[set[Predicate]] = [set() for _ in range(max_level + 1)]
    for g in goal:
        goals_at[fact_level[g]].add(g)
    selected: set[GroundAction] = set()
    available: dict[Predicate, int] = {}  # fact -> level it becomes true
    for t in range(max_level, 0, -1):
        for g in sorted(goals_at[t]):
            if available.get(g, max_level + 1) <= t:
                continue
            # Earliest achiever, preferring the one whose preconditions
            # appear earliest in the graph (FF's difficulty criterion);
            # preconditions already provided by selected actions count as
            # free.  Lexicographic tie-break keeps this deterministic.
            def difficulty(ga):
                cost = sum(0 if p in available else fact_level[p]
                           for p in ga.pre)
                return (cost, ga.name, ga.args)

            best = min((ga for ga in achievers.get(g, ())
                        if action_level[ga] == fact_level[g] - 1),
                       default=None, key=difficulty)
            if best is None:
                best = min((ga for ga in achievers[g]
                            if action_level[ga] < t), key=difficulty)
            selected.add(best)
            applied_at = action_level[best]
            for f in best.eff_add:
                if available.get(f, max_level + 1) > applied_at + 1:
                    available[f] = applied_at + 1
            for p in best.pre:
                lvl = fact_level[p]
                if lvl > 0 and available.get(p, max_level + 1) > lvl:
                    goals_at[lvl].add(p)
    return len(selected)


# --- search ------------------------------------------------------------------

@dataclass
class _Budget:
    nodes: int
    seconds: float
    cancel: Optional[CancellationToken]
    expanded: int = 0
    start: float = field(default_factory=time.monotonic)

    def tick(self) -> None:
        self.expanded += 1
        if self.expanded % _CANCEL_CHECK_INTERVAL == 0:
            if self.cancel is not None and self.cancel.cancelled:
                raise NoPlanFound("cancelled")
            if time.monotonic() - self.start > self.seconds:
                raise NoPlanFound("budget_exceeded",
                                  f"time budget {self.seconds}s")
        if self.expanded > self.nodes:
            raise NoPlanFound("budget_exceeded",
                              f"node budget {self.nodes}")

    def stats(self) -> dict:
        return {"nodes_expanded": self.expanded,
                "runtime_secs": time.monotonic() - self.start}


def plan(kb: KnowledgeBase, problem: PlanningProblem,
         strategy: str = "greedy_ff",
         node_budget: int = DEFAULT_NODE_BUDGET,
         time_budget: float = DEFAULT_TIME_BUDGET,
         cancel: Optional[CancellationToken] = None,
         progress=None) -> Plan:
    """Search for a plan; raises NoPlanFound with a reason on failure.

    Deterministic: ties are broken lexicographically by (action name,
    bound constants), so identical inputs give identical plans.
    """
    problem.validate()
    contradictions = check_goal_consistency(problem.goal)
    if contradictions:
        raise NoPlanFound("goal_inconsistent", "; ".join(contradictions))

    actions = ground(kb, problem.objects)
    init = frozenset(problem.init)
    goal = frozenset(problem.goal)
    budget = _Budget(nodes=node_budget, seconds=time_budget, cancel=cancel)

    if strategy == "bfs_oracle":
        steps = _bfs(init, goal, actions, budget)
    elif strategy == "astar_uniform":
        steps = _uniform_cost(init, goal, actions, budget)
    elif strategy == "greedy_ff":
        steps = _greedy_ff(init, goal, actions, budget, progress)
    else:
        raise ValueError(f"unknown strategy: {strategy}")
    stats = budget.stats()
    stats["strategy"] = strategy
    return Plan(steps=tuple(steps), stats=stats)


def _successors(state: State, actions: Sequence[GroundAction]):
    for ga in actions:  # actions are pre-sorted by (name, args)
        if ga.applicable(state):
            yield ga, ga.apply(state)


def _reconstruct(parents, state) -> list[GroundAction]:
    steps = []
    while parents[state] is not None:
        prev, ga = parents[state]
        steps.append(ga)
        state = prev
    steps.reverse()
    return steps


def _bfs(init, goal, actions, budget) -> list[GroundAction]:
    from collections import deque

    if goal <= init:
        return []
    frontier = deque([init])
    parents = {init: None}
    while frontier:
        state = frontier.popleft()
        budget.tick()
        for ga, nxt in _successors(state, actions):
            if nxt in parents:
                continue
            parents[nxt] = (state, ga)
            if goal <= nxt:
                return _reconstruct(parents, nxt)
            frontier.append(nxt)
    raise NoPlanFound("exhausted")


def _uniform_cost(init, goal, actions, budget) -> list[GroundAction]:
    counter = itertools.count()
    heap = [(0, next(counter), init)]
    parents = {init: None}
    closed = set()
    while heap:
        g, _, state = heappop(heap)
        if state in closed:
            continue
        closed.add(state)
        if goal <= state:
            return _reconstruct(parents, state)
        budget.tick()
        for ga, nxt in _successors(state, actions):
            if nxt in closed or nxt in parents:
                continue
            parents[nxt] = (state, ga)
            heappush(heap, (g + 1, next(counter), nxt))
    raise NoPlanFound("exhausted")


def _greedy_ff(init, goal, actions, budget, progress=None) -> list[GroundAction]:
    counter = itertools.count()
    h0 = relaxed_plan_length(init, goal, actions)
    if h0 == INFINITY:
        raise NoPlanFound("exhausted", "goal unreachable even ignoring "
                                       "delete effects")
    heap = [(h0, next(counter), init)]
    parents = {init: None}
    closed = set()
    best_h = h0
    while heap:
        h, _, state = heappop(heap)
        if state in closed:  # deferred duplicate detection
            continue
        closed.add(state)
        if goal <= state:
            return _reconstruct(parents, state)
        budget.tick()
        if progress is not None and h < best_h:
            best_h = h
            progress({"event": "progress", "best_h": h,
                      "nodes_expanded": budget.expanded})
        for ga, nxt in _successors(state, actions):
            if nxt in closed:
                continue
            hn = relaxed_plan_length(nxt, goal, actions)
            if hn == INFINITY:
                continue
            if nxt not in parents:
                parents[nxt] = (state, ga)
            heappush(heap, (hn, next(counter), nxt))
    raise NoPlanFound("exhausted")


# --- independent validation --------------------------------------------------

@dataclass(frozen=True)
class ValidationResult:
    valid: bool
    step: Optional[int] = None  # first failing step, or None
    missing: State = frozenset()  # unmet preconditions / goal facts
    final_state: State = frozenset()

    def __bool__(self):
        return self.valid


def validate_plan(kb: KnowledgeBase, problem: PlanningProblem,
                  steps: Iterable) -> ValidationResult:
    """Symbolic simulation from the initial state; shares no search code.

    steps may be GroundActions or (name, args) pairs parsed from a plan
    file; effects are substituted directly from the action schemas.
    """
    state = frozenset(problem.init)
    for index, step in enumerate(steps):
        if isinstance(step, GroundAction):
            name, args = step.name, step.args
        else:
            name, args = step
        if name not in kb.actions:
            return ValidationResult(False, index, frozenset(), state)
        model = kb.actions[name]
        if len(args) != len(model.params):
            return ValidationResult(False, index, frozenset(), state)
        binding = {v: c for (v, _), c in zip(model.params, args)}
        pre = {f.substitute(binding) for f in model.pre}
        missing = frozenset(pre - state)
        if missing:
            return ValidationResult(False, index, missing, state)
        adds = {f.substitute(binding) for f in model.eff_add}
        dels = {f.substitute(binding) for f in model.eff_del}
        state = (state - dels) | adds
    unmet = frozenset(problem.goal - state)
    if unmet:
        return ValidationResult(False, None, unmet, state)
    return ValidationResult(True, None, frozenset(), state)
