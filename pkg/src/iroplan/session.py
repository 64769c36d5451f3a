"""Session state for the teach -> plan -> refine loop.

One Session owns a world snapshot, a knowledge base and a set of planning
problems.  The REST service and the CLI/scenario runner both drive this
class, so behaviour is identical across transports.
"""

from __future__ import annotations

import threading
import uuid
from dataclasses import dataclass, field, replace
from typing import Optional, Sequence

from . import debug as debug_mod
from .errors import IroplanError, NoPlanFound, UnknownAction
from .executor import ExecutionTrace, MentalModel, execute_plan, make_mental_model
from .knowledge import (
    ActionModel,
    Edit,
    KnowledgeBase,
    Predicate,
    State,
    default_bindings,
    edit_action,
    facts_from_json,
    infer_conditions,
    lift_action,
    validate_action_model,
)
from .pddl import PlanningProblem, emit_domain, emit_problem
from .planner import CancellationToken, GroundAction, Plan, ground, plan, validate_plan
from .world import (
    DemoScript,
    World,
    detect_landmarks,
    detected_object_types,
    load_scene,
    perceive_state,
    record_demonstration,
)

SCHEMA_VERSION = 1


@dataclass
class Session:
    id: str = field(default_factory=lambda: uuid.uuid4().hex[:12])
    world: Optional[World] = None
    kb: KnowledgeBase = field(default_factory=KnowledgeBase)
    problems: dict = field(default_factory=dict)  # name -> PlanningProblem
    plans: dict = field(default_factory=dict)  # problem name -> Plan
    traces: dict = field(default_factory=dict)  # problem name -> ExecutionTrace
    condition_inference_on: bool = True
    version: int = 0
    detected: Optional[tuple] = None  # landmark snapshot from detect()
    detected_types: dict = field(default_factory=dict)
    mental_model: Optional[MentalModel] = None
    last_outcome: dict = field(default_factory=dict)  # problem -> Plan | error
    lock: threading.Lock = field(default_factory=threading.Lock, repr=False)
    cancel_token: Optional[CancellationToken] = field(default=None, repr=False)

    # -- world ---------------------------------------------------------------

    def load_scene(self, scene_spec: dict) -> World:
        self.world = load_scene(scene_spec)
        self.detected = None
        self.mental_model = None
        self.version += 1
        return self.world

    def detect(self) -> tuple:
        """One-off landmark detection; seeds the executor's mental model."""
        self._require_world()
        self.detected = detect_landmarks(self.world)
        self.detected_types = dict(detected_object_types(self.world,
                                                         self.detected))
        self.mental_model = make_mental_model(self.detected)
        self.version += 1
        return self.detected

    def perceived_state(self) -> State:
        self._require_world()
        landmarks = self.detected or detect_landmarks(self.world)
        return perceive_state(self.world, landmarks)

    # -- teaching ------------------------------------------------------------

    def demonstrate(self, name: str, script: DemoScript,
                    arm: str = "suction") -> tuple[ActionModel, list]:
        """Record a demonstration and draft an action model from it.

        With condition inference off the draft keeps only the keyframes;
        the user enters parameters and conditions by hand.
        """
        self._require_world()
        if name in self.kb.actions:
            from .errors import NameClash
            raise NameClash(name)
        result = record_demonstration(self.world, script)
        self.world = result.world
        if self.condition_inference_on:
            inferred = infer_conditions(result.before, result.after)
            changed = inferred[0] | inferred[1] | inferred[2]
            bindings = default_bindings(changed, result.types)
            model = lift_action(inferred, result.keyframes, bindings,
                                self.kb.hierarchy, name=name, arm=arm)
        else:
            model = ActionModel(name=name, keyframes=result.keyframes, arm=arm)
        self.kb = self.kb.with_action(model)
        self.version += 1
        diagnostics = validate_action_model(model, self.kb.hierarchy)
        return model, diagnostics

    def edit(self, name: str, edits: Sequence[Edit]) -> tuple[ActionModel, list]:
        if name not in self.kb.actions:
            raise UnknownAction(name)
        model = self.kb.actions[name]
        for e in edits:
            model = edit_action(model, e, self.kb.hierarchy)
        if model.name != name:
            self.kb = self.kb.without_action(name)
        self.kb = self.kb.with_action(model)
        self.version += 1
        return model, validate_action_model(model, self.kb.hierarchy)

    # -- problems ------------------------------------------------------------

    def create_problem(self, name: str, goal=(), init=None,
                       objects=None) -> PlanningProblem:
        """New planning problem; by default the initial state and object
        list are perceived from the current world."""
        self._require_world()
        if self.detected is None:
            self.detect()
        if objects is None:
            objects = tuple(detected_object_types(self.world, self.detected))
        else:
            objects = tuple(tuple(o) for o in objects)
        if init is None:
            init = perceive_state(self.world, self.detected)
        else:
            init = frozenset(init)
        problem = PlanningProblem(name=name, domain=self.kb.name,
                                  objects=objects, init=init,
                                  goal=frozenset(goal))
        self.problems[name] = problem
        self.version += 1
        return problem

    def update_problem(self, name: str, goal=None, init=None) -> PlanningProblem:
        problem = self._get_problem(name)
        if goal is not None:
            problem = replace(problem, goal=frozenset(goal))
        if init is not None:
            problem = replace(problem, init=frozenset(init))
        self.problems[name] = problem
        self.version += 1
        return problem

    def solve(self, name: str, strategy: str = "greedy_ff",
              node_budget: int = 1_000_000, time_budget: float = 10.0,
              progress=None) -> Plan:
        """Run the planner; on failure the NoPlanFound error is recorded so
        a debug report can explain it."""
        problem = self._get_problem(name)
        self.cancel_token = CancellationToken()
        try:
            result = plan(self.kb, problem, strategy=strategy,
                          node_budget=node_budget, time_budget=time_budget,
                          cancel=self.cancel_token, progress=progress)
        except NoPlanFound as err:
            self.last_outcome[name] = err
            raise
        self.plans[name] = result
        self.last_outcome[name] = result
        self.version += 1
        return result

    def cancel(self) -> None:
        if self.cancel_token is not None:
            self.cancel_token.cancel()

    def debug_report(self, name: str) -> debug_mod.DebugReport:
        problem = self._get_problem(name)
        outcome = self.last_outcome.get(name)
        return debug_mod.generate_debug_report(self.kb, problem, outcome)

    def execute(self, name: str, on_step=None) -> ExecutionTrace:
        """Execute the stored plan for a problem against the world, via the
        mental model from the last detection."""
        self._require_world()
        if name not in self.plans:
            raise IroplanError(f"no plan stored for problem '{name}'")
        if self.mental_model is None:
            self.detect()
        steps = self.plans[name].steps
        check = validate_plan(self.kb, self._get_problem(name), steps)
        if not check:
            raise IroplanError(f"stored plan fails validation at step "
                               f"{check.step}")
        trace, self.world, self.mental_model = execute_plan(
            self.world, steps, self.kb, self.mental_model, on_step=on_step)
        self.traces[name] = trace
        self.version += 1
        return trace

    # -- export / persistence ------------------------------------------------

    def export_domain(self) -> str:
        return emit_domain(self.kb)

    def export_problem(self, name: str) -> str:
        return emit_problem(self._get_problem(name))

    def to_project_json(self) -> dict:
        return {
            "schema_version": SCHEMA_VERSION,
            "condition_inference_on": self.condition_inference_on,
            "world": self.world.to_json() if self.world else None,
            "kb": self.kb.to_json(),
            "problems": [p.to_json() for _, p in sorted(self.problems.items())],
        }

    @classmethod
    def from_project_json(cls, data: dict,
                          session_id: Optional[str] = None) -> "Session":
        session = cls(condition_inference_on=data.get(
            "condition_inference_on", True))
        if session_id:
            session.id = session_id
        if data.get("world"):
            session.load_scene(data["world"])
        session.kb = KnowledgeBase.from_json(data["kb"])
        for pdata in data.get("problems", []):
            problem = PlanningProblem.from_json(pdata)
            session.problems[problem.name] = problem
        session.version = 0
        return session

    # -- helpers -------------------------------------------------------------

    def _require_world(self) -> None:
        if self.world is None:
            raise IroplanError("no scene loaded in this session")

    def _get_problem(self, name: str) -> PlanningProblem:
        if name not in self.problems:
            raise IroplanError(f"unknown problem '{name}'")
        return self.problems[name]
