"""Self-checking scenario scripts for headless runs and the benchmark suite.

A .scn file is JSON: a scene (inline or a bundled scene name) and an
ordered command list.  assert-* commands make the script fail loudly, so a
scenario run doubles as an end-to-end test.
"""

from __future__ import annotations

import json
import time
from importlib import resources
from typing import Optional

from .errors import IroplanError, NoPlanFound, ScriptError
from .knowledge import Edit, Predicate, facts_from_json
from .session import Session
from .world import DemoScript


def bundled_path(kind: str, name: str):
    return resources.files("iroplan").joinpath("data", kind, name)


def load_bundled_scene(name: str) -> dict:
    with bundled_path("scenes", name).open() as fh:
        return json.load(fh)


def load_scenario(path_or_name) -> dict:
    """Load a scenario from a filesystem path or a bundled script name."""
    path = str(path_or_name)
    if "/" not in path and not path.endswith(".json"):
        bundled = bundled_path("scenarios", path)
        if bundled.is_file():
            with bundled.open() as fh:
                return json.load(fh)
    with open(path) as fh:
        return json.load(fh)


def _resolve_scene(spec) -> dict:
    if isinstance(spec, str):
        return load_bundled_scene(spec)
    return spec


class ScenarioFailure(IroplanError):
    def __init__(self, index: int, command: dict, message: str):
        super().__init__(f"command {index} ({command.get('cmd')}): {message}")
        self.index = index


def run_scenario(scenario: dict, strategy: Optional[str] = None,
                 node_budget: int = 1_000_000, time_budget: float = 10.0,
                 occlude_stacked: Optional[bool] = None,
                 condition_inference: bool = True,
                 session: Optional[Session] = None) -> dict:
    """Execute a scenario against an in-process session.

    Returns a JSON-serializable report: one entry per command plus a
    summary with plan lengths and wall time.  Raises ScenarioFailure on
    the first failed assertion or expectation.
    """
    start = time.monotonic()
    session = session or Session(condition_inference_on=condition_inference)
    report = {"name": scenario.get("name", "scenario"), "commands": [],
              "plan_lengths": {}, "ok": True}

    def apply_occlusion(scene: dict) -> dict:
        if occlude_stacked is None:
            return scene
        scene = dict(scene)
        cfg = dict(scene.get("config", {}))
        cfg["occlude_stacked"] = occlude_stacked
        scene["config"] = cfg
        return scene

    if "scene" in scenario:
        session.load_scene(apply_occlusion(_resolve_scene(scenario["scene"])))

    for index, command in enumerate(scenario.get("commands", [])):
        cmd = command.get("cmd")
        entry = {"index": index, "cmd": cmd}
        try:
            if cmd == "load_scene":
                session.load_scene(apply_occlusion(
                    _resolve_scene(command["scene"])))
            elif cmd == "demonstrate":
                script = DemoScript.from_json(command["script"])
                model, diags = session.demonstrate(
                    command["name"], script, arm=command.get("arm", "suction"))
                entry["action"] = model.name
                entry["diagnostics"] = [str(d) for d in diags]
            elif cmd == "edit_action":
                edits = [Edit.from_json(e) for e in command["edits"]]
                model, diags = session.edit(command["name"], edits)
                entry["diagnostics"] = [str(d) for d in diags]
            elif cmd == "new_problem":
                init = command.get("init")
                if init is not None and init != "perceive":
                    init = facts_from_json(init)
                else:
                    init = None
                goal = facts_from_json(command.get("goal", []))
                objects = command.get("objects")
                session.create_problem(command["name"], goal=goal, init=init,
                                       objects=objects)
            elif cmd == "set_goal":
                session.update_problem(command["problem"],
                                       goal=facts_from_json(command["goal"]))
            elif cmd == "solve":
                name = command["problem"]
                strat = strategy or command.get("strategy", "greedy_ff")
                expect = command.get("expect", "plan")
                try:
                    result = session.solve(name, strategy=strat,
                                           node_budget=node_budget,
                                           time_budget=time_budget)
                except NoPlanFound as err:
                    if expect != "no_plan":
                        raise ScenarioFailure(index, command,
                                              f"expected a plan, got: {err}")
                    entry["no_plan"] = err.reason
                    entry["hints"] = [h.to_json() for h in
                                      session.debug_report(name).hints]
                else:
                    if expect == "no_plan":
                        raise ScenarioFailure(
                            index, command,
                            f"expected no plan, got one of length {len(result)}")
                    entry["plan"] = result.to_json()
                    entry["length"] = len(result)
                    report["plan_lengths"][name] = len(result)
                    want = command.get("expect_length")
                    if want is not None and len(result) != want:
                        raise ScenarioFailure(
                            index, command,
                            f"expected plan length {want}, got {len(result)}")
            elif cmd == "execute":
                trace = session.execute(command["problem"])
                entry["steps_executed"] = len(trace)
            elif cmd == "assert_state":
                state = session.perceived_state()
                for fact in sorted(facts_from_json(command.get("facts", []))):
                    if fact not in state:
                        raise ScenarioFailure(index, command,
                                              f"fact {fact} does not hold")
                for fact in sorted(facts_from_json(command.get("absent", []))):
                    if fact in state:
                        raise ScenarioFailure(index, command,
                                              f"fact {fact} unexpectedly holds")
            else:
                raise ScenarioFailure(index, command, "unknown command")
        except ScenarioFailure:
            report["ok"] = False
            report["commands"].append(entry)
            report["wall_time_secs"] = time.monotonic() - start
            raise
        report["commands"].append(entry)

    report["taught_actions"] = sorted(session.kb.actions)
    report["wall_time_secs"] = time.monotonic() - start
    return report
