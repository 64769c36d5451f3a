"""Command-line entry point: scenario runner, benchmark, Hanoi demo, PDDL
import/export, a line-oriented repl, and the API server.

Set IROPLAN_EXTERNAL_PLANNER to a command template (with {domain},
{problem} and {plan} placeholders) to delegate solving to an external
PDDL planner; its output is parsed and validated before being trusted.
"""

from __future__ import annotations

import argparse
import json
import os
import shlex
import subprocess
import sys
import tempfile
from pathlib import Path

from . import hanoi as hanoi_mod
from .errors import IroplanError, NoPlanFound
from .knowledge import KnowledgeBase
from .pddl import (
    PlanningProblem,
    emit_domain,
    emit_plan,
    emit_problem,
    parse_domain,
    parse_plan,
    parse_problem,
)
from .planner import Plan, ground, plan as search_plan, validate_plan
from .scenarios import ScenarioFailure, load_bundled_scene, load_scenario, run_scenario
from .session import Session

EXTERNAL_PLANNER_ENV = "IROPLAN_EXTERNAL_PLANNER"


def external_plan(kb: KnowledgeBase, problem: PlanningProblem,
                  command: str) -> Plan:
    """Delegate one problem to an external planner command.

    Writes domain/problem files to a temp dir, substitutes {domain},
    {problem} and {plan} into the command, runs it, then parses and
    validates the plan file it produced.
    """
    with tempfile.TemporaryDirectory(prefix="iroplan-") as tmp:
        domain_path = Path(tmp, "domain.pddl")
        problem_path = Path(tmp, "problem.pddl")
        plan_path = Path(tmp, "plan.txt")
        domain_path.write_text(emit_domain(kb))
        problem_path.write_text(emit_problem(problem))
        argv = [part.format(domain=domain_path, problem=problem_path,
                            plan=plan_path)
                for part in shlex.split(command)]
        proc = subprocess.run(argv, capture_output=True, text=True)
        if proc.returncode != 0:
            raise NoPlanFound("exhausted",
                              f"external planner failed ({proc.returncode}): "
                              f"{proc.stderr.strip()[:500]}")
        text = plan_path.read_text() if plan_path.exists() else proc.stdout
        steps = parse_plan(text)
        check = validate_plan(kb, problem, steps)
        if not check:
            raise NoPlanFound("exhausted",
                              f"external plan fails validation at step "
                              f"{check.step}")
        by_key = {(ga.name, ga.args): ga for ga in ground(kb, problem.objects)}
        try:
            ground_steps = tuple(by_key[(name, args)] for name, args in steps)
        except KeyError as exc:
            raise NoPlanFound("exhausted",
                              f"external plan uses unknown action {exc}")
        return Plan(steps=ground_steps,
                    stats={"strategy": "external", "command": command})


def solve_problem(kb: KnowledgeBase, problem: PlanningProblem, strategy: str,
                  node_budget: int, time_budget: float) -> Plan:
    command = os.environ.get(EXTERNAL_PLANNER_ENV)
    if command:
        return external_plan(kb, problem, command)
    return search_plan(kb, problem, strategy=strategy,
                       node_budget=node_budget, time_budget=time_budget)


def _write_report(report: dict, path: str | None) -> None:
    if path:
        Path(path).write_text(json.dumps(report, indent=2) + "\n")


def cmd_run(args) -> int:
    scenario = load_scenario(args.script)
    if args.scene:
        scenario = dict(scenario)
        scenario["scene"] = args.scene
    try:
        report = run_scenario(
            scenario, strategy=args.strategy,
            node_budget=args.budget_nodes, time_budget=args.budget_secs,
            occlude_stacked=True if args.occlude_stacked else None,
            condition_inference=not args.no_condition_inference)
    except ScenarioFailure as err:
        print(f"FAIL: {err}", file=sys.stderr)
        _write_report({"ok": False, "error": str(err)}, args.json_report)
        return 1
    for name, length in sorted(report["plan_lengths"].items()):
        print(f"{name}: plan length {length}")
    print(f"ok ({report['wall_time_secs']:.2f}s, "
          f"actions: {', '.join(report['taught_actions']) or 'none'})")
    _write_report(report, args.json_report)
    return 0


def cmd_bench(args) -> int:
    scenario = load_scenario("bench.scn")
    try:
        report = run_scenario(scenario, strategy=args.strategy,
                              node_budget=args.budget_nodes,
                              time_budget=args.budget_secs)
    except ScenarioFailure as err:
        print(f"FAIL: {err}", file=sys.stderr)
        _write_report({"ok": False, "error": str(err)}, args.json_report)
        return 1
    print(f"{'task':<10}{'plan length':>12}")
    for name, length in sorted(report["plan_lengths"].items()):
        print(f"{name:<10}{length:>12}")
    print(f"taught actions: {', '.join(report['taught_actions'])}")
    print(f"total wall time: {report['wall_time_secs']:.2f}s")
    _write_report(report, args.json_report)
    return 0


def cmd_hanoi(args) -> int:
    kb = hanoi_mod.make_knowledge_base()
    problem = hanoi_mod.make_problem(args.disks)
    try:
        result = solve_problem(kb, problem, args.strategy,
                               args.budget_nodes, args.budget_secs)
    except NoPlanFound as err:
        print(f"no plan: {err}", file=sys.stderr)
        return 1
    print(emit_plan((ga.name, ga.args) for ga in result.steps), end="")
    stats = result.stats
    print(f"; {len(result)} steps, strategy {stats.get('strategy')}, "
          f"{stats.get('nodes_expanded', '?')} nodes, "
          f"{stats.get('runtime_secs', 0):.2f}s")
    _write_report({"disks": args.disks, "plan": result.to_json()},
                  args.json_report)
    return 0


def cmd_export(args) -> int:
    scenario = load_scenario(args.script)
    session = Session(condition_inference_on=not args.no_condition_inference)
    try:
        run_scenario(scenario, strategy=args.strategy,
                     node_budget=args.budget_nodes,
                     time_budget=args.budget_secs, session=session)
    except ScenarioFailure as err:
        print(f"FAIL: {err}", file=sys.stderr)
        return 1
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    (out / "domain.pddl").write_text(session.export_domain())
    written = ["domain.pddl"]
    for name in sorted(session.problems):
        fname = f"{name}.pddl"
        (out / fname).write_text(session.export_problem(name))
        written.append(fname)
    print(f"wrote {', '.join(written)} to {out}")
    return 0


def cmd_import(args) -> int:
    kb = parse_domain(Path(args.domain).read_text())
    print(f"domain '{kb.name}': actions "
          f"{', '.join(sorted(kb.actions)) or 'none'}")
    if not args.problem:
        return 0
    problem = parse_problem(Path(args.problem).read_text())
    print(f"problem '{problem.name}': {len(problem.objects)} objects, "
          f"{len(problem.goal)} goal facts")
    if not args.solve:
        return 0
    try:
        result = solve_problem(kb, problem, args.strategy,
                               args.budget_nodes, args.budget_secs)
    except NoPlanFound as err:
        print(f"no plan: {err}", file=sys.stderr)
        return 1
    print(emit_plan((ga.name, ga.args) for ga in result.steps), end="")
    _write_report({"plan": result.to_json()}, args.json_report)
    return 0


def cmd_serve(args) -> int:
    import uvicorn

    from .service import create_app
    uvicorn.run(create_app(), host=args.host, port=args.port)
    return 0


def cmd_repl(args) -> int:
    """Line-oriented repl: each line is one scenario command as JSON."""
    session = Session(condition_inference_on=not args.no_condition_inference)
    if args.scene:
        session.load_scene(load_bundled_scene(args.scene))
        print(f"loaded scene {args.scene}")
    print('commands: {"cmd": "..."} as in .scn files; "state", "actions", '
          '"quit"')
    while True:
        try:
            line = input("iroplan> ").strip()
        except EOFError:
            break
        if not line:
            continue
        if line in ("quit", "exit"):
            break
        if line == "state":
            for fact in sorted(session.perceived_state()):
                print(f"  {fact}")
            continue
        if line == "actions":
            for name in sorted(session.kb.actions):
                print(f"  {name}")
            continue
        try:
            command = json.loads(line)
            report = run_scenario({"commands": [command]},
                                  strategy=args.strategy,
                                  node_budget=args.budget_nodes,
                                  time_budget=args.budget_secs,
                                  session=session)
            print(json.dumps(report["commands"][0], indent=2, default=str))
        except (json.JSONDecodeError, IroplanError) as err:
            print(f"error: {err}")
    return 0


def _add_common(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--strategy", default=None,
                        choices=["greedy_ff", "astar_uniform"],
                        help="search strategy override")
    parser.add_argument("--budget-nodes", type=int, default=1_000_000)
    parser.add_argument("--budget-secs", type=float, default=10.0)
    parser.add_argument("--json-report", metavar="PATH", default=None,
                        help="write a machine-readable run report")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="iroplan",
        description="Teach pick-and-place actions from demonstrations, "
                    "plan with them, and refine them when planning fails.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run", help="run a scenario script (.scn)")
    p.add_argument("script", help="bundled scenario name or path")
    p.add_argument("--scene", default=None,
                   help="override the scenario's scene (bundled name)")
    p.add_argument("--occlude-stacked", action="store_true",
                   help="hide stacked objects from the detector")
    p.add_argument("--no-condition-inference", action="store_true",
                   help="demonstrations record keyframes only")
    _add_common(p)
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("bench", help="run the bundled benchmark tasks")
    _add_common(p)
    p.set_defaults(func=cmd_bench)

    p = sub.add_parser("hanoi", help="solve Tower of Hanoi on the tabletop")
    p.add_argument("--disks", type=int, default=3)
    _add_common(p)
    p.set_defaults(func=cmd_hanoi)
    p.set_defaults(strategy="astar_uniform")

    p = sub.add_parser("export",
                       help="run a scenario and export its PDDL files")
    p.add_argument("script")
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--no-condition-inference", action="store_true")
    _add_common(p)
    p.set_defaults(func=cmd_export)

    p = sub.add_parser("import", help="parse PDDL files, optionally solve")
    p.add_argument("domain")
    p.add_argument("problem", nargs="?", default=None)
    p.add_argument("--solve", action="store_true")
    _add_common(p)
    p.set_defaults(func=cmd_import)

    p = sub.add_parser("repl", help="interactive session")
    p.add_argument("--scene", default=None, help="bundled scene to load")
    p.add_argument("--no-condition-inference", action="store_true")
    _add_common(p)
    p.set_defaults(func=cmd_repl)

    p = sub.add_parser("serve", help="start the HTTP API")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8420)
    p.set_defaults(func=cmd_serve)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if getattr(args, "strategy", None) is None:
        args.strategy = None if args.command == "run" else "greedy_ff"
    try:
        return args.func(args)
    except IroplanError as err:
        print(f"error: {err}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
