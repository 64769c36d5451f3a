"""Session-scoped JSON API for the teach -> reuse -> refine loop.

Every mutation validates, bumps the session version, and is appended to a
replayable event log.  Planner and execution progress go out on a
server-sent event stream per session.
"""

from __future__ import annotations

import asyncio
import json
import queue
import threading
from typing import Optional

from fastapi import Body, FastAPI, HTTPException, Query, Request
from fastapi.responses import JSONResponse, PlainTextResponse, StreamingResponse
from pydantic import BaseModel, Field

from .errors import (
    IroplanError,
    NameClash,
    NoPlanFound,
    UnknownAction,
)
from .knowledge import Edit, facts_from_json, facts_to_json
from .scenarios import load_bundled_scene
from .session import SCHEMA_VERSION, Session
from .world import DemoScript

# --- request bodies ----------------------------------------------------------


class CreateSessionBody(BaseModel):
    schema_version: int = SCHEMA_VERSION
    scene: Optional[object] = None  # bundled scene name or inline dict
    condition_inference_on: bool = True
    project: Optional[dict] = None


class WorldBody(BaseModel):
    schema_version: int = SCHEMA_VERSION
    scene: dict
    version: Optional[int] = None


class DemonstrationBody(BaseModel):
    schema_version: int = SCHEMA_VERSION
    name: str
    arm: str = "suction"
    script: list = Field(default_factory=list)
    version: Optional[int] = None


class ActionEditBody(BaseModel):
    schema_version: int = SCHEMA_VERSION
    edits: list = Field(default_factory=list)
    version: Optional[int] = None


class CloneActionBody(BaseModel):
    schema_version: int = SCHEMA_VERSION
    name: str
    clone_from: Optional[str] = None
    version: Optional[int] = None


class ProblemBody(BaseModel):
    schema_version: int = SCHEMA_VERSION
    name: Optional[str] = None
    goal: Optional[list] = None
    init: Optional[list] = None
    objects: Optional[list] = None
    version: Optional[int] = None


class SolveBody(BaseModel):
    schema_version: int = SCHEMA_VERSION
    strategy: str = "greedy_ff"
    node_budget: int = 1_000_000
    time_budget: float = 10.0


class _SessionStore:
    def __init__(self):
        self.sessions: dict[str, Session] = {}
        self.subscribers: dict[str, list[queue.Queue]] = {}
        self.logs: dict[str, list] = {}
        self.lock = threading.Lock()

    def get(self, sid: str) -> Session:
        session = self.sessions.get(sid)
        if session is None:
            raise HTTPException(404, f"unknown session '{sid}'")
        return session

    def publish(self, sid: str, event: dict) -> None:
        for q in self.subscribers.get(sid, []):
            q.put(event)

    def record(self, sid: str, method: str, path: str, body: dict) -> None:
        self.logs.setdefault(sid, []).append(
            {"method": method, "path": path, "body": body})


def _resolve_scene(spec) -> dict:
    if isinstance(spec, str):
        return load_bundled_scene(spec)
    return dict(spec)


def create_app() -> FastAPI:
    app = FastAPI(title="iroplan service")
    store = _SessionStore()
    app.state.store = store

    @app.exception_handler(IroplanError)
    async def _iroplan_error(request: Request, exc: IroplanError):
        status = 404 if isinstance(exc, UnknownAction) else 400
        if isinstance(exc, NameClash):
            status = 409
        return JSONResponse(status_code=status, content={
            "schema_version": SCHEMA_VERSION,
            "error": type(exc).__name__, "message": str(exc)})

    def check_version(session: Session, supplied: Optional[int]):
        if supplied is not None and supplied != session.version:
            raise HTTPException(409, detail={
                "error": "version_conflict",
                "expected": session.version, "got": supplied})

    def session_resource(session: Session) -> dict:
        return {
            "schema_version": SCHEMA_VERSION,
            "id": session.id,
            "version": session.version,
            "condition_inference_on": session.condition_inference_on,
            "has_world": session.world is not None,
            "actions": sorted(session.kb.actions),
            "problems": sorted(session.problems),
        }

    def action_resource(session: Session, name: str) -> dict:
        from .knowledge import validate_action_model
        model = session.kb.actions[name]
        return {
            "schema_version": SCHEMA_VERSION,
            "version": session.version,
            "action": model.to_json(),
            "diagnostics": [str(d) for d in
                            validate_action_model(model, session.kb.hierarchy)],
        }

    def problem_resource(session: Session, name: str) -> dict:
        problem = session.problems[name]
        out = {"schema_version": SCHEMA_VERSION, "version": session.version,
               "problem": problem.to_json()}
        if name in session.plans:
            out["plan"] = session.plans[name].to_json()
        if name in session.traces:
            out["trace"] = session.traces[name].to_json()
        return out

    # -- sessions ------------------------------------------------------------

    @app.post("/sessions", status_code=201)
    def create_session(body: CreateSessionBody):
        if body.project is not None:
            session = Session.from_project_json(body.project)
        else:
            session = Session(
                condition_inference_on=body.condition_inference_on)
            if body.scene is not None:
                session.load_scene(_resolve_scene(body.scene))
        store.sessions[session.id] = session
        store.record(session.id, "POST", "/sessions",
                     body.model_dump(exclude_none=True))
        return session_resource(session)

    @app.get("/sessions/{sid}")
    def get_session(sid: str):
        return session_resource(store.get(sid))

    @app.get("/sessions/{sid}/log")
    def get_log(sid: str):
        store.get(sid)
        return {"schema_version": SCHEMA_VERSION,
                "events": store.logs.get(sid, [])}

    # -- world ---------------------------------------------------------------

    @app.get("/sessions/{sid}/world")
    def get_world(sid: str):
        session = store.get(sid)
        return {"schema_version": SCHEMA_VERSION, "version": session.version,
                "world": session.world.to_json() if session.world else None}

    @app.put("/sessions/{sid}/world")
    def put_world(sid: str, body: WorldBody):
        session = store.get(sid)
        with session.lock:
            check_version(session, body.version)
            session.load_scene(_resolve_scene(body.scene))
        store.record(sid, "PUT", f"/sessions/{sid}/world",
                     body.model_dump(exclude_none=True))
        store.publish(sid, {"event": "world_changed",
                            "version": session.version})
        return get_world(sid)

    @app.post("/sessions/{sid}/detect")
    def detect(sid: str):
        session = store.get(sid)
        with session.lock:
            landmarks = session.detect()
        store.record(sid, "POST", f"/sessions/{sid}/detect", {})
        return {
            "schema_version": SCHEMA_VERSION,
            "version": session.version,
            "landmarks": [{"id": lm.id, "kind": lm.kind,
                           "pose": list(lm.pose),
                           "bbox": list(lm.bbox) if lm.bbox else None,
                           "support": lm.support,
                           "type": session.detected_types.get(lm.id)}
                          for lm in landmarks],
            "state": facts_to_json(session.perceived_state()),
        }

    # -- teaching ------------------------------------------------------------

    @app.post("/sessions/{sid}/demonstrations", status_code=201)
    def demonstrate(sid: str, body: DemonstrationBody):
        session = store.get(sid)
        with session.lock:
            check_version(session, body.version)
            model, diags = session.demonstrate(
                body.name, DemoScript.from_json(body.script), arm=body.arm)
        store.record(sid, "POST", f"/sessions/{sid}/demonstrations",
                     body.model_dump(exclude_none=True))
        store.publish(sid, {"event": "action_taught", "action": model.name})
        return {"schema_version": SCHEMA_VERSION, "version": session.version,
                "action": model.to_json(),
                "diagnostics": [str(d) for d in diags]}

    @app.get("/sessions/{sid}/actions")
    def list_actions(sid: str):
        session = store.get(sid)
        return {"schema_version": SCHEMA_VERSION, "version": session.version,
                "actions": [m.to_json() for _, m in
                            sorted(session.kb.actions.items())]}

    @app.post("/sessions/{sid}/actions", status_code=201)
    def clone_action_endpoint(sid: str, body: CloneActionBody):
        from .knowledge import clone_action
        session = store.get(sid)
        with session.lock:
            check_version(session, body.version)
            if body.clone_from is None:
                raise HTTPException(400, "clone_from is required")
            session.kb = clone_action(session.kb, body.clone_from, body.name)
            session.version += 1
        store.record(sid, "POST", f"/sessions/{sid}/actions",
                     body.model_dump(exclude_none=True))
        return action_resource(session, body.name)

    @app.get("/sessions/{sid}/actions/{name}")
    def get_action(sid: str, name: str):
        session = store.get(sid)
        if name not in session.kb.actions:
            raise HTTPException(404, f"unknown action '{name}'")
        return action_resource(session, name)

    @app.put("/sessions/{sid}/actions/{name}")
    def put_action(sid: str, name: str, body: ActionEditBody):
        session = store.get(sid)
        with session.lock:
            check_version(session, body.version)
            edits = [Edit.from_json(e) for e in body.edits]
            model, diags = session.edit(name, edits)
        store.record(sid, "PUT", f"/sessions/{sid}/actions/{name}",
                     body.model_dump(exclude_none=True))
        store.publish(sid, {"event": "action_edited", "action": model.name})
        return {"schema_version": SCHEMA_VERSION, "version": session.version,
                "action": model.to_json(),
                "diagnostics": [str(d) for d in diags]}

    @app.delete("/sessions/{sid}/actions/{name}")
    def delete_action(sid: str, name: str):
        session = store.get(sid)
        with session.lock:
            session.kb = session.kb.without_action(name)
            session.version += 1
        store.record(sid, "DELETE", f"/sessions/{sid}/actions/{name}", {})
        return {"schema_version": SCHEMA_VERSION, "version": session.version}

    # -- problems ------------------------------------------------------------

    @app.get("/sessions/{sid}/problems")
    def list_problems(sid: str):
        session = store.get(sid)
        return {"schema_version": SCHEMA_VERSION, "version": session.version,
                "problems": [p.to_json() for _, p in
                             sorted(session.problems.items())]}

    @app.post("/sessions/{sid}/problems", status_code=201)
    def create_problem(sid: str, body: ProblemBody):
        session = store.get(sid)
        with session.lock:
            check_version(session, body.version)
            if not body.name:
                raise HTTPException(400, "problem name is required")
            session.create_problem(
                body.name,
                goal=facts_from_json(body.goal or []),
                init=facts_from_json(body.init) if body.init is not None else None,
                objects=body.objects)
        store.record(sid, "POST", f"/sessions/{sid}/problems",
                     body.model_dump(exclude_none=True))
        return problem_resource(session, body.name)

    @app.get("/sessions/{sid}/problems/{name}")
    def get_problem(sid: str, name: str):
        session = store.get(sid)
        if name not in session.problems:
            raise HTTPException(404, f"unknown problem '{name}'")
        return problem_resource(session, name)

    @app.put("/sessions/{sid}/problems/{name}")
    def put_problem(sid: str, name: str, body: ProblemBody):
        session = store.get(sid)
        with session.lock:
            check_version(session, body.version)
            session.update_problem(
                name,
                goal=facts_from_json(body.goal) if body.goal is not None else None,
                init=facts_from_json(body.init) if body.init is not None else None)
        store.record(sid, "PUT", f"/sessions/{sid}/problems/{name}",
                     body.model_dump(exclude_none=True))
        return problem_resource(session, name)

    @app.delete("/sessions/{sid}/problems/{name}")
    def delete_problem(sid: str, name: str):
        session = store.get(sid)
        with session.lock:
            session.problems.pop(name, None)
            session.plans.pop(name, None)
            session.traces.pop(name, None)
            session.version += 1
        store.record(sid, "DELETE", f"/sessions/{sid}/problems/{name}", {})
        return {"schema_version": SCHEMA_VERSION, "version": session.version}

    @app.post("/sessions/{sid}/problems/{name}/solve")
    def solve(sid: str, name: str, body: SolveBody = Body(
            default=SolveBody())):
        session = store.get(sid)
        if name not in session.problems:
            raise HTTPException(404, f"unknown problem '{name}'")
        store.publish(sid, {"event": "solve_started", "problem": name,
                            "strategy": body.strategy})
        with session.lock:
            try:
                result = session.solve(
                    name, strategy=body.strategy,
                    node_budget=body.node_budget,
                    time_budget=body.time_budget,
                    progress=lambda ev: store.publish(sid, ev))
            except NoPlanFound as err:
                report = session.debug_report(name)
                store.publish(sid, {"event": "solve_failed", "problem": name,
                                    "reason": err.reason})
                store.record(sid, "POST",
                             f"/sessions/{sid}/problems/{name}/solve",
                             body.model_dump())
                return JSONResponse(status_code=422, content={
                    "schema_version": SCHEMA_VERSION,
                    "version": session.version,
                    "error": "NoPlanFound", "reason": err.reason,
                    "detail": err.detail,
                    "debug_report": report.to_json()})
        store.record(sid, "POST", f"/sessions/{sid}/problems/{name}/solve",
                     body.model_dump())
        store.publish(sid, {"event": "solve_finished", "problem": name,
                            "length": len(result)})
        return {"schema_version": SCHEMA_VERSION, "version": session.version,
                "plan": result.to_json()}

    @app.post("/sessions/{sid}/problems/{name}/execute")
    def execute(sid: str, name: str):
        session = store.get(sid)
        if name not in session.problems:
            raise HTTPException(404, f"unknown problem '{name}'")
        with session.lock:
            trace = session.execute(
                name,
                on_step=lambda i, step: store.publish(sid, {
                    "event": "execution_step", "problem": name, "step": i,
                    "detail": step.to_json()}))
        store.record(sid, "POST",
                     f"/sessions/{sid}/problems/{name}/execute", {})
        store.publish(sid, {"event": "execution_finished", "problem": name,
                            "steps": len(trace)})
        return {"schema_version": SCHEMA_VERSION, "version": session.version,
                "trace": trace.to_json(),
                "world": session.world.to_json()}

    @app.post("/sessions/{sid}/cancel")
    def cancel(sid: str):
        session = store.get(sid)
        session.cancel()
        return {"schema_version": SCHEMA_VERSION, "cancelled": True}

    # -- reports / export ----------------------------------------------------

    @app.get("/sessions/{sid}/debug-report")
    def debug_report(sid: str, problem: str = Query(...)):
        session = store.get(sid)
        if problem not in session.problems:
            raise HTTPException(404, f"unknown problem '{problem}'")
        report = session.debug_report(problem)
        return {"schema_version": SCHEMA_VERSION, "version": session.version,
                "debug_report": report.to_json()}

    @app.get("/sessions/{sid}/export/pddl")
    def export_pddl(sid: str):
        session = store.get(sid)
        return {"schema_version": SCHEMA_VERSION, "version": session.version,
                "domain": session.export_domain(),
                "problems": {name: session.export_problem(name)
                             for name in sorted(session.problems)}}

    @app.get("/sessions/{sid}/export/domain.pddl",
             response_class=PlainTextResponse)
    def export_domain_text(sid: str):
        return store.get(sid).export_domain()

    @app.get("/sessions/{sid}/project")
    def get_project(sid: str):
        session = store.get(sid)
        return {"schema_version": SCHEMA_VERSION, "version": session.version,
                "project": session.to_project_json()}

    # -- events --------------------------------------------------------------

    @app.get("/events/{sid}")
    async def events(sid: str, limit: Optional[int] = Query(default=None),
                     idle_timeout: Optional[float] = Query(default=None)):
        """Server-sent events for one session.

        limit closes the stream after that many events; idle_timeout closes
        it after that many quiet seconds.  Both are optional and mainly for
        polling clients and tests.
        """
        store.get(sid)
        q: queue.Queue = queue.Queue()
        store.subscribers.setdefault(sid, []).append(q)

        async def stream():
            sent = 0
            idle = 0.0
            try:
                yield "event: connected\ndata: {}\n\n"
                while limit is None or sent < limit:
                    try:
                        event = q.get_nowait()
                    except queue.Empty:
                        if idle_timeout is not None and idle >= idle_timeout:
                            break
                        await asyncio.sleep(0.02)
                        idle += 0.02
                        continue
                    idle = 0.0
                    sent += 1
                    yield f"data: {json.dumps(event)}\n\n"
            finally:
                store.subscribers[sid].remove(q)

        return StreamingResponse(stream(), media_type="text/event-stream")

    return app


app = create_app()
