"""Plan execution against the simulated world via a mental model.

Landmarks are detected once; afterwards the robot trusts its own belief of
where everything is, updating it only through action effects.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Callable, Optional, Sequence

from .errors import ExecutionFailed, IroplanError, UnknownLandmark
from .knowledge import ActionModel, KnowledgeBase
from .planner import GroundAction
from .world import Landmark, World, apply_action_in_world

Pose6 = tuple[float, float, float, float, float, float]


@dataclass(frozen=True)
class Belief:
    pose: tuple[float, float, float]
    support: Optional[str] = None
    bbox: Optional[tuple[float, float, float]] = None
    placeholder: bool = False  # effect touched a landmark never detected

    @property
    def top_z(self) -> float:
        if self.bbox is None:
            return self.pose[2]
        return self.pose[2] + self.bbox[2] / 2.0


@dataclass(frozen=True)
class MentalModel:
    beliefs: dict  # landmark id -> Belief

    def has(self, lid: str) -> bool:
        return lid in self.beliefs

    def pose_of(self, lid: str) -> tuple[float, float, float]:
        if lid not in self.beliefs:
            raise UnknownLandmark(lid)
        return self.beliefs[lid].pose

    def to_json(self) -> dict:
        return {lid: {"pose": list(b.pose), "support": b.support,
                      "placeholder": b.placeholder}
                for lid, b in sorted(self.beliefs.items())}


def make_mental_model(landmarks: Sequence[Landmark]) -> MentalModel:
    """Snapshot the one-off detection into a belief state."""
    beliefs = {lm.id: Belief(pose=lm.pose, support=lm.support, bbox=lm.bbox)
               for lm in landmarks}
    return MentalModel(beliefs=beliefs)


def bind_keyframes(model: ActionModel, ga: GroundAction,
                   mm: MentalModel) -> tuple[Pose6, ...]:
    """Absolute end-effector poses for one ground action, computed from the
    believed (not actual) landmark positions."""
    binding = dict(zip(model.param_vars(), ga.args))
    poses: list[Pose6] = []
    for kf in model.keyframes:
        ref = kf.relative_to
        if ref is None:
            poses.append(kf.offset)
            continue
        if isinstance(ref, int):
            lid = ga.args[ref]
        else:
            lid = binding.get(ref, ref)
        if not mm.has(lid):
            raise UnknownLandmark(lid)
        base = mm.pose_of(lid)
        dx, dy, dz, roll, pitch, yaw = kf.offset
        poses.append((base[0] + dx, base[1] + dy, base[2] + dz,
                      roll, pitch, yaw))
    return tuple(poses)


@dataclass(frozen=True)
class TraceStep:
    action: GroundAction
    keyframe_poses: tuple[Pose6, ...]
    world_diff: dict
    mental_diff: dict
    flags: tuple[str, ...] = ()

    def to_json(self) -> dict:
        return {"action": [self.action.name, *self.action.args],
                "keyframe_poses": [list(p) for p in self.keyframe_poses],
                "world_diff": self.world_diff,
                "mental_diff": self.mental_diff,
                "flags": list(self.flags)}


@dataclass(frozen=True)
class ExecutionTrace:
    steps: tuple[TraceStep, ...]

    def __len__(self):
        return len(self.steps)

    def to_json(self) -> dict:
        return {"steps": [s.to_json() for s in self.steps]}


def _moved_object(ga: GroundAction) -> Optional[tuple[str, str]]:
    """(object, destination) implied by the ground add effects, if any."""
    for fact in sorted(ga.eff_add):
        if fact.name == "on" and len(fact.args) == 2:
            return fact.args[0], fact.args[1]
    return None


def execute_plan(world: World, steps: Sequence[GroundAction],
                 kb: KnowledgeBase, mm: MentalModel,
                 on_step: Optional[Callable] = None
                 ) -> tuple[ExecutionTrace, World, MentalModel]:
    """Run the plan step by step: bind keyframes against the mental model,
    move the object in the world, then update the belief from the effects.

    Stops at the first world-level failure; the raised ExecutionFailed
    carries the trace prefix of the completed steps.
    """
    trace: list[TraceStep] = []
    for index, ga in enumerate(steps):
        model = kb.actions.get(ga.name)
        if model is None:
            raise ExecutionFailed(index, f"unknown action '{ga.name}'",
                                  ExecutionTrace(tuple(trace)))
        try:
            poses = bind_keyframes(model, ga, mm)
        except UnknownLandmark as exc:
            raise ExecutionFailed(index, f"unknown landmark: {exc}",
                                  ExecutionTrace(tuple(trace))) from exc
        move = _moved_object(ga)
        world_diff: dict = {}
        flags: list[str] = []
        if move is not None:
            obj, dest = move
            try:
                before = world.landmark(obj).pose if world.has(obj) else None
                world = apply_action_in_world(world, obj, dest, model.arm)
            except (IroplanError, KeyError) as exc:
                raise ExecutionFailed(index, str(exc),
                                      ExecutionTrace(tuple(trace))) from exc
            after = world.landmark(obj).pose
            world_diff = {"moved": obj, "to": dest,
                          "from_pose": list(before) if before else None,
                          "to_pose": list(after)}
        mm, mental_diff, mm_flags = _apply_effects_to_belief(mm, ga)
        flags.extend(mm_flags)
        step = TraceStep(action=ga, keyframe_poses=poses,
                         world_diff=world_diff, mental_diff=mental_diff,
                         flags=tuple(flags))
        trace.append(step)
        if on_step is not None:
            on_step(index, step)
    return ExecutionTrace(tuple(trace)), world, mm


def _apply_effects_to_belief(mm: MentalModel, ga: GroundAction
                             ) -> tuple[MentalModel, dict, list[str]]:
    beliefs = dict(mm.beliefs)
    diff: dict = {}
    flags: list[str] = []
    move = _moved_object(ga)
    if move is not None:
        obj, dest = move
        if dest not in beliefs:
            beliefs[dest] = Belief(pose=(0.0, 0.0, 0.0), placeholder=True)
            flags.append(f"placeholder:{dest}")
        if obj not in beliefs:
            beliefs[obj] = Belief(pose=(0.0, 0.0, 0.0), placeholder=True)
            flags.append(f"placeholder:{obj}")
        target = beliefs[dest]
        prev = beliefs[obj]
        height = prev.bbox[2] if prev.bbox else 0.0
        pose = (target.pose[0], target.pose[1], target.top_z + height / 2.0)
        beliefs[obj] = replace(prev, pose=pose, support=dest)
        diff = {"moved": obj, "to": dest, "believed_pose": list(pose)}
    return MentalModel(beliefs=beliefs), diff, flags
