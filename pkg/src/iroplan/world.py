"""Simulated tabletop: named positions, boxes that stack, symbolic perception.

Worlds are immutable snapshots; every operation returns a new World.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field, replace
from typing import Iterable, Optional, Sequence

from .errors import (
    DuplicateName,
    NotGraspable,
    OverlappingObjects,
    PhysicallyBlocked,
    ScriptError,
)
from .knowledge import (
    DEFAULT_TYPE_RULES,
    Keyframe,
    Predicate,
    State,
    TypeRule,
    classify_object,
)

Pose = tuple[float, float, float]

# End-effector approach height above a landmark, meters.
APPROACH_Z = 0.10
CONTACT_Z = 0.02


@dataclass(frozen=True)
class Landmark:
    """A predefined table position or a perceived object with bounding box."""

    id: str
    kind: str  # "position" | "object"
    pose: Pose
    bbox: Optional[tuple[float, float, float]] = None  # objects only
    support: Optional[str] = None  # id of what this object rests on

    @property
    def top_z(self) -> float:
        if self.kind == "position":
            return self.pose[2]
        return self.pose[2] + self.bbox[2] / 2.0


@dataclass(frozen=True)
class SceneConfig:
    grid: tuple[tuple[str, Pose], ...] = ()
    proximity_threshold_d: float = 0.05  # half the 0.10 m grid pitch
    occlude_stacked: bool = False
    type_rules: tuple[TypeRule, ...] = DEFAULT_TYPE_RULES

    def to_json(self) -> dict:
        return {
            "proximity_threshold_d": self.proximity_threshold_d,
            "occlude_stacked": self.occlude_stacked,
            "type_rules": [r.to_json() for r in self.type_rules],
        }


@dataclass(frozen=True)
class World:
    landmarks: tuple[Landmark, ...]
    gripper_states: tuple[tuple[str, str], ...] = (("claw", "open"),
                                                   ("suction", "open"))
    config: SceneConfig = field(default_factory=SceneConfig)

    def landmark(self, lid: str) -> Landmark:
        for lm in self.landmarks:
            if lm.id == lid:
                return lm
        raise KeyError(lid)

    def has(self, lid: str) -> bool:
        return any(lm.id == lid for lm in self.landmarks)

    @property
    def positions(self) -> tuple[Landmark, ...]:
        return tuple(lm for lm in self.landmarks if lm.kind == "position")

    @property
    def objects(self) -> tuple[Landmark, ...]:
        return tuple(lm for lm in self.landmarks if lm.kind == "object")

    def supported_on(self, lid: str) -> Optional[Landmark]:
        """The object resting directly on landmark lid, if any."""
        for lm in self.objects:
            if lm.support == lid:
                return lm
        return None

    def object_type(self, lid: str) -> str:
        lm = self.landmark(lid)
        if lm.kind == "position":
            return "position"
        typ, _ = classify_object(lm.bbox, self.config.type_rules)
        return typ

    def gripper(self, arm: str) -> str:
        return dict(self.gripper_states)[arm]

    def _with_landmark(self, updated: Landmark) -> "World":
        lms = tuple(updated if lm.id == updated.id else lm
                    for lm in self.landmarks)
        return replace(self, landmarks=lms)

    def to_json(self) -> dict:
        return {
            "positions": [{"name": lm.id, "pose": list(lm.pose)}
                          for lm in self.positions],
            "objects": [{"name": lm.id, "pose": list(lm.pose),
                         "bbox": list(lm.bbox), "on": lm.support}
                        for lm in self.objects],
            "config": self.config.to_json(),
            "grippers": {arm: st for arm, st in self.gripper_states},
        }


def _dist_xy(a: Pose, b: Pose) -> float:
    return math.hypot(a[0] - b[0], a[1] - b[1])


def load_scene(spec: dict) -> World:
    """Build a World from a scene dict (see data/scenes/*.json).

    Objects are placed via an explicit pose or an 'on' reference to a
    position or another object; 'on' chains become support links.
    """
    cfg_data = spec.get("config", {})
    rules = tuple(TypeRule.from_json(r) for r in cfg_data["type_rules"]) \
        if "type_rules" in cfg_data else DEFAULT_TYPE_RULES
    positions = [(p["name"], tuple(p["pose"])) for p in spec.get("positions", [])]
    config = SceneConfig(
        grid=tuple(positions),
        proximity_threshold_d=cfg_data.get("proximity_threshold_d", 0.05),
        occlude_stacked=cfg_data.get("occlude_stacked", False),
        type_rules=rules,
    )
    if config.proximity_threshold_d <= 0:
        raise ValueError("proximity_threshold_d must be positive")

    landmarks: dict[str, Landmark] = {}
    for name, pose in positions:
        if name in landmarks:
            raise DuplicateName(name)
        landmarks[name] = Landmark(id=name, kind="position", pose=pose)

    objects = list(spec.get("objects", []))
    for obj in objects:
        if obj["name"] in landmarks:
            raise DuplicateName(obj["name"])
        bbox = tuple(obj["bbox"])
        if min(bbox) <= 0:
            raise ValueError(f"bbox of '{obj['name']}' must be positive")
        landmarks[obj["name"]] = Landmark(id=obj["name"], kind="object",
                                          pose=(0.0, 0.0, 0.0), bbox=bbox)

    # Resolve 'on' placements bottom-up so stacked poses compose.
    supported: dict[str, str] = {}
    pending = [o for o in objects if "on" in o and o["on"]]
    placed = {name for name, _ in positions}
    placed |= {o["name"] for o in objects if "on" not in o or not o["on"]}
    for obj in objects:
        if "on" not in obj or not obj["on"]:
            if "pose" not in obj:
                raise ScriptError(f"object '{obj['name']}' needs a pose or 'on'")
            landmarks[obj["name"]] = replace(landmarks[obj["name"]],
                                             pose=tuple(obj["pose"]))
    while pending:
        progressed = False
        for obj in list(pending):
            target = obj["on"]
            if target not in landmarks:
                raise ScriptError(f"'{obj['name']}' placed on unknown "
                                  f"landmark '{target}'")
            if target not in placed:
                continue
            if target in supported.values():
                raise OverlappingObjects(
                    f"two objects placed on '{target}'")
            lm = landmarks[obj["name"]]
            base = landmarks[target]
            pose = (base.pose[0], base.pose[1], base.top_z + lm.bbox[2] / 2.0)
            landmarks[obj["name"]] = replace(lm, pose=pose, support=target)
            supported[obj["name"]] = target
            placed.add(obj["name"])
            pending.remove(obj)
            progressed = True
        if not progressed:
            names = ", ".join(o["name"] for o in pending)
            raise ScriptError(f"cyclic or unresolved placements: {names}")

    # Derive support for explicitly posed objects from co-location.
    world = World(landmarks=tuple(sorted(landmarks.values(), key=lambda l: l.id)),
                  config=config)
    resolved = []
    for lm in world.landmarks:
        if lm.kind == "object" and lm.support is None:
            support = _derive_support(world, lm)
            if support is not None and any(
                    o.support == support and o.id != lm.id
                    for o in world.objects):
                raise OverlappingObjects(
                    f"objects '{lm.id}' and another share support '{support}'")
            lm = replace(lm, support=support)
        resolved.append(lm)
    world = replace(world, landmarks=tuple(resolved))
    _check_support_chains(world)
    return world


def _derive_support(world: World, obj: Landmark) -> Optional[str]:
    d = world.config.proximity_threshold_d
    best = None
    for cand in world.landmarks:
        if cand.id == obj.id:
            continue
        if _dist_xy(cand.pose, obj.pose) > d:
            continue
        # Must sit above the candidate's top face.
        if cand.kind == "object" and cand.pose[2] >= obj.pose[2]:
            continue
        if best is None or cand.top_z > best.top_z:
            best = cand
    return best.id if best else None


def _check_support_chains(world: World) -> None:
    for obj in world.objects:
        seen = set()
        cur = obj
        while cur.support is not None:
            if cur.support in seen:
                raise ScriptError(f"support cycle involving '{obj.id}'")
            seen.add(cur.support)
            cur = world.landmark(cur.support)
        if cur.kind == "object" and cur.support is None and obj.support is not None:
            # Chain ended on an unsupported object rather than a position.
            raise ScriptError(
                f"support chain of '{obj.id}' does not reach a position")


def load_scene_file(path) -> World:
    with open(path) as fh:
        return load_scene(json.load(fh))


# --- perception --------------------------------------------------------------

def detect_landmarks(world: World) -> tuple[Landmark, ...]:
    """All positions plus objects; with occlusion on, objects that have
    something on top of them (not the top of their stack) go undetected."""
    out = list(world.positions)
    for obj in world.objects:
        if world.config.occlude_stacked and world.supported_on(obj.id):
            continue
        out.append(obj)
    return tuple(sorted(out, key=lambda l: l.id))


def perceive_state(world: World, landmarks: Sequence[Landmark]) -> State:
    """Ground predicates over the visible landmarks (closed world)."""
    visible = {lm.id for lm in landmarks}
    d = world.config.proximity_threshold_d
    facts: set[Predicate] = set()
    for obj in world.objects:
        typ, unaries = classify_object(obj.bbox, world.config.type_rules)
        for name in unaries:
            facts.add(Predicate(name, (obj.id,)))
        if obj.support is not None:
            sup = world.landmark(obj.support)
            if sup.kind == "position" and _dist_xy(obj.pose, sup.pose) <= d:
                facts.add(Predicate("on", (obj.id, sup.id)))
            elif sup.kind == "object":
                facts.add(Predicate("on", (obj.id, sup.id)))
    for lm in world.landmarks:
        if world.supported_on(lm.id) is None:
            facts.add(Predicate("clear", (lm.id,)))
    flat_ids = {f.args[0] for f in facts if f.name == "flat"}
    for obj in world.objects:
        for target in world.landmarks:
            if target.id == obj.id:
                continue
            if target.kind == "position" or target.id in flat_ids:
                facts.add(Predicate("stackable", (obj.id, target.id)))
    return frozenset(f for f in facts if all(a in visible for a in f.args))


def detected_object_types(world: World,
                          landmarks: Sequence[Landmark]) -> list[tuple[str, str]]:
    """(name, type) pairs for the detected landmarks, positions included."""
    out = []
    for lm in sorted(landmarks, key=lambda l: l.id):
        if lm.kind == "position":
            out.append((lm.id, "position"))
        else:
            typ, _ = classify_object(lm.bbox, world.config.type_rules)
            out.append((lm.id, typ))
    return out


# --- physical action ---------------------------------------------------------

def apply_action_in_world(world: World, obj_id: str, dest_id: str,
                          arm: str = "suction") -> World:
    """Pick obj_id and place it on dest_id; returns the new world."""
    obj = world.landmark(obj_id)
    if obj.kind != "object":
        raise NotGraspable(f"'{obj_id}' is not a movable object")
    blocker = world.supported_on(obj_id)
    if blocker is not None:
        raise NotGraspable(f"'{obj_id}' is under '{blocker.id}'")
    dest = world.landmark(dest_id)
    if dest_id == obj_id:
        raise PhysicallyBlocked("cannot place an object on itself")
    occupant = world.supported_on(dest_id)
    if occupant is not None:
        raise PhysicallyBlocked(f"'{dest_id}' is occupied by '{occupant.id}'")
    pose = (dest.pose[0], dest.pose[1], dest.top_z + obj.bbox[2] / 2.0)
    world = world._with_landmark(replace(obj, pose=pose, support=dest_id))
    grippers = tuple((a, "open") for a, _ in world.gripper_states)
    return replace(world, gripper_states=grippers)


# --- demonstrations ----------------------------------------------------------

@dataclass(frozen=True)
class DemoStep:
    kind: str  # "grasp" | "release_at" | "save_keyframe"
    target: str  # object id / landmark id / relative-to landmark id
    arm: Optional[str] = None
    offset: Optional[tuple[float, ...]] = None

    @classmethod
    def from_json(cls, data: dict) -> "DemoStep":
        return cls(kind=data["kind"], target=data["target"],
                   arm=data.get("arm"),
                   offset=tuple(data["offset"]) if "offset" in data else None)


@dataclass(frozen=True)
class DemoScript:
    steps: tuple[DemoStep, ...]

    @classmethod
    def from_json(cls, data: Iterable[dict]) -> "DemoScript":
        return cls(steps=tuple(DemoStep.from_json(s) for s in data))


def pick_and_place(obj_id: str, dest_id: str, arm: str = "suction") -> DemoScript:
    return DemoScript(steps=(DemoStep("grasp", obj_id, arm=arm),
                             DemoStep("release_at", dest_id, arm=arm)))


@dataclass(frozen=True)
class DemoResult:
    keyframes: tuple[Keyframe, ...]
    before: State  # O1
    after: State  # O2
    world: World
    types: dict  # landmark id -> inferred type, from the initial detection


def record_demonstration(world: World, script: DemoScript) -> DemoResult:
    """Run a teacher script: perceive before, execute, perceive after.

    Keyframes record gripper states and poses relative to the landmarks the
    script names (approach/contact pair per grasp and per release).
    """
    _validate_script(world, script)
    detected = detect_landmarks(world)
    o1 = perceive_state(world, detected)
    types = dict(detected_object_types(world, detected))

    keyframes: list[Keyframe] = []
    held: Optional[tuple[str, str]] = None  # (object id, arm)
    gripper = "open"
    for step in script.steps:
        if step.kind == "grasp":
            if held is not None:
                raise ScriptError("grasp while already holding an object")
            keyframes.append(Keyframe("open", step.target,
                                      (0.0, 0.0, APPROACH_Z, 0.0, 0.0, 0.0)))
            keyframes.append(Keyframe("closed", step.target,
                                      (0.0, 0.0, 0.0, 0.0, 0.0, 0.0)))
            held = (step.target, step.arm or "suction")
            gripper = "closed"
        elif step.kind == "release_at":
            if held is None:
                raise ScriptError("release without a preceding grasp")
            obj_id, arm = held
            world = apply_action_in_world(world, obj_id, step.target, arm)
            keyframes.append(Keyframe("closed", step.target,
                                      (0.0, 0.0, APPROACH_Z, 0.0, 0.0, 0.0)))
            keyframes.append(Keyframe("open", step.target,
                                      (0.0, 0.0, CONTACT_Z, 0.0, 0.0, 0.0)))
            held = None
            gripper = "open"
        elif step.kind == "save_keyframe":
            offset = step.offset or (0.0,) * 6
            if len(offset) != 6:
                raise ScriptError("keyframe offset must be a 6-DoF pose")
            keyframes.append(Keyframe(gripper, step.target, tuple(offset)))
        else:
            raise ScriptError(f"unknown demo step kind: {step.kind}")
    if held is not None:
        raise ScriptError("demonstration ended while still holding an object")

    o2 = perceive_state(world, detect_landmarks(world))
    return DemoResult(keyframes=tuple(keyframes), before=o1, after=o2,
                      world=world, types=types)


def _validate_script(world: World, script: DemoScript) -> None:
    for step in script.steps:
        if step.kind in ("grasp", "release_at", "save_keyframe"):
            if not world.has(step.target):
                raise ScriptError(f"unknown landmark '{step.target}'")
