"""Robot knowledge base: type hierarchy, predicates, action models.

Actions are taught from a single before/after observation pair: the changed
facts become preconditions and effects, constants are then lifted into typed
variables to form an operator schema the planner can ground.
"""

from __future__ import annotations

import copy
from dataclasses import dataclass, field, replace
from typing import Iterable, Mapping, Optional, Sequence, Union

from .errors import (
    EffectContradiction,
    NameClash,
    UnboundConstant,
    UnknownAction,
    UnknownPredicate,
    UnknownType,
    UnknownVariable,
)

ROOT_TYPE = "element"

# Predicate signatures of the built-in manipulation vocabulary.
BUILTIN_SIGNATURES = {
    "clear": (("?e", "element"),),
    "on": (("?o", "object"), ("?e", "element")),
    "stackable": (("?o", "object"), ("?e", "element")),
    "flat": (("?e", "element"),),
    "thin": (("?o", "object"),),
}

# Unary facts implied by an object's type.
UNARY_BY_TYPE = {
    "base": ("flat",),
    "cube": ("flat", "thin"),
    "roof": ("thin",),
}


@dataclass(frozen=True, order=True)
class Predicate:
    """A predicate atom.  Arguments starting with '?' are variables."""

    name: str
    args: tuple[str, ...] = ()

    def is_ground(self) -> bool:
        return not any(a.startswith("?") for a in self.args)

    def variables(self) -> tuple[str, ...]:
        return tuple(a for a in self.args if a.startswith("?"))

    def substitute(self, binding: Mapping[str, str]) -> "Predicate":
        return Predicate(self.name, tuple(binding.get(a, a) for a in self.args))

    def __str__(self):
        return "(" + " ".join((self.name,) + self.args) + ")"


def P(name: str, *args: str) -> Predicate:
    return Predicate(name, tuple(args))


# A world state is a set of ground predicates under the closed-world
# assumption: anything absent is false.
State = frozenset


def state(*facts: Predicate) -> State:
    return frozenset(facts)


def facts_to_json(facts: Iterable[Predicate]) -> list[list[str]]:
    return [[f.name, *f.args] for f in sorted(facts)]


def facts_from_json(data: Iterable[Sequence[str]]) -> State:
    return frozenset(Predicate(item[0], tuple(item[1:])) for item in data)


@dataclass(frozen=True)
class TypeRule:
    """Bounding-box classification rule; intervals are inclusive, in meters."""

    type: str
    width: Optional[tuple[float, float]] = None
    length: Optional[tuple[float, float]] = None
    height: Optional[tuple[float, float]] = None
    smallest: Optional[tuple[float, float]] = None  # bounds on min(w, l, h)

    def matches(self, bbox: tuple[float, float, float]) -> bool:
        w, l, h = bbox
        checks = [(self.width, w), (self.length, l), (self.height, h),
                  (self.smallest, min(w, l, h))]
        return all(lo <= v <= hi for bound, v in checks if bound is not None
                   for lo, hi in [bound])

    def to_json(self) -> dict:
        out = {"type": self.type}
        for key in ("width", "length", "height", "smallest"):
            val = getattr(self, key)
            if val is not None:
                out[key] = list(val)
        return out

    @classmethod
    def from_json(cls, data: dict) -> "TypeRule":
        kwargs = {}
        for key in ("width", "length", "height", "smallest"):
            if key in data:
                kwargs[key] = tuple(data[key])
        return cls(type=data["type"], **kwargs)


DEFAULT_TYPE_RULES = (
    TypeRule("base", height=(0.0, 0.04)),
    TypeRule("cube", width=(0.04, 0.08), length=(0.04, 0.08), height=(0.04, 0.08)),
    TypeRule("roof", smallest=(0.0, 0.03)),
)


def classify_object(bbox: tuple[float, float, float],
                    rules: Sequence[TypeRule] = DEFAULT_TYPE_RULES,
                    ) -> tuple[str, frozenset[str]]:
    """Classify a bounding box; first matching rule wins.

    Returns the type name and the unary predicate names implied by it.
    Unmatched boxes fall back to the generic 'object' type with no unaries.
    """
    if min(bbox) <= 0:
        raise ValueError(f"bbox dimensions must be positive: {bbox}")
    for rule in rules:
        if rule.matches(bbox):
            return rule.type, frozenset(UNARY_BY_TYPE.get(rule.type, ()))
    return "object", frozenset()


@dataclass(frozen=True)
class TypeHierarchy:
    """Single-inheritance type tree rooted at 'element'."""

    parent: Mapping[str, Optional[str]]

    @classmethod
    def default(cls) -> "TypeHierarchy":
        return cls(parent={
            "element": None,
            "position": "element",
            "object": "element",
            "base": "object",
            "cube": "object",
            "roof": "object",
        })

    def __contains__(self, name: str) -> bool:
        return name in self.parent

    @property
    def types(self) -> frozenset[str]:
        return frozenset(self.parent)

    def with_type(self, name: str, parent: str) -> "TypeHierarchy":
        if parent not in self.parent:
            raise UnknownType(parent)
        new = dict(self.parent)
        new[name] = parent
        return TypeHierarchy(parent=new)

    def ancestors(self, name: str) -> tuple[str, ...]:
        out = []
        cur: Optional[str] = name
        while cur is not None:
            out.append(cur)
            cur = self.parent.get(cur)
        return tuple(out)

    def is_subtype(self, name: str, ancestor: str) -> bool:
        return ancestor in self.ancestors(name)

    def depth(self, name: str) -> int:
        return len(self.ancestors(name)) - 1

    def to_json(self) -> dict:
        return {t: p for t, p in sorted(self.parent.items())}

    @classmethod
    def from_json(cls, data: Mapping[str, Optional[str]]) -> "TypeHierarchy":
        return cls(parent=dict(data))


@dataclass(frozen=True)
class Keyframe:
    """One recorded gripper state with an end-effector pose offset.

    relative_to is a landmark id while the demonstration is still ground,
    a parameter index after lifting, or None for the robot frame.
    """

    gripper: str  # "open" | "closed"
    relative_to: Union[int, str, None]
    offset: tuple[float, float, float, float, float, float]

    def to_json(self) -> dict:
        return {"gripper": self.gripper, "relative_to": self.relative_to,
                "offset": list(self.offset)}

    @classmethod
    def from_json(cls, data: dict) -> "Keyframe":
        return cls(gripper=data["gripper"], relative_to=data["relative_to"],
                   offset=tuple(data["offset"]))


@dataclass(frozen=True)
class ActionModel:
    """One taught action: typed parameters, positive preconditions,
    add/delete effects, and the keyframe sequence recorded at demo time."""

    name: str
    params: tuple[tuple[str, str], ...] = ()  # (variable, type), ordered
    pre: State = frozenset()
    eff_add: State = frozenset()
    eff_del: State = frozenset()
    keyframes: tuple[Keyframe, ...] = ()
    arm: str = "suction"

    def param_vars(self) -> tuple[str, ...]:
        return tuple(v for v, _ in self.params)

    def variables_in_conditions(self) -> set[str]:
        out: set[str] = set()
        for fact in self.pre | self.eff_add | self.eff_del:
            out.update(fact.variables())
        return out

    def to_json(self) -> dict:
        return {
            "name": self.name,
            "params": [list(p) for p in self.params],
            "pre": facts_to_json(self.pre),
            "eff_add": facts_to_json(self.eff_add),
            "eff_del": facts_to_json(self.eff_del),
            "keyframes": [k.to_json() for k in self.keyframes],
            "arm": self.arm,
        }

    @classmethod
    def from_json(cls, data: dict) -> "ActionModel":
        return cls(
            name=data["name"],
            params=tuple((v, t) for v, t in data.get("params", [])),
            pre=facts_from_json(data.get("pre", [])),
            eff_add=facts_from_json(data.get("eff_add", [])),
            eff_del=facts_from_json(data.get("eff_del", [])),
            keyframes=tuple(Keyframe.from_json(k) for k in data.get("keyframes", [])),
            arm=data.get("arm", "suction"),
        )


@dataclass(frozen=True)
class KnowledgeBase:
    name: str = "iropro"
    hierarchy: TypeHierarchy = field(default_factory=TypeHierarchy.default)
    signatures: Mapping[str, tuple[tuple[str, str], ...]] = field(
        default_factory=lambda: dict(BUILTIN_SIGNATURES))
    actions: Mapping[str, ActionModel] = field(default_factory=dict)

    def with_action(self, model: ActionModel) -> "KnowledgeBase":
        new = dict(self.actions)
        new[model.name] = model
        return replace(self, actions=new)

    def without_action(self, name: str) -> "KnowledgeBase":
        if name not in self.actions:
            raise UnknownAction(name)
        new = dict(self.actions)
        del new[name]
        return replace(self, actions=new)

    def skeleton(self) -> "KnowledgeBase":
        """Copy with keyframes stripped (what a PDDL round trip preserves)."""
        return replace(self, actions={
            n: replace(m, keyframes=()) for n, m in self.actions.items()})

    def canonical(self) -> "KnowledgeBase":
        """Lowercased skeleton with the arm reset: the exact information a
        PDDL emit/parse cycle carries.  Symbols in PDDL are
        case-insensitive, so the canonical form is all lowercase."""

        def lower_facts(facts: State) -> State:
            return frozenset(Predicate(f.name.lower(),
                                       tuple(a.lower() for a in f.args))
                             for f in facts)

        actions = {}
        for model in self.actions.values():
            name = model.name.lower()
            actions[name] = ActionModel(
                name=name,
                params=tuple((v.lower(), t.lower()) for v, t in model.params),
                pre=lower_facts(model.pre),
                eff_add=lower_facts(model.eff_add),
                eff_del=lower_facts(model.eff_del))
        return KnowledgeBase(
            name=self.name.lower(),
            hierarchy=TypeHierarchy(parent={
                t.lower(): (p.lower() if p else None)
                for t, p in self.hierarchy.parent.items()}),
            signatures={n.lower(): tuple((v.lower(), t.lower())
                                         for v, t in sig)
                        for n, sig in self.signatures.items()},
            actions=actions)

    def __eq__(self, other):
        if not isinstance(other, KnowledgeBase):
            return NotImplemented
        return (self.name == other.name
                and dict(self.hierarchy.parent) == dict(other.hierarchy.parent)
                and dict(self.signatures) == dict(other.signatures)
                and dict(self.actions) == dict(other.actions))

    def to_json(self) -> dict:
        return {
            "name": self.name,
            "hierarchy": self.hierarchy.to_json(),
            "signatures": {n: [list(p) for p in sig]
                           for n, sig in sorted(self.signatures.items())},
            "actions": [m.to_json() for _, m in sorted(self.actions.items())],
        }

    @classmethod
    def from_json(cls, data: dict) -> "KnowledgeBase":
        return cls(
            name=data.get("name", "iropro"),
            hierarchy=TypeHierarchy.from_json(data["hierarchy"]),
            signatures={n: tuple((v, t) for v, t in sig)
                        for n, sig in data["signatures"].items()},
            actions={m["name"]: ActionModel.from_json(m)
                     for m in data.get("actions", [])},
        )


# --- condition inference -----------------------------------------------------

def infer_conditions(o1: State, o2: State) -> tuple[State, State, State]:
    """Deduce (pre, eff_add, eff_del) from the states observed before (o1)
    and after (o2) a single demonstration: only changed facts count."""
    pre = frozenset(o1 - o2)
    eff_del = frozenset(o1 - o2)
    eff_add = frozenset(o2 - o1)
    return pre, eff_add, eff_del


def _fact_order(fact: Predicate):
    # Relations before unaries so lifted parameter order reads naturally
    # (moved object first, then source, then destination).
    return (-len(fact.args), fact.name, fact.args)


def lift_action(inferred: tuple[State, State, State],
                keyframes: Sequence[Keyframe],
                bindings: Mapping[str, tuple[str, str]],
                hierarchy: TypeHierarchy,
                name: str = "action",
                arm: str = "suction") -> ActionModel:
    """Replace constants with typed variables to form an operator schema.

    bindings maps each landmark id to a fresh (variable, type) pair.
    Parameters are exactly the variables occurring in pre or effects, ordered
    by first occurrence scanning pre, then add effects, then delete effects.
    """
    pre, eff_add, eff_del = inferred
    subst: dict[str, str] = {}
    for const, (var, typ) in bindings.items():
        if typ not in hierarchy:
            raise UnknownType(typ)
        subst[const] = var

    def lift_set(facts: State) -> State:
        out = []
        for fact in facts:
            for arg in fact.args:
                if arg not in subst and not arg.startswith("?"):
                    raise UnboundConstant(arg)
            out.append(fact.substitute(subst))
        return frozenset(out)

    lifted_pre = lift_set(pre)
    lifted_add = lift_set(eff_add)
    lifted_del = lift_set(eff_del)

    var_type = {var: typ for var, typ in bindings.values()}
    params: list[tuple[str, str]] = []
    seen: set[str] = set()
    for group in (lifted_pre, lifted_add, lifted_del):
        for fact in sorted(group, key=_fact_order):
            for var in fact.variables():
                if var not in seen:
                    seen.add(var)
                    params.append((var, var_type.get(var, ROOT_TYPE)))

    param_index = {var: i for i, (var, _) in enumerate(params)}
    lifted_keyframes = []
    for kf in keyframes:
        ref = kf.relative_to
        if isinstance(ref, str):
            if ref not in bindings:
                raise UnboundConstant(ref)
            var = bindings[ref][0]
            if var not in param_index:
                raise UnboundConstant(ref)
            ref = param_index[var]
        lifted_keyframes.append(replace(kf, relative_to=ref))

    return ActionModel(name=name, params=tuple(params), pre=lifted_pre,
                       eff_add=lifted_add, eff_del=lifted_del,
                       keyframes=tuple(lifted_keyframes), arm=arm)


def default_bindings(facts: Iterable[Predicate],
                     types: Mapping[str, str]) -> dict[str, tuple[str, str]]:
    """Pick readable fresh variables for the constants in a demonstration:
    objects become ?o, ?o2, ...; positions become ?A, ?B, ...; anything else
    ?e, ?e2, ...  types maps landmark id to its inferred type."""
    order: list[str] = []
    for fact in sorted(facts, key=_fact_order):
        for arg in fact.args:
            if arg not in order:
                order.append(arg)
    bindings: dict[str, tuple[str, str]] = {}
    n_obj = n_pos = n_other = 0
    for const in order:
        typ = types.get(const, ROOT_TYPE)
        if typ == "position":
            bindings[const] = ("?" + chr(ord("A") + n_pos), typ)
            n_pos += 1
        elif typ in ("object", "base", "cube", "roof"):
            n_obj += 1
            bindings[const] = ("?o" if n_obj == 1 else f"?o{n_obj}", typ)
        else:
            n_other += 1
            bindings[const] = ("?e" if n_other == 1 else f"?e{n_other}", typ)
    return bindings


# --- editing -----------------------------------------------------------------

@dataclass(frozen=True)
class Edit:
    """One action-model edit.  op is add_pre, remove_pre, add_eff,
    remove_eff, retype_param or rename."""

    op: str
    predicate: Optional[Predicate] = None
    polarity: Optional[str] = None  # "add" | "delete", effect edits only
    var: Optional[str] = None
    new_type: Optional[str] = None
    new_name: Optional[str] = None
    var_types: Mapping[str, str] = field(default_factory=dict)

    def to_json(self) -> dict:
        out = {"op": self.op}
        if self.predicate is not None:
            out["predicate"] = [self.predicate.name, *self.predicate.args]
        if self.polarity is not None:
            out["polarity"] = self.polarity
        if self.var is not None:
            out["var"] = self.var
        if self.new_type is not None:
            out["new_type"] = self.new_type
        if self.new_name is not None:
            out["new_name"] = self.new_name
        if self.var_types:
            out["var_types"] = dict(self.var_types)
        return out

    @classmethod
    def from_json(cls, data: dict) -> "Edit":
        pred = None
        if "predicate" in data:
            p = data["predicate"]
            pred = Predicate(p[0], tuple(p[1:]))
        return cls(op=data["op"], predicate=pred,
                   polarity=data.get("polarity"), var=data.get("var"),
                   new_type=data.get("new_type"), new_name=data.get("new_name"),
                   var_types=data.get("var_types", {}))


def _recompute_params(model: ActionModel, var_types: Mapping[str, str]) -> ActionModel:
    """Drop parameters no longer used and append newly introduced variables
    in first-occurrence order; existing parameters keep their position."""
    used = model.variables_in_conditions()
    params = [(v, t) for v, t in model.params if v in used]
    known = {v for v, _ in params}
    for group in (model.pre, model.eff_add, model.eff_del):
        for fact in sorted(group, key=_fact_order):
            for var in fact.variables():
                if var not in known:
                    known.add(var)
                    params.append((var, var_types.get(var, ROOT_TYPE)))
    return replace(model, params=tuple(params))


def edit_action(model: ActionModel, edit: Edit,
                hierarchy: TypeHierarchy) -> ActionModel:
    """Apply one edit and return the updated model."""
    types = {v: t for v, t in model.params}
    types.update(edit.var_types)

    if edit.op == "add_pre":
        pred = edit.predicate
        for var in pred.variables():
            if var not in types:
                raise UnknownVariable(var)
        out = replace(model, pre=model.pre | {pred})
    elif edit.op == "remove_pre":
        if edit.predicate not in model.pre:
            raise UnknownPredicate(str(edit.predicate))
        out = replace(model, pre=model.pre - {edit.predicate})
    elif edit.op == "add_eff":
        pred = edit.predicate
        for var in pred.variables():
            if var not in types:
                raise UnknownVariable(var)
        if edit.polarity == "add":
            if pred in model.eff_del:
                raise EffectContradiction(str(pred))
            out = replace(model, eff_add=model.eff_add | {pred})
        elif edit.polarity == "delete":
            if pred in model.eff_add:
                raise EffectContradiction(str(pred))
            out = replace(model, eff_del=model.eff_del | {pred})
        else:
            raise ValueError(f"bad polarity: {edit.polarity}")
    elif edit.op == "remove_eff":
        if edit.polarity == "add":
            if edit.predicate not in model.eff_add:
                raise UnknownPredicate(str(edit.predicate))
            out = replace(model, eff_add=model.eff_add - {edit.predicate})
        else:
            if edit.predicate not in model.eff_del:
                raise UnknownPredicate(str(edit.predicate))
            out = replace(model, eff_del=model.eff_del - {edit.predicate})
    elif edit.op == "retype_param":
        if edit.var not in types:
            raise UnknownVariable(edit.var)
        if edit.new_type not in hierarchy:
            raise UnknownType(edit.new_type)
        params = tuple((v, edit.new_type if v == edit.var else t)
                       for v, t in model.params)
        return replace(model, params=params)
    elif edit.op == "rename":
        return replace(model, name=edit.new_name)
    else:
        raise ValueError(f"unknown edit op: {edit.op}")

    return _recompute_params(out, types)


def clone_action(kb: KnowledgeBase, name: str, new_name: str) -> KnowledgeBase:
    """Deep-copy an action, keyframes included, under a fresh name."""
    if name not in kb.actions:
        raise UnknownAction(name)
    if new_name in kb.actions:
        raise NameClash(new_name)
    model = copy.deepcopy(kb.actions[name])
    return kb.with_action(replace(model, name=new_name))


# --- validation --------------------------------------------------------------

@dataclass(frozen=True)
class Diagnostic:
    severity: str  # "warning" | "error"
    code: str
    message: str

    def __str__(self):
        return f"{self.severity}: {self.message}"


def validate_action_model(model: ActionModel,
                          hierarchy: TypeHierarchy) -> list[Diagnostic]:
    """Diagnostic-only sanity checks; never raises."""
    out: list[Diagnostic] = []
    if not model.params:
        out.append(Diagnostic("warning", "empty_params",
                              f"action '{model.name}' has no parameters"))
    if not model.eff_add and not model.eff_del:
        out.append(Diagnostic("warning", "no_effect",
                              f"action '{model.name}' has no effect and can "
                              "never change the world state"))
    redundant = model.pre & model.eff_add
    if redundant:
        facts = ", ".join(str(f) for f in sorted(redundant))
        out.append(Diagnostic("warning", "redundant_add",
                              f"add effects already required as "
                              f"preconditions: {facts}"))
    for var, typ in model.params:
        if typ not in hierarchy:
            out.append(Diagnostic("error", "unknown_type",
                                  f"parameter {var} has unknown type '{typ}'"))
    declared = set(model.param_vars())
    loose = model.variables_in_conditions() - declared
    for var in sorted(loose):
        out.append(Diagnostic("error", "unbound_variable",
                              f"variable {var} used but not a parameter"))
    for i, kf in enumerate(model.keyframes):
        ref = kf.relative_to
        if isinstance(ref, int) and not (0 <= ref < len(model.params)):
            out.append(Diagnostic("error", "bad_keyframe_ref",
                                  f"keyframe {i} references parameter index "
                                  f"{ref} which does not exist"))
        elif isinstance(ref, str):
            out.append(Diagnostic("warning", "ground_keyframe_ref",
                                  f"keyframe {i} still references landmark "
                                  f"'{ref}' instead of a parameter"))
    return out


def check_goal_consistency(goal: Iterable[Predicate]) -> list[str]:
    """Flag contradicting goal pairs: on(o, e) with clear(e), and an object
    required to be on two different things at once."""
    goal = list(goal)
    out = []
    ons = [f for f in goal if f.name == "on" and len(f.args) == 2]
    clears = {f.args[0] for f in goal if f.name == "clear" and len(f.args) == 1}
    for fact in sorted(ons):
        if fact.args[1] in clears:
            out.append(f"goal states {fact} and (clear {fact.args[1]}) "
                       "contradict each other")
    by_obj: dict[str, list[Predicate]] = {}
    for fact in ons:
        by_obj.setdefault(fact.args[0], []).append(fact)
    for obj, facts in sorted(by_obj.items()):
        if len({f.args[1] for f in facts}) > 1:
            listed = ", ".join(str(f) for f in sorted(facts))
            out.append(f"goal places '{obj}' on two different things: {listed}")
    return out
