"""PDDL 1.2 subset (:strips :typing): canonical emitter and parser.

Emission is deterministic (two-space indent, lowercase symbols, sorted
blocks) so exports are diff-able and byte-stable.  Keyframes have no PDDL
representation; parsing a previously emitted domain yields the knowledge
base skeleton.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Optional, Sequence

from .errors import (
    InvalidModel,
    PddlSyntaxError,
    UndeclaredConstant,
    UnsupportedFeature,
)
from .knowledge import (
    ActionModel,
    KnowledgeBase,
    Predicate,
    State,
    TypeHierarchy,
    facts_from_json,
    facts_to_json,
    validate_action_model,
)

SUPPORTED_REQUIREMENTS = {":strips", ":typing"}
UNSUPPORTED_SECTIONS = {":functions", ":constants", ":derived", ":axiom",
                        ":durative-action", ":constraints"}


@dataclass(frozen=True)
class PlanningProblem:
    name: str
    objects: tuple[tuple[str, str], ...]  # (name, type)
    init: State
    goal: State
    domain: str = "iropro"

    def declared(self) -> set[str]:
        return {name for name, _ in self.objects}

    def validate(self) -> None:
        declared = self.declared()
        for fact in sorted(self.init | self.goal):
            for arg in fact.args:
                if arg not in declared:
                    raise UndeclaredConstant(
                        f"'{arg}' in {fact} is not a declared object")

    def canonical(self) -> "PlanningProblem":
        """Lowercased, object-sorted form as produced by an emit/parse
        cycle (PDDL symbols are case-insensitive)."""

        def lower_facts(facts: State) -> State:
            return frozenset(Predicate(f.name.lower(),
                                       tuple(a.lower() for a in f.args))
                             for f in facts)

        return PlanningProblem(
            name=self.name.lower(), domain=self.domain.lower(),
            objects=tuple(sorted((n.lower(), t.lower())
                                 for n, t in self.objects)),
            init=lower_facts(self.init), goal=lower_facts(self.goal))

    def to_json(self) -> dict:
        return {"name": self.name, "domain": self.domain,
                "objects": [list(o) for o in self.objects],
                "init": facts_to_json(self.init),
                "goal": facts_to_json(self.goal)}

    @classmethod
    def from_json(cls, data: dict) -> "PlanningProblem":
        return cls(name=data["name"], domain=data.get("domain", "iropro"),
                   objects=tuple((n, t) for n, t in data["objects"]),
                   init=facts_from_json(data["init"]),
                   goal=facts_from_json(data["goal"]))


# --- emission ----------------------------------------------------------------

def _fmt_atom(fact: Predicate) -> str:
    return "(" + " ".join([fact.name.lower()] +
                          [a.lower() for a in fact.args]) + ")"


def _fmt_typed_vars(pairs: Sequence[tuple[str, str]]) -> str:
    return " ".join(f"{v.lower()} - {t.lower()}" for v, t in pairs)


def _sorted_types(hierarchy: TypeHierarchy) -> list[str]:
    # Untyped roots go last: in a PDDL typed list a bare name before
    # 'x - t' would be captured by that type declaration.
    typed = sorted((t for t, p in hierarchy.parent.items() if p is not None),
                   key=lambda t: (hierarchy.depth(t), t))
    roots = sorted(t for t, p in hierarchy.parent.items() if p is None)
    return typed + roots


def emit_domain(kb: KnowledgeBase) -> str:
    """Render the knowledge base as a canonical PDDL domain."""
    problems = []
    for _, model in sorted(kb.actions.items()):
        problems.extend(d for d in validate_action_model(model, kb.hierarchy)
                        if d.severity == "error")
    if problems:
        raise InvalidModel(problems)

    lines = [f"(define (domain {kb.name.lower()})",
             "  (:requirements :strips :typing)",
             "  (:types"]
    types = _sorted_types(kb.hierarchy)
    for i, t in enumerate(types):
        parent = kb.hierarchy.parent[t]
        entry = t.lower() if parent is None else f"{t.lower()} - {parent.lower()}"
        close = ")" if i == len(types) - 1 else ""
        lines.append(f"    {entry}{close}")
    lines.append("  (:predicates")
    sigs = sorted(kb.signatures.items())
    for i, (name, sig) in enumerate(sigs):
        close = ")" if i == len(sigs) - 1 else ""
        lines.append(f"    ({name.lower()} {_fmt_typed_vars(sig)}){close}")
    for _, model in sorted(kb.actions.items()):
        lines.extend(_emit_action(model))
    lines[-1] += ")"
    return "\n".join(lines) + "\n"


def _emit_action(model: ActionModel) -> list[str]:
    pre = " ".join(_fmt_atom(f) for f in sorted(model.pre))
    adds = [_fmt_atom(f) for f in sorted(model.eff_add)]
    dels = [f"(not {_fmt_atom(f)})" for f in sorted(model.eff_del)]
    eff = " ".join(adds + dels)
    return [
        f"  (:action {model.name.lower()}",
        f"    :parameters ({_fmt_typed_vars(model.params)})",
        f"    :precondition (and {pre})".replace("(and )", "(and)"),
        f"    :effect (and {eff})".replace("(and )", "(and)") + ")",
    ]


def emit_problem(problem: PlanningProblem) -> str:
    problem.validate()
    lines = [f"(define (problem {problem.name.lower()})",
             f"  (:domain {problem.domain.lower()})",
             "  (:objects"]
    objs = sorted(problem.objects)
    for i, (name, typ) in enumerate(objs):
        close = ")" if i == len(objs) - 1 else ""
        lines.append(f"    {name.lower()} - {typ.lower()}{close}")
    if not objs:
        lines[-1] += ")"
    lines.append("  (:init")
    init = sorted(problem.init)
    for i, fact in enumerate(init):
        close = ")" if i == len(init) - 1 else ""
        lines.append(f"    {_fmt_atom(fact)}{close}")
    if not init:
        lines[-1] += ")"
    goal = " ".join(_fmt_atom(f) for f in sorted(problem.goal))
    lines.append(f"  (:goal (and {goal})))".replace("(and )", "(and)"))
    return "\n".join(lines) + "\n"


def emit_plan(steps: Iterable[tuple[str, tuple[str, ...]]]) -> str:
    lines = []
    for i, (name, args) in enumerate(steps):
        body = " ".join([name.lower()] + [a.lower() for a in args])
        lines.append(f"{i}: ({body})")
    return "\n".join(lines) + "\n"


# --- parsing -----------------------------------------------------------------

@dataclass
class _Node:
    """S-expression node: either a symbol or a list of nodes."""
    value: object  # str | list[_Node]
    line: int
    col: int

    @property
    def is_symbol(self) -> bool:
        return isinstance(self.value, str)


def _tokenize(text: str):
    line, col = 1, 1
    i = 0
    n = len(text)
    while i < n:
        ch = text[i]
        if ch == ";":
            while i < n and text[i] != "\n":
                i += 1
            continue
        if ch == "\n":
            line += 1
            col = 1
            i += 1
            continue
        if ch.isspace():
            col += 1
            i += 1
            continue
        if ch in "()":
            yield ch, line, col
            col += 1
            i += 1
            continue
        start = i
        start_col = col
        while i < n and not text[i].isspace() and text[i] not in "();":
            i += 1
            col += 1
        yield text[start:i].lower(), line, start_col
    yield None, line, col


def _parse_sexpr(text: str) -> _Node:
    stack: list[_Node] = []
    root: Optional[_Node] = None
    for tok, line, col in _tokenize(text):
        if tok is None:
            break
        if tok == "(":
            node = _Node([], line, col)
            if stack:
                stack[-1].value.append(node)
            elif root is None:
                root = node
            else:
                raise PddlSyntaxError("multiple top-level expressions",
                                      line, col)
            stack.append(node)
        elif tok == ")":
            if not stack:
                raise PddlSyntaxError("unbalanced ')'", line, col)
            stack.pop()
        else:
            if not stack:
                raise PddlSyntaxError(f"unexpected symbol '{tok}'", line, col)
            stack[-1].value.append(_Node(tok, line, col))
    if stack:
        node = stack[-1]
        raise PddlSyntaxError("unclosed '('", node.line, node.col)
    if root is None:
        raise PddlSyntaxError("empty input", 1, 1)
    return root


def _expect_symbol(node: _Node, what: str) -> str:
    if not node.is_symbol:
        raise PddlSyntaxError(f"expected {what}", node.line, node.col)
    return node.value


def _parse_typed_list(nodes: Sequence[_Node],
                      default_type: str = "element") -> list[tuple[str, str]]:
    """Parse PDDL typed lists: a b - t c d - u e  ->  pairs with types."""
    out: list[tuple[str, str]] = []
    buffer: list[str] = []
    i = 0
    while i < len(nodes):
        sym = _expect_symbol(nodes[i], "a name in a typed list")
        if sym == "-":
            if i + 1 >= len(nodes):
                raise PddlSyntaxError("dangling '-' in typed list",
                                      nodes[i].line, nodes[i].col)
            typ = _expect_symbol(nodes[i + 1], "a type name")
            out.extend((name, typ) for name in buffer)
            buffer = []
            i += 2
        else:
            buffer.append(sym)
            i += 1
    out.extend((name, default_type) for name in buffer)
    return out


def _parse_atom(node: _Node) -> Predicate:
    if node.is_symbol:
        raise PddlSyntaxError("expected an atom", node.line, node.col)
    items = node.value
    if not items:
        raise PddlSyntaxError("empty atom", node.line, node.col)
    name = _expect_symbol(items[0], "a predicate name")
    args = tuple(_expect_symbol(a, "an argument") for a in items[1:])
    return Predicate(name, args)


def _parse_conjunction(node: _Node, allow_not: bool
                       ) -> tuple[list[Predicate], list[Predicate]]:
    """Returns (positive, negative) atoms of an (and ...) or single literal."""
    positives: list[Predicate] = []
    negatives: list[Predicate] = []

    def visit(n: _Node, negated=False):
        if n.is_symbol:
            raise PddlSyntaxError("expected a formula", n.line, n.col)
        if not n.value:
            return  # (and) / ()
        head = n.value[0]
        if head.is_symbol and head.value == "and":
            for child in n.value[1:]:
                visit(child, negated)
        elif head.is_symbol and head.value == "not":
            if not allow_not:
                raise UnsupportedFeature("negative preconditions are not "
                                         "supported", head.line, head.col)
            if negated:
                raise UnsupportedFeature("nested negation", head.line, head.col)
            if len(n.value) != 2:
                raise PddlSyntaxError("(not ...) takes one argument",
                                      n.line, n.col)
            visit(n.value[1], True)
        elif head.is_symbol and head.value in ("or", "imply", "forall",
                                               "exists", "when", "=", ">=",
                                               "<=", ">", "<", "increase",
                                               "decrease", "assign"):
            raise UnsupportedFeature(f"'{head.value}' is not supported",
                                     head.line, head.col)
        else:
            atom = _parse_atom(n)
            (negatives if negated else positives).append(atom)

    visit(node)
    return positives, negatives


def parse_domain(text: str) -> KnowledgeBase:
    """Parse a :strips :typing domain into a knowledge-base skeleton."""
    root = _parse_sexpr(text)
    items = root.value
    if (not items or _expect_symbol(items[0], "'define'") != "define"):
        raise PddlSyntaxError("expected (define ...)", root.line, root.col)
    head = items[1]
    if head.is_symbol or len(head.value) != 2 or head.value[0].value != "domain":
        raise PddlSyntaxError("expected (domain <name>)", head.line, head.col)
    name = _expect_symbol(head.value[1], "a domain name")

    parent: dict[str, Optional[str]] = {"element": None}
    signatures: dict[str, tuple[tuple[str, str], ...]] = {}
    actions: dict[str, ActionModel] = {}

    for section in items[2:]:
        if section.is_symbol:
            raise PddlSyntaxError("unexpected symbol", section.line,
                                  section.col)
        tag = _expect_symbol(section.value[0], "a section tag")
        if tag == ":requirements":
            for req in section.value[1:]:
                sym = _expect_symbol(req, "a requirement")
                if sym not in SUPPORTED_REQUIREMENTS:
                    raise UnsupportedFeature(f"requirement '{sym}' is not "
                                             "supported", req.line, req.col)
        elif tag == ":types":
            for typ, par in _parse_typed_list(section.value[1:], "element"):
                parent.setdefault(par, "element" if par != "element" else None)
                parent[typ] = None if typ == "element" else par
        elif tag == ":predicates":
            for node in section.value[1:]:
                atom_items = node.value
                pname = _expect_symbol(atom_items[0], "a predicate name")
                sig = tuple(_parse_typed_list(atom_items[1:], "element"))
                signatures[pname] = sig
        elif tag == ":action":
            model = _parse_action(section)
            actions[model.name] = model
        elif tag in UNSUPPORTED_SECTIONS:
            raise UnsupportedFeature(f"section '{tag}' is not supported",
                                     section.line, section.col)
        else:
            raise PddlSyntaxError(f"unknown section '{tag}'", section.line,
                                  section.col)
    if "element" in parent and parent["element"] is not None:
        parent["element"] = None
    return KnowledgeBase(name=name, hierarchy=TypeHierarchy(parent=parent),
                         signatures=signatures, actions=actions)


def _parse_action(section: _Node) -> ActionModel:
    items = section.value
    if len(items) < 2:
        raise PddlSyntaxError("action needs a name", section.line, section.col)
    name = _expect_symbol(items[1], "an action name")
    params: tuple[tuple[str, str], ...] = ()
    pre: State = frozenset()
    eff_add: State = frozenset()
    eff_del: State = frozenset()
    i = 2
    while i < len(items):
        key = _expect_symbol(items[i], "an action keyword")
        if i + 1 >= len(items):
            raise PddlSyntaxError(f"missing value for {key}",
                                  items[i].line, items[i].col)
        value = items[i + 1]
        if key == ":parameters":
            params = tuple(_parse_typed_list(value.value, "element"))
        elif key == ":precondition":
            pos, _ = _parse_conjunction(value, allow_not=False)
            pre = frozenset(pos)
        elif key == ":effect":
            pos, neg = _parse_conjunction(value, allow_not=True)
            eff_add = frozenset(pos)
            eff_del = frozenset(neg)
        else:
            raise UnsupportedFeature(f"action keyword '{key}' is not "
                                     "supported", items[i].line, items[i].col)
        i += 2
    return ActionModel(name=name, params=params, pre=pre, eff_add=eff_add,
                       eff_del=eff_del)


def parse_problem(text: str) -> PlanningProblem:
    root = _parse_sexpr(text)
    items = root.value
    if not items or _expect_symbol(items[0], "'define'") != "define":
        raise PddlSyntaxError("expected (define ...)", root.line, root.col)
    head = items[1]
    if head.is_symbol or len(head.value) != 2 or head.value[0].value != "problem":
        raise PddlSyntaxError("expected (problem <name>)", head.line, head.col)
    name = _expect_symbol(head.value[1], "a problem name")
    domain = "iropro"
    objects: tuple[tuple[str, str], ...] = ()
    init: State = frozenset()
    goal: State = frozenset()
    for section in items[2:]:
        tag = _expect_symbol(section.value[0], "a section tag")
        if tag == ":domain":
            domain = _expect_symbol(section.value[1], "a domain name")
        elif tag == ":objects":
            objects = tuple(_parse_typed_list(section.value[1:], "element"))
        elif tag == ":init":
            facts = [_parse_atom(n) for n in section.value[1:]]
            init = frozenset(facts)
        elif tag == ":goal":
            if len(section.value) != 2:
                raise PddlSyntaxError(":goal takes one formula",
                                      section.line, section.col)
            pos, neg = _parse_conjunction(section.value[1], allow_not=True)
            if neg:
                raise UnsupportedFeature("negative goals are not supported",
                                         section.line, section.col)
            goal = frozenset(pos)
        else:
            raise UnsupportedFeature(f"section '{tag}' is not supported",
                                     section.line, section.col)
    return PlanningProblem(name=name, domain=domain, objects=objects,
                           init=init, goal=goal)


def parse_plan(text: str) -> list[tuple[str, tuple[str, ...]]]:
    """Parse IPC/FF-style plans: one '(action args...)' per line, with an
    optional leading step index like '0:'."""
    steps = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split(";")[0].strip()
        if not line:
            continue
        if ":" in line.split("(")[0]:
            line = line.split(":", 1)[1].strip()
        if not (line.startswith("(") and line.endswith(")")):
            raise PddlSyntaxError(f"malformed plan step: '{raw.strip()}'",
                                  lineno, 1)
        parts = line[1:-1].split()
        if not parts:
            raise PddlSyntaxError("empty plan step", lineno, 1)
        steps.append((parts[0].lower(), tuple(p.lower() for p in parts[1:])))
    return steps
