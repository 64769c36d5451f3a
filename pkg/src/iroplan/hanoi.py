"""Tower of Hanoi as a tabletop domain: pegs are positions, disks are flat
slabs, and the size rule lives in the stackable facts of the problem."""

from __future__ import annotations

from .knowledge import ActionModel, KnowledgeBase, P, Predicate
from .pddl import PlanningProblem

DISK_HEIGHT = 0.03
PEG_SPACING = 0.12


def make_scene(disks: int = 3) -> dict:
    """Scene dict with 3 pegs and the full stack on peg 1 (disk 1 largest)."""
    positions = [{"name": f"p{i}", "pose": [0.40, (i - 2) * PEG_SPACING, 0.0]}
                 for i in (1, 2, 3)]
    objects = []
    for i in range(1, disks + 1):
        side = 0.08 + 0.02 * (disks - i + 1)
        support = "p1" if i == 1 else f"d{i - 1}"
        objects.append({"name": f"d{i}",
                        "bbox": [round(side, 3), round(side, 3), DISK_HEIGHT],
                        "on": support})
    return {"positions": positions, "objects": objects,
            "config": {"proximity_threshold_d": 0.05,
                       "occlude_stacked": False}}


def move_schema(name: str = "move") -> ActionModel:
    """The generic pick-and-place operator after user generalisation."""
    return ActionModel(
        name=name,
        params=(("?o", "object"), ("?a", "element"), ("?b", "element")),
        pre=frozenset({P("on", "?o", "?a"), P("clear", "?o"),
                       P("clear", "?b"), P("stackable", "?o", "?b")}),
        eff_add=frozenset({P("on", "?o", "?b"), P("clear", "?a")}),
        eff_del=frozenset({P("on", "?o", "?a"), P("clear", "?b")}),
    )


def make_knowledge_base() -> KnowledgeBase:
    return KnowledgeBase().with_action(move_schema())


def make_problem(disks: int = 3, name: str = "hanoi") -> PlanningProblem:
    """Initial stack on p1, goal stack on p3.

    The stackable facts carry the puzzle rule: a disk may only go onto a
    larger disk or a peg, so the perceived 'anything flat' default is
    deliberately overridden here.
    """
    pegs = ["p1", "p2", "p3"]
    names = [f"d{i}" for i in range(1, disks + 1)]
    objects = tuple([(p, "position") for p in pegs] +
                    [(d, "base") for d in names])
    init: set[Predicate] = set()
    for i, d in enumerate(names):
        support = "p1" if i == 0 else names[i - 1]
        init.add(P("on", d, support))
        init.add(P("flat", d))
        for peg in pegs:
            init.add(P("stackable", d, peg))
        for larger in names[:i]:
            init.add(P("stackable", d, larger))
    init.add(P("clear", names[-1]))
    init.add(P("clear", "p2"))
    init.add(P("clear", "p3"))
    goal = {P("on", names[0], "p3")}
    for i in range(1, disks):
        goal.add(P("on", names[i], names[i - 1]))
    return PlanningProblem(name=f"{name}{disks}", objects=objects,
                           init=frozenset(init), goal=frozenset(goal))
