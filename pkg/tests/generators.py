"""Seeded random generators shared by the property and acceptance tests."""

import random
import string

from iroplan.knowledge import (
    ActionModel,
    KnowledgeBase,
    P,
    Predicate,
    TypeHierarchy,
)
from iroplan.pddl import PlanningProblem


def random_name(rng: random.Random, prefix: str) -> str:
    return prefix + "".join(rng.choices(string.ascii_lowercase, k=4))


def random_hierarchy(rng: random.Random) -> TypeHierarchy:
    h = TypeHierarchy.default()
    for _ in range(rng.randint(0, 3)):
        parent = rng.choice(sorted(h.types))
        h = h.with_type(random_name(rng, "t"), parent)
    return h


def random_knowledge_base(rng: random.Random) -> KnowledgeBase:
    """A random but well-formed knowledge base for round-trip tests."""
    hierarchy = random_hierarchy(rng)
    types = sorted(hierarchy.types)
    signatures = {}
    for _ in range(rng.randint(1, 5)):
        arity = rng.randint(0, 3)
        sig = tuple((f"?x{i}", rng.choice(types)) for i in range(arity))
        signatures[random_name(rng, "p")] = sig
    pred_names = sorted(signatures)
    actions = {}
    for _ in range(rng.randint(0, 4)):
        n_params = rng.randint(1, 4)
        params = tuple((f"?v{i}", rng.choice(types)) for i in range(n_params))
        variables = [v for v, _ in params]

        def atoms(k):
            out = set()
            for _ in range(k):
                name = rng.choice(pred_names)
                arity = len(signatures[name])
                out.add(Predicate(name, tuple(rng.choice(variables)
                                              for _ in range(arity))))
            return frozenset(out)

        add = atoms(rng.randint(0, 3))
        # emitted PDDL cannot express the same atom added and deleted
        dele = frozenset(a for a in atoms(rng.randint(0, 3)) if a not in add)
        model = ActionModel(name=random_name(rng, "a"), params=params,
                            pre=atoms(rng.randint(0, 3)),
                            eff_add=add, eff_del=dele)
        actions[model.name] = model
    return KnowledgeBase(name=random_name(rng, "d"), hierarchy=hierarchy,
                         signatures=signatures, actions=actions)


def random_problem(rng: random.Random, kb: KnowledgeBase) -> PlanningProblem:
    types = sorted(kb.hierarchy.types)
    objects = tuple(sorted((random_name(rng, "o"), rng.choice(types))
                           for _ in range(rng.randint(1, 6))))
    names = [n for n, _ in objects]
    pred_names = sorted(kb.signatures)

    def facts(k):
        out = set()
        for _ in range(k):
            name = rng.choice(pred_names)
            arity = len(kb.signatures[name])
            out.add(Predicate(name, tuple(rng.choice(names)
                                          for _ in range(arity))))
        return frozenset(out)

    return PlanningProblem(name=random_name(rng, "q"), domain=kb.name,
                           objects=objects, init=facts(rng.randint(0, 6)),
                           goal=facts(rng.randint(0, 4)))


# --- small tabletop instances for the planner soundness suite ----------------

def perturbed_move_kb(rng: random.Random) -> KnowledgeBase:
    """A pick-and-place operator with random mutations: preconditions
    dropped or added, effects removed.  The resulting operator may be
    nonsensical; soundness properties must hold regardless."""
    pre = {P("on", "?o", "?a"), P("clear", "?o"), P("clear", "?b"),
           P("stackable", "?o", "?b")}
    eff_add = {P("on", "?o", "?b"), P("clear", "?a")}
    eff_del = {P("on", "?o", "?a"), P("clear", "?b")}
    for _ in range(rng.randint(0, 2)):
        mutation = rng.randint(0, 3)
        if mutation == 0 and len(pre) > 1:
            pre.discard(rng.choice(sorted(pre)))
        elif mutation == 1:
            pre.add(rng.choice([P("flat", "?o"), P("thin", "?o"),
                                P("clear", "?a")]))
        elif mutation == 2 and eff_del:
            eff_del.discard(rng.choice(sorted(eff_del)))
        elif mutation == 3 and len(eff_add) > 1:
            eff_add.discard(rng.choice(sorted(eff_add)))
    model = ActionModel(
        name="move",
        params=(("?o", "object"), ("?a", "element"), ("?b", "element")),
        pre=frozenset(pre), eff_add=frozenset(eff_add),
        eff_del=frozenset(eff_del))
    return KnowledgeBase().with_action(model)


def random_tabletop_problem(rng: random.Random) -> PlanningProblem:
    """Up to 4 objects on up to 4 positions, random stacking, random goal."""
    n_pos = rng.randint(1, 4)
    n_obj = rng.randint(1, 4)
    positions = [f"p{i}" for i in range(1, n_pos + 1)]
    objs = [f"o{i}" for i in range(1, n_obj + 1)]
    objects = tuple([(p, "position") for p in positions] +
                    [(o, rng.choice(["base", "cube", "roof"]))
                     for o in objs])
    types = dict(objects)

    init = set()
    occupied = set()
    placed = []
    for o in objs:
        supports = [p for p in positions if p not in occupied] + placed
        supports = [s for s in supports if s not in occupied]
        if not supports:
            break
        support = rng.choice(supports)
        init.add(P("on", o, support))
        occupied.add(support)
        placed.append(o)
    for name in positions + objs:
        if name not in occupied:
            init.add(P("clear", name))
    for o in objs:
        typ = types[o]
        if typ in ("base", "cube"):
            init.add(P("flat", o))
        if typ in ("cube", "roof"):
            init.add(P("thin", o))
    flat = {o for o in objs if P("flat", o) in init}
    for o in objs:
        for target in positions + objs:
            if target != o and (target in positions or target in flat):
                init.add(P("stackable", o, target))

    goal = set()
    for o in rng.sample(objs, rng.randint(1, len(objs))):
        target = rng.choice(positions + [x for x in objs if x != o])
        goal.add(P("on", o, target))
    return PlanningProblem(name="random", objects=objects,
                           init=frozenset(init), goal=frozenset(goal))
