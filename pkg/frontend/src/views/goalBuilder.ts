import { el } from "../dom.js";
import type { Fact, Problem } from "../types.js";
import { factKey } from "../types.js";

/** Parse "on(cube1,B), clear(A)" into fact lists; throws on bad syntax. */
export function parseGoalText(text: string): Fact[] {
  const out: Fact[] = [];
  for (const raw of text.split(/[;,]\s*(?![^(]*\))/)) {
    const part = raw.trim();
    if (!part) continue;
    const match = /^(\w+)\(([^)]*)\)$/.exec(part);
    if (!match) throw new Error(`cannot parse goal fact '${part}'`);
    const args = match[2]
      .split(",")
      .map((a) => a.trim())
      .filter((a) => a.length > 0);
    out.push([match[1], ...args]);
  }
  return out;
}

export interface GoalBuilderHooks {
  onSelectProblem: (name: string) => void;
  onCreate: (name: string, goalText: string) => void;
  onSolve: () => void;
  onExecute: () => void;
}

export function renderGoalBuilder(
  problems: Problem[],
  selected: string | null,
  hooks: GoalBuilderHooks,
): HTMLElement {
  const picker = el(
    "select",
    {
      testid: "problem-select",
      onChange: (event) =>
        hooks.onSelectProblem((event.target as HTMLSelectElement).value),
    },
    problems.map((p) =>
      el("option", {
        text: p.name,
        attrs:
          p.name === selected
            ? { value: p.name, selected: "" }
            : { value: p.name },
      }),
    ),
  );
  const nameInput = el("input", {
    testid: "problem-name",
    attrs: { type: "text", placeholder: "problem name" },
  });
  const goalInput = el("input", {
    testid: "goal-facts",
    attrs: { type: "text", placeholder: "on(cube1,B), clear(A)" },
  });
  const current = problems.find((p) => p.name === selected) ?? null;
  const goalList = el(
    "ul",
    { testid: "goal-list" },
    (current?.goal ?? []).map((fact) =>
      el("li", { className: "goal-fact", text: factKey(fact) }),
    ),
  );
  return el("section", { className: "goal-builder" }, [
    el("h2", { text: "Problems" }),
    picker,
    goalList,
    el("div", { className: "row" }, [
      nameInput,
      goalInput,
      el("button", {
        testid: "create-problem",
        text: "Create problem",
        onClick: () =>
          hooks.onCreate(
            (nameInput as HTMLInputElement).value,
            (goalInput as HTMLInputElement).value,
          ),
      }),
    ]),
    el("div", { className: "row" }, [
      el("button", { testid: "solve", text: "Solve", onClick: () => hooks.onSolve() }),
      el("button", {
        testid: "execute",
        text: "Execute",
        onClick: () => hooks.onExecute(),
      }),
    ]),
  ]);
}
