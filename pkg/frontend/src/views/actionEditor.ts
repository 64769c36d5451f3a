import { el } from "../dom.js";
import type { ActionModel, Fact } from "../types.js";
import { factKey, sameFact } from "../types.js";

/** Library of toggleable preconditions for a model: everything currently
 * in pre, plus the standard unary/binary conditions over its params. */
export function candidateConditions(model: ActionModel): Fact[] {
  const out: Fact[] = [...model.pre];
  const add = (fact: Fact) => {
    if (!out.some((f) => sameFact(f, fact))) out.push(fact);
  };
  const objectVars = model.params
    .filter(([, type]) => type !== "position" && type !== "element")
    .map(([variable]) => variable);
  const elementVars = model.params.map(([variable]) => variable);
  for (const variable of objectVars) {
    add(["clear", variable]);
    add(["flat", variable]);
    add(["thin", variable]);
    for (const other of elementVars)
      if (other !== variable) add(["stackable", variable, other]);
  }
  return out;
}

export interface ActionEditorHooks {
  onSelect: (name: string) => void;
  onToggle: (action: string, fact: Fact, checked: boolean) => void;
}

export function renderActionEditor(
  actions: ActionModel[],
  selected: string | null,
  hooks: ActionEditorHooks,
): HTMLElement {
  const model = actions.find((a) => a.name === selected) ?? null;
  const picker = el(
    "select",
    {
      testid: "action-select",
      onChange: (event) =>
        hooks.onSelect((event.target as HTMLSelectElement).value),
    },
    actions.map((a) =>
      el("option", {
        text: a.name,
        attrs: a.name === selected ? { value: a.name, selected: "" } : { value: a.name },
      }),
    ),
  );
  const section = el("section", { className: "action-editor" }, [
    el("h2", { text: "Actions" }),
    picker,
  ]);
  if (!model) return section;

  const params = el(
    "div",
    { testid: "action-params" },
    model.params.map(([variable, type]) =>
      el("span", { className: "param", text: `${variable} - ${type}` }),
    ),
  );
  const checklist = el(
    "ul",
    { testid: "condition-checklist" },
    candidateConditions(model).map((fact) => {
      const key = factKey(fact);
      const active = model.pre.some((f) => sameFact(f, fact));
      const box = el("input", {
        testid: `cond-${key}`,
        attrs: active
          ? { type: "checkbox", checked: "" }
          : { type: "checkbox" },
        onChange: (event) =>
          hooks.onToggle(
            model.name,
            fact,
            (event.target as HTMLInputElement).checked,
          ),
      });
      (box as HTMLInputElement).checked = active;
      return el("li", {}, [el("label", {}, [box, ` ${key}`])]);
    }),
  );
  const effects = el("div", { testid: "action-effects" }, [
    el("p", {
      text: `adds: ${model.eff_add.map(factKey).join(", ") || "none"}`,
    }),
    el("p", {
      text: `deletes: ${model.eff_del.map(factKey).join(", ") || "none"}`,
    }),
    el("p", {
      text: `${model.keyframes.length} keyframes, ${model.arm} gripper`,
    }),
  ]);
  section.append(
    params,
    el("h3", { text: "Preconditions" }),
    checklist,
    effects,
  );
  return section;
}
