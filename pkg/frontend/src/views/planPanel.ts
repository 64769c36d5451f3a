import { el } from "../dom.js";
import type { DebugReport, PlanJson, TraceJson } from "../types.js";

export interface PlayerHooks {
  onNext: () => void;
  onPrev: () => void;
  onReset: () => void;
}

/** Ordered plan timeline; the steps already executed by the player are
 * marked done, the next one current. */
export function renderTimeline(
  plan: PlanJson | null,
  playerStep: number,
): HTMLElement {
  const list = el(
    "ol",
    { testid: "plan-timeline" },
    (plan?.steps ?? []).map((step, index) =>
      el("li", {
        testid: `plan-step-${index}`,
        className:
          index < playerStep ? "done" : index === playerStep ? "current" : "",
        text: `${step[0]}(${step.slice(1).join(", ")})`,
      }),
    ),
  );
  return el("section", { className: "plan-panel" }, [
    el("h2", { text: plan ? `Plan (${plan.steps.length} steps)` : "Plan" }),
    list,
  ]);
}

export function renderPlayer(
  trace: TraceJson | null,
  playerStep: number,
  hooks: PlayerHooks,
): HTMLElement {
  const total = trace?.steps.length ?? 0;
  const step = trace && playerStep > 0 ? trace.steps[playerStep - 1] : null;
  return el("section", { className: "player" }, [
    el("h2", { text: "Execution" }),
    el("div", { className: "row" }, [
      el("button", { testid: "player-prev", text: "<", onClick: () => hooks.onPrev() }),
      el("span", { testid: "player-pos", text: `${playerStep} / ${total}` }),
      el("button", { testid: "player-next", text: ">", onClick: () => hooks.onNext() }),
      el("button", {
        testid: "player-reset",
        text: "reset",
        onClick: () => hooks.onReset(),
      }),
    ]),
    el("p", {
      testid: "player-action",
      text: step
        ? `${step.action[0]}(${step.action.slice(1).join(", ")})` +
          (step.flags.length ? ` [${step.flags.join(", ")}]` : "")
        : "not started",
    }),
  ]);
}

export function renderDebugPanel(report: DebugReport | null): HTMLElement {
  return el("section", { className: "debug-panel" }, [
    el("h2", { text: "Debug report" }),
    el(
      "ul",
      { testid: "debug-hints" },
      (report?.hints ?? []).map((hint) =>
        el("li", {
          testid: "debug-hint",
          attrs: { "data-category": hint.category },
          text: `[${hint.category}] ${hint.message}`,
        }),
      ),
    ),
  ]);
}
