import type { ApiClient } from "./api.js";
import { el } from "./dom.js";
import { connectEvents } from "./events.js";
import type {
  ActionModel,
  DebugReport,
  DemoStep,
  Fact,
  PlanJson,
  Problem,
  SessionResource,
  TraceJson,
  WorldJson,
} from "./types.js";
import { renderActionEditor } from "./views/actionEditor.js";
import { parseGoalText, renderGoalBuilder } from "./views/goalBuilder.js";
import {
  renderDebugPanel,
  renderPlayer,
  renderTimeline,
} from "./views/planPanel.js";
import { renderScene } from "./views/scene.js";

export interface AppState {
  session: SessionResource | null;
  world: WorldJson | null;
  actions: ActionModel[];
  selectedAction: string | null;
  problems: Problem[];
  selectedProblem: string | null;
  plan: PlanJson | null;
  trace: TraceJson | null;
  playerStep: number;
  debugReport: DebugReport | null;
  solveStatus: "idle" | "solved" | "failed";
  error: string | null;
}

/** The page controller: holds state fetched from the service, re-renders
 * after every interaction, and never trusts itself over the server — all
 * durable state lives behind the API. */
export class App {
  state: AppState = {
    session: null,
    world: null,
    actions: [],
    selectedAction: null,
    problems: [],
    selectedProblem: null,
    plan: null,
    trace: null,
    playerStep: 0,
    debugReport: null,
    solveStatus: "idle",
    error: null,
  };

  private pending: Promise<void> = Promise.resolve();
  private closeEvents: () => void = () => {};

  constructor(
    private root: HTMLElement,
    private api: ApiClient,
    private baseUrl = "",
  ) {}

  /** Serialize every pending interaction; errors land in the banner. */
  private run(task: () => Promise<void>): Promise<void> {
    this.pending = this.pending
      .then(task)
      .then(() => {
        this.state.error = null;
      })
      .catch((err: unknown) => {
        this.state.error = err instanceof Error ? err.message : String(err);
      })
      .then(() => this.render());
    return this.pending;
  }

  /** Resolves once every queued interaction has settled. */
  idle(): Promise<void> {
    return this.pending;
  }

  start(scene: unknown): Promise<void> {
    return this.run(async () => {
      this.state.session = await this.api.createSession(scene);
      this.subscribe();
      await this.refresh();
    });
  }

  /** Reconnect to an existing session, e.g. after a page reload. */
  attach(sid: string): Promise<void> {
    return this.run(async () => {
      this.state.session = await this.api.getSession(sid);
      this.subscribe();
      await this.refresh();
      const first = this.state.problems[0];
      if (first && !this.state.selectedProblem)
        await this.selectProblemInner(first.name);
    });
  }

  dispose(): void {
    this.closeEvents();
  }

  private subscribe(): void {
    this.closeEvents();
    const sid = this.state.session?.id;
    if (!sid) return;
    this.closeEvents = connectEvents(this.baseUrl, sid, (event) => {
      if (event.event === "world_changed")
        void this.run(async () => {
          this.state.world = await this.api.getWorld(sid);
        });
    });
  }

  private sid(): string {
    const sid = this.state.session?.id;
    if (!sid) throw new Error("no session attached");
    return sid;
  }

  private async refresh(): Promise<void> {
    const sid = this.sid();
    this.state.session = await this.api.getSession(sid);
    this.state.world = await this.api.getWorld(sid);
    this.state.actions = await this.api.listActions(sid);
    this.state.problems = await this.api.listProblems(sid);
    if (!this.state.selectedAction && this.state.actions.length > 0)
      this.state.selectedAction = this.state.actions[0].name;
  }

  private async selectProblemInner(name: string): Promise<void> {
    this.state.selectedProblem = name;
    const detail = await this.api.getProblem(this.sid(), name);
    this.state.plan = detail.plan ?? null;
    this.state.trace = detail.trace ?? null;
    this.state.playerStep = 0;
    this.state.solveStatus = detail.plan ? "solved" : "idle";
    this.state.debugReport = null;
  }

  demonstrate(
    name: string,
    objectId: string,
    destId: string,
    arm: string,
  ): Promise<void> {
    return this.run(async () => {
      const script: DemoStep[] = [
        { kind: "grasp", target: objectId, arm },
        { kind: "release_at", target: destId, arm },
      ];
      await this.api.demonstrate(this.sid(), name, script, arm);
      await this.refresh();
      this.state.selectedAction = name;
    });
  }

  toggleCondition(action: string, fact: Fact, checked: boolean): Promise<void> {
    return this.run(async () => {
      const op = checked ? "add_pre" : "remove_pre";
      const model = await this.api.editAction(this.sid(), action, [
        { op, predicate: fact },
      ]);
      this.state.actions = this.state.actions.map((a) =>
        a.name === action ? model : a,
      );
    });
  }

  selectAction(name: string): Promise<void> {
    return this.run(async () => {
      this.state.selectedAction = name;
    });
  }

  selectProblem(name: string): Promise<void> {
    return this.run(() => this.selectProblemInner(name));
  }

  createProblem(name: string, goalText: string): Promise<void> {
    return this.run(async () => {
      const goal = parseGoalText(goalText);
      await this.api.createProblem(this.sid(), name, goal);
      this.state.problems = await this.api.listProblems(this.sid());
      await this.selectProblemInner(name);
    });
  }

  solve(): Promise<void> {
    return this.run(async () => {
      const name = this.state.selectedProblem;
      if (!name) throw new Error("no problem selected");
      const outcome = await this.api.solve(this.sid(), name);
      if (outcome.ok) {
        this.state.plan = outcome.plan;
        this.state.debugReport = null;
        this.state.solveStatus = "solved";
      } else {
        this.state.plan = null;
        this.state.debugReport = outcome.debug_report;
        this.state.solveStatus = "failed";
      }
      this.state.trace = null;
      this.state.playerStep = 0;
    });
  }

  execute(): Promise<void> {
    return this.run(async () => {
      const name = this.state.selectedProblem;
      if (!name) throw new Error("no problem selected");
      const result = await this.api.execute(this.sid(), name);
      this.state.trace = result.trace;
      this.state.world = result.world;
      this.state.playerStep = 0;
    });
  }

  player(direction: "next" | "prev" | "reset"): Promise<void> {
    return this.run(async () => {
      const total = this.state.trace?.steps.length ?? 0;
      if (direction === "reset") this.state.playerStep = 0;
      else if (direction === "next")
        this.state.playerStep = Math.min(total, this.state.playerStep + 1);
      else this.state.playerStep = Math.max(0, this.state.playerStep - 1);
    });
  }

  /** Everything the page knows, for reload-identity checks. */
  snapshot(): Record<string, unknown> {
    return {
      version: this.api.version,
      actions: this.state.actions,
      problems: this.state.problems,
      selectedProblem: this.state.selectedProblem,
      plan: this.state.plan?.steps ?? null,
      traceActions:
        this.state.trace?.steps.map((s) => s.action) ?? null,
    };
  }

  render(): void {
    const s = this.state;
    const header = el("header", {}, [
      el("h1", { text: "iroplan" }),
      el("span", {
        testid: "session-info",
        text: s.session
          ? `session ${s.session.id} v${s.session.version}` +
            (s.session.condition_inference_on
              ? ""
              : " (condition inference off)")
          : "no session",
      }),
    ]);
    const banner = el("div", {
      testid: "error-banner",
      className: s.error ? "banner visible" : "banner",
      text: s.error ?? "",
    });
    const status = el("p", {
      testid: "solve-status",
      text: s.solveStatus,
    });
    const demoForm = el("section", { className: "demo" }, [
      el("h2", { text: "Demonstrate" }),
      el("input", {
        testid: "demo-name",
        attrs: { type: "text", placeholder: "action name" },
      }),
      el("input", {
        testid: "demo-object",
        attrs: { type: "text", placeholder: "object" },
      }),
      el("input", {
        testid: "demo-dest",
        attrs: { type: "text", placeholder: "destination" },
      }),
      el(
        "select",
        { testid: "demo-arm" },
        ["suction", "claw"].map((arm) =>
          el("option", { text: arm, attrs: { value: arm } }),
        ),
      ),
      el("button", {
        testid: "demo-run",
        text: "Record demonstration",
        onClick: () => {
          const read = (id: string) =>
            (
              this.root.querySelector(
                `[data-testid="${id}"]`,
              ) as HTMLInputElement
            ).value;
          void this.demonstrate(
            read("demo-name"),
            read("demo-object"),
            read("demo-dest"),
            read("demo-arm"),
          );
        },
      }),
    ]);
    this.root.replaceChildren(
      header,
      banner,
      renderScene(s.world),
      demoForm,
      renderActionEditor(s.actions, s.selectedAction, {
        onSelect: (name) => void this.selectAction(name),
        onToggle: (action, fact, checked) =>
          void this.toggleCondition(action, fact, checked),
      }),
      renderGoalBuilder(s.problems, s.selectedProblem, {
        onSelectProblem: (name) => void this.selectProblem(name),
        onCreate: (name, goalText) => void this.createProblem(name, goalText),
        onSolve: () => void this.solve(),
        onExecute: () => void this.execute(),
      }),
      status,
      renderTimeline(s.plan, s.playerStep),
      renderPlayer(s.trace, s.playerStep, {
        onNext: () => void this.player("next"),
        onPrev: () => void this.player("prev"),
        onReset: () => void this.player("reset"),
      }),
      renderDebugPanel(s.debugReport),
    );
  }
}
