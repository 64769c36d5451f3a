import type {
  ActionModel,
  DebugReport,
  DemoStep,
  EditOp,
  Fact,
  PlanJson,
  Problem,
  SessionResource,
  SolveOutcome,
  TraceJson,
  WorldJson,
} from "./types.js";

export type FetchLike = (url: string, init?: RequestInit) => Promise<Response>;

export class ApiError extends Error {
  constructor(public status: number, public payload: Record<string, unknown>) {
    super(`api error ${status}: ${JSON.stringify(payload)}`);
  }
}

/**
 * Thin typed client for the session API.  Tracks the last seen session
 * version and sends it with every mutating PUT so concurrent edits from
 * another tab surface as 409 conflicts instead of silent overwrites.
 */
export class ApiClient {
  version = 0;

  constructor(
    private baseUrl: string,
    private fetchFn: FetchLike = (url, init) => fetch(url, init),
  ) {}

  private async request(
    method: string,
    path: string,
    body?: unknown,
  ): Promise<Record<string, unknown>> {
    const res = await this.fetchFn(this.baseUrl + path, {
      method,
      headers: { "content-type": "application/json" },
      body: body === undefined ? undefined : JSON.stringify(body),
    });
    const payload = (await res.json().catch(() => ({}))) as Record<
      string,
      unknown
    >;
    if (!res.ok) throw new ApiError(res.status, payload);
    if (typeof payload.version === "number") this.version = payload.version;
    return payload;
  }

  async createSession(scene: unknown): Promise<SessionResource> {
    return (await this.request(
      "POST",
      "/sessions",
      { scene },
    )) as unknown as SessionResource;
  }

  async getSession(sid: string): Promise<SessionResource> {
    return (await this.request(
      "GET",
      `/sessions/${sid}`,
    )) as unknown as SessionResource;
  }

  async getWorld(sid: string): Promise<WorldJson | null> {
    const payload = await this.request("GET", `/sessions/${sid}/world`);
    return payload.world as WorldJson | null;
  }

  async demonstrate(
    sid: string,
    name: string,
    script: DemoStep[],
    arm = "suction",
  ): Promise<ActionModel> {
    const payload = await this.request(
      "POST",
      `/sessions/${sid}/demonstrations`,
      { name, arm, script },
    );
    return payload.action as ActionModel;
  }

  async listActions(sid: string): Promise<ActionModel[]> {
    const payload = await this.request("GET", `/sessions/${sid}/actions`);
    return payload.actions as ActionModel[];
  }

  async editAction(
    sid: string,
    name: string,
    edits: EditOp[],
  ): Promise<ActionModel> {
    const payload = await this.request(
      "PUT",
      `/sessions/${sid}/actions/${name}`,
      { edits, version: this.version },
    );
    return payload.action as ActionModel;
  }

  async createProblem(
    sid: string,
    name: string,
    goal: Fact[],
  ): Promise<Problem> {
    const payload = await this.request("POST", `/sessions/${sid}/problems`, {
      name,
      goal,
    });
    return payload.problem as Problem;
  }

  async getProblem(
    sid: string,
    name: string,
  ): Promise<{ problem: Problem; plan?: PlanJson; trace?: TraceJson }> {
    const payload = await this.request(
      "GET",
      `/sessions/${sid}/problems/${name}`,
    );
    return {
      problem: payload.problem as Problem,
      plan: payload.plan as PlanJson | undefined,
      trace: payload.trace as TraceJson | undefined,
    };
  }

  async listProblems(sid: string): Promise<Problem[]> {
    const payload = await this.request("GET", `/sessions/${sid}/problems`);
    return payload.problems as Problem[];
  }

  async solve(
    sid: string,
    name: string,
    strategy = "greedy_ff",
  ): Promise<SolveOutcome> {
    try {
      const payload = await this.request(
        "POST",
        `/sessions/${sid}/problems/${name}/solve`,
        { strategy },
      );
      return { ok: true, plan: payload.plan as PlanJson };
    } catch (err) {
      if (err instanceof ApiError && err.status === 422) {
        if (typeof err.payload.version === "number")
          this.version = err.payload.version;
        return {
          ok: false,
          reason: String(err.payload.reason ?? "unknown"),
          detail: String(err.payload.detail ?? ""),
          debug_report: (err.payload.debug_report ?? {
            hints: [],
          }) as DebugReport,
        };
      }
      throw err;
    }
  }

  async execute(
    sid: string,
    name: string,
  ): Promise<{ trace: TraceJson; world: WorldJson }> {
    const payload = await this.request(
      "POST",
      `/sessions/${sid}/problems/${name}/execute`,
    );
    return {
      trace: payload.trace as TraceJson,
      world: payload.world as WorldJson,
    };
  }

  async getProject(sid: string): Promise<Record<string, unknown>> {
    const payload = await this.request("GET", `/sessions/${sid}/project`);
    return payload.project as Record<string, unknown>;
  }
}
