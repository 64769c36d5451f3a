/** JSON payload shapes of the iroplan HTTP API. */

/** A fact is a predicate name followed by its arguments. */
export type Fact = string[];

export interface Keyframe {
  gripper: string;
  relative_to: number | string | null;
  offset: number[];
}

export interface ActionModel {
  name: string;
  params: [string, string][];
  pre: Fact[];
  eff_add: Fact[];
  eff_del: Fact[];
  keyframes: Keyframe[];
  arm: string;
}

export interface Problem {
  name: string;
  domain: string;
  objects: [string, string][];
  init: Fact[];
  goal: Fact[];
}

export interface PlanJson {
  steps: string[][];
  stats: Record<string, unknown>;
}

export interface TraceStep {
  action: string[];
  keyframe_poses: number[][];
  world_diff: { moved?: string; to?: string; to_pose?: number[] };
  mental_diff: Record<string, unknown>;
  flags: string[];
}

export interface TraceJson {
  steps: TraceStep[];
}

export interface WorldPosition {
  name: string;
  pose: number[];
}

export interface WorldObject {
  name: string;
  pose: number[];
  bbox: number[];
  on: string;
}

export interface WorldJson {
  positions: WorldPosition[];
  objects: WorldObject[];
  config: Record<string, unknown>;
  grippers: Record<string, string>;
}

export interface SessionResource {
  schema_version: number;
  id: string;
  version: number;
  condition_inference_on: boolean;
  has_world: boolean;
  actions: string[];
  problems: string[];
}

export interface DebugHint {
  category: string;
  rule: string;
  message: string;
  subjects: string[];
}

export interface DebugReport {
  hints: DebugHint[];
}

export interface EditOp {
  op: string;
  predicate?: Fact;
  polarity?: string;
  var?: string;
  new_type?: string;
  new_name?: string;
}

export interface DemoStep {
  kind: string;
  target: string;
  arm?: string;
}

export type SolveOutcome =
  | { ok: true; plan: PlanJson }
  | { ok: false; reason: string; detail: string; debug_report: DebugReport };

export function factKey(fact: Fact): string {
  return `${fact[0]}(${fact.slice(1).join(",")})`;
}

export function sameFact(a: Fact, b: Fact): boolean {
  return a.length === b.length && a.every((part, i) => part === b[i]);
}
