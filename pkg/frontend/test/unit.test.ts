import { describe, expect, it } from "vitest";

import type { ActionModel } from "../src/types.js";
import { factKey, sameFact } from "../src/types.js";
import { candidateConditions } from "../src/views/actionEditor.js";
import { parseGoalText } from "../src/views/goalBuilder.js";

describe("parseGoalText", () => {
  it("parses comma or semicolon separated facts", () => {
    expect(parseGoalText("on(cube1,B), clear(A)")).toEqual([
      ["on", "cube1", "B"],
      ["clear", "A"],
    ]);
    expect(parseGoalText("on(a, b); thin(c)")).toEqual([
      ["on", "a", "b"],
      ["thin", "c"],
    ]);
  });

  it("ignores empty segments and trims whitespace", () => {
    expect(parseGoalText("  clear( x ) ,, ")).toEqual([["clear", "x"]]);
    expect(parseGoalText("")).toEqual([]);
  });

  it("rejects malformed facts", () => {
    expect(() => parseGoalText("not a fact")).toThrow(/cannot parse/);
  });
});

describe("candidateConditions", () => {
  const model: ActionModel = {
    name: "move",
    params: [
      ["?o", "cube"],
      ["?A", "position"],
      ["?B", "position"],
    ],
    pre: [
      ["on", "?o", "?A"],
      ["clear", "?B"],
    ],
    eff_add: [],
    eff_del: [],
    keyframes: [],
    arm: "suction",
  };

  it("keeps the current preconditions first", () => {
    const facts = candidateConditions(model);
    expect(facts.slice(0, 2)).toEqual(model.pre);
  });

  it("offers the standard refinement library over object params", () => {
    const keys = candidateConditions(model).map(factKey);
    for (const expected of [
      "clear(?o)",
      "flat(?o)",
      "thin(?o)",
      "stackable(?o,?A)",
      "stackable(?o,?B)",
    ])
      expect(keys).toContain(expected);
  });

  it("never lists a fact twice", () => {
    const keys = candidateConditions(model).map(factKey);
    expect(new Set(keys).size).toBe(keys.length);
  });
});

describe("fact helpers", () => {
  it("compares facts structurally", () => {
    expect(sameFact(["on", "a", "b"], ["on", "a", "b"])).toBe(true);
    expect(sameFact(["on", "a", "b"], ["on", "a"])).toBe(false);
    expect(sameFact(["on", "a"], ["clear", "a"])).toBe(false);
  });
});
