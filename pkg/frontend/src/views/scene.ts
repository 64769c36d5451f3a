import { svgEl } from "../dom.js";
import type { WorldJson, WorldObject } from "../types.js";

const VIEW_W = 440;
const VIEW_H = 240;
const LIFT_PER_LEVEL = 14; // vertical offset per stacking level, px

function toPx(pose: number[]): { x: number; y: number } {
  // Table frame: pose[0] is distance from the robot, pose[1] lateral.
  return {
    x: (pose[1] + 0.25) * 800,
    y: VIEW_H - 60 - (pose[0] - 0.3) * 400,
  };
}

function stackDepth(obj: WorldObject, world: WorldJson): number {
  const supports = new Map(world.objects.map((o) => [o.name, o.on]));
  let depth = 0;
  let on = obj.on;
  while (supports.has(on)) {
    depth += 1;
    on = supports.get(on)!;
  }
  return depth;
}

const FILL: Record<string, string> = {
  base: "#8d6e63",
  cube: "#42a5f5",
  roof: "#ef5350",
};

function kindOf(obj: WorldObject): string {
  const [w, l, h] = obj.bbox;
  if (h <= 0.04) return "base";
  if (Math.min(w, l, h) <= 0.03) return "roof";
  return "cube";
}

/** Top-down 2.5-D view: positions as pads, objects as blocks whose
 * vertical offset and shadow suggest stacking height. */
export function renderScene(world: WorldJson | null): Element {
  const svg = svgEl("svg", {
    "data-testid": "scene",
    viewBox: `0 0 ${VIEW_W} ${VIEW_H}`,
    width: String(VIEW_W),
    height: String(VIEW_H),
  });
  if (!world) return svg;
  for (const pos of world.positions) {
    const { x, y } = toPx(pos.pose);
    svg.append(
      svgEl("rect", {
        "data-testid": `scene-pos-${pos.name}`,
        x: String(x - 28),
        y: String(y - 20),
        width: "56",
        height: "40",
        rx: "6",
        fill: "#eceff1",
        stroke: "#90a4ae",
      }),
      svgEl("text", {
        x: String(x),
        y: String(y + 32),
        "text-anchor": "middle",
        "font-size": "11",
        fill: "#607d8b",
      }),
    );
    svg.lastElementChild!.textContent = pos.name;
  }
  const sorted = [...world.objects].sort(
    (a, b) => stackDepth(a, world) - stackDepth(b, world),
  );
  for (const obj of sorted) {
    const { x, y } = toPx(obj.pose);
    const lift = stackDepth(obj, world) * LIFT_PER_LEVEL;
    const w = Math.max(obj.bbox[0] * 300, 16);
    const h = Math.max(obj.bbox[1] * 300, 16);
    svg.append(
      svgEl("rect", {
        x: String(x - w / 2 + 3),
        y: String(y - h / 2 - lift + 3),
        width: String(w),
        height: String(h),
        rx: "3",
        fill: "rgba(0,0,0,0.18)",
      }),
      svgEl("rect", {
        "data-testid": `scene-obj-${obj.name}`,
        "data-on": obj.on,
        x: String(x - w / 2),
        y: String(y - h / 2 - lift),
        width: String(w),
        height: String(h),
        rx: "3",
        fill: FILL[kindOf(obj)] ?? "#9e9e9e",
        stroke: "#37474f",
      }),
    );
    const label = svgEl("text", {
      x: String(x),
      y: String(y - h / 2 - lift - 4),
      "text-anchor": "middle",
      "font-size": "10",
      fill: "#263238",
    });
    label.textContent = obj.name;
    svg.append(label);
  }
  return svg;
}
