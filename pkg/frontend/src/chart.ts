/**
 * Log-log chart construction.
 *
 * Charts are built as a flat list of drawing primitives so the SVG, PDF
 * and PNG writers can share one scene.  Everything is deterministic:
 * no timestamps, no generated ids, fixed geometry.
 */

import { Series } from "./types.js";

export type Element =
  | { kind: "rect"; x: number; y: number; w: number; h: number; fill: string }
  | {
      kind: "line";
      x1: number;
      y1: number;
      x2: number;
      y2: number;
      color: string;
      width: number;
      dashed?: boolean;
    }
  | {
      kind: "polyline";
      points: [number, number][];
      color: string;
      width: number;
      dashed?: boolean;
    }
  | {
      kind: "circle";
      cx: number;
      cy: number;
      r: number;
      color: string;
      filled: boolean;
    }
  | {
      kind: "polygon";
      points: [number, number][];
      color: string;
      filled: boolean;
    }
  | {
      kind: "text";
      x: number;
      y: number;
      text: string;
      size: number;
      color: string;
      anchor: "start" | "middle" | "end";
      rotate?: boolean;
    };

export interface Scene {
  width: number;
  height: number;
  elements: Element[];
}

export interface ChartSpec {
  title: string;
  xLabel: string;
  yLabel: string;
  series: Series[];
  width?: number;
  height?: number;
}

const MARGIN = { left: 66, right: 16, top: 30, bottom: 46 };
const FG = "#222222";

function decadeTicks(lo: number, hi: number): number[] {
  const ticks: number[] = [];
  for (let e = Math.ceil(Math.log10(lo) - 1e-9); 10 ** e <= hi * (1 + 1e-9); e++) {
    ticks.push(10 ** e);
  }
  return ticks;
}

function fmtTick(value: number): string {
  const e = Math.round(Math.log10(value));
  if (e >= -2 && e <= 2) {
    return Number(value.toPrecision(3)).toString();
  }
  return `1e${e}`;
}

/** Build the scene for a log-log chart of the given series. */
export function logLogChart(spec: ChartSpec): Scene {
  const width = spec.width ?? 640;
  const height = spec.height ?? 440;
  const plot = {
    x0: MARGIN.left,
    y0: MARGIN.top,
    x1: width - MARGIN.right,
    y1: height - MARGIN.bottom,
  };
  const xs = spec.series.flatMap((s) => s.x);
  const ys = spec.series.flatMap((s) => s.y).filter((v) => v > 0);
  if (xs.length === 0 || ys.length === 0) {
    throw new Error("nothing to plot: no positive data points");
  }
  const pad = 10 ** 0.1;
  const xLo = Math.min(...xs) / pad;
  const xHi = Math.max(...xs) * pad;
  const yLo = Math.min(...ys) / pad;
  const yHi = Math.max(...ys) * pad;
  const px = (x: number) =>
    plot.x0 +
    ((Math.log10(x) - Math.log10(xLo)) / (Math.log10(xHi) - Math.log10(xLo))) *
      (plot.x1 - plot.x0);
  const py = (y: number) =>
    plot.y1 -
    ((Math.log10(y) - Math.log10(yLo)) / (Math.log10(yHi) - Math.log10(yLo))) *
      (plot.y1 - plot.y0);

  const el: Element[] = [];
  el.push({ kind: "rect", x: 0, y: 0, w: width, h: height, fill: "#ffffff" });

  // grid and ticks
  for (const t of decadeTicks(xLo, xHi)) {
    const x = px(t);
    el.push({ kind: "line", x1: x, y1: plot.y0, x2: x, y2: plot.y1, color: "#dddddd", width: 0.6 });
    el.push({ kind: "line", x1: x, y1: plot.y1, x2: x, y2: plot.y1 + 4, color: FG, width: 1 });
    el.push({ kind: "text", x, y: plot.y1 + 16, text: fmtTick(t), size: 10, color: FG, anchor: "middle" });
    for (let m = 2; m < 10; m++) {
      const xm = t * m;
      if (xm > xHi) break;
      el.push({ kind: "line", x1: px(xm), y1: plot.y1, x2: px(xm), y2: plot.y1 + 2, color: FG, width: 0.6 });
    }
  }
  for (const t of decadeTicks(yLo, yHi)) {
    const y = py(t);
    el.push({ kind: "line", x1: plot.x0, y1: y, x2: plot.x1, y2: y, color: "#dddddd", width: 0.6 });
    el.push({ kind: "line", x1: plot.x0 - 4, y1: y, x2: plot.x0, y2: y, color: FG, width: 1 });
    el.push({ kind: "text", x: plot.x0 - 7, y: y + 3.5, text: fmtTick(t), size: 10, color: FG, anchor: "end" });
    for (let m = 2; m < 10; m++) {
      const ym = t * m;
      if (ym > yHi) break;
      el.push({ kind: "line", x1: plot.x0 - 2, y1: py(ym), x2: plot.x0, y2: py(ym), color: FG, width: 0.6 });
    }
  }

  // frame
  el.push({ kind: "line", x1: plot.x0, y1: plot.y0, x2: plot.x1, y2: plot.y0, color: FG, width: 1 });
  el.push({ kind: "line", x1: plot.x0, y1: plot.y1, x2: plot.x1, y2: plot.y1, color: FG, width: 1 });
  el.push({ kind: "line", x1: plot.x0, y1: plot.y0, x2: plot.x0, y2: plot.y1, color: FG, width: 1 });
  el.push({ kind: "line", x1: plot.x1, y1: plot.y0, x2: plot.x1, y2: plot.y1, color: FG, width: 1 });

  // series
  for (const s of spec.series) {
    const pts: [number, number][] = s.x.map((x, i) => [px(x), py(s.y[i])]);
    if (s.line && pts.length > 1) {
      el.push({ kind: "polyline", points: pts, color: s.color, width: 1.4, dashed: s.dashed });
    }
    if (!s.dashed) {
      for (const [cx, cy] of pts) {
        el.push(...marker(s, cx, cy));
      }
    }
  }

  // labels and legend
  el.push({ kind: "text", x: (plot.x0 + plot.x1) / 2, y: 18, text: spec.title, size: 12, color: FG, anchor: "middle" });
  el.push({ kind: "text", x: (plot.x0 + plot.x1) / 2, y: height - 12, text: spec.xLabel, size: 11, color: FG, anchor: "middle" });
  el.push({ kind: "text", x: 14, y: (plot.y0 + plot.y1) / 2, text: spec.yLabel, size: 11, color: FG, anchor: "middle", rotate: true });

  const legendX = plot.x0 + 10;
  let legendY = plot.y0 + 14;
  for (const s of spec.series) {
    if (s.dashed) {
      el.push({ kind: "line", x1: legendX, y1: legendY - 3, x2: legendX + 16, y2: legendY - 3, color: s.color, width: 1.4, dashed: true });
    } else {
      el.push(...marker(s, legendX + 8, legendY - 3));
    }
    el.push({ kind: "text", x: legendX + 22, y: legendY, text: s.label, size: 9, color: FG, anchor: "start" });
    legendY += 14;
  }
  return { width, height, elements: el };
}

function marker(s: Series, cx: number, cy: number): Element[] {
  const r = 3.4;
  if (s.marker === "circle") {
    return [{ kind: "circle", cx, cy, r, color: s.color, filled: s.filled }];
  }
  if (s.marker === "square") {
    const pts: [number, number][] = [
      [cx - r, cy - r],
      [cx + r, cy - r],
      [cx + r, cy + r],
      [cx - r, cy + r],
    ];
    return [{ kind: "polygon", points: pts, color: s.color, filled: s.filled }];
  }
  const pts: [number, number][] = [
    [cx, cy - r * 1.2],
    [cx + r * 1.1, cy + r * 0.9],
    [cx - r * 1.1, cy + r * 0.9],
  ];
  return [{ kind: "polygon", points: pts, color: s.color, filled: s.filled }];
}
