/**
 * Figure renderers. Each takes a parsed CSV table and returns a complete
 * SVG document string; same table, same bytes. Trials are aggregated here
 * (median line, interquartile band) so the CSV can stay per-trial raw data.
 */

import { CsvTable, cellNumber, columnIndex, requireKind } from "./csv.js";
import { Scale, linearScale, logScale, quantile, tickLabel } from "./scale.js";
import { points, svgDoc, tag, text } from "./svg.js";

export class EmptyDataError extends Error {}

export const FIGURE_KINDS = ["fig6", "fig7", "fig8", "fig9"] as const;
export type FigureKind = (typeof FIGURE_KINDS)[number];

const WIDTH = 800;
const HEIGHT = 500;
const PLOT = { left: 70, right: 620, top: 45, bottom: 445 };

const PALETTE = [
  "#1f77b4", "#d62728", "#2ca02c", "#9467bd",
  "#ff7f0e", "#8c564b", "#e377c2", "#17becf",
];

function requireRows(table: CsvTable): void {
  if (table.rows.length === 0) {
    throw new EmptyDataError(`${table.path}: no data rows`);
  }
}

export function renderKind(kind: FigureKind, table: CsvTable): string {
  switch (kind) {
    case "fig6":
      return renderFig6(table);
    case "fig7":
      return renderFig7(table);
    case "fig8":
      return renderFig8(table);
    case "fig9":
      return renderFig9(table);
  }
}

// ---------------------------------------------------------------------------
// shared sweep machinery (fig7 / fig8)
// ---------------------------------------------------------------------------

interface CurvePoint {
  k: number;
  median: number;
  q1: number;
  q3: number;
}

function collectCurves(
  table: CsvTable,
  groupCols: string[],
): Map<string, CurvePoint[]> {
  const kCol = columnIndex(table, "k");
  const vCol = columnIndex(table, "nmse_f");
  const gCols = groupCols.map((c) => columnIndex(table, c));
  const samples = new Map<string, Map<number, number[]>>();
  for (let r = 0; r < table.rows.length; r++) {
    const key = gCols.map((c) => table.rows[r][c]).join("|");
    const k = cellNumber(table, r, kCol);
    const v = cellNumber(table, r, vCol);
    let perK = samples.get(key);
    if (!perK) samples.set(key, (perK = new Map()));
    let vals = perK.get(k);
    if (!vals) perK.set(k, (vals = []));
    vals.push(v);
  }
  const curves = new Map<string, CurvePoint[]>();
  for (const key of [...samples.keys()].sort()) {
    const perK = samples.get(key)!;
    const pts = [...perK.keys()]
      .sort((a, b) => a - b)
      .map((k) => {
        const vals = perK.get(k)!;
        return {
          k,
          median: quantile(vals, 0.5),
          q1: quantile(vals, 0.25),
          q3: quantile(vals, 0.75),
        };
      });
    curves.set(key, pts);
  }
  return curves;
}

function decadeBounds(values: number[]): [number, number] {
  const finite = values.filter((v) => Number.isFinite(v) && v > 0);
  if (finite.length === 0) return [1e-1, 1e1];
  const lo = Math.pow(10, Math.floor(Math.log10(Math.min(...finite))));
  const hi = Math.pow(10, Math.ceil(Math.log10(Math.max(...finite))));
  return [lo, hi === lo ? lo * 10 : hi];
}

function xAxis(scale: Scale, ticks: number[]): string[] {
  const body = [
    tag("line", {
      x1: PLOT.left, y1: PLOT.bottom, x2: PLOT.right, y2: PLOT.bottom,
      stroke: "black",
    }),
  ];
  const every = Math.max(1, Math.ceil(ticks.length / 12));
  ticks.forEach((t, i) => {
    const x = scale.map(t);
    body.push(tag("line", { x1: x, y1: PLOT.bottom, x2: x, y2: PLOT.bottom + 4, stroke: "black" }));
    if (i % every === 0) {
      body.push(text(x, PLOT.bottom + 16, tickLabel(t), { "text-anchor": "middle" }));
    }
  });
  return body;
}

function yAxisLog(scale: Scale): string[] {
  const body = [
    tag("line", {
      x1: PLOT.left, y1: PLOT.top, x2: PLOT.left, y2: PLOT.bottom,
      stroke: "black",
    }),
  ];
  for (const t of scale.ticks) {
    const y = scale.map(t);
    if (y < PLOT.top - 1 || y > PLOT.bottom + 1) continue;
    body.push(
      tag("line", { x1: PLOT.left, y1: y, x2: PLOT.right, y2: y, stroke: "#dddddd" }),
      text(PLOT.left - 6, y + 4, tickLabel(t), { "text-anchor": "end" }),
    );
  }
  return body;
}

function renderSweep(
  table: CsvTable,
  groupCols: string[],
  labelOf: (parts: string[]) => string,
  title: string,
): string {
  requireRows(table);
  const curves = collectCurves(table, groupCols);
  const allK = [...new Set([...curves.values()].flatMap((pts) => pts.map((p) => p.k)))].sort(
    (a, b) => a - b,
  );
  const allV = [...curves.values()].flatMap((pts) => pts.flatMap((p) => [p.median, p.q1, p.q3]));
  const [vLo, vHi] = decadeBounds(allV);
  const xs = linearScale(allK[0], allK[allK.length - 1], PLOT.left, PLOT.right);
  const ys = logScale(vLo, vHi, PLOT.bottom, PLOT.top);
  // non-finite medians (diverged cells) are pinned to the top of the axis
  const yOf = (v: number) =>
    Number.isFinite(v) ? Math.min(PLOT.bottom, Math.max(PLOT.top, ys.map(v))) : PLOT.top;

  const body = [...yAxisLog(ys), ...xAxis(xs, allK)];
  body.push(
    text((PLOT.left + PLOT.right) / 2, PLOT.bottom + 34, "K (pilot beams)", {
      "text-anchor": "middle",
    }),
    text(16, (PLOT.top + PLOT.bottom) / 2, "NMSE of F", {
      "text-anchor": "middle",
      transform: `rotate(-90 16 ${(PLOT.top + PLOT.bottom) / 2})`,
    }),
    text((PLOT.left + PLOT.right) / 2, 24, title, { "text-anchor": "middle", "font-size": 14 }),
  );

  let ci = 0;
  for (const [key, pts] of curves) {
    const color = PALETTE[ci % PALETTE.length];
    const finiteBand = pts.filter((p) => Number.isFinite(p.q1) && Number.isFinite(p.q3));
    if (finiteBand.length >= 2) {
      const ring: Array<[number, number]> = [
        ...finiteBand.map((p): [number, number] => [xs.map(p.k), yOf(p.q3)]),
        ...[...finiteBand].reverse().map((p): [number, number] => [xs.map(p.k), yOf(p.q1)]),
      ];
      body.push(
        tag("polygon", { class: "iqr", points: points(ring), fill: color, "fill-opacity": "0.15", stroke: "none" }),
      );
    }
    const finite = pts.filter((p) => Number.isFinite(p.median));
    if (finite.length >= 1) {
      body.push(
        tag("polyline", {
          class: "median",
          points: points(finite.map((p) => [xs.map(p.k), yOf(p.median)])),
          fill: "none",
          stroke: color,
          "stroke-width": 1.5,
        }),
      );
      for (const p of finite) {
        body.push(tag("circle", { cx: xs.map(p.k), cy: yOf(p.median), r: 2.5, fill: color }));
      }
    }
    for (const p of pts.filter((q) => !Number.isFinite(q.median))) {
      // diverged marker: open triangle pinned to the axis top
      const x = xs.map(p.k);
      body.push(
        tag("polygon", {
          class: "diverged",
          points: points([[x - 4, PLOT.top + 7], [x + 4, PLOT.top + 7], [x, PLOT.top]]),
          fill: "none",
          stroke: color,
        }),
      );
    }
    const ly = PLOT.top + 14 * ci;
    body.push(
      tag("line", { x1: PLOT.right + 12, y1: ly, x2: PLOT.right + 34, y2: ly, stroke: color, "stroke-width": 2 }),
      text(PLOT.right + 40, ly + 4, labelOf(key.split("|"))),
    );
    ci++;
  }
  return svgDoc(WIDTH, HEIGHT, body);
}

export function renderFig7(table: CsvTable): string {
  requireKind(table, "fig7");
  return renderSweep(
    table,
    ["scheme", "l"],
    ([scheme, l]) => `${scheme} L=${l}`,
    "Calibration error vs measurement count",
  );
}

export function renderFig8(table: CsvTable): string {
  requireKind(table, "fig8");
  return renderSweep(
    table,
    ["scheme", "noise_mode", "l"],
    ([scheme, mode, l]) => `${scheme} ${mode}-noise L=${l}`,
    "Calibration error by noise source",
  );
}

// ---------------------------------------------------------------------------
// fig6: complex-plane scatter of true vs estimated coefficients
// ---------------------------------------------------------------------------

export function renderFig6(table: CsvTable): string {
  requireKind(table, "fig6");
  requireRows(table);
  const cols = ["true_re", "true_im", "est_re", "est_im"].map((c) => columnIndex(table, c));
  const vals: number[][] = table.rows.map((_, r) => cols.map((c) => cellNumber(table, r, c)));
  const m = Math.max(...vals.flat().map(Math.abs)) * 1.15 || 1;
  // one shared scale for both axes keeps the aspect ratio equal
  const side = { left: 170, right: 590, top: 40, bottom: 460 };
  const sx = linearScale(-m, m, side.left, side.right);
  const sy = linearScale(-m, m, side.bottom, side.top);

  const body: string[] = [
    tag("line", { x1: side.left, y1: sy.map(0), x2: side.right, y2: sy.map(0), stroke: "#bbbbbb" }),
    tag("line", { x1: sx.map(0), y1: side.top, x2: sx.map(0), y2: side.bottom, stroke: "#bbbbbb" }),
  ];
  for (const t of sx.ticks) {
    body.push(
      text(sx.map(t), side.bottom + 16, tickLabel(t), { "text-anchor": "middle" }),
      text(side.left - 8, sy.map(t) + 4, tickLabel(t), { "text-anchor": "end" }),
    );
  }
  for (const [tre, tim] of vals.map((v) => [v[0], v[1]])) {
    body.push(
      tag("circle", {
        class: "truth",
        cx: sx.map(tre), cy: sy.map(tim), r: 5,
        fill: "none", stroke: "#1f77b4", "stroke-width": 1.5,
      }),
    );
  }
  for (const [ere, eim] of vals.map((v) => [v[2], v[3]])) {
    const x = sx.map(ere);
    const y = sy.map(eim);
    body.push(
      tag("path", {
        class: "estimate",
        d: `M${x - 3} ${y - 3}L${x + 3} ${y + 3}M${x - 3} ${y + 3}L${x + 3} ${y - 3}`
          .replace(/(-?\d+\.?\d*)/g, (s) => String(Math.round(Number(s) * 100) / 100)),
        stroke: "#d62728", "stroke-width": 1.5, fill: "none",
      }),
    );
  }
  body.push(
    text((side.left + side.right) / 2, 24, "Estimated vs true calibration coefficients", {
      "text-anchor": "middle", "font-size": 14,
    }),
    tag("circle", { cx: side.right + 20, cy: side.top + 10, r: 5, fill: "none", stroke: "#1f77b4" }),
    text(side.right + 32, side.top + 14, "true"),
    text(side.right + 16, side.top + 34, "×", { fill: "#d62728", "font-size": 14 }),
    text(side.right + 32, side.top + 34, "estimated"),
    text((side.left + side.right) / 2, side.bottom + 34, "real part", { "text-anchor": "middle" }),
    text(side.left - 44, (side.top + side.bottom) / 2, "imaginary part", {
      "text-anchor": "middle",
      transform: `rotate(-90 ${side.left - 44} ${(side.top + side.bottom) / 2})`,
    }),
  );
  return svgDoc(WIDTH, HEIGHT, body);
}

// ---------------------------------------------------------------------------
// fig9: downlink-error heatmap over the (NMSE_F, NMSE_UL) grid
// ---------------------------------------------------------------------------

export function renderFig9(table: CsvTable): string {
  requireKind(table, "fig9");
  requireRows(table);
  const fCol = columnIndex(table, "nmse_f");
  const uCol = columnIndex(table, "nmse_ul");
  const mCol = columnIndex(table, "nmse_dl_mc");
  const cells = table.rows.map((_, r) => ({
    f: cellNumber(table, r, fCol),
    u: cellNumber(table, r, uCol),
    v: cellNumber(table, r, mCol),
  }));
  const fs = [...new Set(cells.map((c) => c.f))].sort((a, b) => a - b);
  const us = [...new Set(cells.map((c) => c.u))].sort((a, b) => a - b);
  const logs = cells.map((c) => Math.log10(c.v));
  const lo = Math.min(...logs);
  const hi = Math.max(...logs);
  const grid = { left: 110, right: 710, top: 50, bottom: 440 };
  const cw = (grid.right - grid.left) / fs.length;
  const ch = (grid.bottom - grid.top) / us.length;

  const body: string[] = [
    text((grid.left + grid.right) / 2, 26, "Downlink channel error over the calibration/uplink error grid", {
      "text-anchor": "middle", "font-size": 14,
    }),
  ];
  for (const cell of cells) {
    const i = fs.indexOf(cell.f);
    const j = us.indexOf(cell.u);
    const t = hi > lo ? (Math.log10(cell.v) - lo) / (hi - lo) : 0.5;
    const x = grid.left + i * cw;
    const y = grid.bottom - (j + 1) * ch;
    body.push(
      tag("rect", {
        class: "cell", x, y, width: cw, height: ch,
        fill: heat(t), stroke: "white", "stroke-width": 0.5,
      }),
      text(x + cw / 2, y + ch / 2 + 3, tickLabel(roundSig(cell.v, 2)), {
        "text-anchor": "middle", "font-size": 9,
        fill: t > 0.55 ? "black" : "white",
      }),
    );
  }
  fs.forEach((f, i) => {
    body.push(
      text(grid.left + (i + 0.5) * cw, grid.bottom + 16, tickLabel(f), { "text-anchor": "middle" }),
    );
  });
  us.forEach((u, j) => {
    body.push(
      text(grid.left - 8, grid.bottom - (j + 0.5) * ch + 4, tickLabel(u), { "text-anchor": "end" }),
    );
  });
  body.push(
    text((grid.left + grid.right) / 2, grid.bottom + 36, "NMSE of F", { "text-anchor": "middle" }),
    text(30, (grid.top + grid.bottom) / 2, "NMSE of uplink estimate", {
      "text-anchor": "middle",
      transform: `rotate(-90 30 ${(grid.top + grid.bottom) / 2})`,
    }),
  );
  return svgDoc(WIDTH, HEIGHT, body);
}

function roundSig(v: number, digits: number): number {
  if (v === 0 || !Number.isFinite(v)) return v;
  const mag = Math.pow(10, digits - 1 - Math.floor(Math.log10(Math.abs(v))));
  return Math.round(v * mag) / mag;
}

/** Two-segment dark-blue -> mid-blue -> warm-yellow ramp. */
function heat(t: number): string {
  const stops: Array<[number, number, number]> = [
    [29, 47, 111],
    [62, 146, 204],
    [249, 200, 70],
  ];
  const pos = t <= 0.5 ? t * 2 : (t - 0.5) * 2;
  const [a, b] = t <= 0.5 ? [stops[0], stops[1]] : [stops[1], stops[2]];
  const mix = a.map((av, i) => Math.round(av + (b[i] - av) * pos));
  return `rgb(${mix[0]},${mix[1]},${mix[2]})`;
}
