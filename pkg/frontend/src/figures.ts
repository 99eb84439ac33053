/**
 * The seven figure kinds rendered from skylink CSV outputs.
 *
 * Rendering is pure presentation: each kind reads one documented CSV
 * schema, groups rows, and paints curves, boxes or a label map. No
 * statistics are recomputed beyond box quartiles of the plotted values.
 */

import { readFileSync } from "node:fs";

import { BLACK, Canvas, PALETTE, RED, RGB } from "./canvas.js";
import {
  boxStats,
  drawBox,
  drawLegend,
  drawSeries,
  drawStepSeries,
  makeFrame,
} from "./chart.js";
import { Table, column, numericColumn, parseCsv, requireColumns, uniqueInOrder } from "./csv.js";

export type FigureKind =
  | "cdf"
  | "coverage_vs_threshold"
  | "coverage_vs_height"
  | "outmax_vs_height"
  | "assignment_map"
  | "ho_box"
  | "rlf_box";

export const FIGURE_KINDS: FigureKind[] = [
  "cdf",
  "coverage_vs_threshold",
  "coverage_vs_height",
  "outmax_vs_height",
  "assignment_map",
  "ho_box",
  "rlf_box",
];

export interface FigureSpec {
  kind: FigureKind;
  input: string;
  thresholdDb?: number;
  width?: number;
  height?: number;
  title?: string;
}

function loadTable(path: string): Table {
  return parseCsv(readFileSync(path, "utf8"));
}

function groupBy(keys: string[]): Map<string, number[]> {
  const groups = new Map<string, number[]>();
  keys.forEach((k, i) => {
    const bucket = groups.get(k);
    if (bucket) bucket.push(i);
    else groups.set(k, [i]);
  });
  return groups;
}

function finiteExtent(values: number[]): [number, number] {
  let lo = Infinity;
  let hi = -Infinity;
  for (const v of values) {
    if (!Number.isFinite(v)) continue;
    if (v < lo) lo = v;
    if (v > hi) hi = v;
  }
  if (lo === Infinity) throw new Error("no finite values to plot");
  if (lo === hi) {
    lo -= 0.5;
    hi += 0.5;
  }
  return [lo, hi];
}

function pad([lo, hi]: [number, number], frac = 0.04): [number, number] {
  const d = (hi - lo) * frac;
  return [lo - d, hi + d];
}

// ---------------------------------------------------------------------------

function renderCdf(spec: FigureSpec, canvas: Canvas): void {
  const table = loadTable(spec.input);
  requireColumns(table, ["op_set", "height_agl", "load", "sinr_db", "cum_frac"], spec.input);
  const opSet = column(table, "op_set");
  const height = column(table, "height_agl");
  const load = column(table, "load");
  const sinr = numericColumn(table, "sinr_db");
  const frac = numericColumn(table, "cum_frac");

  const keys = opSet.map((o, i) => `${o} h=${Number(height[i])} l=${Number(load[i])}`);
  const groups = groupBy(keys);
  const xDomain = pad(finiteExtent(sinr));
  const frame = makeFrame(canvas, xDomain, [0, 1], {
    title: spec.title ?? "SINR CDF",
    xLabel: "SINR (dB)",
    yLabel: "CDF",
  });

  const legend: [string, RGB][] = [];
  let ci = 0;
  for (const [key, idxs] of groups) {
    const color = PALETTE[ci++ % PALETTE.length];
    const pts = idxs
      .map((i) => [sinr[i], frac[i]] as [number, number])
      .sort((a, b) => a[0] - b[0]);
    drawStepSeries(frame, pts.map((p) => p[0]), pts.map((p) => p[1]), color);
    legend.push([key, color]);
  }
  const thr = spec.thresholdDb ?? -6;
  const tx = Math.round(frame.sx.apply(thr));
  canvas.dashedVLine(tx, frame.margins.top, canvas.height - frame.margins.bottom, RED);
  canvas.text(tx + 4, frame.margins.top + 2, `T=${thr}`, RED);
  drawLegend(canvas, legend, frame.margins);
}

function renderCoverageCurves(
  spec: FigureSpec,
  canvas: Canvas,
  xColumn: "threshold_db" | "height_agl",
  yColumn: "p_cov" | "out_max_km2",
  title: string,
  xLabel: string,
  yLabel: string,
): void {
  const table = loadTable(spec.input);
  requireColumns(
    table,
    ["height_agl", "load", "op_set", "threshold_db", "p_cov", "out_max_km2"],
    spec.input,
  );
  const opSet = column(table, "op_set");
  const load = column(table, "load");
  const xsAll = numericColumn(table, xColumn);
  const ysAll = numericColumn(table, yColumn);

  let keep = xsAll.map((_, i) => i);
  let keys: string[];
  if (xColumn === "height_agl") {
    // one curve per (op_set, load) at a fixed threshold
    const thresholds = numericColumn(table, "threshold_db");
    const thr = spec.thresholdDb ?? thresholds[0];
    keep = keep.filter((i) => Math.abs(thresholds[i] - thr) < 1e-9);
    if (keep.length === 0) throw new Error(`${spec.input}: no rows at threshold ${thr} dB`);
    keys = keep.map((i) => `${opSet[i]} l=${Number(load[i])}`);
  } else {
    const height = column(table, "height_agl");
    keys = keep.map((i) => `${opSet[i]} h=${Number(height[i])} l=${Number(load[i])}`);
  }

  const xs = keep.map((i) => xsAll[i]);
  const ys = keep.map((i) => ysAll[i]);
  const yExtent: [number, number] =
    yColumn === "p_cov" ? [0, 1] : pad([0, finiteExtent(ys)[1]], 0.06);
  const frame = makeFrame(canvas, pad(finiteExtent(xs)), yExtent, {
    title: spec.title ?? title,
    xLabel,
    yLabel,
  });

  const groups = groupBy(keys);
  const legend: [string, RGB][] = [];
  let ci = 0;
  for (const [key, idxs] of groups) {
    const color = PALETTE[ci++ % PALETTE.length];
    const pts = idxs.map((j) => [xs[j], ys[j]] as [number, number]).sort((a, b) => a[0] - b[0]);
    drawSeries(frame, pts.map((p) => p[0]), pts.map((p) => p[1]), color);
    legend.push([key, color]);
  }
  drawLegend(canvas, legend, frame.margins);
}

function renderAssignmentMap(spec: FigureSpec, canvas: Canvas): void {
  const table = loadTable(spec.input);
  requireColumns(table, ["x", "y", "sector_id"], spec.input);
  const xs = numericColumn(table, "x");
  const ys = numericColumn(table, "y");
  const sectors = column(table, "sector_id");

  const xVals = [...new Set(xs)].sort((a, b) => a - b);
  const yVals = [...new Set(ys)].sort((a, b) => a - b);
  const xIndex = new Map(xVals.map((v, i) => [v, i]));
  const yIndex = new Map(yVals.map((v, i) => [v, i]));
  const sectorIds = uniqueInOrder([...sectors].sort());
  const colorOf = new Map(sectorIds.map((s, i) => [s, PALETTE[i % PALETTE.length]]));

  const m = { left: 24, right: 24, top: 28, bottom: 24 };
  const plotW = canvas.width - m.left - m.right;
  const plotH = canvas.height - m.top - m.bottom;
  const cellW = Math.max(1, Math.floor(plotW / xVals.length));
  const cellH = Math.max(1, Math.floor(plotH / yVals.length));

  for (let i = 0; i < xs.length; i++) {
    const cx = m.left + xIndex.get(xs[i])! * cellW;
    // row 0 is the southernmost row; draw it at the bottom
    const cy = m.top + (yVals.length - 1 - yIndex.get(ys[i])!) * cellH;
    canvas.fillRect(cx, cy, cellW, cellH, colorOf.get(sectors[i])!);
  }
  canvas.rect(m.left, m.top, xVals.length * cellW, yVals.length * cellH, BLACK);
  canvas.text(m.left, 8, spec.title ?? `Serving sectors (${sectorIds.length} cells)`, BLACK);
}

function renderBoxes(
  spec: FigureSpec,
  canvas: Canvas,
  valueColumn: string,
  required: string[],
  groupKey: (table: Table, i: number) => string,
  title: string,
  yLabel: string,
): void {
  const table = loadTable(spec.input);
  requireColumns(table, required, spec.input);
  const values = numericColumn(table, valueColumn);
  const keys = values.map((_, i) => groupKey(table, i));
  const groups = [...groupBy(keys).entries()];
  if (groups.length === 0) throw new Error(`${spec.input}: no rows to plot`);

  const allStats = groups.map(([, idxs]) => boxStats(idxs.map((i) => values[i])));
  const yHi = Math.max(...allStats.map((s) => s.max), 1e-9);
  const positions = groups.map((_, i) => i + 1);
  const frame = makeFrame(canvas, [0.5, groups.length + 0.5], pad([0, yHi], 0.06), {
    title: spec.title ?? title,
    yLabel,
    xTicks: positions,
    xTickLabels: groups.map(([k]) => k),
  });
  const halfWidth = Math.min(
    28,
    (frame.sx.apply(1) - frame.sx.apply(0.5)) * 0.5,
  );
  groups.forEach(([, _], i) => {
    drawBox(frame, positions[i], halfWidth, allStats[i], PALETTE[i % PALETTE.length]);
  });
}

// ---------------------------------------------------------------------------

export function renderFigure(spec: FigureSpec): Buffer {
  const canvas = new Canvas(spec.width ?? 800, spec.height ?? 500);
  switch (spec.kind) {
    case "cdf":
      renderCdf(spec, canvas);
      break;
    case "coverage_vs_threshold":
      renderCoverageCurves(
        spec, canvas, "threshold_db", "p_cov",
        "Coverage vs threshold", "threshold (dB)", "P(cov)");
      break;
    case "coverage_vs_height":
      renderCoverageCurves(
        spec, canvas, "height_agl", "p_cov",
        "Coverage vs height", "height (m)", "P(cov)");
      break;
    case "outmax_vs_height":
      renderCoverageCurves(
        spec, canvas, "height_agl", "out_max_km2",
        "Max outage zone vs height", "height (m)", "OUT max (km2)");
      break;
    case "assignment_map":
      renderAssignmentMap(spec, canvas);
      break;
    case "ho_box":
      renderBoxes(
        spec, canvas, "ho_per_min",
        ["run_id", "height_agl", "op_set", "n_ho", "ho_per_min", "n_rlf", "rlf_total_s"],
        (t, i) => `h=${Number(column(t, "height_agl")[i])} ${column(t, "op_set")[i]}`,
        "Handovers per minute", "HO/min");
      break;
    case "rlf_box":
      renderBoxes(
        spec, canvas, "duration_s",
        ["run_id", "op_set", "duration_s"],
        (t, i) => column(t, "op_set")[i],
        "RLF durations", "duration (s)");
      break;
    default: {
      const never: never = spec.kind;
      throw new Error(`unknown figure kind ${never}`);
    }
  }
  return canvas.toPng();
}
