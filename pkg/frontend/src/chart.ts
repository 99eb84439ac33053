/** Shared chart scaffolding: scales, axes, legends, box glyphs. */

import { BLACK, Canvas, DARK_GRAY, GLYPH_H, GLYPH_W, GRAY, RGB } from "./canvas.js";

export interface Margins {
  left: number;
  right: number;
  top: number;
  bottom: number;
}

export const DEFAULT_MARGINS: Margins = { left: 64, right: 16, top: 28, bottom: 40 };

export class LinearScale {
  constructor(
    readonly d0: number,
    readonly d1: number,
    readonly r0: number,
    readonly r1: number,
  ) {}

  apply(v: number): number {
    if (this.d1 === this.d0) return (this.r0 + this.r1) / 2;
    return this.r0 + ((v - this.d0) / (this.d1 - this.d0)) * (this.r1 - this.r0);
  }
}

/** Tick positions at "nice" steps covering [lo, hi]. */
export function ticks(lo: number, hi: number, target = 6): number[] {
  if (!(hi > lo)) return [lo];
  const span = hi - lo;
  const step0 = Math.pow(10, Math.floor(Math.log10(span / target)));
  let step = step0;
  for (const mult of [1, 2, 2.5, 5, 10]) {
    step = step0 * mult;
    if (span / step <= target) break;
  }
  const start = Math.ceil(lo / step) * step;
  const out: number[] = [];
  for (let v = start; v <= hi + 1e-9 * span; v += step) {
    out.push(Math.abs(v) < 1e-12 * span ? 0 : v);
  }
  return out;
}

export function formatTick(v: number): string {
  if (v === 0) return "0";
  const a = Math.abs(v);
  if (a >= 1000) return v.toFixed(0);
  if (a >= 10) return Number.isInteger(v) ? v.toFixed(0) : v.toFixed(1);
  if (a >= 0.01) return Number(v.toFixed(3)).toString();
  return v.toExponential(1).replace("e", "E");
}

export interface Frame {
  canvas: Canvas;
  sx: LinearScale;
  sy: LinearScale;
  margins: Margins;
}

export function makeFrame(
  canvas: Canvas,
  xDomain: [number, number],
  yDomain: [number, number],
  opts: {
    title?: string;
    xLabel?: string;
    yLabel?: string;
    margins?: Margins;
    xTicks?: number[];
    xTickLabels?: string[];
  } = {},
): Frame {
  const margins = opts.margins ?? DEFAULT_MARGINS;
  const sx = new LinearScale(xDomain[0], xDomain[1], margins.left, canvas.width - margins.right);
  const sy = new LinearScale(yDomain[0], yDomain[1], canvas.height - margins.bottom, margins.top);

  // grid + ticks
  const xTicks = opts.xTicks ?? ticks(xDomain[0], xDomain[1]);
  xTicks.forEach((t, i) => {
    const x = Math.round(sx.apply(t));
    canvas.line(x, margins.top, x, canvas.height - margins.bottom, GRAY);
    const label = opts.xTickLabels ? opts.xTickLabels[i] : formatTick(t);
    canvas.text(x - Canvas.textWidth(label) / 2, canvas.height - margins.bottom + 6, label, DARK_GRAY);
  });
  for (const t of ticks(yDomain[0], yDomain[1])) {
    const y = Math.round(sy.apply(t));
    canvas.line(margins.left, y, canvas.width - margins.right, y, GRAY);
    const label = formatTick(t);
    canvas.text(margins.left - 6 - Canvas.textWidth(label), y - GLYPH_H / 2, label, DARK_GRAY);
  }

  // axes box
  canvas.rect(
    margins.left,
    margins.top,
    canvas.width - margins.left - margins.right,
    canvas.height - margins.top - margins.bottom,
    BLACK,
  );

  if (opts.title) {
    canvas.text((canvas.width - Canvas.textWidth(opts.title)) / 2, 8, opts.title, BLACK);
  }
  if (opts.xLabel) {
    canvas.text(
      (canvas.width - Canvas.textWidth(opts.xLabel)) / 2,
      canvas.height - GLYPH_H - 4,
      opts.xLabel,
      BLACK,
    );
  }
  if (opts.yLabel) {
    // no rotated text with a bitmap font; place along the top-left edge
    canvas.text(4, margins.top - GLYPH_H - 4, opts.yLabel, BLACK);
  }
  return { canvas, sx, sy, margins };
}

export function drawSeries(frame: Frame, xs: number[], ys: number[], color: RGB): void {
  let prev: [number, number] | null = null;
  for (let i = 0; i < xs.length; i++) {
    if (!Number.isFinite(xs[i]) || !Number.isFinite(ys[i])) {
      prev = null;
      continue;
    }
    const x = frame.sx.apply(xs[i]);
    const y = frame.sy.apply(ys[i]);
    if (prev) frame.canvas.thickLine(prev[0], prev[1], x, y, color);
    prev = [x, y];
  }
}

export function drawStepSeries(frame: Frame, xs: number[], ys: number[], color: RGB): void {
  // right-continuous steps: horizontal to the next x, then vertical
  let prev: [number, number] | null = null;
  for (let i = 0; i < xs.length; i++) {
    if (!Number.isFinite(xs[i])) continue;
    const x = frame.sx.apply(xs[i]);
    const y = frame.sy.apply(ys[i]);
    if (prev) {
      frame.canvas.thickLine(prev[0], prev[1], x, prev[1], color);
      frame.canvas.thickLine(x, prev[1], x, y, color);
    }
    prev = [x, y];
  }
}

export function drawLegend(canvas: Canvas, entries: [string, RGB][], margins: Margins): void {
  let y = margins.top + 6;
  const x = margins.left + 8;
  for (const [label, color] of entries) {
    canvas.fillRect(x, y + 1, 10, 5, color);
    canvas.text(x + 14, y, label, BLACK);
    y += GLYPH_H + 4;
  }
}

export interface BoxStats {
  min: number;
  q1: number;
  median: number;
  q3: number;
  max: number;
}

export function boxStats(values: number[]): BoxStats {
  const sorted = [...values].sort((a, b) => a - b);
  const q = (frac: number): number => {
    if (sorted.length === 1) return sorted[0];
    const h = (sorted.length - 1) * frac;
    const lo = Math.floor(h);
    if (lo >= sorted.length - 1) return sorted[sorted.length - 1];
    return sorted[lo] + (sorted[lo + 1] - sorted[lo]) * (h - lo);
  };
  return { min: sorted[0], q1: q(0.25), median: q(0.5), q3: q(0.75), max: sorted[sorted.length - 1] };
}

export function drawBox(frame: Frame, xCenter: number, halfWidth: number, s: BoxStats, color: RGB): void {
  const c = frame.canvas;
  const x = Math.round(frame.sx.apply(xCenter));
  const w = Math.max(4, Math.round(halfWidth));
  const yMin = Math.round(frame.sy.apply(s.min));
  const yQ1 = Math.round(frame.sy.apply(s.q1));
  const yMed = Math.round(frame.sy.apply(s.median));
  const yQ3 = Math.round(frame.sy.apply(s.q3));
  const yMax = Math.round(frame.sy.apply(s.max));
  // whiskers
  c.line(x, yMin, x, yQ1, color);
  c.line(x, yQ3, x, yMax, color);
  c.line(x - w / 2, yMin, x + w / 2, yMin, color);
  c.line(x - w / 2, yMax, x + w / 2, yMax, color);
  // box (yQ3 is above yQ1 in pixel space)
  c.rect(x - w, Math.min(yQ3, yQ1), 2 * w + 1, Math.abs(yQ1 - yQ3) + 1, color);
  c.thickLine(x - w, yMed, x + w, yMed, color);
}
