#!/usr/bin/env node
/**
 * skylink-plot: render figures from skylink CSV outputs.
 *
 *   skylink-plot --kind cdf --in cdf.csv --out fig2.png [--threshold-db -6]
 *
 * Kinds: cdf, coverage_vs_threshold, coverage_vs_height,
 * outmax_vs_height, assignment_map, ho_box, rlf_box. Output is an
 * 8-bit RGB PNG; identical inputs and options produce identical bytes.
 */

import { writeFileSync } from "node:fs";

import { FIGURE_KINDS, FigureKind, FigureSpec, renderFigure } from "./figures.js";

function usage(): string {
  return (
    "usage: skylink-plot --kind KIND --in FILE.csv --out FIG.png " +
    "[--threshold-db DB] [--width PX] [--height PX] [--title TEXT]\n" +
    `kinds: ${FIGURE_KINDS.join(", ")}`
  );
}

export function parseArgs(argv: string[]): FigureSpec & { out: string } {
  const opts = new Map<string, string>();
  for (let i = 0; i < argv.length; i += 2) {
    const flag = argv[i];
    if (!flag.startsWith("--") || i + 1 >= argv.length) {
      throw new Error(`bad argument '${flag}'\n${usage()}`);
    }
    opts.set(flag.slice(2), argv[i + 1]);
  }
  const kindRaw = opts.get("kind");
  const input = opts.get("in");
  const out = opts.get("out");
  if (!kindRaw || !input || !out) {
    throw new Error(`--kind, --in and --out are required\n${usage()}`);
  }
  const kind = kindRaw.toLowerCase().replace(/-/g, "_") as FigureKind;
  if (!FIGURE_KINDS.includes(kind)) {
    throw new Error(`unknown kind '${kindRaw}'\n${usage()}`);
  }
  const spec: FigureSpec & { out: string } = { kind, input, out };
  if (opts.has("threshold-db")) spec.thresholdDb = Number(opts.get("threshold-db"));
  if (opts.has("width")) spec.width = Number(opts.get("width"));
  if (opts.has("height")) spec.height = Number(opts.get("height"));
  if (opts.has("title")) spec.title = opts.get("title");
  return spec;
}

export function main(argv: string[]): number {
  try {
    const spec = parseArgs(argv);
    const png = renderFigure(spec);
    writeFileSync(spec.out, png);
    console.log(spec.out);
    return 0;
  } catch (err) {
    console.error(`skylink-plot: ${err instanceof Error ? err.message : err}`);
    return 1;
  }
}

const invokedDirectly =
  process.argv[1] !== undefined &&
  import.meta.url === new URL(`file://${process.argv[1]}`).href;
if (invokedDirectly) {
  process.exit(main(process.argv.slice(2)));
}
