/**
 * Figure construction from run-directory CSVs.  The renderer recomputes
 * nothing: every plotted quantity is a column written by the experiment
 * harness, and the regret reference slope is read from the manifest.
 */

import { mkdirSync, readFileSync, writeFileSync } from "node:fs";
import { dirname } from "node:path";

import {
  CENSUS_HEADER,
  LEBESGUE_HEADER,
  Row,
  SUMMARY_HEADER,
  SchemaError,
  readCsv,
  regretHeader,
  toNumber,
} from "./csv.js";
import {
  COLORS,
  Figure,
  PLOT,
  Scale,
  Series,
  linearScale,
  logScale,
} from "./svg.js";

export const FIGURE_KINDS = [
  "lebesgue-vs-tau",
  "amplification",
  "regret-curves",
  "census",
] as const;

export type FigureKind = (typeof FIGURE_KINDS)[number];

export interface FigureSpec {
  kind: FigureKind;
  inputs: string[];
  output: string;
  options?: {
    manifest?: string;
    title?: string;
  };
}

export function parseSpec(raw: unknown): FigureSpec {
  if (typeof raw !== "object" || raw === null) {
    throw new SchemaError("figure spec must be a JSON object");
  }
  const spec = raw as Record<string, unknown>;
  const kind = spec["kind"];
  if (typeof kind !== "string" ||
      !FIGURE_KINDS.includes(kind as FigureKind)) {
    throw new SchemaError(`unknown figure kind: ${String(kind)}`);
  }
  const inputs = spec["inputs"];
  if (!Array.isArray(inputs) || inputs.length === 0 ||
      !inputs.every((p) => typeof p === "string")) {
    throw new SchemaError("figure spec needs a nonempty inputs list");
  }
  if (typeof spec["output"] !== "string") {
    throw new SchemaError("figure spec needs an output path");
  }
  const options = (spec["options"] ?? {}) as FigureSpec["options"];
  return { kind: kind as FigureKind, inputs: inputs as string[],
           output: spec["output"], options };
}

function color(i: number): string {
  return COLORS[i % COLORS.length] as string;
}

// reduce instead of spread: curves can carry ~1e5 points, past the
// engine's argument-count limit for Math.min(...values)
function positiveFloor(values: number[]): number {
  let floor = Infinity;
  for (const v of values) {
    if (v > 0 && v < floor) floor = v;
  }
  return Number.isFinite(floor) ? floor : 1e-3;
}

function maxOf(values: number[], fallback: number): number {
  let top = fallback;
  for (const v of values) {
    if (v > top) top = v;
  }
  return top;
}

function renderLebesgue(spec: FigureSpec): string {
  const path = spec.inputs[0] as string;
  const rows = readCsv(path, LEBESGUE_HEADER);
  rows.sort((a, b) =>
    toNumber(a, "tau", path) - toNumber(b, "tau", path));
  const taus = rows.map((r) => toNumber(r, "tau", path));
  const seriesDefs: Array<[string, string]> = [
    ["estimate", "lebesgue_est"],
    ["abel", "abel_bound"],
    ["sqrt-d-eff", "sqrt_bound"],
  ];
  const all: number[] = [];
  const series: Series[] = seriesDefs.map(([name, column]) => {
    const points = rows.map((r, i) => {
      const y = toNumber(r, column, path);
      all.push(y);
      return [taus[i] as number, y] as [number, number];
    });
    return { name, points };
  });
  const floor = positiveFloor(all);
  const x = logScale(Math.min(...taus), Math.max(...taus), PLOT.x0, PLOT.x1);
  const y = logScale(floor, Math.max(...all), PLOT.y0, PLOT.y1);
  const fig = new Figure(
    spec.options?.title ?? "Lebesgue constant and certified bounds",
    "regularization tau", "bound value");
  fig.axes(x, y);
  series.forEach((s, i) => {
    const clamped: Series = {
      name: s.name,
      points: s.points.map(([px, py]) =>
        [px, Math.max(py, floor)] as [number, number]),
    };
    fig.series(clamped, x, y, color(i));
    fig.legend(s.name, color(i));
  });
  return fig.toString();
}

function renderAmplification(spec: FigureSpec): string {
  const path = spec.inputs[0] as string;
  const rows = readCsv(path, SUMMARY_HEADER);
  const byN = new Map<number, Array<[number, number]>>();
  for (const row of rows) {
    const n = toNumber(row, "n", path);
    const eps = toNumber(row, "eps", path);
    const err = toNumber(row, "mean_uniform_err", path);
    if (!byN.has(n)) byN.set(n, []);
    (byN.get(n) as Array<[number, number]>).push([eps, err]);
  }
  const ns = [...byN.keys()].sort((a, b) => a - b);
  const allEps = rows.map((r) => toNumber(r, "eps", path));
  const allErr = rows.map((r) => toNumber(r, "mean_uniform_err", path));
  const x = linearScale(Math.min(...allEps), Math.max(...allEps),
                        PLOT.x0, PLOT.x1);
  const y = linearScale(0, Math.max(...allErr), PLOT.y0, PLOT.y1);
  const fig = new Figure(
    spec.options?.title ?? "Uniform error vs misspecification level",
    "misspecification eps", "mean uniform error");
  fig.axes(x, y);
  ns.forEach((n, i) => {
    const points = (byN.get(n) as Array<[number, number]>)
      .sort((a, b) => a[0] - b[0]);
    fig.series({ name: `n=${n}`, points }, x, y, color(i));
    fig.legend(`n=${n}`, color(i));
  });
  return fig.toString();
}

function readRegretFile(path: string): Array<[number, number]> {
  const firstLine = readFileSync(path, "utf8").split(/\r?\n/, 1)[0] ?? "";
  const dim = firstLine.split(",").length - 10;
  if (dim < 1) {
    throw new SchemaError(`${path}: header too short for a regret log`);
  }
  const rows = readCsv(path, regretHeader(dim));
  return rows.map((r) => [
    toNumber(r, "t", path),
    toNumber(r, "cum_regret", path),
  ]);
}

function thin<T>(points: T[], cap = 256): T[] {
  if (points.length <= cap) return points;
  const stride = Math.ceil(points.length / cap);
  const out = points.filter((_, i) => i % stride === 0);
  const last = points[points.length - 1] as T;
  if (out[out.length - 1] !== last) out.push(last);
  return out;
}

function renderRegret(spec: FigureSpec): string {
  const curves = spec.inputs.map((p) => readRegretFile(p));
  const allY = curves.flat().map(([, v]) => v);
  const floor = positiveFloor(allY);
  const tMax = maxOf(curves.map((c) => c[c.length - 1]?.[0] ?? 1), 1);
  const yMax = maxOf(allY, floor * 10);
  const x = logScale(1, tMax, PLOT.x0, PLOT.x1);
  const y = logScale(floor, yMax, PLOT.y0, PLOT.y1);
  const fig = new Figure(
    spec.options?.title ?? "Cumulative regret, one curve per seed",
    "round t", "cumulative regret");
  fig.axes(x, y);
  curves.forEach((curve, i) => {
    const pts = thin(curve).map(([t, v]) =>
      [t, Math.max(v, floor)] as [number, number]);
    fig.series({ name: `seed-${i}`, points: pts }, x, y, color(i));
  });
  fig.legend(`${curves.length} seeds`, color(0));

  const manifestPath = spec.options?.manifest;
  if (manifestPath) {
    const manifest = JSON.parse(readFileSync(manifestPath, "utf8")) as {
      reference_slope?: number | null;
    };
    const slope = manifest.reference_slope;
    if (typeof slope === "number") {
      const ends = curves.map((c) => c[c.length - 1]?.[1] ?? floor);
      const yEnd = Math.max(
        ends.reduce((a, b) => a + b, 0) / ends.length, floor);
      const t0 = Math.max(tMax / 16, 1);
      const refPoints: Array<[number, number]> = [
        [t0, Math.max(yEnd * Math.pow(t0 / tMax, slope), floor)],
        [tMax, yEnd],
      ];
      fig.series({ name: "reference", points: refPoints, dashed: true },
                 x, y, "#222222");
      fig.legend(`reference slope ${slope}`, "#222222", true);
    }
  }
  return fig.toString();
}

function renderCensus(spec: FigureSpec): string {
  const perDepth = new Map<number, number>();
  for (const path of spec.inputs) {
    for (const row of readCsv(path, CENSUS_HEADER)) {
      const depth = toNumber(row, "depth", path);
      perDepth.set(depth, (perDepth.get(depth) ?? 0) + 1);
    }
  }
  const depths = [...perDepth.keys()].sort((a, b) => a - b);
  const bars = depths.map((d) => ({
    label: String(d),
    value: perDepth.get(d) as number,
  }));
  // bar labels double as x ticks, so the x scale carries none of its own
  const x: Scale = Object.assign((v: number) => v, { ticks: [] as number[] });
  const y = linearScale(0, Math.max(...bars.map((b) => b.value)),
                        PLOT.y0, PLOT.y1);
  const fig = new Figure(
    spec.options?.title ?? "Region census: cells per depth, all seeds",
    "depth", "region count");
  fig.axes(x, y);
  fig.bars(bars, x, y, color(0));
  return fig.toString();
}

export function render(spec: FigureSpec): string {
  let svg: string;
  switch (spec.kind) {
    case "lebesgue-vs-tau":
      svg = renderLebesgue(spec);
      break;
    case "amplification":
      svg = renderAmplification(spec);
      break;
    case "regret-curves":
      svg = renderRegret(spec);
      break;
    case "census":
      svg = renderCensus(spec);
      break;
  }
  mkdirSync(dirname(spec.output), { recursive: true });
  writeFileSync(spec.output, svg, "utf8");
  return spec.output;
}
