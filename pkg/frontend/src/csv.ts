/**
 * Strict CSV reading for the experiment run artifacts.
 *
 * Every reader validates the header against the documented schema and
 * reports the first offending column by name; rows are returned as string
 * maps so numeric parsing stays explicit at the call site.
 */

import { readFileSync } from "node:fs";

export class SchemaError extends Error {}

export type Row = Record<string, string>;

function splitLines(text: string): string[] {
  return text
    .split(/\r?\n/)
    .filter((line) => line.length > 0 && !line.startsWith("#"));
}

export function validateHeader(
  header: string[],
  expected: readonly string[],
  path: string,
): void {
  for (let i = 0; i < expected.length; i++) {
    const want = expected[i];
    const got = i < header.length ? header[i] : "<missing>";
    if (got !== want) {
      throw new SchemaError(
        `${path}: column ${i + 1} expected '${want}', got '${got}'`,
      );
    }
  }
  if (header.length > expected.length) {
    throw new SchemaError(
      `${path}: ${header.length - expected.length} extra columns`,
    );
  }
}

export function readCsv(path: string, expected: readonly string[]): Row[] {
  const lines = splitLines(readFileSync(path, "utf8"));
  if (lines.length === 0) {
    throw new SchemaError(`${path}: empty file`);
  }
  validateHeader((lines[0] as string).split(","), expected, path);
  const rows: Row[] = [];
  for (let k = 1; k < lines.length; k++) {
    const cells = (lines[k] as string).split(",");
    if (cells.length !== expected.length) {
      throw new SchemaError(
        `${path}: row ${k + 1} has ${cells.length} cells, expected ` +
          `${expected.length}`,
      );
    }
    const row: Row = {};
    expected.forEach((name, i) => {
      row[name] = cells[i] as string;
    });
    rows.push(row);
  }
  if (rows.length === 0) {
    throw new SchemaError(`${path}: no data rows`);
  }
  return rows;
}

/** Header of a regret log: fixed prefix, x1..xm, fixed suffix. */
export function regretHeader(dim: number): string[] {
  const coords = Array.from({ length: dim }, (_, d) => `x${d + 1}`);
  return [
    "t",
    "region_id",
    "depth",
    ...coords,
    "reward",
    "inst_regret",
    "cum_regret",
    "beta",
    "sigma",
    "gain",
    "split_flag",
  ];
}

export const LEBESGUE_HEADER = [
  "tau",
  "d_eff",
  "d_eff_tail",
  "sqrt_bound",
  "abel_bound",
  "lebesgue_est",
  "lebesgue_tol",
] as const;

export const SUMMARY_HEADER = [
  "eps",
  "n",
  "mean_uniform_err",
  "p90_uniform_err",
  "mean_simple_regret",
  "p90_simple_regret",
] as const;

export const CENSUS_HEADER = ["region_id", "depth", "rho", "T_A"] as const;

export function toNumber(row: Row, column: string, path: string): number {
  const raw = row[column];
  const value = raw === undefined || raw === "" ? NaN : Number(raw);
  if (!Number.isFinite(value)) {
    throw new SchemaError(
      `${path}: column '${column}': '${raw}' is not a number`,
    );
  }
  return value;
}
