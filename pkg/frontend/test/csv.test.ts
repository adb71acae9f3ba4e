import { mkdtempSync, writeFileSync } from "node:fs";
import { tmpdir } from "node:os";
import { join } from "node:path";
import { describe, expect, it } from "vitest";

import {
  LEBESGUE_HEADER,
  SchemaError,
  readCsv,
  regretHeader,
  toNumber,
  validateHeader,
} from "../src/csv.js";

const dir = mkdtempSync(join(tmpdir(), "csv-"));
let counter = 0;

function tmpFile(text: string): string {
  counter += 1;
  const path = join(dir, `f${counter}.csv`);
  writeFileSync(path, text, "utf8");
  return path;
}

describe("validateHeader", () => {
  it("accepts an exact match", () => {
    validateHeader(["a", "b"], ["a", "b"], "p");
  });

  it("names the first wrong column", () => {
    expect(() => validateHeader(["tau", "weird"], ["tau", "d_eff"], "p"))
      .toThrowError(/column 2 expected 'd_eff', got 'weird'/);
  });

  it("reports missing trailing columns", () => {
    expect(() => validateHeader(["tau"], ["tau", "d_eff"], "p"))
      .toThrowError(/column 2 expected 'd_eff', got '<missing>'/);
  });

  it("rejects extra columns", () => {
    expect(() => validateHeader(["a", "b", "c"], ["a", "b"], "p"))
      .toThrowError(/1 extra columns/);
  });
});

describe("readCsv", () => {
  it("returns rows keyed by column name", () => {
    const path = tmpFile("a,b\n1,2\n3,4\n");
    const rows = readCsv(path, ["a", "b"]);
    expect(rows).toEqual([{ a: "1", b: "2" }, { a: "3", b: "4" }]);
  });

  it("skips comment and blank lines", () => {
    const path = tmpFile("a,b\n# note\n\n1,2\n");
    expect(readCsv(path, ["a", "b"])).toHaveLength(1);
  });

  it("rejects a header-only file", () => {
    const path = tmpFile("a,b\n");
    expect(() => readCsv(path, ["a", "b"])).toThrowError(/no data rows/);
  });

  it("rejects an empty file", () => {
    const path = tmpFile("");
    expect(() => readCsv(path, ["a", "b"])).toThrowError(/empty file/);
  });

  it("rejects ragged rows with the row number", () => {
    const path = tmpFile("a,b\n1,2\n3\n");
    expect(() => readCsv(path, ["a", "b"]))
      .toThrowError(/row 3 has 1 cells/);
  });

  it("errors are SchemaError instances", () => {
    const path = tmpFile("a,wrong\n1,2\n");
    expect(() => readCsv(path, ["a", "b"])).toThrowError(SchemaError);
  });
});

describe("headers", () => {
  it("lebesgue schema puts the certified bounds after the dimensions", () => {
    expect(LEBESGUE_HEADER).toEqual([
      "tau", "d_eff", "d_eff_tail", "sqrt_bound", "abel_bound",
      "lebesgue_est", "lebesgue_tol",
    ]);
  });

  it("regret header interleaves the coordinate block", () => {
    expect(regretHeader(2)).toEqual([
      "t", "region_id", "depth", "x1", "x2", "reward", "inst_regret",
      "cum_regret", "beta", "sigma", "gain", "split_flag",
    ]);
  });
});

describe("toNumber", () => {
  it("parses plain floats", () => {
    expect(toNumber({ v: "0.625" }, "v", "p")).toBe(0.625);
  });

  it("names the offending column on junk", () => {
    expect(() => toNumber({ v: "nan?" }, "v", "p"))
      .toThrowError(/column 'v': 'nan\?' is not a number/);
  });
});
