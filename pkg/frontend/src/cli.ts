#!/usr/bin/env node
/**
 * Figure CLI.  Exit codes follow the primary component's taxonomy:
 * 0 ok, 1 runtime failure (schema mismatch, unreadable input), 2 usage
 * or spec error.
 */

import { readFileSync } from "node:fs";
import { pathToFileURL } from "node:url";
import { parseArgs } from "node:util";

import { SchemaError } from "./csv.js";
import { parseSpec, render } from "./figures.js";
import { renderAll } from "./rundir.js";

const USAGE = [
  "usage:",
  "  cli.js render --spec <figure.json>",
  "  cli.js render-all <run_dir> [--out <dir>]",
].join("\n");

function fail(message: string, code: number): number {
  process.stderr.write(message + "\n");
  return code;
}

export function main(argv: string[]): number {
  const command = argv[0];
  try {
    if (command === "render") {
      const { values } = parseArgs({
        args: argv.slice(1),
        options: { spec: { type: "string" } },
      });
      if (!values.spec) {
        return fail("render needs --spec <figure.json>\n" + USAGE, 2);
      }
      let raw: unknown;
      try {
        raw = JSON.parse(readFileSync(values.spec, "utf8"));
      } catch (err) {
        return fail(`cannot read spec: ${(err as Error).message}`, 2);
      }
      const out = render(parseSpec(raw));
      process.stdout.write(out + "\n");
      return 0;
    }
    if (command === "render-all") {
      const { values, positionals } = parseArgs({
        args: argv.slice(1),
        options: { out: { type: "string" } },
        allowPositionals: true,
      });
      const runDir = positionals[0];
      if (!runDir) {
        return fail("render-all needs a run directory\n" + USAGE, 2);
      }
      for (const out of renderAll(runDir, values.out)) {
        process.stdout.write(out + "\n");
      }
      return 0;
    }
    return fail(USAGE, 2);
  } catch (err) {
    if (err instanceof SchemaError) {
      return fail(`schema error: ${err.message}`, 1);
    }
    return fail(`error: ${(err as Error).message}`, 1);
  }
}

if (process.argv[1] &&
    import.meta.url === pathToFileURL(process.argv[1]).href) {
  process.exitCode = main(process.argv.slice(2));
}
