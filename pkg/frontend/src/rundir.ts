/**
 * Convenience driver: map a completed run directory onto the figures its
 * kind supports, using the manifest as the routing key.
 */

import { existsSync, readFileSync, readdirSync } from "node:fs";
import { join } from "node:path";

import { SchemaError } from "./csv.js";
import { FigureSpec, render } from "./figures.js";

function seedFiles(runDir: string, prefix: string): string[] {
  const names = readdirSync(runDir)
    .filter((n) => n.startsWith(prefix) && n.endsWith(".csv"))
    .sort();
  return names.map((n) => join(runDir, n));
}

export function planFigures(runDir: string, outDir: string): FigureSpec[] {
  const manifestPath = join(runDir, "manifest.json");
  if (!existsSync(manifestPath)) {
    throw new SchemaError(`no manifest.json in ${runDir}`);
  }
  const manifest = JSON.parse(readFileSync(manifestPath, "utf8")) as {
    kind?: string;
  };
  switch (manifest.kind) {
    case "lebesgue-scan":
      return [{
        kind: "lebesgue-vs-tau",
        inputs: [join(runDir, "lebesgue.csv")],
        output: join(outDir, "lebesgue-vs-tau.svg"),
      }];
    case "offline-amplification":
      return [{
        kind: "amplification",
        inputs: [join(runDir, "summary.csv")],
        output: join(outDir, "amplification.svg"),
      }];
    case "online-regret": {
      const regret = seedFiles(runDir, "regret_");
      const census = seedFiles(runDir, "census_");
      if (regret.length === 0 || census.length === 0) {
        throw new SchemaError(`no per-seed CSVs in ${runDir}`);
      }
      return [
        {
          kind: "regret-curves",
          inputs: regret,
          output: join(outDir, "regret-curves.svg"),
          options: { manifest: manifestPath },
        },
        {
          kind: "census",
          inputs: census,
          output: join(outDir, "census.svg"),
        },
      ];
    }
    default:
      throw new SchemaError(
        `no figures defined for run kind: ${String(manifest.kind)}`);
  }
}

export function renderAll(runDir: string, outDir?: string): string[] {
  const target = outDir ?? join(runDir, "figures");
  return planFigures(runDir, target).map((spec) => render(spec));
}
