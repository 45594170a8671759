#!/usr/bin/env node
/**
 * plots --kind {populations|policies|rho} --in <dir-or-csv> --out <file.svg>
 *
 * populations: one run (a CSV file, or a directory whose first CSV is used).
 * policies:    a directory with ts/ tsdc/ ppto/ subdirectories of seed CSVs.
 * rho:         a directory with "rho-" prefixed subdirectories of seed CSVs.
 */

import { readdirSync, statSync, writeFileSync } from "node:fs";
import { join } from "node:path";

import { loadRunTable, RunTable } from "./csv";
import { renderPolicyComparison, renderPopulations, renderRhoSweep } from "./figures";

function usage(message?: string): never {
  if (message) process.stderr.write(`error: ${message}\n`);
  process.stderr.write(
    "usage: plots --kind {populations|policies|rho} --in <dir> --out <file.svg>\n",
  );
  process.exit(2);
}

function parseArgs(argv: string[]): { kind: string; input: string; output: string } {
  let kind = "";
  let input = "";
  let output = "";
  for (let i = 0; i < argv.length; i++) {
    switch (argv[i]) {
      case "--kind":
        kind = argv[++i] ?? "";
        break;
      case "--in":
        input = argv[++i] ?? "";
        break;
      case "--out":
        output = argv[++i] ?? "";
        break;
      default:
        usage(`unknown argument ${argv[i]}`);
    }
  }
  if (!["populations", "policies", "rho"].includes(kind)) usage("missing or bad --kind");
  if (!input) usage("missing --in");
  if (!output) usage("missing --out");
  return { kind, input, output };
}

function csvFilesIn(dir: string): string[] {
  return readdirSync(dir)
    .filter((f) => f.endsWith(".csv"))
    .sort()
    .map((f) => join(dir, f));
}

function loadSingleRun(input: string): RunTable {
  if (statSync(input).isDirectory()) {
    const files = csvFilesIn(input);
    if (files.length === 0) throw new Error(`no CSV files in ${input}`);
    return loadRunTable(files[0]);
  }
  return loadRunTable(input);
}

function loadGroups(input: string, prefix?: string): Map<string, RunTable[]> {
  const groups = new Map<string, RunTable[]>();
  for (const entry of readdirSync(input).sort()) {
    const sub = join(input, entry);
    if (!statSync(sub).isDirectory()) continue;
    if (prefix && !entry.startsWith(prefix)) continue;
    const files = csvFilesIn(sub);
    if (files.length) groups.set(entry, files.map(loadRunTable));
  }
  return groups;
}

export function main(argv: string[]): number {
  const { kind, input, output } = parseArgs(argv);
  try {
    let svg: string;
    if (kind === "populations") {
      svg = renderPopulations(loadSingleRun(input));
    } else if (kind === "policies") {
      const groups = loadGroups(input);
      for (const key of [...groups.keys()]) {
        if (!["ts", "tsdc", "ppto"].includes(key)) groups.delete(key);
      }
      if (groups.size === 0) throw new Error(`no policy subdirectories (ts/tsdc/ppto) in ${input}`);
      svg = renderPolicyComparison(groups);
    } else {
      const groups = loadGroups(input, "rho-");
      if (groups.size === 0) throw new Error(`no rho-* subdirectories in ${input}`);
      svg = renderRhoSweep(groups);
    }
    writeFileSync(output, svg);
    process.stdout.write(`wrote ${output}\n`);
    return 0;
  } catch (err) {
    process.stderr.write(`error: ${(err as Error).message}\n`);
    return 2;
  }
}

if (require.main === module) {
  process.exit(main(process.argv.slice(2)));
}
