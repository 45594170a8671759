/**
 * Strict reader for the simulator's per-day CSV output.
 *
 * The header must match the simulator's schema byte for byte and the day
 * column must increase strictly; anything else fails with the offending
 * row number so broken files surface immediately.
 */

import { readFileSync } from "node:fs";

export const CSV_HEADER =
  "day,S,A,P,Y,R,isolated,new_infections,cum_infections,tests_used";

export interface RunTable {
  source: string;
  day: number[];
  susceptible: number[];
  asymptomatic: number[];
  presymptomatic: number[];
  symptomatic: number[];
  recovered: number[];
  isolated: number[];
  newInfections: number[];
  cumInfections: number[];
  testsUsed: number[];
}

export class CsvError extends Error {
  constructor(source: string, line: number, message: string) {
    super(`${source}:${line}: ${message}`);
    this.name = "CsvError";
  }
}

export function parseRunTable(text: string, source: string): RunTable {
  const lines = text.split(/\r?\n/);
  if (lines[0] !== CSV_HEADER) {
    throw new CsvError(source, 1, `header must be exactly "${CSV_HEADER}"`);
  }
  const table: RunTable = {
    source,
    day: [],
    susceptible: [],
    asymptomatic: [],
    presymptomatic: [],
    symptomatic: [],
    recovered: [],
    isolated: [],
    newInfections: [],
    cumInfections: [],
    testsUsed: [],
  };
  const columns: (keyof Omit<RunTable, "source">)[] = [
    "day",
    "susceptible",
    "asymptomatic",
    "presymptomatic",
    "symptomatic",
    "recovered",
    "isolated",
    "newInfections",
    "cumInfections",
    "testsUsed",
  ];
  for (let i = 1; i < lines.length; i++) {
    const line = lines[i];
    if (line === "") continue; // trailing newline
    const cells = line.split(",");
    if (cells.length !== columns.length) {
      throw new CsvError(source, i + 1, `expected ${columns.length} cells, got ${cells.length}`);
    }
    for (let c = 0; c < columns.length; c++) {
      const value = Number(cells[c]);
      if (!Number.isFinite(value)) {
        throw new CsvError(source, i + 1, `cell ${c + 1} is not a number: "${cells[c]}"`);
      }
      table[columns[c]].push(value);
    }
    const n = table.day.length;
    if (n > 1 && table.day[n - 1] <= table.day[n - 2]) {
      throw new CsvError(source, i + 1, "day column must be strictly increasing");
    }
  }
  if (table.day.length === 0) {
    throw new CsvError(source, 2, "no data rows");
  }
  return table;
}

export function loadRunTable(path: string): RunTable {
  return parseRunTable(readFileSync(path, "utf-8"), path);
}

/** Currently infected per day: asymptomatic + presymptomatic + symptomatic. */
export function infectedSeries(run: RunTable): number[] {
  return run.day.map(
    (_, i) => run.asymptomatic[i] + run.presymptomatic[i] + run.symptomatic[i],
  );
}
