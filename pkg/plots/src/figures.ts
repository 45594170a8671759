/**
 * The three figure kinds built from simulation CSV tables:
 * per-class population curves of one run, infected-count comparison
 * across testing policies, and infected-count comparison across app-usage
 * levels.  Comparison figures draw the seed-mean per group with a one-
 * standard-deviation band (sample std; single-seed groups get a plain line).
 */

import { infectedSeries, RunTable } from "./csv";
import { ChartSpec, PALETTE, renderChart, Series } from "./svg";

export class FigureError extends Error {
  constructor(message: string) {
    super(message);
    this.name = "FigureError";
  }
}

export function meanAndStd(rows: number[][]): { mean: number[]; std: number[] } {
  const n = rows.length;
  const width = rows[0].length;
  const mean = new Array(width).fill(0);
  for (const row of rows) {
    for (let i = 0; i < width; i++) mean[i] += row[i] / n;
  }
  const std = new Array(width).fill(0);
  if (n > 1) {
    for (const row of rows) {
      for (let i = 0; i < width; i++) std[i] += (row[i] - mean[i]) ** 2 / (n - 1);
    }
    for (let i = 0; i < width; i++) std[i] = Math.sqrt(std[i]);
  }
  return { mean, std };
}

function checkMatchedDays(runs: RunTable[]): number[] {
  const days = runs[0].day;
  for (const run of runs) {
    if (run.day.length !== days.length || run.day.some((d, i) => d !== days[i])) {
      throw new FigureError(
        `day ranges differ between ${runs[0].source} and ${run.source}`,
      );
    }
  }
  return days;
}

export function populationsChart(run: RunTable): ChartSpec {
  const series: Series[] = [
    { label: "asymptomatic", color: PALETTE[0], values: run.asymptomatic },
    { label: "presymptomatic", color: PALETTE[1], values: run.presymptomatic },
    { label: "symptomatic", color: PALETTE[2], values: run.symptomatic },
    { label: "recovered", color: PALETTE[3], values: run.recovered },
  ];
  return {
    title: "Population classes over time",
    xLabel: "day",
    yLabel: "individuals",
    x: run.day,
    series,
  };
}

function comparisonChart(
  title: string,
  groups: Map<string, RunTable[]>,
  order: string[],
): ChartSpec {
  if (groups.size === 0) {
    throw new FigureError("no input groups");
  }
  const labels = order.filter((l) => groups.has(l));
  for (const key of groups.keys()) {
    if (!labels.includes(key)) labels.push(key);
  }
  let days: number[] | null = null;
  const series: Series[] = [];
  labels.forEach((label, idx) => {
    const runs = groups.get(label)!;
    if (runs.length === 0) {
      throw new FigureError(`group "${label}" has no runs`);
    }
    const groupDays = checkMatchedDays(runs);
    if (days === null) {
      days = groupDays;
    } else if (groupDays.length !== days.length || groupDays.some((d, i) => d !== days![i])) {
      throw new FigureError(`day ranges differ between groups "${labels[0]}" and "${label}"`);
    }
    const { mean, std } = meanAndStd(runs.map(infectedSeries));
    series.push({
      label: `${label} (${runs.length} seed${runs.length === 1 ? "" : "s"})`,
      color: PALETTE[idx % PALETTE.length],
      values: mean,
      band: runs.length > 1 ? std : undefined,
    });
  });
  return { title, xLabel: "day", yLabel: "infected individuals", x: days!, series };
}

export const POLICY_ORDER = ["ts", "tsdc", "ppto"];
export const RHO_ORDER = ["rho-1.0", "rho-0.75", "rho-0.5"];

export function policyComparisonChart(groups: Map<string, RunTable[]>): ChartSpec {
  return comparisonChart("Infected individuals by testing policy", groups, POLICY_ORDER);
}

export function rhoSweepChart(groups: Map<string, RunTable[]>): ChartSpec {
  return comparisonChart("Infected individuals by app-usage level", groups, RHO_ORDER);
}

export function renderPopulations(run: RunTable): string {
  return renderChart(populationsChart(run));
}

export function renderPolicyComparison(groups: Map<string, RunTable[]>): string {
  return renderChart(policyComparisonChart(groups));
}

export function renderRhoSweep(groups: Map<string, RunTable[]>): string {
  return renderChart(rhoSweepChart(groups));
}
