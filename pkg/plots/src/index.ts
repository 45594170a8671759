export { CSV_HEADER, CsvError, infectedSeries, loadRunTable, parseRunTable } from "./csv";
export type { RunTable } from "./csv";
export {
  FigureError,
  meanAndStd,
  policyComparisonChart,
  populationsChart,
  renderPolicyComparison,
  renderPopulations,
  renderRhoSweep,
  rhoSweepChart,
} from "./figures";
export { renderChart } from "./svg";
export type { ChartSpec, Series } from "./svg";
