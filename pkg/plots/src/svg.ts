/**
 * Minimal deterministic SVG chart builder.
 *
 * Pure string assembly with fixed geometry and styling: identical inputs
 * produce byte-identical files (no timestamps, no randomness), which the
 * figure tests rely on.
 */

export interface Series {
  label: string;
  color: string;
  values: number[];
  /** optional spread band rendered at values +- band */
  band?: number[];
}

export interface ChartSpec {
  title: string;
  xLabel: string;
  yLabel: string;
  x: number[];
  series: Series[];
}

const WIDTH = 860;
const HEIGHT = 520;
const MARGIN = { top: 48, right: 24, bottom: 56, left: 76 };

export const PALETTE = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"];

function fmt(value: number): string {
  // fixed decimal formatting keeps output stable across runs
  return Number(value.toFixed(2)).toString();
}

function niceTicks(min: number, max: number, count = 6): number[] {
  if (min === max) {
    max = min + 1;
  }
  const span = max - min;
  const step = Math.pow(10, Math.floor(Math.log10(span / count)));
  const err = (span / count) / step;
  const factor = err >= 7.5 ? 10 : err >= 3.5 ? 5 : err >= 1.5 ? 2 : 1;
  const nice = step * factor;
  const start = Math.ceil(min / nice) * nice;
  const ticks: number[] = [];
  for (let v = start; v <= max + 1e-9; v += nice) {
    ticks.push(Number(v.toFixed(10)));
  }
  return ticks;
}

export function renderChart(spec: ChartSpec): string {
  const plotW = WIDTH - MARGIN.left - MARGIN.right;
  const plotH = HEIGHT - MARGIN.top - MARGIN.bottom;

  const xMin = Math.min(...spec.x);
  const xMax = Math.max(...spec.x);
  let yMin = 0;
  let yMax = -Infinity;
  for (const s of spec.series) {
    for (let i = 0; i < s.values.length; i++) {
      const hi = s.values[i] + (s.band ? s.band[i] : 0);
      if (hi > yMax) yMax = hi;
    }
  }
  if (!Number.isFinite(yMax) || yMax <= yMin) yMax = yMin + 1;

  const sx = (v: number) =>
    MARGIN.left + (xMax === xMin ? plotW / 2 : ((v - xMin) / (xMax - xMin)) * plotW);
  const sy = (v: number) => MARGIN.top + plotH - ((v - yMin) / (yMax - yMin)) * plotH;

  const parts: string[] = [];
  parts.push(
    `<svg xmlns="http://www.w3.org/2000/svg" width="${WIDTH}" height="${HEIGHT}" viewBox="0 0 ${WIDTH} ${HEIGHT}" font-family="Helvetica,Arial,sans-serif">`,
  );
  parts.push(`<rect width="${WIDTH}" height="${HEIGHT}" fill="white"/>`);
  parts.push(
    `<text x="${WIDTH / 2}" y="28" text-anchor="middle" font-size="18">${spec.title}</text>`,
  );

  // axes
  const x0 = MARGIN.left;
  const y0 = MARGIN.top + plotH;
  parts.push(
    `<line x1="${x0}" y1="${y0}" x2="${x0 + plotW}" y2="${y0}" stroke="black" stroke-width="1"/>`,
  );
  parts.push(
    `<line x1="${x0}" y1="${MARGIN.top}" x2="${x0}" y2="${y0}" stroke="black" stroke-width="1"/>`,
  );
  for (const t of niceTicks(xMin, xMax)) {
    const px = sx(t);
    parts.push(`<line x1="${fmt(px)}" y1="${y0}" x2="${fmt(px)}" y2="${y0 + 5}" stroke="black"/>`);
    parts.push(
      `<text x="${fmt(px)}" y="${y0 + 20}" text-anchor="middle" font-size="12">${t}</text>`,
    );
  }
  for (const t of niceTicks(yMin, yMax)) {
    const py = sy(t);
    parts.push(`<line x1="${x0 - 5}" y1="${fmt(py)}" x2="${x0}" y2="${fmt(py)}" stroke="black"/>`);
    parts.push(
      `<text x="${x0 - 9}" y="${fmt(py + 4)}" text-anchor="end" font-size="12">${t}</text>`,
    );
    parts.push(
      `<line x1="${x0}" y1="${fmt(py)}" x2="${x0 + plotW}" y2="${fmt(py)}" stroke="#dddddd" stroke-width="0.5"/>`,
    );
  }
  parts.push(
    `<text x="${x0 + plotW / 2}" y="${HEIGHT - 14}" text-anchor="middle" font-size="14">${spec.xLabel}</text>`,
  );
  parts.push(
    `<text x="20" y="${MARGIN.top + plotH / 2}" text-anchor="middle" font-size="14" transform="rotate(-90 20 ${MARGIN.top + plotH / 2})">${spec.yLabel}</text>`,
  );

  // bands first so lines draw on top
  for (const s of spec.series) {
    if (!s.band) continue;
    const upper = spec.x.map((xv, i) => `${fmt(sx(xv))},${fmt(sy(s.values[i] + s.band![i]))}`);
    const lower = spec.x
      .map((xv, i) => `${fmt(sx(xv))},${fmt(sy(Math.max(yMin, s.values[i] - s.band![i])))}`)
      .reverse();
    parts.push(
      `<polygon points="${upper.concat(lower).join(" ")}" fill="${s.color}" opacity="0.18"/>`,
    );
  }
  for (const s of spec.series) {
    const pts = spec.x.map((xv, i) => `${fmt(sx(xv))},${fmt(sy(s.values[i]))}`);
    if (pts.length === 1) {
      const [x, y] = pts[0].split(",");
      parts.push(`<circle cx="${x}" cy="${y}" r="4" fill="${s.color}"/>`);
    } else {
      parts.push(
        `<polyline points="${pts.join(" ")}" fill="none" stroke="${s.color}" stroke-width="2"/>`,
      );
    }
  }

  // legend
  let ly = MARGIN.top + 8;
  for (const s of spec.series) {
    const lx = x0 + plotW - 150;
    parts.push(
      `<line x1="${lx}" y1="${ly}" x2="${lx + 26}" y2="${ly}" stroke="${s.color}" stroke-width="3"/>`,
    );
    parts.push(`<text x="${lx + 32}" y="${ly + 4}" font-size="13">${s.label}</text>`);
    ly += 20;
  }

  parts.push("</svg>");
  return parts.join("\n") + "\n";
}
