import { CsvTable, requireColumns, toNumber } from "./csv.js";
import { groupRows } from "./stats.js";

export interface Point {
  x: number;
  y: number;
}

export interface Series {
  label: string;
  points: Point[];
}

export interface ChartOptions {
  xColumn: string;
  yColumn: string;
  groupBy: string[];
  title?: string;
  width?: number;
  height?: number;
}

export const DEFAULT_CHART: ChartOptions = {
  xColumn: "audio_duration_s",
  yColumn: "latency_ms_end_to_end",
  groupBy: ["mode", "r"],
};

const PALETTE = ["#2563eb", "#dc2626", "#059669", "#d97706", "#7c3aed", "#0891b2"];

export function buildSeries(table: CsvTable, opts: ChartOptions = DEFAULT_CHART): Series[] {
  requireColumns(table, [opts.xColumn, opts.yColumn, ...opts.groupBy]);
  const series: Series[] = [];
  for (const [label, rows] of groupRows(table, opts.groupBy)) {
    const points = rows.map((r) => ({
      x: toNumber(r, opts.xColumn),
      y: toNumber(r, opts.yColumn),
    }));
    points.sort((a, b) => a.x - b.x);
    series.push({ label, points });
  }
  series.sort((a, b) => a.label.localeCompare(b.label, "en", { numeric: true }));
  return series;
}

function escapeXml(s: string): string {
  return s
    .replace(/&/g, "&amp;")
    .replace(/</g, "&lt;")
    .replace(/>/g, "&gt;")
    .replace(/"/g, "&quot;");
}

/** Tick positions at 1/2/5 multiples covering [lo, hi]. */
export function linearTicks(lo: number, hi: number, target = 6): number[] {
  if (hi <= lo) return [lo];
  const raw = (hi - lo) / Math.max(1, target - 1);
  const mag = Math.pow(10, Math.floor(Math.log10(raw)));
  let step = mag;
  for (const m of [1, 2, 5, 10]) {
    if (m * mag >= raw) {
      step = m * mag;
      break;
    }
  }
  const ticks: number[] = [];
  for (let t = Math.ceil(lo / step) * step; t <= hi + step * 1e-9; t += step) {
    ticks.push(Number(t.toFixed(12)));
  }
  return ticks;
}

function fmtTick(v: number): string {
  if (Number.isInteger(v)) return String(v);
  return String(Number(v.toPrecision(3)));
}

/**
 * Latency-vs-duration chart as an SVG string: linear x, logarithmic y,
 * one line+marker series per group, legend in the right margin.
 */
export function renderChart(series: Series[], opts: ChartOptions = DEFAULT_CHART): string {
  const all = series.flatMap((s) => s.points);
  if (series.length === 0 || all.length === 0) {
    throw new Error("no data points to chart");
  }
  const bad = all.find((p) => p.y <= 0);
  if (bad) {
    throw new Error(`log scale requires positive "${opts.yColumn}" values, got ${bad.y}`);
  }

  const width = opts.width ?? 760;
  const height = opts.height ?? 420;
  const margin = { top: 48, right: 170, bottom: 52, left: 78 };
  const plotW = width - margin.left - margin.right;
  const plotH = height - margin.top - margin.bottom;

  const xMax = Math.max(...all.map((p) => p.x));
  const xLo = 0;
  const xHi = xMax > xLo ? xMax : xLo + 1;

  // y spans whole decades so the grid reads as a log axis
  let eLo = Math.floor(Math.log10(Math.min(...all.map((p) => p.y))));
  let eHi = Math.ceil(Math.log10(Math.max(...all.map((p) => p.y))));
  if (eLo === eHi) {
    eLo -= 1;
    eHi += 1;
  }

  const sx = (x: number) => margin.left + ((x - xLo) / (xHi - xLo)) * plotW;
  const sy = (y: number) => margin.top + plotH - ((Math.log10(y) - eLo) / (eHi - eLo)) * plotH;

  const parts: string[] = [];
  parts.push(
    `<svg xmlns="http://www.w3.org/2000/svg" viewBox="0 0 ${width} ${height}" font-family="sans-serif">`,
  );
  parts.push(`<rect width="100%" height="100%" fill="white"/>`);
  if (opts.title) {
    parts.push(
      `<text x="${width / 2}" y="24" text-anchor="middle" font-size="15" font-weight="bold">${escapeXml(opts.title)}</text>`,
    );
  }

  // gridlines: major per decade with label, faint minors at 2..9
  for (let e = eLo; e <= eHi; e++) {
    const y = sy(Math.pow(10, e));
    parts.push(
      `<line x1="${margin.left}" y1="${y.toFixed(1)}" x2="${margin.left + plotW}" y2="${y.toFixed(1)}" stroke="#d1d5db"/>`,
    );
    parts.push(
      `<text x="${margin.left - 8}" y="${(y + 4).toFixed(1)}" text-anchor="end" font-size="11">${fmtTick(Math.pow(10, e))}</text>`,
    );
    if (e < eHi) {
      for (let m = 2; m <= 9; m++) {
        const ym = sy(m * Math.pow(10, e));
        parts.push(
          `<line x1="${margin.left}" y1="${ym.toFixed(1)}" x2="${margin.left + plotW}" y2="${ym.toFixed(1)}" stroke="#f3f4f6"/>`,
        );
      }
    }
  }

  for (const t of linearTicks(xLo, xHi)) {
    const x = sx(t);
    parts.push(
      `<line x1="${x.toFixed(1)}" y1="${margin.top}" x2="${x.toFixed(1)}" y2="${margin.top + plotH}" stroke="#f3f4f6"/>`,
    );
    parts.push(
      `<text x="${x.toFixed(1)}" y="${margin.top + plotH + 18}" text-anchor="middle" font-size="11">${fmtTick(t)}</text>`,
    );
  }

  // axes
  parts.push(
    `<line x1="${margin.left}" y1="${margin.top}" x2="${margin.left}" y2="${margin.top + plotH}" stroke="#111827"/>`,
  );
  parts.push(
    `<line x1="${margin.left}" y1="${margin.top + plotH}" x2="${margin.left + plotW}" y2="${margin.top + plotH}" stroke="#111827"/>`,
  );
  parts.push(
    `<text x="${margin.left + plotW / 2}" y="${height - 12}" text-anchor="middle" font-size="12">${escapeXml(opts.xColumn)}</text>`,
  );
  parts.push(
    `<text x="20" y="${margin.top + plotH / 2}" text-anchor="middle" font-size="12" transform="rotate(-90 20 ${margin.top + plotH / 2})">${escapeXml(opts.yColumn)} (log)</text>`,
  );

  series.forEach((s, i) => {
    const color = PALETTE[i % PALETTE.length];
    if (s.points.length > 1) {
      const d = s.points.map((p) => `${sx(p.x).toFixed(1)},${sy(p.y).toFixed(1)}`).join(" ");
      parts.push(`<polyline points="${d}" fill="none" stroke="${color}" stroke-width="1.8"/>`);
    }
    for (const p of s.points) {
      parts.push(
        `<circle cx="${sx(p.x).toFixed(1)}" cy="${sy(p.y).toFixed(1)}" r="3.2" fill="${color}"/>`,
      );
    }
    const ly = margin.top + 10 + i * 20;
    const lx = margin.left + plotW + 16;
    parts.push(`<rect x="${lx}" y="${ly - 9}" width="12" height="12" fill="${color}"/>`);
    parts.push(`<text x="${lx + 18}" y="${ly + 2}" font-size="12">${escapeXml(s.label)}</text>`);
  });

  parts.push(`</svg>`);
  return parts.join("\n") + "\n";
}
