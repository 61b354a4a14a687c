import { CsvTable, Row, requireColumns, toNumber } from "./csv.js";

export interface SummaryRow {
  label: string;
  keys: Record<string, string>;
  count: number;
  latencyMean: number;
  latencyStd: number;
  rtfMean: number;
  rtfStd: number;
}

export function mean(xs: number[]): number {
  let s = 0;
  for (const x of xs) s += x;
  return s / xs.length;
}

/** Sample standard deviation (ddof=1); a single observation reports 0. */
export function sampleStd(xs: number[]): number {
  if (xs.length < 2) return 0;
  const m = mean(xs);
  let s = 0;
  for (const x of xs) s += (x - m) * (x - m);
  return Math.sqrt(s / (xs.length - 1));
}

/** "stream r=5" for the default keys; generic "k=v" pairs otherwise. */
export function groupLabel(row: Row, keys: string[]): string {
  return keys.map((k) => (k === "mode" ? row[k] : `${k}=${row[k]}`)).join(" ");
}

export function groupRows(table: CsvTable, keys: string[]): Map<string, Row[]> {
  requireColumns(table, keys);
  const groups = new Map<string, Row[]>();
  for (const row of table.rows) {
    const label = groupLabel(row, keys);
    const bucket = groups.get(label);
    if (bucket) bucket.push(row);
    else groups.set(label, [row]);
  }
  return groups;
}

export interface SummarizeOptions {
  groupBy: string[];
  latencyColumn: string;
  rtfColumn: string;
}

export const DEFAULT_SUMMARIZE: SummarizeOptions = {
  groupBy: ["mode", "r"],
  latencyColumn: "latency_ms_end_to_end",
  rtfColumn: "rtf_acoustic",
};

/** Per-group mean and sample std of the latency and RTF columns, sorted by label. */
export function summarize(table: CsvTable, opts: SummarizeOptions = DEFAULT_SUMMARIZE): SummaryRow[] {
  requireColumns(table, [...opts.groupBy, opts.latencyColumn, opts.rtfColumn]);
  const groups = groupRows(table, opts.groupBy);
  const out: SummaryRow[] = [];
  for (const [label, rows] of groups) {
    const lat = rows.map((r) => toNumber(r, opts.latencyColumn));
    const rtf = rows.map((r) => toNumber(r, opts.rtfColumn));
    const keys: Record<string, string> = {};
    for (const k of opts.groupBy) keys[k] = rows[0][k];
    out.push({
      label,
      keys,
      count: rows.length,
      latencyMean: mean(lat),
      latencyStd: sampleStd(lat),
      rtfMean: mean(rtf),
      rtfStd: sampleStd(rtf),
    });
  }
  out.sort((a, b) => a.label.localeCompare(b.label, "en", { numeric: true }));
  return out;
}
