import { SummaryRow } from "./stats.js";

export interface TableOptions {
  latencyColumn: string;
  rtfColumn: string;
}

function cell(meanV: number, stdV: number): string {
  return `${meanV.toFixed(4)} ± ${stdV.toFixed(4)}`;
}

/** Markdown summary, one row per group, mean ± sample std at 4 decimals. */
export function renderSummaryTable(summary: SummaryRow[], opts: TableOptions): string {
  const lines = [
    `| config | runs | ${opts.latencyColumn} (mean ± std) | ${opts.rtfColumn} (mean ± std) |`,
    "| --- | ---: | ---: | ---: |",
  ];
  let singles = false;
  for (const row of summary) {
    const mark = row.count === 1 ? " *" : "";
    lines.push(
      `| ${row.label}${mark} | ${row.count} | ${cell(row.latencyMean, row.latencyStd)} | ${cell(row.rtfMean, row.rtfStd)} |`,
    );
    if (row.count === 1) singles = true;
  }
  let out = lines.join("\n") + "\n";
  if (singles) {
    out += "\n\\* single run: std reported as 0.\n";
  }
  return out;
}
