#!/usr/bin/env node
import * as fs from "node:fs";
import * as path from "node:path";
import { pathToFileURL } from "node:url";
import { parseArgs } from "node:util";

import { readCsvFiles } from "./csv.js";
import { buildSeries, renderChart, DEFAULT_CHART } from "./chart.js";
import { summarize, DEFAULT_SUMMARIZE } from "./stats.js";
import { renderSummaryTable } from "./table.js";

const USAGE = `usage: plot-report --csv bench.csv [--csv more.csv ...]
                   [--out chart.svg] [--table summary.md]
                   [--y latency_ms_end_to_end] [--rtf rtf_acoustic]
                   [--x audio_duration_s] [--group mode,r] [--title TEXT]

Reads bench CSV files and writes a log-latency chart (SVG) and/or a
markdown summary table. At least one of --out/--table is required.`;

export function main(argv: string[]): number {
  let values;
  try {
    values = parseArgs({
      args: argv,
      options: {
        csv: { type: "string", multiple: true },
        out: { type: "string" },
        table: { type: "string" },
        x: { type: "string", default: DEFAULT_CHART.xColumn },
        y: { type: "string", default: DEFAULT_CHART.yColumn },
        rtf: { type: "string", default: DEFAULT_SUMMARIZE.rtfColumn },
        group: { type: "string", default: "mode,r" },
        title: { type: "string" },
        help: { type: "boolean" },
      },
    }).values;
  } catch (err) {
    console.error(String(err instanceof Error ? err.message : err));
    console.error(USAGE);
    return 1;
  }
  if (values.help) {
    console.log(USAGE);
    return 0;
  }
  const csvPaths = values.csv ?? [];
  if (csvPaths.length === 0 || (!values.out && !values.table)) {
    console.error(USAGE);
    return 1;
  }

  try {
    const table = readCsvFiles(csvPaths);
    const groupBy = values.group!.split(",").map((s) => s.trim()).filter(Boolean);

    if (values.out) {
      const opts = {
        xColumn: values.x!,
        yColumn: values.y!,
        groupBy,
        title: values.title,
      };
      const svg = renderChart(buildSeries(table, opts), opts);
      fs.mkdirSync(path.dirname(path.resolve(values.out)), { recursive: true });
      fs.writeFileSync(values.out, svg);
      console.log(`wrote ${values.out}`);
    }

    if (values.table) {
      const sopts = { groupBy, latencyColumn: values.y!, rtfColumn: values.rtf! };
      const md = renderSummaryTable(summarize(table, sopts), sopts);
      fs.mkdirSync(path.dirname(path.resolve(values.table)), { recursive: true });
      fs.writeFileSync(values.table, md);
      console.log(`wrote ${values.table}`);
    }
  } catch (err) {
    console.error(`plot-report: ${err instanceof Error ? err.message : err}`);
    return 1;
  }
  return 0;
}

if (process.argv[1] && import.meta.url === pathToFileURL(process.argv[1]).href) {
  process.exit(main(process.argv.slice(2)));
}
