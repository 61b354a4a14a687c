import * as fs from "node:fs";
import Papa from "papaparse";

export type Row = Record<string, string>;

export interface CsvTable {
  header: string[];
  rows: Row[];
}

export function parseCsv(text: string, source = "<string>"): CsvTable {
  if (text.trim() === "") {
    throw new Error(`${source}: empty CSV`);
  }
  const parsed = Papa.parse<Row>(text.trim(), {
    header: true,
    skipEmptyLines: true,
  });
  // FieldMismatch rows are tolerated; Delimiter is a notice on 1-column input
  const fatal = parsed.errors.find((e) => e.type !== "FieldMismatch" && e.type !== "Delimiter");
  if (fatal) {
    throw new Error(`${source}: ${fatal.message}`);
  }
  const header = parsed.meta.fields ?? [];
  if (header.length === 0 || (header.length === 1 && header[0] === "")) {
    throw new Error(`${source}: empty CSV`);
  }
  if (parsed.data.length === 0) {
    throw new Error(`${source}: CSV has a header but no data rows`);
  }
  return { header, rows: parsed.data };
}

/** Concatenate several CSV files; every file must share the first one's header. */
export function readCsvFiles(paths: string[]): CsvTable {
  if (paths.length === 0) {
    throw new Error("at least one CSV input is required");
  }
  let header: string[] | null = null;
  const rows: Row[] = [];
  for (const p of paths) {
    const table = parseCsv(fs.readFileSync(p, "utf-8"), p);
    if (header === null) {
      header = table.header;
    } else if (table.header.join(",") !== header.join(",")) {
      throw new Error(`${p}: header does not match ${paths[0]}`);
    }
    rows.push(...table.rows);
  }
  return { header: header!, rows };
}

export function requireColumns(table: CsvTable, columns: string[]): void {
  for (const c of columns) {
    if (!table.header.includes(c)) {
      throw new Error(`missing column "${c}" (header: ${table.header.join(", ")})`);
    }
  }
}

export function toNumber(row: Row, column: string): number {
  const v = Number(row[column]);
  if (!Number.isFinite(v)) {
    throw new Error(`column "${column}" has non-numeric value "${row[column]}"`);
  }
  return v;
}
