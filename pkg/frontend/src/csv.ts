/**
 * Reader for collapsim CSV files.
 *
 * The files start with '#'-prefixed "key: value" metadata lines, then a
 * header row, then purely numeric rows.  Values may contain colons (the
 * command echo does), so metadata splits on the first colon only.
 */

import { readFileSync } from "node:fs";
import Papa from "papaparse";

export interface Table {
  /** Metadata from the '#' lines, in file order. */
  meta: Record<string, string>;
  /** Column name -> values, one entry per header name. */
  columns: Record<string, number[]>;
  /** Header names in file order. */
  names: string[];
  rows: number;
}

export function parseTable(text: string): Table {
  const lines = text.split(/\r?\n/);
  const meta: Record<string, string> = {};
  let start = 0;
  while (start < lines.length && (lines[start] ?? "").startsWith("#")) {
    const body = (lines[start] as string).slice(1).trim();
    const sep = body.indexOf(":");
    if (sep >= 0) {
      meta[body.slice(0, sep).trim()] = body.slice(sep + 1).trim();
    }
    start += 1;
  }
  const csvBody = lines.slice(start).join("\n");
  if (csvBody.trim() === "") {
    throw new Error("CSV has no header row");
  }
  const parsed = Papa.parse<Record<string, unknown>>(csvBody, {
    header: true,
    dynamicTyping: true,
    skipEmptyLines: true,
  });
  if (parsed.errors.length > 0) {
    const first = parsed.errors[0] as Papa.ParseError;
    throw new Error(`CSV parse error: ${first.message} (row ${first.row})`);
  }
  const names = (parsed.meta.fields ?? []).map((f) => f.trim());
  if (names.length === 0) {
    throw new Error("CSV has no header row");
  }
  const columns: Record<string, number[]> = {};
  for (const name of names) {
    columns[name] = [];
  }
  for (const [i, row] of parsed.data.entries()) {
    for (const name of names) {
      // papaparse leaves integers beyond 2^53 as strings; coerce those too
      const raw = row[name];
      const value = typeof raw === "string" && raw.trim() !== ""
        ? Number(raw)
        : raw;
      if (typeof value !== "number" || !Number.isFinite(value)) {
        throw new Error(
          `row ${i + 1}, column '${name}': expected a finite number, ` +
          `got ${JSON.stringify(raw)}`,
        );
      }
      (columns[name] as number[]).push(value);
    }
  }
  return { meta, columns, names, rows: parsed.data.length };
}

export function readTable(path: string): Table {
  return parseTable(readFileSync(path, "utf8"));
}

export function column(table: Table, name: string): number[] {
  const values = table.columns[name];
  if (values === undefined) {
    throw new Error(
      `no column '${name}' (have: ${table.names.join(", ")})`,
    );
  }
  return values;
}

export function hasColumn(table: Table, name: string): boolean {
  return table.columns[name] !== undefined;
}

/** zbar_sample_<j> column names sorted by trajectory index. */
export function sampleColumns(table: Table): string[] {
  return table.names
    .filter((name) => /^zbar_sample_\d+$/.test(name))
    .sort((a, b) => Number(a.slice(12)) - Number(b.slice(12)));
}

export function readJson(path: string): unknown {
  return JSON.parse(readFileSync(path, "utf8"));
}
