/**
 * Minimal reader for the numeric experiment CSVs (comma separated, one
 * header row, no quoting).
 */
import { readFileSync } from "node:fs";

export interface CsvTable {
  path: string;
  columns: string[];
  rows: number[][];
}

export function parseCsv(text: string, path = "<string>"): CsvTable {
  const lines = text
    .split(/\r?\n/)
    .map((l) => l.trim())
    .filter((l) => l.length > 0);
  if (lines.length === 0) {
    throw new Error(`${path}: empty CSV`);
  }
  const columns = lines[0].split(",").map((c) => c.trim());
  const rows: number[][] = [];
  for (let i = 1; i < lines.length; i++) {
    const parts = lines[i].split(",");
    if (parts.length !== columns.length) {
      throw new Error(
        `${path}:${i + 1}: expected ${columns.length} fields, got ${parts.length}`,
      );
    }
    rows.push(parts.map(Number));
  }
  return { path, columns, rows };
}

export function readCsv(path: string): CsvTable {
  return parseCsv(readFileSync(path, "utf8"), path);
}

/** Indices of the required columns; throws with both column lists on a
 *  schema mismatch. */
export function requireColumns(
  table: CsvTable,
  needed: string[],
): Record<string, number> {
  const out: Record<string, number> = {};
  const missing: string[] = [];
  for (const name of needed) {
    const idx = table.columns.indexOf(name);
    if (idx < 0) missing.push(name);
    else out[name] = idx;
  }
  if (missing.length > 0) {
    throw new Error(
      `${table.path}: missing column(s) ${missing.join(", ")}; ` +
        `expected [${needed.join(", ")}], found [${table.columns.join(", ")}]`,
    );
  }
  return out;
}

export function column(table: CsvTable, name: string): number[] {
  const idx = requireColumns(table, [name])[name];
  return table.rows.map((r) => r[idx]);
}
