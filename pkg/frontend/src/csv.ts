/**
 * Minimal CSV reading for bench traces and summaries.
 *
 * The harness writes unquoted comma-separated values with a fixed header;
 * empty cells encode NaN.
 */

import * as fs from "fs";

export interface CsvTable {
  path: string;
  header: string[];
  rows: string[][];
}

export function readCsv(path: string): CsvTable {
  const text = fs.readFileSync(path, "utf8");
  const lines = text.split("\n").filter((l) => l.length > 0);
  if (lines.length === 0) {
    throw new Error(`${path}: empty CSV`);
  }
  const header = lines[0].split(",");
  const rows = lines.slice(1).map((l) => l.split(","));
  return { path, header, rows };
}

/** Extract one column as numbers; empty cells become NaN. */
export function column(table: CsvTable, name: string): number[] {
  const idx = table.header.indexOf(name);
  if (idx < 0) {
    throw new Error(
      `column "${name}" missing from header of ${table.path} (have: ${table.header.join(", ")})`,
    );
  }
  return table.rows.map((r) => {
    const cell = r[idx];
    return cell === "" || cell === undefined ? NaN : Number(cell);
  });
}
