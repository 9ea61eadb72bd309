/**
 * Reader for the laboratory CSV dialect: comma separator, '.' decimal
 * point, one header row, LF endings, no quoting.
 */

import { readFileSync } from "fs";

export interface Table {
  columns: string[];
  rows: Record<string, number>[];
}

export class CsvError extends Error {}

export function parseCsv(text: string): Table {
  const lines = text.split("\n").filter((line) => line.trim().length > 0);
  if (lines.length === 0) {
    throw new CsvError("empty CSV");
  }
  const columns = lines[0].split(",").map((c) => c.trim());
  const rows: Record<string, number>[] = [];
  for (const line of lines.slice(1)) {
    const parts = line.split(",");
    if (parts.length !== columns.length) {
      throw new CsvError(
        `row has ${parts.length} fields, header has ${columns.length}`,
      );
    }
    const row: Record<string, number> = {};
    columns.forEach((name, i) => {
      row[name] = Number(parts[i]);
    });
    rows.push(row);
  }
  if (rows.length === 0) {
    throw new CsvError("CSV has a header but no data rows");
  }
  return { columns, rows };
}

export function readCsv(path: string): Table {
  let text: string;
  try {
    text = readFileSync(path, "utf8");
  } catch (err) {
    throw new CsvError(`cannot read ${path}: ${(err as Error).message}`);
  }
  return parseCsv(text);
}

export function requireColumns(table: Table, names: string[]): void {
  for (const name of names) {
    if (!table.columns.includes(name)) {
      throw new CsvError(
        `missing column '${name}' (have: ${table.columns.join(", ")})`,
      );
    }
  }
}

/** Distinct values of a column, in first-seen order. */
export function distinct(table: Table, column: string): number[] {
  const seen: number[] = [];
  for (const row of table.rows) {
    if (!seen.includes(row[column])) {
      seen.push(row[column]);
    }
  }
  return seen;
}
