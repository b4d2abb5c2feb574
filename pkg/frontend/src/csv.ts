import { readFileSync } from "node:fs";

export class DataError extends Error {}

export interface Series {
  t: number[];
  value: number[];
}

/** Parse one emitted table. Every file has a header row and numeric
 * columns; series tables are exactly `t,value`. */
export function readSeries(path: string, column = "value"): Series {
  const { header, rows } = readTable(path);
  const ti = header.indexOf("t");
  const vi = header.indexOf(column);
  if (ti < 0 || vi < 0) {
    throw new DataError(`${path}: no column '${column}' (header: ${header.join(",")})`);
  }
  const t: number[] = [];
  const value: number[] = [];
  for (const row of rows) {
    t.push(row[ti] as number);
    value.push(row[vi] as number);
  }
  return { t, value };
}

export function readTable(path: string): { header: string[]; rows: number[][] } {
  let text: string;
  try {
    text = readFileSync(path, "utf8");
  } catch {
    throw new DataError(`${path}: missing or unreadable`);
  }
  const lines = text.split("\n").filter((l) => l.length > 0);
  if (lines.length < 2) {
    throw new DataError(`${path}: empty table`);
  }
  const header = (lines[0] as string).split(",").map((s) => s.trim());
  const rows: number[][] = [];
  for (let i = 1; i < lines.length; i++) {
    const parts = (lines[i] as string).split(",");
    if (parts.length !== header.length) {
      throw new DataError(`${path}: row ${i} has ${parts.length} fields, header has ${header.length}`);
    }
    const row = parts.map(Number);
    if (row.some((x) => !Number.isFinite(x))) {
      throw new DataError(`${path}: row ${i} is not numeric`);
    }
    rows.push(row);
  }
  return { header, rows };
}
