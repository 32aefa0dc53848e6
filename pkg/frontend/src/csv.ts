/**
 * Reader for the versioned CSV files the simulator CLI writes:
 *
 *   # recipcal-csv v1
 *   # key = value          (sorted metadata, includes "kind")
 *   col_a,col_b,...        (header row)
 *   1,two-sides,...        (data rows; non-finite values spelled "inf")
 */

import { readFileSync } from "node:fs";

export const CSV_VERSION = "# recipcal-csv v1";

export class CsvError extends Error {}

export interface CsvTable {
  path: string;
  kind: string;
  meta: Record<string, string>;
  columns: string[];
  rows: string[][];
}

export function parseCsvText(text: string, path = "<string>"): CsvTable {
  const lines = text.split("\n");
  if (lines.length > 0 && lines[lines.length - 1] === "") lines.pop();
  if (lines.length === 0 || lines[0].trim() !== CSV_VERSION) {
    throw new CsvError(`${path}:1: missing version header '${CSV_VERSION}'`);
  }
  const meta: Record<string, string> = {};
  let i = 1;
  for (; i < lines.length && lines[i].startsWith("#"); i++) {
    const body = lines[i].slice(1);
    const eq = body.indexOf("=");
    if (eq >= 0) meta[body.slice(0, eq).trim()] = body.slice(eq + 1).trim();
  }
  if (i >= lines.length) {
    throw new CsvError(`${path}: no header row after metadata`);
  }
  const columns = lines[i].split(",");
  const rows: string[][] = [];
  for (let j = i + 1; j < lines.length; j++) {
    const cells = lines[j].split(",");
    if (cells.length !== columns.length) {
      throw new CsvError(
        `${path}:${j + 1}: expected ${columns.length} cells, got ${cells.length}`,
      );
    }
    rows.push(cells);
  }
  return { path, kind: meta["kind"] ?? "", meta, columns, rows };
}

export function readTable(path: string): CsvTable {
  return parseCsvText(readFileSync(path, "utf8"), path);
}

export function requireKind(table: CsvTable, kind: string): void {
  if (table.kind !== kind) {
    throw new CsvError(
      `${table.path}: expected kind "${kind}", file says "${table.kind || "<none>"}"`,
    );
  }
}

/** Index of a named column; schema mismatches name the missing column. */
export function columnIndex(table: CsvTable, name: string): number {
  const idx = table.columns.indexOf(name);
  if (idx < 0) {
    throw new CsvError(`${table.path}: missing required column "${name}"`);
  }
  return idx;
}

export function cellNumber(table: CsvTable, row: number, col: number): number {
  const raw = table.rows[row][col];
  if (raw === "inf") return Infinity;
  if (raw === "-inf") return -Infinity;
  const v = Number(raw);
  if (raw.trim() === "" || Number.isNaN(v)) {
    throw new CsvError(
      `${table.path}: bad number "${raw}" in column "${table.columns[col]}"`,
    );
  }
  return v;
}
