import { describe, expect, it } from "vitest";
import { fileURLToPath } from "node:url";

import {
  CsvError,
  cellNumber,
  columnIndex,
  parseCsvText,
  readTable,
  requireKind,
} from "../src/csv.js";

const golden = (name: string) =>
  fileURLToPath(new URL(`../testdata/${name}`, import.meta.url));

describe("csv parsing", () => {
  it("reads a golden sweep file", () => {
    const table = readTable(golden("fig7.csv"));
    expect(table.kind).toBe("fig7");
    expect(table.meta["seed"]).toBe("1");
    expect(table.columns).toEqual(["scheme", "k", "l", "trial", "nmse_f"]);
    expect(table.rows).toHaveLength(1200);
  });

  it("rejects files without the version header", () => {
    expect(() => parseCsvText("a,b\n1,2\n", "x.csv")).toThrow(/x\.csv:1: missing version header/);
  });

  it("reports ragged rows with their line number", () => {
    const text = "# recipcal-csv v1\n# kind = t\na,b\n1,2\n1,2,3\n";
    expect(() => parseCsvText(text, "y.csv")).toThrow(/y\.csv:5: expected 2 cells, got 3/);
  });

  it("names the missing column on schema mismatch", () => {
    const table = parseCsvText("# recipcal-csv v1\n# kind = t\na,b\n1,2\n", "z.csv");
    expect(() => columnIndex(table, "nmse_f")).toThrow(/missing required column "nmse_f"/);
  });

  it("checks the declared kind", () => {
    const table = readTable(golden("fig7.csv"));
    expect(() => requireKind(table, "fig9")).toThrow(CsvError);
    expect(() => requireKind(table, "fig7")).not.toThrow();
  });

  it("parses inf cells from diverged sweep rows", () => {
    const table = parseCsvText(
      "# recipcal-csv v1\n# kind = t\nnmse_f\ninf\n",
      "w.csv",
    );
    expect(cellNumber(table, 0, 0)).toBe(Infinity);
  });
});
