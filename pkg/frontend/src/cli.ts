#!/usr/bin/env node
// render --kind <fig6|fig7|fig8|fig9> --in <csv> --out <svg>

import { writeFileSync } from "node:fs";
import { parseArgs } from "node:util";
import { fileURLToPath } from "node:url";
import { CsvError, readTable } from "./csv.js";
import { EmptyDataError, FIGURE_KINDS, FigureKind, renderKind } from "./figures.js";

const USAGE = "usage: render --kind <fig6|fig7|fig8|fig9> --in <csv> --out <svg>";

export function main(argv: string[]): number {
  let values: { kind?: string; in?: string; out?: string };
  try {
    values = parseArgs({
      args: argv,
      options: {
        kind: { type: "string" },
        in: { type: "string" },
        out: { type: "string" },
      },
    }).values;
  } catch (err) {
    console.error(`${(err as Error).message}\n${USAGE}`);
    return 2;
  }
  const { kind, in: input, out } = values;
  if (!kind || !input || !out) {
    console.error(USAGE);
    return 2;
  }
  if (!(FIGURE_KINDS as readonly string[]).includes(kind)) {
    console.error(`unknown kind "${kind}"; expected one of ${FIGURE_KINDS.join(", ")}`);
    return 2;
  }
  if (out.toLowerCase().endsWith(".png")) {
    console.error("PNG output is not supported; write an .svg (deterministic vector output)");
    return 2;
  }
  try {
    const svg = renderKind(kind as FigureKind, readTable(input));
    writeFileSync(out, svg);
  } catch (err) {
    if (err instanceof CsvError || err instanceof EmptyDataError) {
      console.error(err.message);
    } else if ((err as NodeJS.ErrnoException).code !== undefined) {
      console.error(`${(err as Error).message}`);
    } else {
      throw err;
    }
    return 1;
  }
  console.error(`wrote ${out}`);
  return 0;
}

if (process.argv[1] && fileURLToPath(import.meta.url) === process.argv[1]) {
  process.exit(main(process.argv.slice(2)));
}
