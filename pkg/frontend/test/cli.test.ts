import { describe, expect, it } from "vitest";
import { mkdtempSync, readFileSync } from "node:fs";
import { tmpdir } from "node:os";
import { join } from "node:path";
import { fileURLToPath } from "node:url";

import { main } from "../src/cli.js";

const golden = (name: string) =>
  fileURLToPath(new URL(`../testdata/${name}`, import.meta.url));

const scratch = () => mkdtempSync(join(tmpdir(), "figure-plots-"));

describe("render CLI", () => {
  it("renders a golden CSV to SVG", () => {
    const out = join(scratch(), "fig7.svg");
    expect(main(["--kind", "fig7", "--in", golden("fig7.csv"), "--out", out])).toBe(0);
    expect(readFileSync(out, "utf8")).toContain("<svg ");
  });

  it("writes identical bytes on a rerun", () => {
    const dir = scratch();
    const a = join(dir, "a.svg");
    const b = join(dir, "b.svg");
    main(["--kind", "fig9", "--in", golden("fig9.csv"), "--out", a]);
    main(["--kind", "fig9", "--in", golden("fig9.csv"), "--out", b]);
    expect(readFileSync(a)).toEqual(readFileSync(b));
  });

  it("refuses PNG output", () => {
    const out = join(scratch(), "x.png");
    expect(main(["--kind", "fig7", "--in", golden("fig7.csv"), "--out", out])).toBe(2);
  });

  it("rejects unknown kinds and missing flags", () => {
    expect(main(["--kind", "fig12", "--in", "a", "--out", "b.svg"])).toBe(2);
    expect(main(["--kind", "fig7"])).toBe(2);
    expect(main(["--frobnicate"])).toBe(2);
  });

  it("fails cleanly on a missing input file", () => {
    expect(main(["--kind", "fig7", "--in", "no-such.csv", "--out", join(scratch(), "o.svg")])).toBe(1);
  });

  it("fails cleanly on a kind/file mismatch", () => {
    const out = join(scratch(), "o.svg");
    expect(main(["--kind", "fig6", "--in", golden("fig7.csv"), "--out", out])).toBe(1);
  });
});
