// Minimal SVG string builder. Geometry is rounded to fixed precision so the
// same input always produces the same bytes.

export function fmt(x: number): string {
  const r = Math.round(x * 100) / 100;
  return Object.is(r, -0) ? "0" : String(r);
}

export type Attrs = Record<string, string | number>;

export function tag(name: string, attrs: Attrs, body = ""): string {
  const parts = Object.entries(attrs).map(
    ([k, v]) => `${k}="${typeof v === "number" ? fmt(v) : v}"`,
  );
  const open = `<${name}${parts.length ? " " + parts.join(" ") : ""}`;
  return body === "" ? `${open}/>` : `${open}>${body}</${name}>`;
}

export function text(x: number, y: number, s: string, attrs: Attrs = {}): string {
  return tag("text", { x, y, "font-family": "sans-serif", "font-size": 11, ...attrs }, escapeXml(s));
}

export function points(pairs: Array<[number, number]>): string {
  return pairs.map(([x, y]) => `${fmt(x)},${fmt(y)}`).join(" ");
}

export function escapeXml(s: string): string {
  return s.replace(/&/g, "&amp;").replace(/</g, "&lt;").replace(/>/g, "&gt;");
}

export function svgDoc(width: number, height: number, body: string[]): string {
  return [
    `<svg xmlns="http://www.w3.org/2000/svg" width="${width}" height="${height}" viewBox="0 0 ${width} ${height}">`,
    tag("rect", { x: 0, y: 0, width, height, fill: "white" }),
    ...body,
    "</svg>",
    "",
  ].join("\n");
}
