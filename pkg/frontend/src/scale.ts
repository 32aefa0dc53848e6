// Axis scales and the quantile helper used for median/IQR aggregation.

export interface Scale {
  map(v: number): number;
  ticks: number[];
}

export function linearScale(lo: number, hi: number, rlo: number, rhi: number): Scale {
  const span = hi - lo || 1;
  const step = niceStep(span);
  const ticks: number[] = [];
  for (let t = Math.ceil(lo / step) * step; t <= hi + 1e-9; t += step) {
    ticks.push(Math.round(t / step) * step);
  }
  return { map: (v) => rlo + ((v - lo) / span) * (rhi - rlo), ticks };
}

function niceStep(span: number): number {
  const raw = span / 6;
  const mag = Math.pow(10, Math.floor(Math.log10(raw)));
  for (const m of [1, 2, 5, 10]) {
    if (raw <= m * mag) return m * mag;
  }
  return 10 * mag;
}

/** Log10 scale with one tick per decade. Domain must be positive. */
export function logScale(lo: number, hi: number, rlo: number, rhi: number): Scale {
  const llo = Math.floor(Math.log10(lo));
  const lhi = Math.ceil(Math.log10(hi));
  const span = lhi - llo || 1;
  const ticks: number[] = [];
  for (let e = llo; e <= lhi; e++) ticks.push(Math.pow(10, e));
  return {
    map: (v) => rlo + ((Math.log10(v) - llo) / span) * (rhi - rlo),
    ticks,
  };
}

export function tickLabel(v: number): string {
  if (v !== 0 && (Math.abs(v) < 1e-3 || Math.abs(v) >= 1e4)) {
    const e = Math.round(Math.log10(Math.abs(v)));
    const mant = v / Math.pow(10, e);
    return mant === 1 ? `1e${e}` : `${mant}e${e}`;
  }
  return String(v);
}

/** Linear-interpolation quantile of an unsorted sample (0 <= q <= 1). */
export function quantile(values: number[], q: number): number {
  const s = [...values].sort((a, b) => a - b);
  if (s.length === 0) return NaN;
  const pos = q * (s.length - 1);
  const lo = Math.floor(pos);
  const hi = Math.ceil(pos);
  if (s[lo] === s[hi]) return s[lo]; // also keeps inf/inf from becoming NaN
  return s[lo] + (s[hi] - s[lo]) * (pos - lo);
}
