/**
 * Deterministic SVG primitives: no timestamps, no randomness, fixed
 * number formatting, so identical inputs produce identical bytes.
 */

export function fmt(x: number): string {
  if (!Number.isFinite(x)) return "0";
  if (x === 0) return "0";
  const s = x.toPrecision(6);
  return s.includes(".") || s.includes("e")
    ? String(Number(s))
    : s;
}

export interface Box {
  x: number;
  y: number;
  width: number;
  height: number;
}

export function ticks(lo: number, hi: number, count = 5): number[] {
  if (hi <= lo) return [lo];
  const rawStep = (hi - lo) / count;
  const mag = Math.pow(10, Math.floor(Math.log10(rawStep)));
  const candidates = [1, 2, 2.5, 5, 10].map((m) => m * mag);
  const step = candidates.find((c) => c >= rawStep) ?? candidates[4];
  const first = Math.ceil(lo / step) * step;
  const out: number[] = [];
  for (let v = first; v <= hi + step * 1e-9; v += step) {
    out.push(Math.abs(v) < step * 1e-9 ? 0 : v);
  }
  return out;
}

export function polyline(
  xs: number[],
  ys: number[],
  box: Box,
  xRange: [number, number],
  yRange: [number, number],
): string {
  const [x0, x1] = xRange;
  const [y0, y1] = yRange;
  const sx = (x: number) => box.x + ((x - x0) / (x1 - x0 || 1)) * box.width;
  const sy = (y: number) => box.y + box.height - ((y - y0) / (y1 - y0 || 1)) * box.height;
  const parts: string[] = [];
  for (let i = 0; i < xs.length; i++) {
    parts.push(`${i === 0 ? "M" : "L"}${fmt(sx(xs[i]))},${fmt(sy(ys[i]))}`);
  }
  return parts.join(" ");
}

export function escapeXml(text: string): string {
  return text
    .replace(/&/g, "&amp;")
    .replace(/</g, "&lt;")
    .replace(/>/g, "&gt;")
    .replace(/"/g, "&quot;");
}
