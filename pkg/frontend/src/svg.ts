/**
 * Minimal deterministic SVG scene builder: axes, ticks, polylines,
 * markers and reference lines.  No timestamps, no randomness, so equal
 * inputs give byte-equal images.
 */

export interface Extent {
  min: number;
  max: number;
  log: boolean;
}

export interface Series {
  label: string;
  x: number[];
  y: number[];
  color: string;
  markers?: boolean;
}

const WIDTH = 640;
const HEIGHT = 440;
const MARGIN = { left: 72, right: 24, top: 40, bottom: 56 };

export const PALETTE = [
  "#1f528c", "#b5442a", "#3c8a4b", "#8a5fb0", "#777711", "#116677",
];

function fmt(value: number): string {
  if (!isFinite(value)) return "0";
  return Number(value.toPrecision(6)).toString();
}

export function extentOf(values: number[], log: boolean): Extent {
  const pool = values.filter((v) => isFinite(v) && (!log || v > 0));
  if (pool.length === 0) {
    return { min: log ? 1e-12 : 0, max: 1, log };
  }
  let min = Math.min(...pool);
  let max = Math.max(...pool);
  if (min === max) {
    min = log ? min / 2 : min - 1;
    max = log ? max * 2 : max + 1;
  }
  return { min, max, log };
}

function scale(extent: Extent, lo: number, hi: number) {
  const a = extent.log ? Math.log10(extent.min) : extent.min;
  const b = extent.log ? Math.log10(extent.max) : extent.max;
  return (v: number) => {
    const t = extent.log ? Math.log10(v) : v;
    return lo + ((t - a) / (b - a)) * (hi - lo);
  };
}

function ticks(extent: Extent, count = 5): number[] {
  if (extent.log) {
    const lo = Math.ceil(Math.log10(extent.min) - 1e-9);
    const hi = Math.floor(Math.log10(extent.max) + 1e-9);
    const out: number[] = [];
    for (let p = lo; p <= hi; p++) out.push(10 ** p);
    if (out.length >= 2) return out;
    return [extent.min, extent.max];
  }
  const span = extent.max - extent.min;
  const step = 10 ** Math.floor(Math.log10(span / count));
  const mult = [1, 2, 5, 10].find((m) => span / (m * step) <= count) ?? 10;
  const s = mult * step;
  const start = Math.ceil(extent.min / s) * s;
  const out: number[] = [];
  for (let v = start; v <= extent.max + 1e-12 * span; v += s) {
    out.push(Number(v.toPrecision(12)));
  }
  return out;
}

export interface ReferenceLine {
  y: number;
  label: string;
}

export function renderScene(opts: {
  title: string;
  xLabel: string;
  yLabel: string;
  xExtent: Extent;
  yExtent: Extent;
  series: Series[];
  references?: ReferenceLine[];
}): string {
  const sx = scale(opts.xExtent, MARGIN.left, WIDTH - MARGIN.right);
  const sy = scale(opts.yExtent, HEIGHT - MARGIN.bottom, MARGIN.top);
  const parts: string[] = [];
  parts.push(
    `<svg xmlns="http://www.w3.org/2000/svg" viewBox="0 0 ${WIDTH} ${HEIGHT}" ` +
      `font-family="Helvetica, Arial, sans-serif" font-size="12">`,
  );
  parts.push(`<rect width="${WIDTH}" height="${HEIGHT}" fill="white"/>`);
  parts.push(
    `<text x="${WIDTH / 2}" y="22" text-anchor="middle" font-size="15">` +
      `${opts.title}</text>`,
  );

  // frame
  const x0 = MARGIN.left;
  const x1 = WIDTH - MARGIN.right;
  const y0 = HEIGHT - MARGIN.bottom;
  const y1 = MARGIN.top;
  parts.push(
    `<rect x="${x0}" y="${y1}" width="${x1 - x0}" height="${y0 - y1}" ` +
      `fill="none" stroke="#333" stroke-width="1"/>`,
  );

  for (const t of ticks(opts.xExtent)) {
    if (t < opts.xExtent.min - 1e-12 || t > opts.xExtent.max + 1e-12) continue;
    const px = sx(t);
    parts.push(
      `<line x1="${fmt(px)}" y1="${y0}" x2="${fmt(px)}" y2="${y0 + 5}" stroke="#333"/>`,
    );
    parts.push(
      `<text x="${fmt(px)}" y="${y0 + 18}" text-anchor="middle">${fmt(t)}</text>`,
    );
  }
  for (const t of ticks(opts.yExtent)) {
    if (t < opts.yExtent.min - 1e-12 || t > opts.yExtent.max * (1 + 1e-12)) continue;
    const py = sy(t);
    parts.push(
      `<line x1="${x0 - 5}" y1="${fmt(py)}" x2="${x0}" y2="${fmt(py)}" stroke="#333"/>`,
    );
    parts.push(
      `<text x="${x0 - 8}" y="${fmt(py + 4)}" text-anchor="end">${fmt(t)}</text>`,
    );
  }
  parts.push(
    `<text x="${(x0 + x1) / 2}" y="${HEIGHT - 14}" text-anchor="middle">` +
      `${opts.xLabel}</text>`,
  );
  parts.push(
    `<text x="18" y="${(y0 + y1) / 2}" text-anchor="middle" ` +
      `transform="rotate(-90 18 ${(y0 + y1) / 2})">${opts.yLabel}</text>`,
  );

  for (const ref of opts.references ?? []) {
    if (ref.y < opts.yExtent.min || ref.y > opts.yExtent.max) continue;
    const py = sy(ref.y);
    parts.push(
      `<line id="reference-${ref.label.replace(/\s+/g, "-")}" x1="${x0}" ` +
        `y1="${fmt(py)}" x2="${x1}" y2="${fmt(py)}" stroke="#999" ` +
        `stroke-dasharray="6 4"/>`,
    );
    parts.push(
      `<text x="${x1 - 4}" y="${fmt(py - 5)}" text-anchor="end" ` +
        `fill="#666">${ref.label}</text>`,
    );
  }

  opts.series.forEach((s, idx) => {
    const pts = s.x
      .map((xv, i) => [sx(xv), sy(s.y[i])] as const)
      .filter(([px, py]) => isFinite(px) && isFinite(py));
    if (pts.length === 0) return;
    const d = pts.map(([px, py]) => `${fmt(px)},${fmt(py)}`).join(" ");
    parts.push(
      `<polyline points="${d}" fill="none" stroke="${s.color}" stroke-width="1.6"/>`,
    );
    if (s.markers ?? true) {
      for (const [px, py] of pts) {
        parts.push(
          `<circle cx="${fmt(px)}" cy="${fmt(py)}" r="2.6" fill="${s.color}"/>`,
        );
      }
    }
    const ly = MARGIN.top + 16 * (idx + 1);
    parts.push(
      `<line x1="${x1 - 120}" y1="${ly - 4}" x2="${x1 - 100}" y2="${ly - 4}" ` +
        `stroke="${s.color}" stroke-width="1.6"/>`,
    );
    parts.push(`<text x="${x1 - 94}" y="${ly}">${s.label}</text>`);
  });

  parts.push("</svg>");
  return parts.join("\n") + "\n";
}
