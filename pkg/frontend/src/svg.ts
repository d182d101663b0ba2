/**
 * Dependency-free SVG line charts: linear/log scales, decade or nice ticks,
 * one polyline per series, legend in the top-right corner.
 */

export interface Series {
  label: string;
  x: number[];
  y: number[];
}

export interface ChartOptions {
  width?: number;
  height?: number;
  xLabel: string;
  yLabel: string;
  logY: boolean;
}

const PALETTE = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"];
const MARGIN = { top: 24, right: 24, bottom: 52, left: 76 };

interface Scale {
  (v: number): number;
  ticks: number[];
}

function linearScale(lo: number, hi: number, rLo: number, rHi: number): Scale {
  if (hi === lo) {
    hi = lo + 1;
  }
  const f = ((v: number) => rLo + ((v - lo) / (hi - lo)) * (rHi - rLo)) as Scale;
  f.ticks = niceTicks(lo, hi);
  return f;
}

function logScale(lo: number, hi: number, rLo: number, rHi: number): Scale {
  const llo = Math.log10(lo);
  let lhi = Math.log10(hi);
  if (lhi === llo) {
    lhi = llo + 1;
  }
  const f = ((v: number) =>
    rLo + ((Math.log10(v) - llo) / (lhi - llo)) * (rHi - rLo)) as Scale;
  const ticks: number[] = [];
  for (let d = Math.ceil(llo); d <= Math.floor(lhi); d++) {
    ticks.push(Math.pow(10, d));
  }
  f.ticks = ticks.length >= 2 ? ticks : [lo, hi];
  return f;
}

function niceTicks(lo: number, hi: number, n = 5): number[] {
  const span = hi - lo;
  const step = Math.pow(10, Math.floor(Math.log10(span / n)));
  const err = span / n / step;
  const mult = err >= 7.5 ? 10 : err >= 3.5 ? 5 : err >= 1.5 ? 2 : 1;
  const s = mult * step;
  const ticks: number[] = [];
  for (let v = Math.ceil(lo / s) * s; v <= hi + s * 1e-9; v += s) {
    ticks.push(v);
  }
  return ticks;
}

function fmt(v: number): string {
  if (v === 0) {
    return "0";
  }
  const a = Math.abs(v);
  if (a >= 1e5 || a < 1e-3) {
    return v.toExponential(0).replace("+", "");
  }
  return String(Number(v.toPrecision(6)));
}

function esc(s: string): string {
  return s.replace(/&/g, "&amp;").replace(/</g, "&lt;").replace(/>/g, "&gt;");
}

export function renderChart(series: Series[], opts: ChartOptions): string {
  const width = opts.width ?? 840;
  const height = opts.height ?? 520;
  const x0 = MARGIN.left;
  const x1 = width - MARGIN.right;
  const y0 = height - MARGIN.bottom;
  const y1 = MARGIN.top;

  const xs = series.flatMap((s) => s.x).filter(Number.isFinite);
  const ys = series.flatMap((s) => s.y).filter(Number.isFinite);
  if (xs.length === 0 || ys.length === 0) {
    throw new Error("nothing to plot: no finite data points");
  }
  const sx = linearScale(Math.min(...xs), Math.max(...xs), x0, x1);
  const sy = opts.logY
    ? logScale(Math.min(...ys), Math.max(...ys), y0, y1)
    : linearScale(Math.min(...ys), Math.max(...ys), y0, y1);

  const parts: string[] = [];
  parts.push(
    `<svg xmlns="http://www.w3.org/2000/svg" width="${width}" height="${height}" ` +
      `viewBox="0 0 ${width} ${height}" font-family="sans-serif" font-size="13">`,
  );
  parts.push(`<rect width="${width}" height="${height}" fill="white"/>`);

  for (const t of sx.ticks) {
    const px = sx(t);
    parts.push(
      `<line x1="${px.toFixed(2)}" y1="${y0}" x2="${px.toFixed(2)}" y2="${y1}" stroke="#eee"/>`,
      `<text x="${px.toFixed(2)}" y="${y0 + 20}" text-anchor="middle">${fmt(t)}</text>`,
    );
  }
  for (const t of sy.ticks) {
    const py = sy(t);
    parts.push(
      `<line x1="${x0}" y1="${py.toFixed(2)}" x2="${x1}" y2="${py.toFixed(2)}" stroke="#eee"/>`,
      `<text x="${x0 - 8}" y="${(py + 4).toFixed(2)}" text-anchor="end">${fmt(t)}</text>`,
    );
  }
  parts.push(
    `<line x1="${x0}" y1="${y0}" x2="${x1}" y2="${y0}" stroke="black"/>`,
    `<line x1="${x0}" y1="${y0}" x2="${x0}" y2="${y1}" stroke="black"/>`,
    `<text x="${(x0 + x1) / 2}" y="${height - 12}" text-anchor="middle">${esc(opts.xLabel)}</text>`,
    `<text x="18" y="${(y0 + y1) / 2}" text-anchor="middle" ` +
      `transform="rotate(-90 18 ${(y0 + y1) / 2})">${esc(opts.yLabel)}</text>`,
  );

  series.forEach((s, i) => {
    const color = PALETTE[i % PALETTE.length];
    const pts = s.x
      .map((xv, j) => {
        const yv = s.y[j];
        if (!Number.isFinite(xv) || !Number.isFinite(yv)) {
          return null;
        }
        return `${sx(xv).toFixed(2)},${sy(yv).toFixed(2)}`;
      })
      .filter((p): p is string => p !== null)
      .join(" ");
    parts.push(
      `<polyline class="series" data-label="${esc(s.label)}" points="${pts}" ` +
        `fill="none" stroke="${color}" stroke-width="1.6"/>`,
    );
    const ly = y1 + 16 + i * 18;
    parts.push(
      `<line x1="${x1 - 150}" y1="${ly - 4}" x2="${x1 - 124}" y2="${ly - 4}" ` +
        `stroke="${color}" stroke-width="2"/>`,
      `<text x="${x1 - 118}" y="${ly}">${esc(s.label)}</text>`,
    );
  });

  parts.push("</svg>");
  return parts.join("\n");
}
