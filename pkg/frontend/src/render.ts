/**
 * Turn a plot job into an SVG figure: one labeled series per input CSV,
 * every CSV row contributing one point (no decimation).
 *
 * Rendering is read-only on the inputs.  On a log axis, values at or below
 * zero (a solver sitting exactly on a planted optimum) are clamped to a
 * tenth of the smallest positive value in the data so the series stays
 * plottable without dropping rows.
 */

import * as fs from "fs";
import * as path from "path";

import { column, readCsv } from "./csv";
import { PlotJob, xColumn } from "./job";
import { renderChart, Series } from "./svg";

const LOG_FLOOR_FALLBACK = 1e-16;

export function seriesLabel(csvPath: string): string {
  const stem = path.basename(csvPath).replace(/\.csv$/, "");
  const sep = stem.lastIndexOf("__");
  return sep >= 0 ? stem.slice(sep + 2) : stem;
}

function clampForLog(values: number[][]): number[][] {
  let minPos = Infinity;
  for (const ys of values) {
    for (const v of ys) {
      if (Number.isFinite(v) && v > 0 && v < minPos) {
        minPos = v;
      }
    }
  }
  const floor = Number.isFinite(minPos) ? minPos / 10 : LOG_FLOOR_FALLBACK;
  return values.map((ys) => ys.map((v) => (Number.isFinite(v) && v <= 0 ? floor : v)));
}

export function buildSeries(job: PlotJob): Series[] {
  const xCol = xColumn(job.x_axis);
  const tables = job.inputs.map(readCsv);
  const xs = tables.map((t) => column(t, xCol));
  let ys = tables.map((t) => column(t, job.y_axis));
  if (job.log_y) {
    ys = clampForLog(ys);
  }
  return tables.map((t, i) => ({
    label: seriesLabel(t.path),
    x: xs[i],
    y: ys[i],
  }));
}

export function render(job: PlotJob): string {
  const series = buildSeries(job);
  const svg = renderChart(series, {
    xLabel: job.x_axis,
    yLabel: job.y_axis + (job.log_y ? " (log scale)" : ""),
    logY: job.log_y,
  });
  fs.mkdirSync(path.dirname(path.resolve(job.output)), { recursive: true });
  fs.writeFileSync(job.output, svg + "\n", "utf8");
  return job.output;
}
