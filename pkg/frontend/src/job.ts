/**
 * Plot job description: which CSVs, which axes, where the image goes.
 *
 * The job file is JSON mirroring the PlotJob fields.  The x axis value
 * "sweep_param" selects the `sweep_value` column of a sweep summary.
 */

import * as fs from "fs";

export const X_AXES = ["cum_subgrad_evals", "wall_time_s", "sweep_param"] as const;
export const Y_AXES = ["obj_error", "best_obj_error_so_far", "total_inner_iters"] as const;

export type XAxis = (typeof X_AXES)[number];
export type YAxis = (typeof Y_AXES)[number];

export interface PlotJob {
  inputs: string[];
  x_axis: XAxis;
  y_axis: YAxis;
  log_y: boolean;
  output: string;
}

/** Column actually read for an axis choice. */
export function xColumn(axis: XAxis): string {
  return axis === "sweep_param" ? "sweep_value" : axis;
}

export function validateJob(raw: unknown): PlotJob {
  if (typeof raw !== "object" || raw === null) {
    throw new Error("job must be a JSON object");
  }
  const obj = raw as Record<string, unknown>;
  const inputs = obj.inputs;
  if (!Array.isArray(inputs) || inputs.length === 0 || !inputs.every((p) => typeof p === "string")) {
    throw new Error("job.inputs must be a non-empty list of CSV paths");
  }
  const xAxis = obj.x_axis;
  if (typeof xAxis !== "string" || !(X_AXES as readonly string[]).includes(xAxis)) {
    throw new Error(`job.x_axis must be one of ${X_AXES.join(", ")}`);
  }
  const yAxis = obj.y_axis;
  if (typeof yAxis !== "string" || !(Y_AXES as readonly string[]).includes(yAxis)) {
    throw new Error(`job.y_axis must be one of ${Y_AXES.join(", ")}`);
  }
  if (typeof obj.output !== "string" || obj.output.length === 0) {
    throw new Error("job.output must be an image path");
  }
  return {
    inputs: inputs as string[],
    x_axis: xAxis as XAxis,
    y_axis: yAxis as YAxis,
    log_y: Boolean(obj.log_y),
    output: obj.output,
  };
}

export function loadJob(path: string): PlotJob {
  let raw: unknown;
  try {
    raw = JSON.parse(fs.readFileSync(path, "utf8"));
  } catch (e) {
    throw new Error(`${path}: ${(e as Error).message}`);
  }
  return validateJob(raw);
}
