import * as fs from "fs";
import * as os from "os";
import * as path from "path";

import { afterAll, describe, expect, it } from "vitest";

import { readCsv, column } from "../src/csv";
import { loadJob, validateJob, xColumn } from "../src/job";
import { buildSeries, render, seriesLabel } from "../src/render";
import { main } from "../src/cli";

const FIXTURES = path.join(__dirname, "..", "fixtures");
const RIPP = path.join(FIXTURES, "sparse_svm_compare__ripp_psgm.csv");
const BASE = path.join(FIXTURES, "sparse_svm_compare__baseline_subgradient.csv");

const tmp = fs.mkdtempSync(path.join(os.tmpdir(), "plots-"));
afterAll(() => fs.rmSync(tmp, { recursive: true, force: true }));

function convergenceJob(out: string) {
  return validateJob({
    inputs: [RIPP, BASE],
    x_axis: "cum_subgrad_evals",
    y_axis: "best_obj_error_so_far",
    log_y: true,
    output: out,
  });
}

function countPolylinePoints(svg: string, label: string): number {
  const re = new RegExp(
    `<polyline class="series" data-label="${label}" points="([^"]*)"`,
  );
  const m = svg.match(re);
  expect(m).not.toBeNull();
  return m![1].split(" ").filter((p) => p.length > 0).length;
}

describe("two-series convergence figure", () => {
  it("renders both solver traces with a log error axis, leaving inputs untouched", () => {
    const before = [fs.readFileSync(RIPP), fs.readFileSync(BASE)];
    const out = path.join(tmp, "convergence.svg");
    const started = Date.now();
    render(convergenceJob(out));
    expect(Date.now() - started).toBeLessThan(10_000);

    const svg = fs.readFileSync(out, "utf8");
    expect(svg).toContain("<svg");
    expect(svg).toContain('data-label="ripp_psgm"');
    expect(svg).toContain('data-label="baseline_subgradient"');
    expect(svg).toContain("log scale");

    const after = [fs.readFileSync(RIPP), fs.readFileSync(BASE)];
    expect(before[0].equals(after[0])).toBe(true);
    expect(before[1].equals(after[1])).toBe(true);
  });

  it("keeps one point per CSV row (no decimation)", () => {
    const out = path.join(tmp, "counts.svg");
    render(convergenceJob(out));
    const svg = fs.readFileSync(out, "utf8");
    const rippRows = readCsv(RIPP).rows.length;
    const baseRows = readCsv(BASE).rows.length;
    expect(countPolylinePoints(svg, "ripp_psgm")).toBe(rippRows);
    expect(countPolylinePoints(svg, "baseline_subgradient")).toBe(baseRows);
  });

  it("clamps non-positive values instead of dropping rows on log axes", () => {
    const out = path.join(tmp, "clamped.svg");
    const series = buildSeries(convergenceJob(out));
    for (const s of series) {
      expect(s.y.every((v) => Number.isFinite(v) && v > 0)).toBe(true);
    }
  });
});

describe("schema validation", () => {
  it("names the offending column", () => {
    const bad = path.join(tmp, "bad.csv");
    fs.writeFileSync(bad, "a,b\n1,2\n");
    const job = validateJob({
      inputs: [bad],
      x_axis: "cum_subgrad_evals",
      y_axis: "obj_error",
      log_y: false,
      output: path.join(tmp, "never.svg"),
    });
    expect(() => render(job)).toThrow(/column "cum_subgrad_evals" missing/);
  });

  it("rejects malformed jobs", () => {
    expect(() => validateJob({})).toThrow(/inputs/);
    expect(() =>
      validateJob({ inputs: [RIPP], x_axis: "time", y_axis: "obj_error", output: "x.svg" }),
    ).toThrow(/x_axis/);
    expect(() =>
      validateJob({ inputs: [RIPP], x_axis: "wall_time_s", y_axis: "loss", output: "x.svg" }),
    ).toThrow(/y_axis/);
    expect(() =>
      validateJob({ inputs: [RIPP], x_axis: "wall_time_s", y_axis: "obj_error", output: "" }),
    ).toThrow(/output/);
  });
});

describe("sweep figures", () => {
  it("plots totals against the swept value", () => {
    const sweep = path.join(tmp, "sweep.csv");
    fs.writeFileSync(
      sweep,
      "sweep_param,sweep_value,recipe,solver,total_inner_iters,total_evals,final_obj_error,wall_time_s\n" +
        "solver:ripp_psgm.rho,1.005,p,ripp,100,100,0.1,1.0\n" +
        "solver:ripp_psgm.rho,1.05,p,ripp,180,180,0.1,1.1\n" +
        "solver:ripp_psgm.rho,1.1,p,ripp,300,300,0.1,1.2\n",
    );
    expect(xColumn("sweep_param")).toBe("sweep_value");
    const out = path.join(tmp, "sweep.svg");
    render(
      validateJob({
        inputs: [sweep],
        x_axis: "sweep_param",
        y_axis: "total_inner_iters",
        log_y: false,
        output: out,
      }),
    );
    const svg = fs.readFileSync(out, "utf8");
    expect(countPolylinePoints(svg, "sweep")).toBe(3);
  });
});

describe("cli", () => {
  it("renders from a job file and reports the output path", () => {
    const out = path.join(tmp, "cli.svg");
    const jobFile = path.join(tmp, "job.json");
    fs.writeFileSync(
      jobFile,
      JSON.stringify({
        inputs: [RIPP, BASE],
        x_axis: "cum_subgrad_evals",
        y_axis: "best_obj_error_so_far",
        log_y: true,
        output: out,
      }),
    );
    expect(main(["render", jobFile])).toBe(0);
    expect(fs.existsSync(out)).toBe(true);
  });

  it("fails usefully on bad invocations", () => {
    expect(main(["render"])).toBe(2);
    expect(main(["paint", "x.json"])).toBe(2);
    const badJob = path.join(tmp, "bad-job.json");
    fs.writeFileSync(badJob, "{");
    expect(main(["render", badJob])).toBe(2);
  });

  it("loads jobs from disk", () => {
    const jobFile = path.join(tmp, "job2.json");
    fs.writeFileSync(
      jobFile,
      JSON.stringify({
        inputs: [RIPP],
        x_axis: "wall_time_s",
        y_axis: "obj_error",
        log_y: false,
        output: path.join(tmp, "t.svg"),
      }),
    );
    const job = loadJob(jobFile);
    expect(job.inputs.length).toBe(1);
    expect(seriesLabel(job.inputs[0])).toBe("ripp_psgm");
  });
});

describe("csv helpers", () => {
  it("parses numeric columns with empty cells as NaN", () => {
    const p = path.join(tmp, "nan.csv");
    fs.writeFileSync(p, "a,b\n1,\n2,3\n");
    const t = readCsv(p);
    const b = column(t, "b");
    expect(Number.isNaN(b[0])).toBe(true);
    expect(b[1]).toBe(3);
  });
});
