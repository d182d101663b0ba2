#!/usr/bin/env node
/**
 * plots render <job-file>
 *
 * The job file is JSON with fields: inputs (CSV paths), x_axis, y_axis,
 * log_y, output.  Writes one SVG per invocation.
 */

import { loadJob } from "./job";
import { render } from "./render";

export function main(argv: string[]): number {
  const [command, jobPath] = argv;
  if (command !== "render" || !jobPath) {
    process.stderr.write("usage: plots render <job-file>\n");
    return 2;
  }
  try {
    const out = render(loadJob(jobPath));
    process.stdout.write(`${out}\n`);
    return 0;
  } catch (e) {
    process.stderr.write(`error: ${(e as Error).message}\n`);
    return 2;
  }
}

if (require.main === module) {
  process.exit(main(process.argv.slice(2)));
}
