#!/usr/bin/env node
import * as fs from "fs";

import { formatReport, reportExitCode, runSuites } from "./runSuites";

function usage(): never {
  console.error("Usage: run-suites <dir> [--json report.json]");
  process.exit(2);
}

function main(): number {
  const argv = process.argv.slice(2);
  // accept both `run-suites <dir>` and `cli.js run-suites <dir>`
  if (argv[0] === "run-suites") argv.shift();
  const positional: string[] = [];
  let jsonPath: string | undefined;
  for (let i = 0; i < argv.length; i++) {
    if (argv[i] === "--json") {
      jsonPath = argv[++i];
      if (!jsonPath) usage();
    } else if (argv[i].startsWith("-")) {
      usage();
    } else {
      positional.push(argv[i]);
    }
  }
  if (positional.length !== 1) usage();
  const report = runSuites(positional[0]);
  console.log(formatReport(report));
  if (jsonPath) {
    fs.writeFileSync(jsonPath, JSON.stringify(report, null, 2) + "\n");
  }
  return reportExitCode(report);
}

process.exit(main());
