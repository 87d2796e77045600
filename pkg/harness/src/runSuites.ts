import * as fs from "fs";
import * as path from "path";

import { runSuite, RunSuiteOptions } from "./runSuite";
import { RunReport, SuiteResult } from "./types";

/** Run every emitted standalone suite (test_*.gen.py) in a directory. */
export function runSuites(
  dir: string,
  options: RunSuiteOptions = {}
): RunReport {
  const scripts = fs.existsSync(dir)
    ? fs
        .readdirSync(dir)
        .filter((f) => f.endsWith(".gen.py"))
        .sort()
        .map((f) => path.join(dir, f))
    : [];
  const suites: SuiteResult[] = [];
  for (const script of scripts) {
    suites.push(runSuite(script, options));
  }
  const total = suites.reduce((n, s) => n + s.total, 0);
  const passed = suites.reduce((n, s) => n + s.passed, 0);
  return {
    schemaVersion: 1,
    total,
    passed,
    failed: total - passed,
    suites,
  };
}

export function formatReport(report: RunReport): string {
  const lines: string[] = [];
  for (const s of report.suites) {
    const flag = s.failed === 0 ? "ok  " : "FAIL";
    lines.push(
      `${flag} ${s.operator}: ${s.passed}/${s.total} passed` +
        (s.errorCases.length ? `, errors: ${s.errorCases.join(", ")}` : "") +
        (s.failedCases.length
          ? `, failed: ${s.failedCases.slice(0, 5).join(", ")}` +
            (s.failedCases.length > 5 ? ", ..." : "")
          : "") +
        (s.nonzeroViolations ? `, nonzero violations: ${s.nonzeroViolations}` : "")
    );
  }
  lines.push(
    `total: ${report.passed}/${report.total} passed across ` +
      `${report.suites.length} suite(s)`
  );
  return lines.join("\n");
}

/** Exit status for a report: 0 only when something ran and all passed. */
export function reportExitCode(report: RunReport): number {
  if (report.total === 0) return 1;
  const nonzero = report.suites.some((s) => s.nonzeroViolations > 0);
  return report.failed === 0 && !nonzero ? 0 : 1;
}
