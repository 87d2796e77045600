import { spawnSync } from "child_process";
import * as fs from "fs";
import * as os from "os";
import * as path from "path";

import {
  ScriptReport,
  SuiteDump,
  SuiteManifest,
  SuiteResult,
} from "./types";

const NONZERO_EPS = 1e-3;

export interface RunSuiteOptions {
  python?: string;
  dumpPath?: string;
  dumpMaxElements?: number;
  timeoutMs?: number;
}

export function manifestPathFor(scriptPath: string): string {
  return scriptPath.replace(/\.gen\.py$/, ".manifest.json");
}

export function readManifest(scriptPath: string): SuiteManifest | null {
  const p = manifestPathFor(scriptPath);
  if (!fs.existsSync(p)) return null;
  return JSON.parse(fs.readFileSync(p, "utf-8")) as SuiteManifest;
}

function zeroish(dtype: string, value: unknown): boolean {
  if (Array.isArray(value)) {
    // complex as [re, im]
    const [re, im] = value as [number, number];
    return Math.hypot(re, im) < NONZERO_EPS * 0.99;
  }
  if (typeof value === "boolean") return !value;
  if (typeof value === "number") {
    return dtype.startsWith("f")
      ? Math.abs(value) < NONZERO_EPS * 0.99
      : value === 0;
  }
  return false;
}

/**
 * Count elements that violate the nonzero directive in the dumped tensors.
 * Covers every dumped case (the scripts themselves check all cases; the
 * dump only contains cases small enough to serialize).
 */
export function countNonzeroViolations(
  manifest: SuiteManifest,
  dump: SuiteDump
): number {
  const byName = new Map(manifest.cases.map((c) => [c.name, c]));
  let violations = 0;
  for (const dumped of dump.cases) {
    const record = byName.get(dumped.name);
    if (!record) continue;
    dumped.inputs.forEach((tensor, i) => {
      const input = record.inputs[i];
      if (!tensor || !input || input.directive.kind !== "nonzero") return;
      for (const v of tensor.data) {
        if (zeroish(input.dtype, v)) violations += 1;
      }
    });
  }
  return violations;
}

/** Execute one standalone suite script and collect its per-case report. */
export function runSuite(
  scriptPath: string,
  options: RunSuiteOptions = {}
): SuiteResult {
  const python = options.python ?? "python3";
  const manifest = readManifest(scriptPath);
  const reportPath = path.join(
    fs.mkdtempSync(path.join(os.tmpdir(), "suite-")),
    "report.json"
  );
  const args = [scriptPath, "--json", reportPath];
  const wantDump =
    options.dumpPath !== undefined ||
    manifest?.cases.some((c) =>
      c.inputs.some((i) => i.directive.kind === "nonzero")
    );
  const dumpPath =
    options.dumpPath ?? path.join(path.dirname(reportPath), "dump.json");
  if (wantDump) {
    args.push("--dump", dumpPath);
    if (options.dumpMaxElements !== undefined) {
      args.push("--dump-max-elements", String(options.dumpMaxElements));
    }
  }
  const proc = spawnSync(python, args, {
    encoding: "utf-8",
    timeout: options.timeoutMs ?? 180_000,
  });

  const result: SuiteResult = {
    script: scriptPath,
    operator: manifest?.operator ?? path.basename(scriptPath),
    opCode: manifest?.op_code ?? "",
    total: manifest?.cases.length ?? 0,
    passed: 0,
    failed: manifest?.cases.length ?? 0,
    failedCases: [],
    errorCases: [],
    maxDeviation: 0,
    nonzeroViolations: 0,
  };

  if (!fs.existsSync(reportPath)) {
    // A crash before reporting counts as an error, never a silent skip.
    result.errorCases = ["<script produced no report>"];
    if (result.total === 0) {
      result.total = 1;
      result.failed = 1;
    }
    return result;
  }
  const report = JSON.parse(
    fs.readFileSync(reportPath, "utf-8")
  ) as ScriptReport;
  result.total = report.total;
  result.passed = report.passed;
  result.failed = report.total - report.passed;
  result.failedCases = report.cases
    .filter((c) => c.status === "fail")
    .map((c) => c.name);
  result.errorCases = report.cases
    .filter((c) => c.status === "error")
    .map((c) => c.name);
  result.maxDeviation = report.cases.reduce(
    (acc, c) => Math.max(acc, c.max_deviation),
    0
  );
  if (proc.status !== 0 && result.failed === 0) {
    result.errorCases.push("<nonzero exit without failing case>");
    result.failed += 1;
    result.total += 1;
  }
  if (wantDump && manifest && fs.existsSync(dumpPath)) {
    const dump = JSON.parse(fs.readFileSync(dumpPath, "utf-8")) as SuiteDump;
    result.nonzeroViolations = countNonzeroViolations(manifest, dump);
  }
  return result;
}
