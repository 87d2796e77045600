import { spawnSync } from "child_process";
import * as fs from "fs";
import * as os from "os";
import * as path from "path";
import { fileURLToPath } from "url";

import { beforeAll, describe, expect, test } from "vitest";

import { depthToSpaceOracle, tensorsMatch } from "../src/oracle";
import { runSuite } from "../src/runSuite";
import { reportExitCode, runSuites } from "../src/runSuites";
import { RunReport, SuiteDump } from "../src/types";

const HERE = path.dirname(fileURLToPath(import.meta.url));
const HARNESS_DIR = path.resolve(HERE, "..");
const REPO_DIR = path.resolve(HARNESS_DIR, "..");
const CORPUS_DIR = path.join(REPO_DIR, "src", "oslgen", "corpus");
const ALGORITHMS_DIR = path.join(HARNESS_DIR, "algorithms");

let suitesDir: string;
let report: RunReport;

function emitCorpus(outDir: string): void {
  const specs = fs
    .readdirSync(CORPUS_DIR)
    .filter((f) => f.endsWith(".osl"))
    .sort()
    .map((f) => path.join(CORPUS_DIR, f));
  expect(specs.length).toBe(10);
  const proc = spawnSync(
    "python3",
    [
      "-m", "oslgen", "gen",
      "--profile", "smoke",
      "--alg-path", ALGORITHMS_DIR,
      "--out", outDir,
      "--standalone",
      "--seed", "0",
      "--count", "200",
      ...specs,
    ],
    { encoding: "utf-8" }
  );
  expect(proc.stderr).toBe("");
  expect(proc.status).toBe(0);
}

beforeAll(() => {
  suitesDir = fs.mkdtempSync(path.join(os.tmpdir(), "osl-e2e-"));
  emitCorpus(suitesDir);
  report = runSuites(suitesDir);
});

describe("end-to-end corpus run", () => {
  test("all ten suites pass completely", () => {
    expect(report.suites.length).toBe(10);
    expect(report.total).toBe(2000);
    const failing = report.suites
      .filter((s) => s.failed > 0)
      .map((s) => `${s.operator}: ${[...s.failedCases, ...s.errorCases].join(",")}`);
    expect(failing).toEqual([]);
    expect(report.passed).toBe(2000);
    expect(reportExitCode(report)).toBe(0);
  });

  test("every suite reports its manifest-declared case count", () => {
    for (const s of report.suites) {
      expect(s.total).toBe(200);
      expect(s.total).toBe(s.passed + s.failed);
    }
  });

  test("division suites contain no zero divisor", () => {
    const div = report.suites.find((s) => s.opCode === "op_div");
    expect(div).toBeDefined();
    expect(div!.failed).toBe(0); // in-script nonzero checks cover all cases
    expect(div!.nonzeroViolations).toBe(0); // dumped tensors re-checked here
  });

  test("depth-to-space output matches the brute-force indexing oracle", () => {
    const script = path.join(suitesDir, "test_op_depth_to_space.gen.py");
    const dumpPath = path.join(suitesDir, "dts-dump.json");
    const result = runSuite(script, { dumpPath, dumpMaxElements: 512 });
    expect(result.failed).toBe(0);
    const dump = JSON.parse(
      fs.readFileSync(dumpPath, "utf-8")
    ) as SuiteDump;
    expect(dump.cases.length).toBeGreaterThan(0);
    for (const c of dump.cases) {
      const input = c.inputs[0]!;
      const blocksize = c.attributes["blocksize"] as number;
      const expected = depthToSpaceOracle(input, blocksize);
      expect(
        tensorsMatch(expected, c.outputs[0]),
        `${c.name} deviates from the indexing oracle`
      ).toBe(true);
    }
  });
});

describe("fault handling", () => {
  test("a corrupted case value yields exactly one failure", () => {
    const brokenDir = fs.mkdtempSync(path.join(os.tmpdir(), "osl-broken-"));
    for (const name of [
      "test_op_depth_to_space.gen.py",
      "test_op_depth_to_space.manifest.json",
    ]) {
      fs.copyFileSync(path.join(suitesDir, name), path.join(brokenDir, name));
    }
    const scriptPath = path.join(brokenDir, "test_op_depth_to_space.gen.py");
    const text = fs.readFileSync(scriptPath, "utf-8");
    // First textual occurrence sits in the first case's attribute record.
    const tampered = text.replace(/"blocksize": \d+/, '"blocksize": 7');
    expect(tampered).not.toBe(text);
    fs.writeFileSync(scriptPath, tampered);
    const broken = runSuites(brokenDir);
    expect(broken.total).toBe(200);
    expect(broken.failed).toBe(1);
    expect(reportExitCode(broken)).toBe(1);
  });

  test("an empty directory reports zero totals and a nonzero exit", () => {
    const emptyDir = fs.mkdtempSync(path.join(os.tmpdir(), "osl-empty-"));
    const empty = runSuites(emptyDir);
    expect(empty.total).toBe(0);
    expect(empty.suites).toEqual([]);
    expect(reportExitCode(empty)).toBe(1);
  });
});
