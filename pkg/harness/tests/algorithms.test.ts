import { spawnSync } from "child_process";
import * as path from "path";
import { fileURLToPath } from "url";

import { describe, expect, test } from "vitest";

import { referenceCorpus } from "../src/algorithms";

const HERE = path.dirname(fileURLToPath(import.meta.url));
const ALGORITHMS_DIR = path.resolve(HERE, "..", "algorithms");

const EXPECTED_OPERATORS = [
  "Add", "Asin", "Concat", "DepthToSpace", "Div", "Gemm", "MatMul",
  "OneHot", "Split", "Squeeze",
];

function runAlgorithm(operator: string, code: string): string {
  const algPath = path.join(ALGORITHMS_DIR, `${operator}.algorithm`);
  const program = [
    "import numpy",
    "import numpy as np",
    `exec(open(${JSON.stringify(algPath)}).read())`,
    code,
  ].join("\n");
  const proc = spawnSync("python3", ["-c", program], { encoding: "utf-8" });
  expect(proc.stderr).toBe("");
  expect(proc.status).toBe(0);
  return proc.stdout.trim();
}

describe("reference corpus", () => {
  test("covers the ten bundled operators", () => {
    const corpus = referenceCorpus(ALGORITHMS_DIR);
    expect([...corpus.keys()].sort()).toEqual(EXPECTED_OPERATORS);
  });

  test("entry functions follow the naming and operand-order conventions", () => {
    for (const [operator, alg] of referenceCorpus(ALGORITHMS_DIR)) {
      expect(alg.entryFunction.toLowerCase()).toBe(
        `${operator.toLowerCase()}_compute`
      );
      // operands first (x_<index>), attributes after
      expect(alg.parameters[0]).toBe("x_0");
      const operandCount = alg.parameters.filter((p) =>
        p.startsWith("x_")
      ).length;
      expect(alg.parameters.slice(0, operandCount)).toEqual(
        Array.from({ length: operandCount }, (_, i) => `x_${i}`)
      );
    }
  });

  test("depth-to-space maps (1, b^2, h, w) to (1, 1, h*b, w*b)", () => {
    const out = runAlgorithm(
      "DepthToSpace",
      "x = np.arange(36, dtype=np.float32).reshape(1, 9, 2, 2)\n" +
        "print(DepthToSpace_compute(x, 3).shape)"
    );
    expect(out).toBe("(1, 1, 6, 6)");
  });

  test("adding a zero tensor is the identity", () => {
    const out = runAlgorithm(
      "Add",
      "x = np.arange(12.0).reshape(3, 4)\n" +
        "print(bool((Add_compute(x, np.zeros((3, 4))) == x).all()))"
    );
    expect(out).toBe("True");
  });

  test("arcsine stays finite on the closed interval including endpoints", () => {
    const out = runAlgorithm(
      "Asin",
      "x = np.array([-1.0, -0.5, 0.0, 0.5, 1.0], dtype=np.float32)\n" +
        "print(bool(np.isfinite(Asin_compute(x)).all()))"
    );
    expect(out).toBe("True");
  });
});
