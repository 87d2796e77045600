import { describe, expect, test } from "vitest";

import { depthToSpaceOracle, elementsMatch, tensorsMatch } from "../src/oracle";

describe("depthToSpaceOracle", () => {
  test("rearranges a hand-computed 1x4x2x2 block", () => {
    // in[n, ch, y, x] = ch*4 + y*2 + x
    const input = {
      dtype: "int32",
      shape: [1, 4, 2, 2],
      data: Array.from({ length: 16 }, (_, i) => i),
    };
    const out = depthToSpaceOracle(input, 2);
    expect(out.shape).toEqual([1, 1, 4, 4]);
    expect(out.data).toEqual([
      0, 4, 1, 5,
      8, 12, 9, 13,
      2, 6, 3, 7,
      10, 14, 11, 15,
    ]);
  });

  test("blocksize one is the identity", () => {
    const input = {
      dtype: "float32",
      shape: [2, 3, 2, 2],
      data: Array.from({ length: 24 }, (_, i) => i / 7),
    };
    const out = depthToSpaceOracle(input, 1);
    expect(out.shape).toEqual([2, 3, 2, 2]);
    expect(out.data).toEqual(input.data);
  });

  test("rejects channels not divisible by the squared block", () => {
    expect(() =>
      depthToSpaceOracle({ dtype: "f32", shape: [1, 3, 2, 2], data: [] }, 2)
    ).toThrow(/divisible/);
  });
});

describe("comparison helpers", () => {
  test("numbers compare with absolute tolerance", () => {
    expect(elementsMatch(1.0, 1.0 + 5e-7)).toBe(true);
    expect(elementsMatch(1.0, 1.01)).toBe(false);
  });

  test("complex pairs and strings compare element-wise", () => {
    expect(elementsMatch([1.5, -2.0], [1.5, -2.0])).toBe(true);
    expect(elementsMatch([1.5, -2.0], [1.5, 2.0])).toBe(false);
    expect(elementsMatch("ab", "ab")).toBe(true);
    expect(elementsMatch("ab", "ba")).toBe(false);
    expect(elementsMatch(true, false)).toBe(false);
  });

  test("tensorsMatch requires identical shapes", () => {
    const a = { dtype: "f", shape: [2, 2], data: [1, 2, 3, 4] };
    const b = { dtype: "f", shape: [4], data: [1, 2, 3, 4] };
    expect(tensorsMatch(a, b)).toBe(false);
    expect(tensorsMatch(a, { ...a })).toBe(true);
  });
});
