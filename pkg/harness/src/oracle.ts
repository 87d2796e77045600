import { EncodedTensor } from "./types";

// Brute-force pixel-indexing model of the depth-to-space rearrangement,
// written directly against flat row-major indices: independent of the
// reshape/transpose route the reference algorithm takes.
//
// For input (b, c, h, w) and block edge k with m = c / k^2:
//   out[n, m', y*k + i, x*k + j] = in[n, (i*k + j)*m + m', y, x]
export function depthToSpaceOracle(
  input: EncodedTensor,
  blocksize: number
): EncodedTensor {
  const [b, c, h, w] = input.shape;
  const k = blocksize;
  const m = Math.floor(c / (k * k));
  if (m * k * k !== c) {
    throw new Error(`channel count ${c} is not divisible by ${k * k}`);
  }
  const outShape = [b, m, h * k, w * k];
  const data: unknown[] = new Array(b * m * h * k * w * k);
  let out = 0;
  for (let n = 0; n < b; n++) {
    for (let mm = 0; mm < m; mm++) {
      for (let y = 0; y < h * k; y++) {
        const i = y % k;
        const yy = Math.floor(y / k);
        for (let x = 0; x < w * k; x++) {
          const j = x % k;
          const xx = Math.floor(x / k);
          const ch = (i * k + j) * m + mm;
          data[out++] = input.data[((n * c + ch) * h + yy) * w + xx];
        }
      }
    }
  }
  return { dtype: input.dtype, shape: outShape, data };
}

/** Element comparison: exact for discrete values, 1e-6 absolute for floats. */
export function elementsMatch(a: unknown, b: unknown, atol = 1e-6): boolean {
  if (Array.isArray(a) && Array.isArray(b)) {
    return (
      a.length === b.length &&
      a.every((v, i) => elementsMatch(v, (b as unknown[])[i], atol))
    );
  }
  if (typeof a === "number" && typeof b === "number") {
    return Math.abs(a - b) <= atol;
  }
  return a === b;
}

export function tensorsMatch(
  a: EncodedTensor,
  b: EncodedTensor,
  atol = 1e-6
): boolean {
  if (a.shape.length !== b.shape.length) return false;
  if (a.shape.some((d, i) => d !== b.shape[i])) return false;
  if (a.data.length !== b.data.length) return false;
  return a.data.every((v, i) => elementsMatch(v, b.data[i], atol));
}
