"""Deterministic tensor sampling.

Given an element type name, a shape, a value directive and a 64-bit seed,
``materialize`` always produces the same array, on any platform. The PRNG is
numpy's PCG64 bit generator ("numpy-pcg64" in manifests). This module is
embedded verbatim into emitted suites, so it must stay self-contained and
import nothing beyond numpy.
"""

import numpy as np

PRNG_NAME = "numpy-pcg64"
NONZERO_EPS = 1e-3
MAX_STRING_LEN = 8
STRING_ALPHABET = "abcdefghijklmnopqrstuvwxyzABCDEFGHIJKLMNOPQRSTUVWXYZ0123456789"
DEFAULT_INT_SPAN = 16

NP_DTYPES = {
    "f16": "float16", "f32": "float32", "f64": "float64",
    "i8": "int8", "i16": "int16", "i32": "int32", "i64": "int64",
    "u8": "uint8", "u16": "uint16", "u32": "uint32", "u64": "uint64",
    "bool": "bool", "string": "U", "complex64": "complex64",
    "complex128": "complex128",
}
_INT_BOUNDS = {
    "i8": (-128, 127), "i16": (-32768, 32767),
    "i32": (-2 ** 31, 2 ** 31 - 1), "i64": (-2 ** 63, 2 ** 63 - 1),
    "u8": (0, 255), "u16": (0, 65535), "u32": (0, 2 ** 32 - 1),
    "u64": (0, 2 ** 63 - 1),
}
_FLOATS = ("f16", "f32", "f64")
_COMPLEXES = ("complex64", "complex128")


def default_int_ranges(dtype):
    """Default sampling span for integer-like types without declared ranges."""
    if dtype == "bool":
        return [[0, 1]]
    lo, hi = _INT_BOUNDS[dtype]
    return [[max(lo, -DEFAULT_INT_SPAN), min(hi, DEFAULT_INT_SPAN)]]


def _uniform_from_ranges(rng, ranges, n):
    lo = np.array([r[0] for r in ranges], dtype=np.float64)
    hi = np.array([r[1] for r in ranges], dtype=np.float64)
    pick = rng.integers(0, len(ranges), size=n)
    return lo[pick] + rng.random(n) * (hi[pick] - lo[pick])


def _ints_from_ranges(rng, ranges, n):
    lo = np.array([int(np.ceil(r[0])) for r in ranges], dtype=np.int64)
    hi = np.array([int(np.floor(r[1])) for r in ranges], dtype=np.int64)
    pick = rng.integers(0, len(ranges), size=n)
    return rng.integers(lo[pick], hi[pick] + 1)


def _resample(rng, flat, bad_mask, draw, limit=1000):
    for _ in range(limit):
        idx = np.nonzero(bad_mask(flat))[0]
        if idx.size == 0:
            return flat
        flat[idx] = draw(idx.size)
    raise ValueError("could not sample nonzero values from the given ranges")


def _sample_strings(rng, n):
    lengths = rng.integers(0, MAX_STRING_LEN + 1, size=n)
    chars = rng.integers(0, len(STRING_ALPHABET), size=(n, MAX_STRING_LEN))
    return ["".join(STRING_ALPHABET[c] for c in row[:k])
            for row, k in zip(chars, lengths)]


def materialize(dtype, shape, directive, seed):
    """Produce the tensor described by one manifest input record."""
    rng = np.random.Generator(np.random.PCG64(int(seed)))
    shape = tuple(int(d) for d in shape)
    n = 1
    for d in shape:
        n *= d
    kind = directive.get("kind", "uniform")
    ranges = directive.get("ranges")

    if dtype == "string":
        return np.array(_sample_strings(rng, n), dtype="<U8").reshape(shape)

    if dtype == "bool":
        flat = rng.integers(0, 2, size=n)
        if kind == "nonzero":
            flat = np.ones(n, dtype=np.int64)
        return flat.astype(np.bool_).reshape(shape)

    if dtype in _COMPLEXES:
        flat = rng.standard_normal(n) + 1j * rng.standard_normal(n)
        if kind == "nonzero":
            def draw(k):
                return rng.standard_normal(k) + 1j * rng.standard_normal(k)
            flat = _resample(rng, flat,
                             lambda v: np.abs(v) < NONZERO_EPS, draw)
        return flat.astype(NP_DTYPES[dtype]).reshape(shape)

    if dtype in _FLOATS:
        if kind == "normal" or (kind == "nonzero" and not ranges):
            flat = rng.standard_normal(n)
            if kind == "nonzero":
                flat = _resample(rng, flat,
                                 lambda v: np.abs(v) < NONZERO_EPS,
                                 rng.standard_normal)
        else:
            rs = ranges or [[-1.0, 1.0]]
            flat = _uniform_from_ranges(rng, rs, n)
            if kind == "nonzero":
                flat = _resample(rng, flat,
                                 lambda v: np.abs(v) < NONZERO_EPS,
                                 lambda k: _uniform_from_ranges(rng, rs, k))
        return flat.astype(NP_DTYPES[dtype]).reshape(shape)

    # integer types
    rs = ranges or default_int_ranges(dtype)
    flat = _ints_from_ranges(rng, rs, n)
    if kind == "nonzero":
        flat = _resample(rng, flat, lambda v: v == 0,
                         lambda k: _ints_from_ranges(rng, rs, k))
    return flat.astype(NP_DTYPES[dtype]).reshape(shape)
