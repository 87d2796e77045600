"""Validity rules for candidate test cases.

Three layers of rules are implemented here:

* generic predicates: axis bounds and the two broadcasting disciplines;
* the nonzero value property (zero-free operand values);
* per-operator structural corner cases (channel divisibility, inner
  dimension agreement, ...) with minimal repair procedures.

Repairs resample only offending dimensions so the generator's type and rank
choices stay intact wherever the rule permits.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .model import (
    BoundaryCategory,
    DataType,
    Directive,
    ImplicitProperty,
    OperatorSpec,
    ValueRanges,
)
from .registry import onnx_name_for

MAX_DIM_LENGTH = 24
VOLUME_CAP = 2 ** 16
EPSILON_NONZERO = 1e-3


class IncompatibleShapesError(Exception):
    pass


class UnrepairableError(Exception):
    """No valid shape exists within the declared rank and size bounds."""


@dataclass
class CandidateAssignment:
    """A candidate (attributes, shapes, dtypes) tuple under repair.

    spec_indices maps each concrete instance to the declared TensorSpec it
    instantiates (variadic entries expand to several instances sharing the
    declared index -1). range_overrides carries value-range constraints that
    corner rules impose on individual instances (e.g. index bounds derived
    from a sampled depth).
    """

    attribute_values: dict
    input_shapes: list[tuple[int, ...]]
    input_dtypes: list[DataType]
    omitted_inputs: set[int] = field(default_factory=set)
    spec_indices: tuple[int, ...] = ()
    range_overrides: dict[int, ValueRanges] = field(default_factory=dict)
    boundary: BoundaryCategory | None = None


def _volume(shape) -> int:
    v = 1
    for d in shape:
        v *= d
    return v


def _cap_shape(dims: list[int], rng, frozen: frozenset[int] = frozenset()):
    """Shrink non-frozen dims until the element count fits VOLUME_CAP."""
    while _volume(dims) > VOLUME_CAP:
        candidates = [i for i in range(len(dims))
                      if i not in frozen and dims[i] > 1]
        if not candidates:
            return False
        i = max(candidates, key=lambda k: dims[k])
        rest = _volume(dims) // dims[i]
        dims[i] = int(rng.integers(1, max(1, VOLUME_CAP // rest) + 1))
    return True


# -- generic predicates ------------------------------------------------------


def check_axis_bound(spec: OperatorSpec, cand: CandidateAssignment) -> bool:
    """Rank of every axis-bound input must be at least axis + 1."""
    if spec.attribute("axis") is None:
        return True
    axis = cand.attribute_values.get("axis")
    if not isinstance(axis, int):
        return True
    for inst, spec_idx in enumerate(cand.spec_indices):
        tspec = spec.inputs[spec_idx]
        if not tspec.axis_bound or inst in cand.omitted_inputs:
            continue
        if len(cand.input_shapes[inst]) < axis + 1:
            return False
    return True


def multidirectional_broadcast_shape(a, b) -> tuple[int, ...]:
    """Result shape of broadcasting a with b; both operands may stretch."""
    a, b = tuple(a), tuple(b)
    rank = max(len(a), len(b))
    out = []
    for i in range(rank):
        da = a[len(a) - rank + i] if len(a) - rank + i >= 0 else 1
        db = b[len(b) - rank + i] if len(b) - rank + i >= 0 else 1
        if da != db and da != 1 and db != 1:
            raise IncompatibleShapesError(
                f"shapes {a} and {b} differ at aligned dimension {i}")
        out.append(max(da, db))
    return tuple(out)


def broadcastable(a, b) -> bool:
    try:
        multidirectional_broadcast_shape(a, b)
        return True
    except IncompatibleShapesError:
        return False


def unidirectional_broadcastable(target, b) -> bool:
    """True iff b stretches into target; target never grows."""
    target, b = tuple(target), tuple(b)
    if len(b) > len(target):
        return False
    off = len(target) - len(b)
    return all(db == target[off + i] or db == 1 for i, db in enumerate(b))


def enforce_nonzero(directive: Directive) -> Directive:
    """Exclude zero from the sampled values, keeping any declared ranges."""
    return Directive("nonzero", directive.ranges)


# -- corner cases -------------------------------------------------------------


def _shapes(cand):
    return [list(s) for s in cand.input_shapes]


def _concat_axis(cand, rank):
    axis = cand.attribute_values.get("axis")
    if not isinstance(axis, int) or not -rank <= axis < rank:
        return None
    return axis % rank


def _check_depth_to_space(spec, cand):
    bs = cand.attribute_values.get("blocksize")
    if not isinstance(bs, int) or not cand.input_shapes:
        return True
    shape = cand.input_shapes[0]
    if len(shape) < 2:
        return False
    return shape[1] % (bs * bs) == 0


def _repair_depth_to_space(spec, cand, rng):
    bs = cand.attribute_values["blocksize"]
    sq = bs * bs
    shapes = _shapes(cand)
    if len(shapes[0]) < 2:
        raise UnrepairableError("input needs a channel dimension")
    if sq > VOLUME_CAP:
        raise UnrepairableError(f"blocksize {bs} exceeds the volume cap")
    m_cap = max(1, MAX_DIM_LENGTH // sq)
    shapes[0][1] = sq * int(rng.integers(1, m_cap + 1))
    if not _cap_shape(shapes[0], rng, frozen=frozenset({1})):
        raise UnrepairableError("channel count exceeds the volume cap")
    cand.input_shapes = [tuple(s) for s in shapes]
    return cand


def _check_batch_norm(spec, cand):
    if not cand.input_shapes or len(cand.input_shapes[0]) < 2:
        return False
    c = cand.input_shapes[0][1]
    for j in range(1, min(5, len(cand.input_shapes))):
        if tuple(cand.input_shapes[j]) != (c,):
            return False
    return True


def _repair_batch_norm(spec, cand, rng):
    if not cand.input_shapes or len(cand.input_shapes[0]) < 2:
        raise UnrepairableError("data input needs at least 2 dimensions")
    c = cand.input_shapes[0][1]
    shapes = _shapes(cand)
    for j in range(1, min(5, len(shapes))):
        shapes[j] = [c]
    cand.input_shapes = [tuple(s) for s in shapes]
    return cand


def _check_compress(spec, cand):
    if len(cand.input_shapes) < 2:
        return False
    data, cond = cand.input_shapes[0], cand.input_shapes[1]
    if len(cond) != 1:
        return False
    axis = cand.attribute_values.get("axis")
    if isinstance(axis, int) and -len(data) <= axis < len(data):
        bound = data[axis % len(data)] if data else 0
    else:
        bound = _volume(data)
    return 1 <= cond[0] <= bound


def _repair_compress(spec, cand, rng):
    if len(cand.input_shapes) < 2 or len(cand.input_shapes[1]) != 1:
        raise UnrepairableError("condition input must be rank 1")
    data = cand.input_shapes[0]
    axis = cand.attribute_values.get("axis")
    if isinstance(axis, int) and data and -len(data) <= axis < len(data):
        bound = data[axis % len(data)]
    else:
        bound = _volume(data)
    shapes = _shapes(cand)
    shapes[1] = [int(rng.integers(1, max(1, bound) + 1))]
    cand.input_shapes = [tuple(s) for s in shapes]
    return cand


def _check_concat(spec, cand):
    shapes = cand.input_shapes
    if not shapes:
        return False
    rank = len(shapes[0])
    axis = _concat_axis(cand, rank) if rank else None
    if axis is None:
        return False
    for s in shapes[1:]:
        if len(s) != rank:
            return False
        if any(s[d] != shapes[0][d] for d in range(rank) if d != axis):
            return False
    return True


def _repair_concat(spec, cand, rng):
    shapes = _shapes(cand)
    template = shapes[0]
    rank = len(template)
    axis = _concat_axis(cand, rank) if rank else None
    if axis is None:
        raise UnrepairableError("concatenation axis is out of range")
    rest = _volume(template) // template[axis]
    axis_cap = max(1, min(MAX_DIM_LENGTH, VOLUME_CAP // rest))
    for j in range(1, len(shapes)):
        s = list(template)
        s[axis] = int(rng.integers(1, axis_cap + 1))
        shapes[j] = s
    cand.input_shapes = [tuple(s) for s in shapes]
    return cand


def _gemm_c_present(cand):
    return (len(cand.input_shapes) > 2
            and 2 not in cand.omitted_inputs)


def _check_gemm(spec, cand):
    if len(cand.input_shapes) < 2:
        return False
    a, b = cand.input_shapes[0], cand.input_shapes[1]
    if len(a) != 2 or len(b) != 2 or a[1] != b[0]:
        return False
    if _gemm_c_present(cand):
        return unidirectional_broadcastable((a[0], b[1]),
                                            cand.input_shapes[2])
    return True


def _repair_gemm(spec, cand, rng):
    shapes = _shapes(cand)
    a, b = shapes[0], shapes[1]
    if len(a) != 2 or len(b) != 2:
        raise UnrepairableError("matrix operands must be rank 2")
    b[0] = a[1]
    if _gemm_c_present(cand):
        m, n = a[0], b[1]
        c_rank = len(shapes[2])
        if c_rank == 0:
            shapes[2] = []
        elif c_rank == 1:
            shapes[2] = [int(rng.choice([1, n]))]
        elif c_rank == 2:
            rows = int(rng.choice([1, m]))
            cols = int(rng.choice([1, n]))
            shapes[2] = [rows, cols]
        else:
            raise UnrepairableError("bias operand must have rank <= 2")
    cand.input_shapes = [tuple(s) for s in shapes]
    return cand


def _matmul_inner(a, b):
    ka = a[-1]
    kb = b[0] if len(b) == 1 else b[-2]
    return ka, kb


def _check_mat_mul(spec, cand):
    if len(cand.input_shapes) < 2:
        return False
    a, b = cand.input_shapes[0], cand.input_shapes[1]
    if not a or not b:
        return False
    ka, kb = _matmul_inner(a, b)
    if ka != kb:
        return False
    return broadcastable(a[:-2], b[:-2])


def _repair_mat_mul(spec, cand, rng):
    shapes = _shapes(cand)
    a, b = shapes[0], shapes[1]
    if not a or not b:
        raise UnrepairableError("matmul operands must have rank >= 1")
    ka = a[-1]
    if len(b) == 1:
        b[0] = ka
    else:
        b[-2] = ka
        # Right-align the batch dimensions of b onto a's: equal or 1.
        a_batch = a[:-2]
        nb = len(b) - 2
        for i in range(nb):
            ai = i - nb + len(a_batch)
            if ai >= 0:
                b[i] = a_batch[ai] if rng.random() < 0.7 else 1
        while _volume(b) > VOLUME_CAP:
            batch = [i for i in range(nb) if b[i] > 1]
            if batch:
                b[max(batch, key=lambda k: b[k])] = 1
            elif b[-1] > 1:
                b[-1] = max(1, VOLUME_CAP // (_volume(b) // b[-1]))
            else:
                raise UnrepairableError("inner dimension exceeds volume cap")
    cand.input_shapes = [tuple(s) for s in shapes]
    return cand


def _check_conv(spec, cand):
    if len(cand.input_shapes) < 2:
        return False
    x, w = cand.input_shapes[0], cand.input_shapes[1]
    group = cand.attribute_values.get("group", 1)
    if len(x) < 3 or len(w) != len(x):
        return False
    if x[1] % group != 0 or w[1] != x[1] // group:
        return False
    if any(w[i] > x[i] for i in range(2, len(x))):
        return False
    if len(cand.input_shapes) > 2 and 2 not in cand.omitted_inputs:
        if tuple(cand.input_shapes[2]) != (w[0],):
            return False
    return True


def _repair_conv(spec, cand, rng):
    shapes = _shapes(cand)
    x = shapes[0]
    group = cand.attribute_values.get("group", 1)
    if len(x) < 3:
        raise UnrepairableError("conv data input needs spatial dimensions")
    x[1] = group * max(1, x[1] // group)
    if not _cap_shape(x, rng, frozen=frozenset({1})):
        raise UnrepairableError("channel count exceeds the volume cap")
    m = shapes[1][0] if shapes[1] else int(rng.integers(1, MAX_DIM_LENGTH + 1))
    w = [m, x[1] // group]
    w += [int(rng.integers(1, x[i] + 1)) for i in range(2, len(x))]
    if not _cap_shape(w, rng, frozen=frozenset({1})):
        raise UnrepairableError("kernel exceeds the volume cap")
    shapes[1] = w
    if len(shapes) > 2:
        shapes[2] = [w[0]]
    cand.input_shapes = [tuple(s) for s in shapes]
    return cand


def _check_one_hot(spec, cand):
    if len(cand.input_shapes) < 3:
        return False
    if tuple(cand.input_shapes[2]) != (2,):
        return False
    depth = cand.range_overrides.get(1)
    indices = cand.range_overrides.get(0)
    if depth is None or indices is None or len(depth.ranges) != 1:
        return False
    lo, hi = depth.ranges[0]
    if lo != hi or lo < 1:
        return False
    d = int(lo)
    return indices.ranges == ((-d, d - 1),)


def _repair_one_hot(spec, cand, rng):
    if len(cand.input_shapes) < 3:
        raise UnrepairableError("expected indices, depth and values inputs")
    declared = None
    if len(spec.inputs) > 1:
        declared = spec.inputs[cand.spec_indices[1]].value_ranges
    ranges = declared.ranges if declared is not None else ((1, 8),)
    if cand.boundary is BoundaryCategory.VALUE_RANGE_MIN:
        d = int(ranges[0][0])
    elif cand.boundary is BoundaryCategory.VALUE_RANGE_MAX:
        d = int(ranges[-1][1])
    else:
        lo, hi = ranges[int(rng.integers(0, len(ranges)))]
        d = int(rng.integers(int(lo), int(hi) + 1))
    d = max(1, d)
    cand.range_overrides = dict(cand.range_overrides)
    cand.range_overrides[1] = ValueRanges(((d, d),))
    cand.range_overrides[0] = ValueRanges(((-d, d - 1),))
    shapes = _shapes(cand)
    shapes[1] = []
    shapes[2] = [2]
    cand.input_shapes = [tuple(s) for s in shapes]
    return cand


def _squeeze_axes(cand):
    axes = cand.attribute_values.get("axes")
    if axes is None:
        return None
    if isinstance(axes, int):
        return [axes]
    return list(axes)


def _check_squeeze(spec, cand):
    axes = _squeeze_axes(cand)
    if axes is None:
        return True
    if not cand.input_shapes:
        return False
    shape = cand.input_shapes[0]
    r = len(shape)
    if r == 0:
        return not axes
    normalized = []
    for a in axes:
        if not -r <= a < r:
            return False
        normalized.append(a % r)
    if len(set(normalized)) != len(normalized):
        return False
    return all(shape[a] == 1 for a in normalized)


def _repair_squeeze(spec, cand, rng):
    axes = _squeeze_axes(cand)
    shapes = _shapes(cand)
    r = len(shapes[0])
    if r == 0:
        raise UnrepairableError("cannot squeeze listed axes of a scalar")
    normalized = sorted({a % r for a in axes})
    cand.attribute_values = dict(cand.attribute_values)
    cand.attribute_values["axes"] = normalized
    for a in normalized:
        shapes[0][a] = 1
    cand.input_shapes = [tuple(s) for s in shapes]
    return cand


def _check_lrn(spec, cand):
    size = cand.attribute_values.get("size")
    if size is None:
        return True
    return isinstance(size, int) and size >= 1 and size % 2 == 1


def _repair_lrn(spec, cand, rng):
    size = cand.attribute_values.get("size")
    aspec = spec.attribute("size")
    ranges = aspec.value_ranges if aspec is not None else None
    for candidate in (size + 1, size - 1):
        if candidate >= 1 and candidate % 2 == 1 and (
                ranges is None or ranges.contains(candidate)):
            cand.attribute_values = dict(cand.attribute_values)
            cand.attribute_values["size"] = candidate
            return cand
    raise UnrepairableError("no odd window size within the declared ranges")


_CORNER_RULES = {
    "DepthToSpace": (_check_depth_to_space, _repair_depth_to_space),
    "BatchNorm": (_check_batch_norm, _repair_batch_norm),
    "BatchNormalization": (_check_batch_norm, _repair_batch_norm),
    "Compress": (_check_compress, _repair_compress),
    "Concat": (_check_concat, _repair_concat),
    "Gemm": (_check_gemm, _repair_gemm),
    "MatMul": (_check_mat_mul, _repair_mat_mul),
    "Conv": (_check_conv, _repair_conv),
    "OneHot": (_check_one_hot, _repair_one_hot),
    "Squeeze": (_check_squeeze, _repair_squeeze),
    "LRN": (_check_lrn, _repair_lrn),
}


def corner_rule_for(spec: OperatorSpec):
    name = onnx_name_for(spec.op_code)
    return _CORNER_RULES.get(name) if name else None


def corner_check(spec: OperatorSpec, cand: CandidateAssignment) -> bool:
    rule = corner_rule_for(spec)
    return rule[0](spec, cand) if rule else True


def apply_corner_case(spec: OperatorSpec, cand: CandidateAssignment,
                      rng) -> CandidateAssignment:
    """Repair cand to satisfy the operator's structural constraint.

    Identity for operators without a corner rule and for candidates that
    already satisfy it, which makes the operation idempotent.
    """
    rule = corner_rule_for(spec)
    if rule is None:
        return cand
    check, repair = rule
    if check(spec, cand):
        return cand
    repaired = repair(spec, cand, rng)
    if not check(spec, repaired):
        raise UnrepairableError(
            f"repair for {spec.op_code} produced an invalid candidate")
    return repaired


def violations(spec: OperatorSpec, cand: CandidateAssignment) -> list[str]:
    """All constraint-engine predicates a candidate fails, as messages."""
    found = []
    for inst, spec_idx in enumerate(cand.spec_indices):
        tspec = spec.inputs[spec_idx]
        dtype = cand.input_dtypes[inst]
        shape = cand.input_shapes[inst]
        if dtype not in tspec.basic_type_list:
            found.append(f"input {inst}: dtype {dtype.value} not allowed")
        if not tspec.min_dim <= len(shape) <= tspec.max_dim:
            found.append(f"input {inst}: rank {len(shape)} outside "
                         f"[{tspec.min_dim}, {tspec.max_dim}]")
        if any(d < 1 for d in shape):
            found.append(f"input {inst}: non-positive dimension in {shape}")
        if _volume(shape) > VOLUME_CAP:
            found.append(f"input {inst}: volume above cap")
    if not check_axis_bound(spec, cand):
        found.append("axis bound violated")
    if corner_rule_for(spec) is None:
        live = [cand.input_shapes[i] for i in range(len(cand.input_shapes))
                if i not in cand.omitted_inputs]
        if ImplicitProperty.MULTIDIRECTIONAL_BROADCAST in spec.properties:
            try:
                out = live[0] if live else ()
                for s in live[1:]:
                    out = multidirectional_broadcast_shape(out, s)
            except IncompatibleShapesError:
                found.append("multidirectional broadcast incompatibility")
        elif ImplicitProperty.UNIDIRECTIONAL_BROADCAST in spec.properties:
            for s in live[1:]:
                if not unidirectional_broadcastable(live[0], s):
                    found.append("unidirectional broadcast incompatibility")
    if not corner_check(spec, cand):
        found.append("operator corner-case constraint violated")
    return found
