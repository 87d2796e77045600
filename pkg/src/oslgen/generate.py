"""Coverage-driven randomized test plan generation.

A plan is built in three phases under a fixed budget:

1. every element-type combination of the inputs receives an equal share of
   the budget (remainders go to the first combinations in canonical order);
2. tensor ranks are drawn uniformly from the not-yet-saturated ranks so all
   allowed ranks are covered with a consistent distribution;
3. a slice of the budget is reserved for boundary stressing (extreme ranks,
   length-1 dimensions, value range endpoints).

``generate_plan`` is a pure function of (spec, profile, count, seed).
"""

from __future__ import annotations

import itertools
import warnings
from dataclasses import dataclass, field

import numpy as np

from .constraints import (
    MAX_DIM_LENGTH,
    VOLUME_CAP,
    CandidateAssignment,
    apply_corner_case,
    corner_rule_for,
    violations,
)
from .materialize import MAX_STRING_LEN, PRNG_NAME, STRING_ALPHABET
from .model import (
    AttributeSpec,
    BoundaryCategory,
    DataType,
    Directive,
    ImplicitProperty,
    InputInstance,
    OperatorSpec,
    Profile,
    TensorSpec,
    TestCase,
    ValueRanges,
    validate_spec,
)

BOUNDARY_FRACTION = 0.1
DEFAULT_COUNT = 200
_SEED_SPACE = 2 ** 53  # stays exact in JSON consumers


class InvalidSpecError(Exception):
    def __init__(self, diagnostics):
        self.diagnostics = diagnostics
        super().__init__("; ".join(str(d) for d in diagnostics))


class GenerationError(Exception):
    """The generator produced a candidate that violates its own rules."""


class BudgetTooSmallWarning(UserWarning):
    """Requested test count cannot cover every type combination."""


@dataclass
class RandomSource:
    """Seeded PRNG with a pinned, platform-stable algorithm."""

    seed: int
    algorithm: str = PRNG_NAME
    gen: np.random.Generator = field(init=False, repr=False)

    def __post_init__(self):
        self.gen = np.random.Generator(np.random.PCG64(self.seed))


@dataclass
class CoverageLedger:
    """Bookkeeping for budget allocation and dimension coverage."""

    combo_order: list[tuple[DataType, ...]]
    combination_quota: dict[tuple[DataType, ...], int]
    groups: list[list[int]]  # input positions sharing one type factor
    rank_quota: dict[int, int]  # per input position
    rank_occurrences: dict[int, dict[int, int]] = field(default_factory=dict)
    boundary_hits: set[BoundaryCategory] = field(default_factory=set)

    def record_rank(self, input_pos: int, rank: int):
        occ = self.rank_occurrences.setdefault(input_pos, {})
        occ[rank] = occ.get(rank, 0) + 1


def _tie_groups(spec: OperatorSpec) -> list[list[int]]:
    """Partition input positions into factors of the type-combination product."""
    groups: list[list[int]] = []
    if spec.type_tied:
        by_types: dict[tuple, list[int]] = {}
        for pos, t in enumerate(spec.inputs):
            by_types.setdefault(t.basic_type_list, []).append(pos)
        groups = list(by_types.values())
        groups.sort(key=lambda g: g[0])
    else:
        groups = [[pos] for pos in range(len(spec.inputs))]
    return groups


def type_combinations(spec: OperatorSpec) -> list[tuple[DataType, ...]]:
    """All dtype combinations, one entry per tie group, in canonical order."""
    groups = _tie_groups(spec)
    factors = [sorted(set(spec.inputs[g[0]].basic_type_list),
                      key=lambda d: d.sort_key)
               for g in groups]
    return [tuple(c) for c in itertools.product(*factors)]


def count_type_combinations(spec: OperatorSpec) -> int:
    n = 1
    for group in _tie_groups(spec):
        n *= len(set(spec.inputs[group[0]].basic_type_list))
    return n


def allocate_budget(spec: OperatorSpec, count: int) -> CoverageLedger:
    """Split count over type combinations and derive per-input rank quotas."""
    groups = _tie_groups(spec)
    combos = type_combinations(spec)
    quota: dict[tuple[DataType, ...], int] = {}
    if count >= len(combos):
        base, remainder = divmod(count, len(combos))
        for i, combo in enumerate(combos):
            quota[combo] = base + (1 if i < remainder else 0)
    else:
        for i, combo in enumerate(combos):
            quota[combo] = 1 if i < count else 0
    rank_quota = {}
    for pos, t in enumerate(spec.inputs):
        span = t.max_dim - t.min_dim + 1
        rank_quota[pos] = max(1, count // span)
    return CoverageLedger(combo_order=combos, combination_quota=quota,
                          groups=groups, rank_quota=rank_quota)


def sample_rank(ledger: CoverageLedger, input_pos: int, rng,
                tspec: TensorSpec, min_rank: int | None = None,
                max_rank: int | None = None) -> int:
    """Uniform draw among not-yet-saturated ranks; resets once all saturate."""
    lo = tspec.min_dim if min_rank is None else max(tspec.min_dim, min_rank)
    hi = tspec.max_dim if max_rank is None else min(tspec.max_dim, max_rank)
    if hi < lo:
        raise GenerationError(
            f"no feasible rank for input {input_pos}: [{lo}, {hi}]")
    quota = ledger.rank_quota[input_pos]
    occ = ledger.rank_occurrences.setdefault(input_pos, {})
    allowed = range(lo, hi + 1)
    unvisited = [r for r in allowed if occ.get(r, 0) < quota]
    if not unvisited:
        for r in range(tspec.min_dim, tspec.max_dim + 1):
            occ[r] = 0
        unvisited = list(allowed)
    rank = unvisited[int(rng.integers(0, len(unvisited)))]
    occ[rank] = occ.get(rank, 0) + 1
    return rank


def sample_shape(rank: int, rng,
                 boundary: BoundaryCategory | None = None) -> tuple[int, ...]:
    """Dimension lengths uniform in [1, MAX_DIM_LENGTH], volume capped."""
    dims = [int(rng.integers(1, MAX_DIM_LENGTH + 1)) for _ in range(rank)]
    if boundary is BoundaryCategory.DIM_LENGTH_ONE and rank:
        dims[int(rng.integers(0, rank))] = 1
    while _volume(dims) > VOLUME_CAP:
        i = max(range(len(dims)), key=lambda k: dims[k])
        rest = _volume(dims) // dims[i]
        dims[i] = int(rng.integers(1, max(1, VOLUME_CAP // rest) + 1))
    return tuple(dims)


def _volume(shape) -> int:
    v = 1
    for d in shape:
        v *= d
    return v


def _partner_shape(base: tuple[int, ...], rank: int, rng) -> tuple[int, ...]:
    """A shape of the given rank that broadcasts against base.

    Aligned dimensions copy the base length or collapse to 1; leading extra
    dimensions are free. The volume cap only ever collapses aligned
    dimensions to 1, so compatibility is preserved.
    """
    lead = max(0, rank - len(base))
    dims = [int(rng.integers(1, MAX_DIM_LENGTH + 1)) for _ in range(lead)]
    aligned = rank - lead
    for d in base[len(base) - aligned:] if aligned else ():
        dims.append(int(d) if rng.random() < 0.7 else 1)
    while _volume(dims) > VOLUME_CAP:
        big = [i for i in range(len(dims)) if dims[i] > 1]
        if not big:
            break
        i = max(big, key=lambda k: dims[k])
        if i < lead:
            rest = _volume(dims) // dims[i]
            dims[i] = int(rng.integers(1, max(1, VOLUME_CAP // rest) + 1))
        else:
            dims[i] = 1
    return tuple(dims)


def applicable_boundary_categories(
        spec: OperatorSpec, profile: Profile) -> list[BoundaryCategory]:
    cats = [BoundaryCategory.RANK_MIN, BoundaryCategory.RANK_MAX]
    if any(t.max_dim >= 1 for t in spec.inputs):
        cats.append(BoundaryCategory.DIM_LENGTH_ONE)
    ranged = any(t.value_ranges is not None for t in spec.inputs)
    if profile is Profile.FULL:
        ranged = ranged or any(a.value_ranges is not None
                               for a in spec.attributes)
    if ranged:
        cats.append(BoundaryCategory.VALUE_RANGE_MIN)
        cats.append(BoundaryCategory.VALUE_RANGE_MAX)
    return cats


def _boundary_slots(count: int, cats) -> dict[int, BoundaryCategory]:
    """Case ordinals that stress a boundary, spread evenly over the plan."""
    if not cats or count <= 0:
        return {}
    n = int(BOUNDARY_FRACTION * count)
    if count >= 20:
        n = max(n, len(cats))
    n = min(n, count)
    return {(j * count) // n: cats[j % len(cats)] for j in range(n)}


def _random_string(rng) -> str:
    length = int(rng.integers(0, MAX_STRING_LEN + 1))
    return "".join(STRING_ALPHABET[int(rng.integers(0, len(STRING_ALPHABET)))]
                   for _ in range(length))


_DEFAULT_ATTR_RANGES = {
    "int": ((0, 3),),
    "float": ((0.0, 1.0),),
    "bool": ((0, 1),),
}


def _sample_attr_scalar(element: DataType, ranges, rng,
                        boundary: BoundaryCategory | None):
    if element is DataType.STRING:
        return _random_string(rng)
    if ranges is None:
        if element is DataType.BOOL:
            pairs = _DEFAULT_ATTR_RANGES["bool"]
        elif element.is_float:
            pairs = _DEFAULT_ATTR_RANGES["float"]
        else:
            pairs = _DEFAULT_ATTR_RANGES["int"]
    else:
        pairs = ranges.ranges
    if boundary is BoundaryCategory.VALUE_RANGE_MIN:
        value = pairs[0][0]
    elif boundary is BoundaryCategory.VALUE_RANGE_MAX:
        value = pairs[-1][1]
    else:
        lo, hi = pairs[int(rng.integers(0, len(pairs)))]
        if element.is_float:
            value = float(lo) + float(rng.random()) * (float(hi) - float(lo))
        else:
            value = int(rng.integers(int(np.ceil(lo)), int(np.floor(hi)) + 1))
    if element is DataType.BOOL:
        return bool(int(value))
    if element.is_float:
        return float(value)
    return int(value)


def _sample_attr_value(aspec: AttributeSpec, rng,
                       boundary: BoundaryCategory | None):
    atype = aspec.type_list[int(rng.integers(0, len(aspec.type_list)))]
    if atype.vector:
        length = int(rng.integers(1, 5))
        return tuple(_sample_attr_scalar(atype.element, aspec.value_ranges,
                                         rng, boundary)
                     for _ in range(length))
    return _sample_attr_scalar(atype.element, aspec.value_ranges, rng,
                               boundary)


def _sample_attributes(spec: OperatorSpec, rng,
                       boundary: BoundaryCategory | None) -> dict:
    return {a.attr_name: _sample_attr_value(a, rng, boundary)
            for a in spec.attributes}


def _collapse_ranges(ranges: ValueRanges,
                     boundary: BoundaryCategory | None) -> ValueRanges:
    if boundary is BoundaryCategory.VALUE_RANGE_MIN:
        lo = ranges.ranges[0][0]
        return ValueRanges(((lo, lo),))
    if boundary is BoundaryCategory.VALUE_RANGE_MAX:
        hi = ranges.ranges[-1][1]
        return ValueRanges(((hi, hi),))
    return ranges


def _directive_for(tspec: TensorSpec, dtype: DataType,
                   override: ValueRanges | None,
                   boundary: BoundaryCategory | None,
                   nonzero: bool) -> Directive:
    if override is not None:
        ranges = override
    elif tspec.value_ranges is not None:
        ranges = _collapse_ranges(tspec.value_ranges, boundary)
    else:
        ranges = None
    if nonzero:
        return Directive("nonzero", ranges)
    if ranges is not None:
        return Directive("uniform", ranges)
    if tspec.normal_distribution or dtype.is_float or dtype.is_complex:
        return Directive("normal")
    return Directive("uniform")


def _build_case(spec: OperatorSpec, profile: Profile, ordinal: int,
                dtype_by_pos: dict[int, DataType],
                boundary: BoundaryCategory | None, ledger: CoverageLedger,
                rng, smoke_attrs: dict | None) -> TestCase:
    if smoke_attrs is not None:
        attrs = dict(smoke_attrs)
    else:
        attrs = _sample_attributes(spec, rng, boundary)
    axis = attrs.get("axis") if spec.attribute("axis") is not None else None
    if not isinstance(axis, int):
        axis = None

    has_corner = corner_rule_for(spec) is not None
    props = spec.properties
    multi = (ImplicitProperty.MULTIDIRECTIONAL_BROADCAST in props
             and not has_corner)
    uni = (ImplicitProperty.UNIDIRECTIONAL_BROADCAST in props
           and not has_corner)

    # Expand variadic entries into 2..4 concrete instances.
    positions: list[int] = []
    for pos, tspec in enumerate(spec.inputs):
        k = int(rng.integers(2, 5)) if tspec.index == -1 else 1
        positions.extend([pos] * k)

    omitted: set[int] = set()
    for inst, pos in enumerate(positions):
        if spec.inputs[pos].optional and rng.random() < 0.5:
            omitted.add(inst)
    base_inst = next((j for j in range(len(positions)) if j not in omitted),
                     None)

    ranks: list[int] = []
    for inst, pos in enumerate(positions):
        tspec = spec.inputs[pos]
        floor = tspec.min_dim
        if tspec.axis_bound and axis is not None and axis >= 0:
            floor = max(floor, axis + 1)
        ceil = tspec.max_dim
        if (uni and base_inst is not None and inst > base_inst
                and inst not in omitted):
            ceil = min(ceil, ranks[base_inst])
        if boundary is BoundaryCategory.RANK_MIN:
            rank = floor
            ledger.record_rank(pos, rank)
        elif boundary is BoundaryCategory.RANK_MAX:
            rank = max(floor, ceil)
            ledger.record_rank(pos, rank)
        else:
            rank = sample_rank(ledger, pos, rng, tspec, min_rank=floor,
                               max_rank=ceil)
        ranks.append(rank)

    shapes: list[tuple[int, ...]] = []
    for inst, pos in enumerate(positions):
        partner = ((multi or uni) and base_inst is not None
                   and inst != base_inst and inst not in omitted)
        if partner:
            shape = _partner_shape(shapes[base_inst], ranks[inst], rng)
        else:
            force = (boundary is BoundaryCategory.DIM_LENGTH_ONE
                     and (base_inst is None or inst == base_inst))
            shape = sample_shape(
                ranks[inst], rng,
                BoundaryCategory.DIM_LENGTH_ONE if force else None)
        shapes.append(shape)

    cand = CandidateAssignment(
        attribute_values=attrs,
        input_shapes=shapes,
        input_dtypes=[dtype_by_pos[pos] for pos in positions],
        omitted_inputs=omitted,
        spec_indices=tuple(positions),
        boundary=boundary,
    )
    cand = apply_corner_case(spec, cand, rng)
    problems = violations(spec, cand)
    if problems:
        raise GenerationError(
            f"case {ordinal} violates constraints: " + "; ".join(problems))

    nonzero = ImplicitProperty.NONZERO in props
    instances = []
    for inst, pos in enumerate(positions):
        tspec = spec.inputs[pos]
        dtype = cand.input_dtypes[inst]
        directive = _directive_for(tspec, dtype,
                                   cand.range_overrides.get(inst), boundary,
                                   nonzero)
        instances.append(InputInstance(
            index=tspec.index,
            dtype=dtype,
            shape=tuple(cand.input_shapes[inst]),
            directive=directive,
            seed=int(rng.integers(0, _SEED_SPACE)),
            omitted=inst in cand.omitted_inputs,
        ))

    if boundary is not None:
        ledger.boundary_hits.add(boundary)

    attr_values = []
    for a in spec.attributes:
        value = cand.attribute_values[a.attr_name]
        attr_values.append((a.attr_name,
                            tuple(value) if isinstance(value, list) else value))
    attr_values = tuple(attr_values)
    return TestCase(
        name=f"test_{spec.op_name.lower()}_{ordinal}",
        attribute_values=attr_values,
        input_instances=tuple(instances),
        omitted_optional_inputs=frozenset(cand.omitted_inputs),
        boundary_category=boundary,
    )


def generate_plan(spec: OperatorSpec, profile: Profile,
                  count: int = DEFAULT_COUNT, seed: int = 0) -> list[TestCase]:
    """Produce the full, constraint-checked test plan for one operator."""
    if count < 1:
        raise ValueError("count must be at least 1")
    diagnostics = validate_spec(spec)
    if diagnostics:
        raise InvalidSpecError(diagnostics)

    source = RandomSource(seed)
    rng = source.gen
    ledger = allocate_budget(spec, count)
    if count < len(ledger.combo_order):
        warnings.warn(
            f"{spec.op_name}: budget {count} is below the "
            f"{len(ledger.combo_order)} type combinations; only the first "
            f"{count} are covered",
            BudgetTooSmallWarning, stacklevel=2)

    smoke_attrs = (_sample_attributes(spec, rng, None)
                   if profile is Profile.SMOKE else None)
    slots = _boundary_slots(count,
                            applicable_boundary_categories(spec, profile))

    plan: list[TestCase] = []
    ordinal = 0
    for combo in ledger.combo_order:
        dtype_by_pos = {}
        for group, dtype in zip(ledger.groups, combo):
            for pos in group:
                dtype_by_pos[pos] = dtype
        for _ in range(ledger.combination_quota[combo]):
            plan.append(_build_case(spec, profile, ordinal, dtype_by_pos,
                                    slots.get(ordinal), ledger, rng,
                                    smoke_attrs))
            ordinal += 1
    return plan
