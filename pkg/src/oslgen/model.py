"""Domain model for operator specifications and generated test plans.

Everything here is immutable after construction, so values can be shared
freely between the parser, the generator and the emitters.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

from .registry import onnx_name_for


class DataType(enum.Enum):
    """Tensor element types. Declaration order is the canonical sort order."""

    F16 = "f16"
    F32 = "f32"
    F64 = "f64"
    I8 = "i8"
    I16 = "i16"
    I32 = "i32"
    I64 = "i64"
    U8 = "u8"
    U16 = "u16"
    U32 = "u32"
    U64 = "u64"
    BOOL = "bool"
    STRING = "string"
    COMPLEX64 = "complex64"
    COMPLEX128 = "complex128"

    def __repr__(self):
        return f"DataType.{self.name}"

    @property
    def byte_width(self) -> int | None:
        """Element width in bytes; None for variable-width (string)."""
        return _BYTE_WIDTHS[self]

    @property
    def is_float(self) -> bool:
        return self in (DataType.F16, DataType.F32, DataType.F64)

    @property
    def is_complex(self) -> bool:
        return self in (DataType.COMPLEX64, DataType.COMPLEX128)

    @property
    def is_integer(self) -> bool:
        return self.value[0] in ("i", "u")

    @property
    def is_unsigned(self) -> bool:
        return self.value[0] == "u"

    @property
    def sort_key(self) -> int:
        return _SORT_KEYS[self]

    def numeric_bounds(self) -> tuple[float, float] | None:
        """Inclusive representable range for numeric types, None otherwise."""
        return _NUMERIC_BOUNDS.get(self)


_BYTE_WIDTHS = {
    DataType.F16: 2, DataType.F32: 4, DataType.F64: 8,
    DataType.I8: 1, DataType.I16: 2, DataType.I32: 4, DataType.I64: 8,
    DataType.U8: 1, DataType.U16: 2, DataType.U32: 4, DataType.U64: 8,
    DataType.BOOL: 1, DataType.STRING: None,
    DataType.COMPLEX64: 8, DataType.COMPLEX128: 16,
}

_SORT_KEYS = {t: i for i, t in enumerate(DataType)}

_NUMERIC_BOUNDS = {
    DataType.F16: (-65504.0, 65504.0),
    DataType.F32: (-3.4028234663852886e38, 3.4028234663852886e38),
    DataType.F64: (-1.7976931348623157e308, 1.7976931348623157e308),
    DataType.I8: (-128, 127),
    DataType.I16: (-(2 ** 15), 2 ** 15 - 1),
    DataType.I32: (-(2 ** 31), 2 ** 31 - 1),
    DataType.I64: (-(2 ** 63), 2 ** 63 - 1),
    DataType.U8: (0, 255),
    DataType.U16: (0, 2 ** 16 - 1),
    DataType.U32: (0, 2 ** 32 - 1),
    DataType.U64: (0, 2 ** 64 - 1),
    DataType.BOOL: (0, 1),
}


class ImplicitProperty(enum.Enum):
    """Built-in operator behaviors that are not explicit attributes."""

    MULTIDIRECTIONAL_BROADCAST = "multidirectional_broadcast"
    UNIDIRECTIONAL_BROADCAST = "unidirectional_broadcast"
    NONZERO = "nonzero"


class BoundaryCategory(enum.Enum):
    """Boundary conditions a generated case may be forced to stress."""

    RANK_MIN = "rank_min"
    RANK_MAX = "rank_max"
    DIM_LENGTH_ONE = "dim_length_one"
    VALUE_RANGE_MIN = "value_range_min"
    VALUE_RANGE_MAX = "value_range_max"


class Profile(enum.Enum):
    SMOKE = "smoke"
    FULL = "full"


@dataclass(frozen=True)
class AttrType:
    """An attribute type token: element type plus scalar/vector arity."""

    element: DataType
    vector: bool = False

    @property
    def osl_name(self) -> str:
        return self.element.value + ("_v1" if self.vector else "")


@dataclass(frozen=True)
class ValueRanges:
    """Discrete union of inclusive [min, max] value ranges."""

    ranges: tuple[tuple[float, float], ...]

    def __post_init__(self):
        for lo, hi in self.ranges:
            if lo > hi:
                raise ValueError(f"range minimum {lo} exceeds maximum {hi}")

    @classmethod
    def from_lists(cls, min_vals, max_vals) -> "ValueRanges":
        if len(min_vals) != len(max_vals):
            raise ValueError(
                "lengths of min_val_list and max_val_list must be equal"
            )
        return cls(tuple(zip(min_vals, max_vals)))

    def contains(self, v) -> bool:
        return any(lo <= v <= hi for lo, hi in self.ranges)

    def to_json(self):
        return [[lo, hi] for lo, hi in self.ranges]

    @classmethod
    def from_json(cls, data) -> "ValueRanges":
        return cls(tuple((lo, hi) for lo, hi in data))


@dataclass(frozen=True)
class AttributeSpec:
    """Constraints for one operator attribute."""

    attr_name: str
    type_list: tuple[AttrType, ...]
    default_value: str | None = None
    value_ranges: ValueRanges | None = None


@dataclass(frozen=True)
class TensorSpec:
    """Constraints for one input or output tensor.

    The OSL surface syntax exposes nine fields: index, basic_type_list,
    min_dim, max_dim, min_val_list, max_val_list, axis_bound, optional and
    normal_distribution. The two value lists are folded into value_ranges.
    """

    index: int
    basic_type_list: tuple[DataType, ...]
    min_dim: int = 0
    max_dim: int = 4
    value_ranges: ValueRanges | None = None
    axis_bound: bool = False
    optional: bool = False
    normal_distribution: bool = False


@dataclass(frozen=True)
class OperatorSpec:
    """A parsed operator specification."""

    op_name: str
    op_code: str
    attributes: tuple[AttributeSpec, ...] = ()
    inputs: tuple[TensorSpec, ...] = ()
    outputs: tuple[TensorSpec, ...] = ()
    properties: frozenset[ImplicitProperty] = frozenset()
    # When set, inputs that declare identical basic_type_lists receive the
    # same sampled element type (element-type homogeneity for binary ops).
    type_tied: bool = False

    @property
    def onnx_name(self) -> str | None:
        return onnx_name_for(self.op_code)

    def attribute(self, name: str) -> AttributeSpec | None:
        for a in self.attributes:
            if a.attr_name == name:
                return a
        return None


@dataclass(frozen=True)
class Directive:
    """How element values of one tensor instance are drawn.

    kind is one of "normal" (standard normal), "uniform" (uniform over
    value ranges, or a per-dtype default span when ranges is None) and
    "nonzero" (like uniform/normal but zero values are excluded).
    """

    kind: str
    ranges: ValueRanges | None = None

    def to_json(self):
        d = {"kind": self.kind}
        if self.ranges is not None:
            d["ranges"] = self.ranges.to_json()
        return d

    @classmethod
    def from_json(cls, data) -> "Directive":
        ranges = data.get("ranges")
        return cls(data["kind"], ValueRanges.from_json(ranges) if ranges else None)


@dataclass(frozen=True)
class InputInstance:
    """One concrete tensor operand of a generated test case."""

    index: int  # declared TensorSpec index (-1 for variadic instances)
    dtype: DataType
    shape: tuple[int, ...]
    directive: Directive
    seed: int
    omitted: bool = False


@dataclass(frozen=True)
class TestCase:
    """A fully resolved, re-materializable description of one test."""

    name: str
    attribute_values: tuple[tuple[str, object], ...]  # (attr_name, value)
    input_instances: tuple[InputInstance, ...]
    omitted_optional_inputs: frozenset[int] = frozenset()
    boundary_category: BoundaryCategory | None = None

    @property
    def attributes(self) -> dict:
        return dict(self.attribute_values)


@dataclass(frozen=True)
class Diagnostic:
    """A validation finding: dotted field path plus message."""

    path: str
    message: str

    def __str__(self):
        return f"{self.path}: {self.message}"


def _check_index_sequence(specs, kind, diags):
    # Indices must be consecutive from 0; one trailing -1 variadic entry is
    # permitted.
    for pos, t in enumerate(specs):
        if t.index == -1:
            if pos != len(specs) - 1:
                diags.append(Diagnostic(
                    f"{kind}[{pos}].index",
                    "variadic entry (-1) must be the last one"))
        elif t.index != pos:
            diags.append(Diagnostic(
                f"{kind}[{pos}].index",
                f"expected consecutive index {pos}, found {t.index}"))


def _check_ranges_fit(ranges: ValueRanges, dtypes, path, diags):
    for dt in dtypes:
        bounds = dt.numeric_bounds()
        if bounds is None:
            diags.append(Diagnostic(
                path, f"value ranges are not supported for type {dt.value}"))
            continue
        lo_b, hi_b = bounds
        for lo, hi in ranges.ranges:
            if lo < lo_b or hi > hi_b:
                diags.append(Diagnostic(
                    path,
                    f"range [{lo}, {hi}] is not representable in {dt.value}"))


def validate_spec(spec: OperatorSpec) -> list[Diagnostic]:
    """Check all structural invariants; an empty list means the spec is valid."""
    diags: list[Diagnostic] = []

    if not spec.op_name:
        diags.append(Diagnostic("op_name", "operator name must be non-empty"))
    if spec.onnx_name is None:
        diags.append(Diagnostic(
            "op_code", f"unknown operator code {spec.op_code!r}"))

    broadcast = {p for p in spec.properties
                 if p is not ImplicitProperty.NONZERO}
    if len(broadcast) > 1:
        diags.append(Diagnostic(
            "properties", "at most one broadcasting variant is allowed"))

    for i, a in enumerate(spec.attributes):
        path = f"attributes[{i}]"
        if not a.attr_name:
            diags.append(Diagnostic(f"{path}.attr_name", "must be non-empty"))
        if not a.type_list:
            diags.append(Diagnostic(f"{path}.type_list", "must be non-empty"))
        if a.value_ranges is not None:
            _check_ranges_fit(a.value_ranges, [t.element for t in a.type_list],
                              f"{path}.value_ranges", diags)

    seen_names = set()
    for i, a in enumerate(spec.attributes):
        if a.attr_name in seen_names:
            diags.append(Diagnostic(
                f"attributes[{i}].attr_name",
                f"duplicate attribute {a.attr_name!r}"))
        seen_names.add(a.attr_name)

    axis_attr = spec.attribute("axis")
    for kind, tensors in (("inputs", spec.inputs), ("outputs", spec.outputs)):
        _check_index_sequence(tensors, kind, diags)
        for i, t in enumerate(tensors):
            path = f"{kind}[{i}]"
            if not t.basic_type_list:
                diags.append(Diagnostic(
                    f"{path}.basic_type_list", "must be non-empty"))
            if t.min_dim < 0:
                diags.append(Diagnostic(
                    f"{path}.min_dim", "must be non-negative"))
            if t.max_dim < t.min_dim:
                diags.append(Diagnostic(
                    f"{path}.max_dim",
                    f"max_dim {t.max_dim} is below min_dim {t.min_dim}"))
            if t.normal_distribution:
                bad = [d for d in t.basic_type_list if not d.is_float]
                if bad:
                    diags.append(Diagnostic(
                        f"{path}.normal_distribution",
                        "requires a floating-point basic_type_list, found "
                        + ", ".join(d.value for d in bad)))
            if t.value_ranges is not None:
                _check_ranges_fit(t.value_ranges, t.basic_type_list,
                                  f"{path}.value_ranges", diags)
            if t.axis_bound and kind == "inputs":
                if axis_attr is None:
                    diags.append(Diagnostic(
                        f"{path}.axis_bound",
                        "set, but the operator declares no 'axis' attribute"))
                elif axis_attr.value_ranges is not None:
                    # Every sampleable axis value must leave a feasible rank.
                    hi = max(h for _, h in axis_attr.value_ranges.ranges)
                    if hi + 1 > t.max_dim:
                        diags.append(Diagnostic(
                            f"{path}.axis_bound",
                            f"axis can reach {int(hi)} but max_dim is "
                            f"{t.max_dim}"))
    return diags
