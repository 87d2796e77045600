"""Known ONNX operator names and the op_code naming scheme.

Operator codes are snake_case identifiers prefixed with ``op_`` (e.g.
``op_depth_to_space`` for DepthToSpace). Specs must reference a known
operator so that reference algorithm files can be located by name.
"""

from __future__ import annotations

import re

# Operators from the ONNX standard operator set. Not exhaustive, but wide
# enough to cover everything a spec corpus realistically targets. "BatchNorm"
# is kept as an accepted alias alongside the canonical BatchNormalization.
ONNX_OPERATORS = (
    "Abs", "Acos", "Acosh", "Add", "And", "ArgMax", "ArgMin", "Asin", "Asinh",
    "Atan", "Atanh", "AveragePool", "BatchNorm", "BatchNormalization", "Cast",
    "Ceil", "Celu", "Clip", "Compress", "Concat", "Constant",
    "ConstantOfShape", "Conv", "ConvTranspose", "Cos", "Cosh", "CumSum",
    "DepthToSpace", "DequantizeLinear", "Div", "Dropout", "Einsum", "Elu",
    "Equal", "Erf", "Exp", "Expand", "EyeLike", "Flatten", "Floor", "GRU",
    "Gather", "GatherElements", "GatherND", "Gemm", "GlobalAveragePool",
    "GlobalMaxPool", "Greater", "GreaterOrEqual", "HardSigmoid", "HardSwish",
    "Hardmax", "Identity", "InstanceNormalization", "IsInf", "IsNaN", "LRN",
    "LSTM", "LeakyRelu", "Less", "LessOrEqual", "Log", "LogSoftmax", "MatMul",
    "Max", "MaxPool", "Mean", "Min", "Mish", "Mod", "Mul", "Neg", "NonZero",
    "Not", "OneHot", "Or", "PRelu", "Pad", "Pow", "QuantizeLinear", "RNN",
    "Range", "Reciprocal", "ReduceMax", "ReduceMean", "ReduceMin",
    "ReduceProd", "ReduceSum", "Relu", "Reshape", "Resize", "Round",
    "ScatterElements", "ScatterND", "Selu", "Shape", "Sigmoid", "Sign", "Sin",
    "Sinh", "Size", "Slice", "Softmax", "Softplus", "Softsign", "SpaceToDepth",
    "Split", "Sqrt", "Squeeze", "Sub", "Sum", "Tan", "Tanh", "Tile", "TopK",
    "Transpose", "Unsqueeze", "Where", "Xor",
)


def snake_case(name: str) -> str:
    """CamelCase operator name to snake_case: DepthToSpace -> depth_to_space."""
    s = re.sub(r"(.)([A-Z][a-z]+)", r"\1_\2", name)
    s = re.sub(r"([a-z0-9])([A-Z])", r"\1_\2", s)
    return s.lower()


def op_code_for(name: str) -> str:
    return "op_" + snake_case(name)


OP_CODES = {op_code_for(name): name for name in ONNX_OPERATORS}


def onnx_name_for(op_code: str) -> str | None:
    """Resolve an op_code back to the operator name, or None if unknown."""
    return OP_CODES.get(op_code)
