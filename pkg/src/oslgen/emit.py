"""Suite emission: runnable test scripts plus a JSON manifest.

Two script targets exist. The default target mirrors the ONNX backend test
suite layout (a node per attribute assignment, reused by every case, with
``expect(...)`` verification) and needs the ONNX test harness to run. The
standalone target is self-contained: it embeds the tensor sampler and the
reference algorithm, re-materializes every input from its recorded seed,
computes reference outputs and checks structural conformance, so it runs
with nothing but numpy installed.

The manifest is byte-stable for fixed inputs and carries enough information
(directive plus per-instance seed) to re-materialize every concrete tensor.
"""

from __future__ import annotations

import ast
import inspect
import json
from dataclasses import dataclass
from pathlib import Path

from . import materialize as _materialize_module
from .model import (
    BoundaryCategory,
    DataType,
    Directive,
    InputInstance,
    OperatorSpec,
    Profile,
    TestCase,
)

SCHEMA_VERSION = 1
RTOL = 1e-5
ATOL = 1e-6


class AlgorithmError(Exception):
    pass


class MissingEntryFunctionError(AlgorithmError):
    pass


class ArityMismatchError(AlgorithmError):
    pass


@dataclass(frozen=True)
class AlgorithmFile:
    """A loaded reference algorithm: source plus the located entry point."""

    op_name: str
    source_text: str
    entry_function: str
    parameters: tuple[str, ...]


@dataclass(frozen=True)
class EmittedSuite:
    script_path: Path
    manifest_path: Path
    case_count: int
    seed: int


def load_algorithm(path, op_name: str,
                   expected_arity: int | None = None) -> AlgorithmFile:
    """Load a .algorithm file and locate its ``<op_name>_compute`` entry.

    The entry function name is matched case-insensitively (both
    ``Foo_compute`` and ``Foo_Compute`` are accepted). When expected_arity
    is given it must equal the function's positional parameter count, which
    by convention is one per declared input followed by one per attribute.
    """
    source = Path(path).read_text(encoding="utf-8")
    try:
        tree = ast.parse(source)
    except SyntaxError as exc:
        raise AlgorithmError(f"{path}: not valid Python: {exc}") from exc
    wanted = f"{op_name}_compute".lower()
    entry = None
    for node in tree.body:
        if isinstance(node, ast.FunctionDef) and node.name.lower() == wanted:
            entry = node
            break
    if entry is None:
        raise MissingEntryFunctionError(
            f"{path}: no function named {op_name}_compute (any case)")
    params = tuple(a.arg for a in entry.args.posonlyargs + entry.args.args)
    if expected_arity is not None and len(params) != expected_arity:
        raise ArityMismatchError(
            f"{path}: {entry.name} takes {len(params)} parameters, the "
            f"specification declares {expected_arity} "
            "(inputs then attributes)")
    return AlgorithmFile(op_name=op_name, source_text=source,
                         entry_function=entry.name, parameters=params)


# -- manifest -----------------------------------------------------------------


def _case_to_obj(case: TestCase) -> dict:
    obj = {
        "name": case.name,
        "attributes": {k: (list(v) if isinstance(v, tuple) else v)
                       for k, v in case.attribute_values},
        "inputs": [
            {
                "index": inst.index,
                "dtype": inst.dtype.value,
                "shape": list(inst.shape),
                "directive": inst.directive.to_json(),
                "seed": inst.seed,
                "omitted": inst.omitted,
            }
            for inst in case.input_instances
        ],
    }
    if case.boundary_category is not None:
        obj["boundary_category"] = case.boundary_category.value
    return obj


def manifest_obj(spec: OperatorSpec, plan: list[TestCase], seed: int,
                 profile: Profile) -> dict:
    return {
        "schema_version": SCHEMA_VERSION,
        "operator": spec.op_name,
        "op_code": spec.op_code,
        "profile": profile.value,
        "seed": seed,
        "prng": _materialize_module.PRNG_NAME,
        "cases": [_case_to_obj(c) for c in plan],
    }


def emit_manifest(spec: OperatorSpec, plan: list[TestCase], seed: int,
                  profile: Profile) -> str:
    """Render the canonical manifest: sorted keys, stable float formatting."""
    return json.dumps(manifest_obj(spec, plan, seed, profile),
                      sort_keys=True, indent=2) + "\n"


def manifest_to_plan(obj: dict) -> list[TestCase]:
    """Rebuild the test plan recorded in a manifest object."""
    cases = []
    for c in obj["cases"]:
        instances = tuple(
            InputInstance(
                index=rec["index"],
                dtype=DataType(rec["dtype"]),
                shape=tuple(rec["shape"]),
                directive=Directive.from_json(rec["directive"]),
                seed=rec["seed"],
                omitted=rec["omitted"],
            )
            for rec in c["inputs"])
        attrs = tuple(
            (k, tuple(v) if isinstance(v, list) else v)
            for k, v in c["attributes"].items())
        boundary = c.get("boundary_category")
        cases.append(TestCase(
            name=c["name"],
            attribute_values=attrs,
            input_instances=instances,
            omitted_optional_inputs=frozenset(
                i for i, rec in enumerate(c["inputs"]) if rec["omitted"]),
            boundary_category=(BoundaryCategory(boundary)
                               if boundary else None),
        ))
    return cases


def materialize_instance(inst: InputInstance):
    """Package-side tensor materialization for one input instance."""
    return _materialize_module.materialize(
        inst.dtype.value, inst.shape, inst.directive.to_json(), inst.seed)


# -- script emission ----------------------------------------------------------


def _embed_json(text: str) -> str:
    """A Python expression that evaluates to the given JSON text."""
    if "'''" not in text and not text.endswith("\\"):
        return "r'''\n" + text + "'''"
    return repr(text)


def _sampler_source() -> str:
    return inspect.getsource(_materialize_module)


def _literal(value) -> str:
    if isinstance(value, tuple):
        return repr(list(value))
    return repr(value)


_STANDALONE_RUNNER = '''
_TOLERANCES = {"rtol": @RTOL@, "atol": @ATOL@}
_FLOAT_KINDS = "fc"


def _dtype_ok(arr, name):
    if name == "string":
        return arr.dtype.kind == "U"
    return arr.dtype == np.dtype(NP_DTYPES[name])


def _check_input(arr, rec):
    name = rec["dtype"]
    if tuple(arr.shape) != tuple(rec["shape"]):
        return "materialized shape %s does not match recorded %s" % (
            list(arr.shape), rec["shape"])
    if not _dtype_ok(arr, name):
        return "materialized dtype %s is not %s" % (arr.dtype, name)
    kind = rec["directive"].get("kind")
    ranges = rec["directive"].get("ranges")
    if kind == "nonzero" and arr.size:
        if arr.dtype.kind in _FLOAT_KINDS:
            if float(np.min(np.abs(arr))) < NONZERO_EPS * 0.99:
                return "zero-magnitude element in nonzero input"
        elif bool((arr == 0).any()):
            return "zero element in nonzero input"
    if (ranges and arr.size and kind in ("uniform", "nonzero")
            and arr.dtype.kind in "fiu"):
        rel = {"f16": 1e-2, "f32": 1e-5}.get(name, 0.0)
        bound = max(max(abs(float(lo)), abs(float(hi))) for lo, hi in ranges)
        tol = rel * max(1.0, bound)
        values = arr.astype(np.float64)
        ok = np.zeros(values.shape, dtype=bool)
        for lo, hi in ranges:
            ok |= (values >= float(lo) - tol) & (values <= float(hi) + tol)
        if not bool(np.all(ok)):
            return "element outside the declared value ranges"
    return None


def _bind_inputs(case):
    arrays, bound, failures = [], [], []
    for rec in case["inputs"]:
        if rec["omitted"]:
            arrays.append(None)
            continue
        arr = materialize(rec["dtype"], rec["shape"], rec["directive"],
                          rec["seed"])
        problem = _check_input(arr, rec)
        if problem:
            failures.append(problem)
        arrays.append(arr)
    cursor = 0
    for spec in _INPUT_SPECS:
        if spec["variadic"]:
            bound.append([a for a in arrays[cursor:]])
            cursor = len(arrays)
        else:
            bound.append(arrays[cursor])
            cursor += 1
    return bound, failures


def _check_outputs(outs):
    has_variadic = any(o["variadic"] for o in _OUTPUT_SPECS)
    if not has_variadic and len(outs) != len(_OUTPUT_SPECS):
        return "expected %d outputs, got %d" % (len(_OUTPUT_SPECS), len(outs))
    for k, arr in enumerate(outs):
        spec = _OUTPUT_SPECS[min(k, len(_OUTPUT_SPECS) - 1)]
        if not any(_dtype_ok(arr, n) for n in spec["dtypes"]):
            return "output %d dtype %s not among %s" % (
                k, arr.dtype, spec["dtypes"])
        if not spec["min_dim"] <= arr.ndim <= spec["max_dim"]:
            return "output %d rank %d outside [%d, %d]" % (
                k, arr.ndim, spec["min_dim"], spec["max_dim"])
        if arr.dtype.kind in _FLOAT_KINDS and arr.size:
            if not bool(np.all(np.isfinite(arr))):
                return "non-finite element in output %d" % k
    return None


def _as_arrays(result):
    outs = result if isinstance(result, (tuple, list)) else [result]
    return [np.asarray(o) for o in outs]


def _deviation(a, b):
    if a.shape != b.shape or a.dtype != b.dtype:
        return float("inf")
    if a.dtype.kind in _FLOAT_KINDS:
        if not a.size:
            return 0.0
        return float(np.max(np.abs(a.astype(np.complex128)
                                   - b.astype(np.complex128))))
    return 0.0 if np.array_equal(a, b) else float("inf")


def _encode_array(arr):
    flat = arr.reshape(-1)
    if arr.dtype.kind == "c":
        data = [[float(v.real), float(v.imag)] for v in flat]
    elif arr.dtype.kind == "b":
        data = [bool(v) for v in flat]
    elif arr.dtype.kind == "U":
        data = [str(v) for v in flat]
    elif arr.dtype.kind == "f":
        data = [float(v) for v in flat]
    else:
        data = [int(v) for v in flat]
    return {"dtype": str(arr.dtype), "shape": list(arr.shape), "data": data}


def _close(a, b):
    if a.shape != b.shape or a.dtype != b.dtype:
        return False
    if a.dtype.kind in _FLOAT_KINDS:
        return bool(np.allclose(a, b, rtol=_TOLERANCES["rtol"],
                                atol=_TOLERANCES["atol"]))
    return bool(np.array_equal(a, b))


def _run_case(case, want_dump, dump_max):
    result = {"name": case["name"], "status": "ok", "message": "",
              "max_deviation": 0.0}
    dump = None
    try:
        bound, failures = _bind_inputs(case)
        if failures:
            result["status"] = "fail"
            result["message"] = "; ".join(failures)
            return result, None
        attr_args = [case["attributes"][n] for n in _ATTR_NAMES]
        outs = _as_arrays(_ENTRY(*(list(bound) + attr_args)))
        problem = _check_outputs(outs)
        if problem:
            result["status"] = "fail"
            result["message"] = problem
            return result, None
        again, _ = _bind_inputs(case)
        outs2 = _as_arrays(_ENTRY(*(list(again) + attr_args)))
        devs = [_deviation(a, b) for a, b in zip(outs, outs2)]
        result["max_deviation"] = max(devs) if devs else 0.0
        if len(outs) != len(outs2) or not all(
                _close(a, b) for a, b in zip(outs, outs2)):
            result["status"] = "fail"
            result["message"] = "recomputed outputs deviate beyond tolerance"
            return result, None
        if want_dump:
            flat = _flatten(bound)
            total = sum(int(a.size) for a in flat if a is not None)
            if total <= dump_max:
                dump = {
                    "name": case["name"],
                    "attributes": case["attributes"],
                    "inputs": [None if a is None else _encode_array(a)
                               for a in flat],
                    "outputs": [_encode_array(a) for a in outs],
                }
    except Exception as exc:  # noqa: BLE001 - reference code is arbitrary
        result["status"] = "error"
        result["message"] = "%s: %s" % (type(exc).__name__, exc)
    return result, dump


def _flatten(bound):
    flat = []
    for item in bound:
        if isinstance(item, list):
            flat.extend(item)
        else:
            flat.append(item)
    return flat


def main(argv=None):
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--json", help="write a machine-readable report")
    parser.add_argument("--dump", help="write small-case tensors as JSON")
    parser.add_argument("--dump-max-elements", type=int, default=512)
    args = parser.parse_args(argv)
    results, dumps = [], []
    for case in _SUITE["cases"]:
        result, dump = _run_case(case, args.dump is not None,
                                 args.dump_max_elements)
        results.append(result)
        if dump is not None:
            dumps.append(dump)
        if result["status"] != "ok":
            print("%s: %s: %s" % (result["status"].upper(), result["name"],
                                  result["message"]))
    passed = sum(1 for r in results if r["status"] == "ok")
    failed = sum(1 for r in results if r["status"] == "fail")
    errors = sum(1 for r in results if r["status"] == "error")
    print("%s: %d/%d passed, %d failed, %d errors" % (
        _SUITE["operator"], passed, len(results), failed, errors))
    if args.json:
        report = {"operator": _SUITE["operator"],
                  "op_code": _SUITE["op_code"],
                  "profile": _SUITE["profile"], "seed": _SUITE["seed"],
                  "total": len(results), "passed": passed, "failed": failed,
                  "errors": errors, "cases": results}
        with open(args.json, "w", encoding="utf-8") as fh:
            json.dump(report, fh, indent=2, sort_keys=True)
            fh.write("\\n")
    if args.dump:
        payload = {"operator": _SUITE["operator"],
                   "op_code": _SUITE["op_code"], "cases": dumps}
        with open(args.dump, "w", encoding="utf-8") as fh:
            json.dump(payload, fh, sort_keys=True)
            fh.write("\\n")
    return 0 if passed == len(results) else 1


if __name__ == "__main__":
    sys.exit(main())
'''


def emit_standalone_script(spec: OperatorSpec, plan: list[TestCase],
                           alg: AlgorithmFile, seed: int,
                           profile: Profile) -> str:
    manifest_text = emit_manifest(spec, plan, seed, profile)
    input_specs = [{"index": t.index, "optional": t.optional,
                    "variadic": t.index == -1} for t in spec.inputs]
    output_specs = [{"dtypes": [d.value for d in t.basic_type_list],
                     "min_dim": t.min_dim, "max_dim": t.max_dim,
                     "variadic": t.index == -1} for t in spec.outputs]
    attr_names = [a.attr_name for a in spec.attributes]
    runner = (_STANDALONE_RUNNER
              .replace("@RTOL@", repr(RTOL))
              .replace("@ATOL@", repr(ATOL)))
    parts = [
        "#!/usr/bin/env python3",
        f'"""Conformance suite for {alg.op_name} ({spec.op_code}).',
        "",
        f"Profile: {profile.value}, seed: {seed}, cases: {len(plan)}.",
        "Generated file, do not edit. Runs standalone: inputs are",
        "re-materialized from recorded seeds and checked against the",
        "reference algorithm embedded below.",
        '"""',
        "",
        "import argparse",
        "import json",
        "import sys",
        "",
        "import numpy",
        "",
        "# ---- deterministic tensor sampling "
        "----------------------------------------",
        _sampler_source().rstrip(),
        "",
        "# ---- reference algorithm "
        "---------------------------------------------------",
        alg.source_text.rstrip(),
        "",
        "# ---- suite data "
        "------------------------------------------------------------",
        f"_SUITE = json.loads({_embed_json(manifest_text)})",
        f"_ENTRY = {alg.entry_function}",
        f"_INPUT_SPECS = {input_specs!r}",
        f"_OUTPUT_SPECS = {output_specs!r}",
        f"_ATTR_NAMES = {attr_names!r}",
        runner.rstrip(),
        "",
    ]
    return "\n".join(parts)


def _node_attr_text(attrs: dict) -> str:
    parts = []
    for name, value in attrs.items():
        parts.append(f"    {name}={_literal(value)},")
    return "\n".join(parts)


def emit_onnx_script(spec: OperatorSpec, plan: list[TestCase],
                     alg: AlgorithmFile, seed: int, profile: Profile) -> str:
    """ONNX backend-test style script: grouped cases reusing shared nodes."""
    onnx_op = spec.onnx_name or alg.op_name

    def input_names(case: TestCase) -> list[str]:
        names = []
        counters: dict[int, int] = {}
        for inst in case.input_instances:
            if inst.index == -1:
                j = counters.get(-1, 0)
                counters[-1] = j + 1
                names.append(f"x_{len(spec.inputs) - 1}_{j}")
            else:
                names.append(f"x_{inst.index}")
        return names

    def live_names(case: TestCase) -> list[str]:
        live = [n if not inst.omitted else ""
                for n, inst in zip(input_names(case), case.input_instances)]
        while live and live[-1] == "":
            live.pop()
        return live

    # One node per distinct attribute assignment. Cases whose live operand
    # lists differ (omitted optionals, variadic arity) cannot share a node,
    # so the operand signature is part of the grouping key.
    node_keys: list[tuple] = []
    node_for_case: list[int] = []
    for case in plan:
        key = (tuple(case.attribute_values), tuple(live_names(case)))
        if key not in node_keys:
            node_keys.append(key)
        node_for_case.append(node_keys.index(key))

    lines = [
        f'"""ONNX backend tests for {onnx_op}, generated from an operator',
        f'specification (profile {profile.value}, seed {seed}).',
        '"""',
        "import numpy",
        "import numpy as np",
        "import math",
        "import onnx",
        "from ..base import Base",
        "from . import expect",
        "",
        "",
        _sampler_source().rstrip(),
        "",
        "",
        f"class {onnx_op}(Base):",
        "",
        "    @staticmethod",
        "    def export():",
        "",
    ]
    lines.append(_indent(alg.source_text.rstrip(), 8))
    lines.append("")
    for k, (attr_key, live) in enumerate(node_keys):
        var = "node" if k == 0 else f"node_{k}"
        attrs = dict(attr_key)
        outs = [f"y_{j}" for j in range(len(spec.outputs))]
        lines.append(_indent(f"{var} = onnx.helper.make_node(", 8))
        lines.append(_indent(f"    '{onnx_op}',", 8))
        lines.append(_indent(f"    inputs={list(live)!r},", 8))
        lines.append(_indent(f"    outputs={outs!r},", 8))
        if attrs:
            lines.append(_indent(_node_attr_text(attrs), 8))
        lines.append(_indent(")", 8))
        lines.append("")
    for i, case in enumerate(plan):
        names = input_names(case)
        node_var = "node" if node_for_case[i] == 0 else \
            f"node_{node_for_case[i]}"
        call_args = []
        live_names = []
        cursor = 0
        for t in spec.inputs:
            if t.index == -1:
                group = [n for n, inst in zip(names, case.input_instances)
                         if inst.index == -1]
                call_args.append("[" + ", ".join(group) + "]")
                live_names.extend(group)
                cursor += len(group)
            else:
                inst = case.input_instances[cursor]
                if inst.omitted:
                    call_args.append("None")
                else:
                    call_args.append(names[cursor])
                    live_names.append(names[cursor])
                cursor += 1
        for name, value in case.attribute_values:
            call_args.append(_literal(value))
        for name, inst in zip(names, case.input_instances):
            if inst.omitted:
                continue
            lines.append(_indent(
                f"{name} = materialize({inst.dtype.value!r}, "
                f"{list(inst.shape)!r}, {inst.directive.to_json()!r}, "
                f"{inst.seed})", 8))
        outs = [f"y_{j}" for j in range(len(spec.outputs))]
        lines.append(_indent(
            f"{', '.join(outs)} = {alg.entry_function}"
            f"({', '.join(call_args)})", 8))
        lines.append(_indent(
            f"expect({node_var}, inputs=[{', '.join(live_names)}], "
            f"outputs=[{', '.join(outs)}], name='{case.name}')", 8))
        lines.append("")
    return "\n".join(lines)


def _indent(text: str, spaces: int) -> str:
    pad = " " * spaces
    return "\n".join(pad + line if line.strip() else line
                     for line in text.splitlines())


def emit_script(spec: OperatorSpec, plan: list[TestCase], alg: AlgorithmFile,
                seed: int = 0, profile: Profile = Profile.SMOKE,
                standalone: bool = False) -> str:
    if standalone:
        return emit_standalone_script(spec, plan, alg, seed, profile)
    return emit_onnx_script(spec, plan, alg, seed, profile)


def emit_suite(spec: OperatorSpec, plan: list[TestCase], alg: AlgorithmFile,
               out_dir, seed: int, profile: Profile,
               standalone: bool = False,
               write_manifest: bool = True) -> EmittedSuite:
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    script_path = out_dir / f"test_{spec.op_code}.gen.py"
    manifest_path = out_dir / f"test_{spec.op_code}.manifest.json"
    script = emit_script(spec, plan, alg, seed, profile, standalone)
    script_path.write_text(script, encoding="utf-8", newline="\n")
    if write_manifest:
        manifest_path.write_text(emit_manifest(spec, plan, seed, profile),
                                 encoding="utf-8", newline="\n")
    return EmittedSuite(script_path=script_path, manifest_path=manifest_path,
                        case_count=len(plan), seed=seed)
