import ast
import json
import subprocess
import sys

import numpy as np
import pytest

from oslgen.emit import (
    ArityMismatchError,
    MissingEntryFunctionError,
    emit_manifest,
    emit_script,
    emit_suite,
    load_algorithm,
    manifest_to_plan,
    materialize_instance,
)
from oslgen.generate import generate_plan
from oslgen.model import Profile
from oslgen.parser import parse

ADD_ALGORITHM = '''\
def Add_compute(x_0, x_1):
    return numpy.add(x_0, x_1)
'''

# Several fixtures use tiny budgets below the combination count on purpose.
pytestmark = pytest.mark.filterwarnings(
    "ignore::oslgen.generate.BudgetTooSmallWarning")


def write_alg(tmp_path, name, text):
    p = tmp_path / f"{name}.algorithm"
    p.write_text(text)
    return p


# -- load_algorithm ------------------------------------------------------------


def test_load_algorithm_finds_entry(alg_dir):
    alg = load_algorithm(alg_dir / "DepthToSpace.algorithm", "DepthToSpace")
    assert alg.entry_function == "DepthToSpace_compute"
    assert alg.parameters == ("x_0", "blocksize")


def test_load_algorithm_accepts_capitalized_suffix(tmp_path):
    p = write_alg(tmp_path, "Relu",
                  "def Relu_Compute(x_0):\n    return x_0\n")
    alg = load_algorithm(p, "Relu")
    assert alg.entry_function == "Relu_Compute"


def test_load_algorithm_missing_entry(tmp_path):
    p = write_alg(tmp_path, "Relu", "def something_else(x):\n    return x\n")
    with pytest.raises(MissingEntryFunctionError):
        load_algorithm(p, "Relu")


def test_load_algorithm_checks_arity(tmp_path):
    p = write_alg(tmp_path, "Add", ADD_ALGORITHM)
    alg = load_algorithm(p, "Add", expected_arity=2)
    assert len(alg.parameters) == 2
    with pytest.raises(ArityMismatchError):
        load_algorithm(p, "Add", expected_arity=3)


# -- scripts ---------------------------------------------------------------------


@pytest.fixture()
def dts(corpus_specs, alg_dir):
    spec = corpus_specs["DepthToSpace"]
    alg = load_algorithm(alg_dir / "DepthToSpace.algorithm", "DepthToSpace")
    return spec, alg


def test_standalone_script_embeds_algorithm_and_cases(dts):
    spec, alg = dts
    plan = generate_plan(spec, Profile.SMOKE, 5, 0)
    text = emit_script(spec, plan, alg, seed=0, profile=Profile.SMOKE,
                       standalone=True)
    assert alg.source_text.rstrip() in text
    for case in plan:
        assert case.name in text
    ast.parse(text)


def test_single_case_script(dts):
    spec, alg = dts
    plan = generate_plan(spec, Profile.SMOKE, 1, 0)
    text = emit_script(spec, plan, alg, standalone=True)
    assert "test_depthtospacetest_0" in text
    assert "test_depthtospacetest_1" not in text


def test_onnx_script_one_node_per_attribute_assignment(dts):
    spec, alg = dts
    plan = generate_plan(spec, Profile.FULL, 40, 1)
    distinct = {tuple(c.attribute_values) for c in plan}
    text = emit_script(spec, plan, alg, seed=1, profile=Profile.FULL)
    assert text.count("onnx.helper.make_node(") == len(distinct)
    ast.parse(text)


def test_onnx_script_smoke_has_single_node(dts):
    spec, alg = dts
    plan = generate_plan(spec, Profile.SMOKE, 30, 0)
    text = emit_script(spec, plan, alg, seed=0, profile=Profile.SMOKE)
    assert text.count("onnx.helper.make_node(") == 1
    assert "expect(node," in text


def test_case_names_unique_and_well_formed(corpus_specs, dts):
    import re
    spec, alg = dts
    plan = generate_plan(spec, Profile.SMOKE, 50, 0)
    names = [c.name for c in plan]
    assert len(set(names)) == len(names)
    assert all(re.fullmatch(r"test_[a-z0-9_]+_[0-9]+", n) for n in names)


def test_emission_is_deterministic(dts):
    spec, alg = dts
    plan = generate_plan(spec, Profile.SMOKE, 20, 4)
    a = emit_script(spec, plan, alg, seed=4, standalone=True)
    b = emit_script(spec, plan, alg, seed=4, standalone=True)
    assert a == b
    assert (emit_manifest(spec, plan, 4, Profile.SMOKE)
            == emit_manifest(spec, plan, 4, Profile.SMOKE))


def test_emitted_standalone_script_passes(dts, tmp_path):
    spec, alg = dts
    plan = generate_plan(spec, Profile.SMOKE, 8, 0)
    suite = emit_suite(spec, plan, alg, tmp_path, 0, Profile.SMOKE,
                       standalone=True)
    assert suite.case_count == 8
    proc = subprocess.run(
        [sys.executable, str(suite.script_path), "--json",
         str(tmp_path / "r.json")],
        capture_output=True, text=True, timeout=120)
    assert proc.returncode == 0, proc.stdout + proc.stderr
    report = json.loads((tmp_path / "r.json").read_text())
    assert report["total"] == 8 and report["passed"] == 8


# -- manifest --------------------------------------------------------------------


def test_manifest_has_all_cases(dts):
    spec, alg = dts
    plan = generate_plan(spec, Profile.SMOKE, 200, 0)
    obj = json.loads(emit_manifest(spec, plan, 0, Profile.SMOKE))
    assert len(obj["cases"]) == 200
    assert obj["operator"] == "DepthToSpaceTest"
    assert obj["op_code"] == "op_depth_to_space"
    assert obj["prng"] == "numpy-pcg64"
    assert obj["schema_version"] == 1


def test_manifest_empty_attributes_object():
    spec = parse('''
    def T : Op<"op_add"> {
      inputs = [ Tensor<index = 0, basic_type_list = [f32]>,
                 Tensor<index = 1, basic_type_list = [f32]> ];
      outputs = [ Tensor<index = 0, basic_type_list = [f32]> ];
      type_tied = true;
    }
    ''')
    plan = generate_plan(spec, Profile.SMOKE, 3, 0)
    obj = json.loads(emit_manifest(spec, plan, 0, Profile.SMOKE))
    assert all(c["attributes"] == {} for c in obj["cases"])


def test_manifest_keys_sorted(dts):
    spec, alg = dts
    plan = generate_plan(spec, Profile.SMOKE, 2, 0)
    text = emit_manifest(spec, plan, 0, Profile.SMOKE)
    assert text == json.dumps(json.loads(text), sort_keys=True, indent=2) + "\n"


def test_manifest_round_trip_regenerates_identical_tensors(corpus_specs):
    # directive + per-case seed fully determine the concrete tensors
    for name in ("DepthToSpace", "Div", "OneHot", "Squeeze"):
        spec = corpus_specs[name]
        plan = generate_plan(spec, Profile.FULL, 12, 9)
        obj = json.loads(emit_manifest(spec, plan, 9, Profile.FULL))
        rebuilt = manifest_to_plan(obj)
        assert rebuilt == plan
        for case, case2 in zip(plan, rebuilt):
            for inst, inst2 in zip(case.input_instances,
                                   case2.input_instances):
                a, b = materialize_instance(inst), materialize_instance(inst2)
                assert a.dtype == b.dtype
                assert np.array_equal(a, b)
