"""Acceptance suite: one test per release criterion, one PASS line each.

Run with ``pytest tests/test_acceptance.py -v -s``. Everything here works at
the manifest level; no suite execution harness is required.
"""

import json
import random
import time
from collections import Counter

from oslgen import corpus_dir
from oslgen.cli import main
from oslgen.constraints import CandidateAssignment, violations
from oslgen.emit import emit_manifest, manifest_to_plan
from oslgen.generate import (
    allocate_budget,
    applicable_boundary_categories,
    count_type_combinations,
    generate_plan,
)
from oslgen.model import (
    BoundaryCategory,
    DataType,
    ImplicitProperty,
    OperatorSpec,
    Profile,
    TensorSpec,
)
from oslgen.parser import ParseError, parse, parse_file

BOUNDARY_SLACK = 20  # boundary_fraction (10%) of the 200-case budget


def _ok(line):
    print(f"PASS: {line}")


def test_depth_to_space_end_to_end():
    started = time.perf_counter()
    spec = parse_file(corpus_dir() / "DepthToSpace.osl")
    plan = generate_plan(spec, Profile.SMOKE, 200, 0)
    assert len(plan) == 200
    blocksizes = {dict(c.attribute_values)["blocksize"] for c in plan}
    assert len(blocksizes) == 1
    bs = blocksizes.pop()
    assert 1 <= bs <= 4
    for case in plan:
        (inst,) = case.input_instances
        assert len(inst.shape) == 4
        assert inst.shape[1] % (bs * bs) == 0
    elapsed = time.perf_counter() - started
    assert elapsed < 5.0
    _ok(f"DepthToSpace end-to-end: 200 cases, rank 4, blocksize {bs} "
        f"fixed, channels divisible by {bs * bs} ({elapsed:.2f}s)")


def _alloc_spec():
    return OperatorSpec(
        op_name="Alloc", op_code="op_add",
        inputs=(TensorSpec(index=0,
                           basic_type_list=(DataType.F32, DataType.F64)),
                TensorSpec(index=1,
                           basic_type_list=(DataType.I8, DataType.I32,
                                            DataType.I64))),
        outputs=(TensorSpec(index=0, basic_type_list=(DataType.F32,)),))


def test_type_combination_allocation():
    spec = _alloc_spec()
    assert count_type_combinations(spec) == 6
    sixty = allocate_budget(spec, 60)
    assert [sixty.combination_quota[c] for c in sixty.combo_order] == [10] * 6
    two_hundred = allocate_budget(spec, 200)
    quotas = [two_hundred.combination_quota[c]
              for c in two_hundred.combo_order]
    assert sorted(quotas) == [33, 33, 33, 33, 34, 34]
    # The emitted plan realizes the allocation exactly.
    plan = generate_plan(spec, Profile.SMOKE, 60, 0)
    counts = Counter((c.input_instances[0].dtype, c.input_instances[1].dtype)
                     for c in plan)
    assert sorted(counts.values()) == [10] * 6
    _ok("allocation: 60/6 -> 10 each; 200/6 -> 33 each plus two 34s; "
        "plan counts exact")


def test_rank_quota():
    spec = OperatorSpec(
        op_name="Rank", op_code="op_relu",
        inputs=(TensorSpec(index=0, basic_type_list=(DataType.F32,),
                           min_dim=1, max_dim=4),),
        outputs=(TensorSpec(index=0, basic_type_list=(DataType.F32,),
                            min_dim=1, max_dim=4),))
    assert allocate_budget(spec, 200).rank_quota[0] == 50
    plan = generate_plan(spec, Profile.SMOKE, 200, 0)
    counts = Counter(len(c.input_instances[0].shape) for c in plan)
    for rank in (1, 2, 3, 4):
        assert counts[rank] >= 50 - BOUNDARY_SLACK, counts
    _ok(f"rank quota: occurrences {dict(sorted(counts.items()))} all within "
        f"quota 50 minus boundary slack {BOUNDARY_SLACK}")


def test_boundary_coverage():
    checked = 0
    for path in sorted(corpus_dir().glob("*.osl")):
        spec = parse_file(path)
        for profile in (Profile.SMOKE, Profile.FULL):
            plan = generate_plan(spec, profile, 200, 0)
            seen = {c.boundary_category for c in plan
                    if c.boundary_category is not None}
            expected = set(applicable_boundary_categories(spec, profile))
            missing = expected - seen
            assert not missing, (path.name, profile.value, missing)
            if ImplicitProperty.MULTIDIRECTIONAL_BROADCAST in spec.properties:
                assert BoundaryCategory.DIM_LENGTH_ONE in seen, path.name
            checked += 1
    _ok(f"boundary coverage: every applicable category hit in {checked} "
        "spec/profile plans, length-1 dims present for broadcast operators")


def test_determinism(tmp_path, alg_dir):
    spec_path = corpus_dir() / "DepthToSpace.osl"
    outs = []
    for attempt in ("a", "b"):
        out = tmp_path / attempt
        code = main(["gen", "--profile", "full", "--alg-path", str(alg_dir),
                     "--out", str(out), "--count", "80", "--seed", "11",
                     "--standalone", str(spec_path)])
        assert code == 0
        outs.append({p.name: p.read_bytes() for p in out.iterdir()})
    assert outs[0] == outs[1]
    other = tmp_path / "c"
    main(["gen", "--profile", "full", "--alg-path", str(alg_dir), "--out",
          str(other), "--count", "80", "--seed", "12", "--standalone",
          str(spec_path)])
    name = "test_op_depth_to_space.manifest.json"
    assert outs[0][name] != (other / name).read_bytes()
    _ok("determinism: identical runs byte-identical, different seed "
        "differs")


def _mutate(text, rng):
    op = rng.randrange(5)
    if not text:
        return "x"
    if op == 0:  # flip one character
        i = rng.randrange(len(text))
        return text[:i] + chr(rng.randrange(1, 128)) + text[i + 1:]
    if op == 1:  # delete a span
        i = rng.randrange(len(text))
        j = min(len(text), i + rng.randrange(1, 40))
        return text[:i] + text[j:]
    if op == 2:  # insert noise
        i = rng.randrange(len(text))
        noise = "".join(chr(rng.randrange(1, 128))
                        for _ in range(rng.randrange(1, 12)))
        return text[:i] + noise + text[i:]
    if op == 3:  # duplicate a span
        i = rng.randrange(len(text))
        j = min(len(text), i + rng.randrange(1, 60))
        return text[:i] + text[i:j] + text[i:]
    return text[:rng.randrange(len(text))]  # truncate


def test_parser_robustness_fuzz():
    corpus = [p.read_text() for p in sorted(corpus_dir().glob("*.osl"))]
    rng = random.Random(0xF00D)
    started = time.perf_counter()
    outcomes = Counter()
    for i in range(10_000):
        text = rng.choice(corpus)
        for _ in range(rng.randrange(1, 4)):
            text = _mutate(text, rng)
        try:
            parse(text)
            outcomes["parsed"] += 1
        except ParseError:
            outcomes["parse_error"] += 1
        # any other exception propagates and fails the criterion
    elapsed = time.perf_counter() - started
    assert elapsed < 60.0
    assert outcomes["parsed"] + outcomes["parse_error"] == 10_000
    _ok(f"parser robustness: 10000 mutations, {outcomes['parse_error']} "
        f"clean errors, {outcomes['parsed']} still parseable, 0 crashes "
        f"({elapsed:.1f}s)")


def test_generated_validity_from_manifests():
    checked = 0
    for path in sorted(corpus_dir().glob("*.osl")):
        spec = parse_file(path)
        position_of = {t.index: i for i, t in enumerate(spec.inputs)}
        for profile in (Profile.SMOKE, Profile.FULL):
            plan = generate_plan(spec, profile, 200, 0)
            manifest = json.loads(emit_manifest(spec, plan, 0, profile))
            for case in manifest_to_plan(manifest):
                cand = CandidateAssignment(
                    attribute_values=dict(case.attribute_values),
                    input_shapes=[i.shape for i in case.input_instances],
                    input_dtypes=[i.dtype for i in case.input_instances],
                    omitted_inputs=set(case.omitted_optional_inputs),
                    spec_indices=tuple(position_of[i.index]
                                       for i in case.input_instances),
                    range_overrides={
                        k: inst.directive.ranges
                        for k, inst in enumerate(case.input_instances)
                        if inst.directive.ranges is not None},
                )
                assert violations(spec, cand) == [], (path.name, case.name)
                checked += 1
    assert checked == 10 * 2 * 200
    _ok(f"validity: 0 constraint violations across {checked} manifest cases")
