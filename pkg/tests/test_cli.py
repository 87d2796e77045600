import json
import shutil

import pytest

from oslgen import corpus_dir
from oslgen.cli import main

pytestmark = pytest.mark.filterwarnings(
    "ignore::oslgen.generate.BudgetTooSmallWarning")


def gen(out, alg_dir, *specs, profile="smoke", count=20, seed=0, extra=()):
    return main(["gen", "--profile", profile, "--alg-path", str(alg_dir),
                 "--out", str(out), "--count", str(count), "--seed",
                 str(seed), "--standalone", *extra,
                 *[str(s) for s in specs]])


def test_smoke_run_emits_script_and_manifest(tmp_path, alg_dir, capsys):
    out = tmp_path / "out"
    code = main(["gen", "--profile", "smoke", "--alg-path", str(alg_dir),
                 "--out", str(out), "--count", "200",
                 str(corpus_dir() / "DepthToSpace.osl")])
    assert code == 0
    script = out / "test_op_depth_to_space.gen.py"
    manifest = out / "test_op_depth_to_space.manifest.json"
    assert script.exists() and manifest.exists()
    obj = json.loads(manifest.read_text())
    assert len(obj["cases"]) == 200
    assert "200 cases" in capsys.readouterr().out


def test_rerun_is_byte_identical(tmp_path, alg_dir):
    out = tmp_path / "out"
    spec = corpus_dir() / "DepthToSpace.osl"
    assert gen(out, alg_dir, spec, profile="full", count=50, seed=7) == 0
    first = {p.name: p.read_bytes() for p in out.iterdir()}
    assert gen(out, alg_dir, spec, profile="full", count=50, seed=7) == 0
    second = {p.name: p.read_bytes() for p in out.iterdir()}
    assert first == second


def test_different_seed_changes_manifest(tmp_path, alg_dir):
    out_a, out_b = tmp_path / "a", tmp_path / "b"
    spec = corpus_dir() / "DepthToSpace.osl"
    gen(out_a, alg_dir, spec, seed=1)
    gen(out_b, alg_dir, spec, seed=2)
    name = "test_op_depth_to_space.manifest.json"
    assert (out_a / name).read_bytes() != (out_b / name).read_bytes()


def test_malformed_spec_among_good_ones(tmp_path, alg_dir):
    ok = corpus_dir() / "DepthToSpace.osl"
    bad = tmp_path / "Broken.osl"
    bad.write_text("def Broken : Op<oops> {}")
    other = tmp_path / "Second.osl"
    shutil.copyfile(ok, other)
    out = tmp_path / "out"
    code = gen(out, alg_dir, ok, bad, other)
    assert code == 1
    assert (out / "test_op_depth_to_space.gen.py").exists()


def test_missing_algorithm_file_exit_code(tmp_path, alg_dir):
    code = gen(tmp_path / "out", alg_dir, corpus_dir() / "Add.osl")
    assert code == 2


def test_unreadable_spec_is_io_failure(tmp_path, alg_dir):
    code = gen(tmp_path / "out", alg_dir, tmp_path / "NoSuch.osl")
    assert code == 3


def test_legacy_tblgen_flags(tmp_path, alg_dir):
    out = tmp_path / "out"
    code = main(["--gen-onnx-smoke-tests",
                 str(corpus_dir() / "DepthToSpace.osl"),
                 "-I", str(alg_dir), "-o", str(out)])
    assert code == 0
    obj = json.loads(
        (out / "test_op_depth_to_space.manifest.json").read_text())
    assert obj["profile"] == "smoke"
    assert len(obj["cases"]) == 200  # default budget


def test_full_mode_legacy_flag(tmp_path, alg_dir):
    out = tmp_path / "out"
    code = main(["--gen-onnx-tests", str(corpus_dir() / "DepthToSpace.osl"),
                 "-I", str(alg_dir), "-o", str(out), "--count", "30"])
    assert code == 0
    obj = json.loads(
        (out / "test_op_depth_to_space.manifest.json").read_text())
    assert obj["profile"] == "full"


def test_no_manifest_flag(tmp_path, alg_dir):
    out = tmp_path / "out"
    code = main(["gen", "--profile", "smoke", "--alg-path", str(alg_dir),
                 "--out", str(out), "--count", "10", "--no-manifest",
                 str(corpus_dir() / "DepthToSpace.osl")])
    assert code == 0
    assert not (out / "test_op_depth_to_space.manifest.json").exists()
