"""Command-line entry point: parse specs, generate plans, emit suites.

Usage:

    oslgen gen --profile smoke --alg-path ALGS --out OUT [options] SPEC...

The tblgen-style flags are accepted as aliases for compatibility with the
original invocation shape:

    oslgen --gen-onnx-smoke-tests SPEC -I ALGS -o OUT
    oslgen --gen-onnx-tests SPEC -I ALGS -o OUT

Exit codes: 0 success, 1 parse/validation failure, 2 algorithm-file
failure, 3 I/O failure. All specs are processed even if one fails.
"""

from __future__ import annotations

import argparse
import sys
import warnings
from dataclasses import dataclass, field
from pathlib import Path

from .emit import AlgorithmError, emit_suite, load_algorithm
from .generate import DEFAULT_COUNT, InvalidSpecError, generate_plan
from .model import Profile, validate_spec
from .parser import ParseError, parse_file

EXIT_PARSE = 1
EXIT_ALGORITHM = 2
EXIT_IO = 3


@dataclass
class CliConfig:
    spec_paths: list[Path]
    alg_path: Path
    out_path: Path
    profile: Profile = Profile.SMOKE
    count: int = DEFAULT_COUNT
    seed: int = 0
    emit_manifest: bool = True
    standalone_scripts: bool = False


@dataclass
class RunReport:
    processed: int = 0
    cases_emitted: int = 0
    failures: list[tuple[Path, int, str]] = field(default_factory=list)
    warnings: list[str] = field(default_factory=list)

    @property
    def exit_code(self) -> int:
        return max((code for _, code, _ in self.failures), default=0)


def _translate_legacy(argv: list[str]) -> list[str]:
    """Rewrite tblgen-style flags into the gen subcommand form."""
    if "--gen-onnx-smoke-tests" not in argv and "--gen-onnx-tests" not in argv:
        return argv
    out: list[str] = ["gen"]
    it = iter(argv)
    for arg in it:
        if arg == "--gen-onnx-smoke-tests":
            out += ["--profile", "smoke"]
        elif arg == "--gen-onnx-tests":
            out += ["--profile", "full"]
        elif arg == "-I":
            out += ["--alg-path", next(it, "")]
        elif arg == "-o":
            out += ["--out", next(it, "")]
        else:
            out.append(arg)
    return out


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="oslgen",
        description="Generate operator conformance test suites from OSL "
                    "specifications.")
    sub = parser.add_subparsers(dest="command", required=True)
    gen = sub.add_parser("gen", help="generate test suites")
    gen.add_argument("specs", nargs="+", metavar="SPEC",
                     help="OSL specification files")
    gen.add_argument("--profile", choices=["smoke", "full"], default="smoke",
                     help="smoke fixes attributes once; full randomizes them")
    gen.add_argument("--alg-path", required=True,
                     help="directory holding <Operator>.algorithm files")
    gen.add_argument("--out", required=True, help="output directory")
    gen.add_argument("--count", type=int, default=DEFAULT_COUNT,
                     help=f"tests per operator (default {DEFAULT_COUNT})")
    gen.add_argument("--seed", type=int, default=0,
                     help="generation seed (default 0)")
    gen.add_argument("--standalone", action="store_true",
                     help="emit self-contained scripts instead of "
                          "ONNX-harness scripts")
    gen.add_argument("--no-manifest", action="store_true",
                     help="skip the JSON manifest")
    return parser


def run(config: CliConfig) -> RunReport:
    report = RunReport()
    for spec_path in config.spec_paths:
        label = str(spec_path)
        try:
            spec = parse_file(spec_path)
        except ParseError as exc:
            report.failures.append((spec_path, EXIT_PARSE, str(exc)))
            print(f"{label}: parse error: {exc}")
            continue
        except OSError as exc:
            report.failures.append((spec_path, EXIT_IO, str(exc)))
            print(f"{label}: cannot read: {exc}")
            continue
        diagnostics = validate_spec(spec)
        if diagnostics:
            msg = "; ".join(str(d) for d in diagnostics)
            report.failures.append((spec_path, EXIT_PARSE, msg))
            print(f"{label}: invalid specification: {msg}")
            continue
        alg_file = config.alg_path / f"{spec.onnx_name}.algorithm"
        try:
            alg = load_algorithm(
                alg_file, spec.onnx_name,
                expected_arity=len(spec.inputs) + len(spec.attributes))
        except (AlgorithmError, OSError) as exc:
            report.failures.append((spec_path, EXIT_ALGORITHM, str(exc)))
            print(f"{label}: algorithm error: {exc}")
            continue
        try:
            with warnings.catch_warnings(record=True) as caught:
                warnings.simplefilter("always")
                plan = generate_plan(spec, config.profile, config.count,
                                     config.seed)
            for w in caught:
                report.warnings.append(str(w.message))
                print(f"{label}: warning: {w.message}")
        except InvalidSpecError as exc:
            report.failures.append((spec_path, EXIT_PARSE, str(exc)))
            print(f"{label}: invalid specification: {exc}")
            continue
        try:
            suite = emit_suite(spec, plan, alg, config.out_path, config.seed,
                               config.profile,
                               standalone=config.standalone_scripts,
                               write_manifest=config.emit_manifest)
        except OSError as exc:
            report.failures.append((spec_path, EXIT_IO, str(exc)))
            print(f"{label}: cannot write suite: {exc}")
            continue
        report.processed += 1
        report.cases_emitted += suite.case_count
        print(f"{label}: {suite.case_count} cases -> {suite.script_path}")
    print(f"processed {report.processed} operator(s), "
          f"{report.cases_emitted} cases emitted, "
          f"{len(report.warnings)} warning(s), "
          f"{len(report.failures)} failure(s)")
    return report


def main(argv: list[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    args = build_parser().parse_args(_translate_legacy(argv))
    config = CliConfig(
        spec_paths=[Path(p) for p in args.specs],
        alg_path=Path(args.alg_path),
        out_path=Path(args.out),
        profile=Profile(args.profile),
        count=args.count,
        seed=args.seed,
        emit_manifest=not args.no_manifest,
        standalone_scripts=args.standalone,
    )
    if config.count < 1:
        print("count must be at least 1")
        return EXIT_PARSE
    return run(config).exit_code


if __name__ == "__main__":
    sys.exit(main())
