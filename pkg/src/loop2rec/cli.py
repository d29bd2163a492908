"""Command-line front end.

Subcommands: transform, run, diff, analyze, fuzz. Exit codes form a contract
so scripts can tell failure classes apart:

    0  success / equivalent
    1  semantic mismatch reported by diff or fuzz
    2  parse or semantic-check error (also unsupported constructs)
    3  I/O error
    4  step budget exceeded
    5  runtime error with a source location
"""

from __future__ import annotations

import argparse
import json
import sys
from typing import Optional

from .analysis import UnsupportedConstruct
from .checker import check_semantics
from .generator import GenConfig
from .interp import DEFAULT_BUDGET, InterpError, StepBudgetExceeded, run
from .parser import ParseError, parse
from .printer import pretty_print
from .transform import TransformOptions, analyze_program, transform_program
from .verify import diff_run, fuzz_campaign

EXIT_OK = 0
EXIT_MISMATCH = 1
EXIT_FRONTEND = 2
EXIT_IO = 3
EXIT_BUDGET = 4
EXIT_RUNTIME = 5


def _load(path: str):
    """Parse and check a source file; (program, None) or (None, exit code)."""
    try:
        with open(path, "r", encoding="utf-8") as f:
            text = f.read()
    except OSError as e:
        print(f"{path}: {e.strerror or e}", file=sys.stderr)
        return None, EXIT_IO
    try:
        program = parse(text)
    except ParseError as e:
        print(f"{path}:{e.line}:{e.col}: expected {e.expected}, found {e.found}",
              file=sys.stderr)
        return None, EXIT_FRONTEND
    errors = check_semantics(program)
    if errors:
        for err in errors:
            print(f"{path}:{err}", file=sys.stderr)
        return None, EXIT_FRONTEND
    return program, None


def _write_out(text: str, out: Optional[str]) -> int:
    if out is None:
        sys.stdout.write(text)
        return EXIT_OK
    try:
        with open(out, "w", encoding="utf-8") as f:
            f.write(text)
    except OSError as e:
        print(f"{out}: {e.strerror or e}", file=sys.stderr)
        return EXIT_IO
    return EXIT_OK


def _analysis_json(program) -> str:
    rows = []
    for loop_id, kind, method, a in analyze_program(program):
        rows.append({
            "loop_id": loop_id,
            "method": method,
            "kind": kind,
            "params": [[p.name, str(p.type)] for p in a.params],
            "modified": [[p.name, str(p.type)] for p in a.modified],
            "liveAfter": [[p.name, str(p.type)] for p in a.live_after],
            "packing": a.packing.value,
            "loopMethodName": a.loop_method_name,
            "resultVarName": a.result_var_name,
        })
    return json.dumps(rows, indent=2)


def cmd_transform(args) -> int:
    import os

    if args.output is not None and os.path.exists(args.output) \
            and os.path.samefile(args.output, args.file):
        print("refusing to overwrite the input file in place", file=sys.stderr)
        return EXIT_IO
    program, code = _load(args.file)
    if program is None:
        return code
    try:
        if args.dump_analysis:
            print(_analysis_json(program), file=sys.stderr)
        result = transform_program(program, TransformOptions(optimize=not args.no_optimize))
    except UnsupportedConstruct as e:
        print(f"{args.file}:{e}", file=sys.stderr)
        return EXIT_FRONTEND
    text = pretty_print(result.program)
    if args.verify:
        try:
            reparsed = parse(text)
        except ParseError as e:
            print(f"<transformed>:{e.line}:{e.col}: output does not re-parse: "
                  f"expected {e.expected}, found {e.found}", file=sys.stderr)
            return EXIT_FRONTEND
        errors = check_semantics(reparsed)
        if errors:
            for err in errors:
                print(f"<transformed>:{err}", file=sys.stderr)
            return EXIT_FRONTEND
    return _write_out(text, args.output)


def cmd_run(args) -> int:
    program, code = _load(args.file)
    if program is None:
        return code
    tracer = None
    if args.trace:
        def tracer(rule, loc, depth):
            where = str(loc) if loc else "?"
            print(f"{rule} {where} depth={depth}", file=sys.stderr)
    try:
        trace = run(program, budget=args.budget, tracer=tracer)
    except StepBudgetExceeded as e:
        print(f"{args.file}:{e}", file=sys.stderr)
        return EXIT_BUDGET
    except InterpError as e:
        print(f"{args.file}:{e}", file=sys.stderr)
        return EXIT_RUNTIME
    for line in trace.prints:
        print(line)
    return EXIT_OK


def cmd_diff(args) -> int:
    program, code = _load(args.file)
    if program is None:
        return code
    try:
        report = diff_run(program, TransformOptions(optimize=not args.no_optimize),
                          budget=args.budget)
    except UnsupportedConstruct as e:
        print(f"{args.file}:{e}", file=sys.stderr)
        return EXIT_FRONTEND
    if args.json:
        print(json.dumps({
            "verdict": report.verdict,
            "detail": report.detail,
            "counters": report.counters,
        }, indent=2))
    elif report.equivalent:
        print("equivalent")
    else:
        print(f"mismatch: {report.detail}")
    return EXIT_OK if report.equivalent else EXIT_MISMATCH


def cmd_analyze(args) -> int:
    program, code = _load(args.file)
    if program is None:
        return code
    try:
        print(_analysis_json(program))
    except UnsupportedConstruct as e:
        print(f"{args.file}:{e}", file=sys.stderr)
        return EXIT_FRONTEND
    return EXIT_OK


def cmd_fuzz(args) -> int:
    summary = fuzz_campaign(args.count, GenConfig(seed=args.seed), budget=args.budget)
    if args.json:
        print(summary.to_json())
    else:
        print(f"{summary.equivalent}/{summary.total} equivalent, "
              f"tail_ok={summary.tail_ok}, iter_call_ok={summary.iter_call_ok}, "
              f"budget_exceedances={summary.budget_exceedances}")
        for seed, detail in summary.mismatches:
            print(f"  seed {seed}: {detail}")
    return EXIT_OK if summary.ok else EXIT_MISMATCH


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="loop2rec",
        description="Rewrite loops into tail-recursive methods and check the "
                    "rewrite by differential execution.")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("transform", help="rewrite every loop in a .mj file")
    p.add_argument("file")
    p.add_argument("-o", "--output", default=None, help="write here instead of stdout")
    p.add_argument("--no-optimize", action="store_true",
                   help="always return an Object[] of all parameters")
    p.add_argument("--verify", action="store_true",
                   help="re-parse and re-check the output before writing it")
    p.add_argument("--dump-analysis", action="store_true",
                   help="print per-loop analysis JSON to stderr")
    p.set_defaults(func=cmd_transform)

    p = sub.add_parser("run", help="execute a .mj file")
    p.add_argument("file")
    p.add_argument("--budget", type=int, default=DEFAULT_BUDGET)
    p.add_argument("--trace", action="store_true",
                   help="log one line per rule application to stderr")
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("diff", help="run original and transformed side by side")
    p.add_argument("file")
    p.add_argument("--budget", type=int, default=DEFAULT_BUDGET)
    p.add_argument("--no-optimize", action="store_true")
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_diff)

    p = sub.add_parser("analyze", help="dump per-loop analysis as JSON")
    p.add_argument("file")
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("fuzz", help="differential campaign over generated programs")
    p.add_argument("-n", "--count", type=int, default=100)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--budget", type=int, default=DEFAULT_BUDGET)
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_fuzz)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if getattr(args, "budget", 1) <= 0:
        print("budget must be positive", file=sys.stderr)
        return EXIT_FRONTEND
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
