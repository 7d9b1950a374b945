"""Command-line front end: run, explore, check, compare and validate guest programs.

Exit codes: 0 success or pass, 1 a property failed, 2 usage, parse or
validation error, 3 the run ended in a fault or deadlock. Standard output
never carries timestamps or absolute paths; ``--timing`` writes elapsed time
to standard error.
"""

from __future__ import annotations

import argparse
import sys
import time
from pathlib import Path

from funcobj import schedulers, verify
from funcobj.export import observable_text, parse_observable_text, trace_lines
from funcobj.ir import ProgramDef
from funcobj.parse import ParseError, parse_program
from funcobj.schedulers import RoundRobin
from funcobj.validate import validate
from funcobj.values import format_value

EXIT_OK, EXIT_FAIL, EXIT_USAGE, EXIT_FAULT = 0, 1, 2, 3


class _UsageError(Exception):
    pass


def _load(path: str) -> ProgramDef:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as e:
        raise _UsageError(f"{path}: {e.strerror}") from None
    try:
        return parse_program(text)
    except ParseError as e:
        raise _UsageError("\n".join(f"{Path(path).name}:{d}" for d in e.diagnostics)) from None


def _validated(path: str, strict_oo: bool) -> ProgramDef:
    p = _load(path)
    diags = validate(p, strict_oo)
    if diags:
        raise _UsageError("\n".join(f"{Path(path).name}: {d}" for d in diags))
    return p


def _policy(args) -> schedulers.Policy:
    try:
        return schedulers.parse_policy(args.scheduler, args.seed)
    except (ValueError, OSError) as e:
        raise _UsageError(f"--scheduler: {e}") from None


def _exit_for(v: schedulers.Verdict) -> int:
    return EXIT_FAULT if v.kind in ("fault", "deadlock") else EXIT_OK


def cmd_run(args) -> int:
    p = _validated(args.program, args.strict_oo)
    r = schedulers.run(p, _policy(args), args.steps, args.strict_oo)
    print(r.verdict)
    for line in trace_lines(r.final.trace, args.trace_format, args.debug_events):
        print(line)
    if args.save_schedule:
        Path(args.save_schedule).write_text(r.schedule.dumps())
    return _exit_for(r.verdict)


def _explore(args, p: ProgramDef) -> verify.ExplorationResult:
    if args.depth < 1:
        raise _UsageError("--depth must be >= 1")
    return verify.explore(p, args.depth, args.strict_oo, prune=not args.no_prune, max_states=args.max_states)


def _trace_line(t) -> str:
    return "trace " + " ".join(map(format_value, t)) if t else "trace"


def cmd_explore(args) -> int:
    p = _validated(args.program, args.strict_oo)
    r = _explore(args, p)
    for line in verify.explore_text(r):
        print(line)
    if args.dump_traces:
        for line in sorted(_trace_line(t) for t in r.traces):
            print(line)
    return EXIT_FAIL if any(v.status == verify.FAIL for v in r.verdicts.values()) else EXIT_OK


def cmd_compare(args) -> int:
    modes = [args.against is not None, args.against_explored, args.golden is not None]
    if sum(modes) != 1:
        raise _UsageError("compare needs exactly one of --against, --against-explored, --golden")
    p = _validated(args.program, args.strict_oo)
    a = schedulers.run(p, _policy(args), args.steps, args.strict_oo)
    if args.golden is not None:
        try:
            want = parse_observable_text(Path(args.golden).read_text(encoding="utf-8"))
        except (OSError, ValueError) as e:
            raise _UsageError(f"--golden: {e}") from None
        got = tuple(map(format_value, a.observable))
        print("PASS" if got == want else "FAIL")
        return EXIT_OK if got == want else EXIT_FAIL
    if args.against is not None:
        try:
            other = schedulers.parse_policy(args.against, args.seed)
        except (ValueError, OSError) as e:
            raise _UsageError(f"--against: {e}") from None
        b = schedulers.run(p, other, args.steps, args.strict_oo)
        same = a.observable == b.observable
        print("EQUAL" if same else "DIFFERENT")
        return EXIT_OK if same else EXIT_FAIL
    if a.verdict.kind != "finished":
        print(f"INAPPLICABLE run ended {a.verdict}")
        return _exit_for(a.verdict)
    r = _explore(args, p)
    v = verify.check_refinement(a, r)
    print({verify.PASS: "PASS", verify.FAIL: "FAIL", verify.INAPPLICABLE: "INAPPLICABLE"}[v.status] + f" {v.detail}")
    return EXIT_FAIL if v.status == verify.FAIL else EXIT_OK


def check_program(path: str, args) -> tuple[list[str], bool]:
    """Rows of the standard suite for one program, and whether any row failed."""
    name = Path(path).stem
    p = _load(path)
    diags = validate(p, args.strict_oo)
    # the raw-memory rule is reported as a relations verdict, not a rejection
    blocking = [d for d in diags if d.code != "STRICT_OO_RAW_MEMORY"]
    if blocking:
        raise _UsageError("\n".join(f"{name}: {d}" for d in blocking))
    strict = args.strict_oo and not diags
    args_strict = argparse.Namespace(**{**vars(args), "strict_oo": strict})
    r = _explore(args_strict, p)
    verdicts = list(r.verdicts.values())
    verdicts.append(verify.check_refinement(schedulers.run(p, schedulers.Inline(), args.steps, strict), r))
    verdicts.append(verify.check_determinism(p, RoundRobin(1), args.steps, strict))
    report = verify.compliance_report(p, r)
    rows = [f"{name} {v}" for v in verdicts]
    rows += [f"{name} compliance {line}" for line in report.lines()]
    failed = any(v.status == verify.FAIL for v in verdicts + list(report.verdicts))
    return rows, failed


def cmd_check(args) -> int:
    if not args.programs:
        raise _UsageError("check needs at least one program")
    failed = False
    for path in args.programs:
        rows, bad = check_program(path, args)
        for row in rows:
            print(row)
        failed |= bad
    return EXIT_FAIL if failed else EXIT_OK


def cmd_validate(args) -> int:
    p = _load(args.program)
    diags = validate(p, args.strict_oo)
    for d in diags:
        print(d)
    if not diags:
        print("ok")
    return EXIT_USAGE if diags else EXIT_OK


def cmd_golden(args) -> int:
    """Write the rr:1 observable trace of each program next to it."""
    for path in args.programs:
        p = _validated(path, args.strict_oo)
        r = schedulers.run(p, RoundRobin(1), args.steps, args.strict_oo)
        Path(path).with_suffix(".golden").write_text(observable_text(r.observable))
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="funcobj", description=__doc__.splitlines()[0])
    sub = ap.add_subparsers(dest="command", required=True)

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--strict-oo", action="store_true", help="reject raw shared memory")
    common.add_argument("--steps", type=int, default=10_000, help="step limit for single runs")
    common.add_argument("--timing", action="store_true", help="print elapsed time to stderr")

    sched = argparse.ArgumentParser(add_help=False)
    sched.add_argument("--scheduler", default="inline", help="inline | rr[:q] | random[:seed] | script:FILE")
    sched.add_argument("--seed", type=int, default=None, help="seed for random (overrides random:SEED)")

    expl = argparse.ArgumentParser(add_help=False)
    expl.add_argument("--depth", type=int, default=400, help="schedule length bound")
    expl.add_argument("--max-states", type=int, default=None, help="cap on visited configurations")
    expl.add_argument("--no-prune", action="store_true", help="plain tree search without state dedup")

    r = sub.add_parser("run", parents=[common, sched], help="run one schedule")
    r.add_argument("program")
    r.add_argument("--debug-events", action="store_true", help="print every event, not only emits")
    r.add_argument("--trace-format", choices=("text", "records"), default="text")
    r.add_argument("--save-schedule", metavar="FILE", help="write the realized schedule for replay")
    r.set_defaults(func=cmd_run)

    e = sub.add_parser("explore", parents=[common, expl], help="explore all schedules up to a depth")
    e.add_argument("program")
    e.add_argument("--dump-traces", action="store_true", help="list the observable traces")
    e.set_defaults(func=cmd_explore)

    c = sub.add_parser("compare", parents=[common, sched, expl], help="compare observable traces")
    c.add_argument("program")
    c.add_argument("--against", metavar="POLICY", help="second scheduler; traces must be equal")
    c.add_argument("--against-explored", action="store_true", help="trace must be in the explored set")
    c.add_argument("--golden", metavar="FILE", help="trace must equal the golden file")
    c.set_defaults(func=cmd_compare)

    k = sub.add_parser("check", parents=[common, expl], help="run the property suite")
    k.add_argument("programs", nargs="*")
    k.add_argument("--suite", choices=("standard",), default="standard")
    k.set_defaults(func=cmd_check)

    v = sub.add_parser("validate", parents=[common], help="print static diagnostics")
    v.add_argument("program")
    v.set_defaults(func=cmd_validate)

    g = sub.add_parser("golden", parents=[common], help="regenerate rr:1 golden files")
    g.add_argument("programs", nargs="+")
    g.set_defaults(func=cmd_golden)
    return ap


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    t0 = time.perf_counter()
    try:
        code = args.func(args)
    except _UsageError as e:
        print(e, file=sys.stderr)
        code = EXIT_USAGE
    if args.timing:
        print(f"elapsed {time.perf_counter() - t0:.3f}s", file=sys.stderr)
    return code


if __name__ == "__main__":
    sys.exit(main())
