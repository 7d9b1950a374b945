"""Explore every bundled program and print one summary row per program.

    python scripts/corpus_report.py [--depth 400] [--strict-oo]
"""

from __future__ import annotations

import argparse
import time

from funcobj import corpus, schedulers, verify
from funcobj.validate import validate


def row(name: str, depth: int, strict: bool) -> list[str]:
    p = corpus.load(name)
    strict = strict and not validate(p, strict_oo=True)
    t0 = time.perf_counter()
    r = verify.explore(p, depth, strict_oo=strict, prune=True)
    dt = time.perf_counter() - t0
    fails = [v.name for v in r.verdicts.values() if v.status == verify.FAIL]
    inline = schedulers.run(p, schedulers.Inline()).verdict.kind
    return [
        name,
        str(r.states_visited),
        str(r.transitions),
        str(len(r.traces)),
        "yes" if r.truncated else "no",
        inline,
        ",".join(fails) or "-",
        f"{dt:.2f}",
    ]


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--depth", type=int, default=400)
    ap.add_argument("--strict-oo", action="store_true")
    args = ap.parse_args()
    head = ["program", "states", "edges", "traces", "truncated", "inline", "failing", "secs"]
    rows = [head] + [row(n, args.depth, args.strict_oo) for n in corpus.names()]
    widths = [max(len(r[k]) for r in rows) for k in range(len(head))]
    for r in rows:
        print("  ".join(cell.ljust(w) for cell, w in zip(r, widths)).rstrip())


if __name__ == "__main__":
    main()
