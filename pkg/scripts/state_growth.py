"""Visited states against the depth bound, with and without state deduplication.

The plain tree search is only run on programs small enough for it.

    python scripts/state_growth.py [program ...]
"""

from __future__ import annotations

import sys

from funcobj import corpus, verify

DEFAULT = ["spawn2", "emit2x2", "emit3x1", "lostupdate", "counter_serialized"]
DEPTHS = [4, 8, 12, 16, 24, 32, 48]
TREE_LIMIT = 200_000


def main(names: list[str]) -> None:
    print("program              depth  pruned  traces  tree")
    for name in names:
        p = corpus.load(name)
        tree_ok = True
        for d in DEPTHS:
            pruned = verify.explore(p, d, prune=True, checks=False)
            tree = "-"
            if tree_ok:
                t = verify.explore(p, d, max_states=TREE_LIMIT, checks=False)
                tree_ok = t.states_visited < TREE_LIMIT
                tree = str(t.states_visited) if tree_ok else f">{TREE_LIMIT}"
                assert not tree_ok or t.traces == pruned.traces
            print(f"{name:20} {d:5}  {pruned.states_visited:6}  {len(pruned.traces):6}  {tree}")
            if not pruned.truncated:
                break


if __name__ == "__main__":
    main(sys.argv[1:] or DEFAULT)
