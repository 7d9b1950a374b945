from __future__ import annotations

from itertools import permutations

import pytest
from hypothesis import example, given, settings
from hypothesis import strategies as st

from funcobj import core, corpus, schedulers, verify
from funcobj.records import Event
from funcobj.schedulers import Inline, RoundRobin, Schedule, Verdict
from funcobj.values import Ref, Sym

from programs import emitters_source, program, worker_programs


def merges(seqs: list[tuple]) -> set[tuple]:
    """Every interleaving of the sequences that keeps each one in order."""
    seqs = [s for s in seqs if s]
    if not seqs:
        return {()}
    out = set()
    for k, s in enumerate(seqs):
        rest = seqs[:k] + [s[1:]] + seqs[k + 1 :]
        out |= {(s[0],) + m for m in merges(rest)}
    return out


def naive_traces(p, depth: int) -> set[tuple]:
    """Observable traces of all maximal schedules, by plain recursion over step."""
    out = set()

    def go(c, d):
        ready = core.runnable(c)
        if not ready or d == depth:
            out.add(core.observable_trace(c))
            return
        for i in ready:
            go(core.step(c, i), d + 1)

    go(core.init(p), 0)
    return out


def test_merge_oracle_itself():
    assert merges([(1, 2), (3,)]) == {(1, 2, 3), (1, 3, 2), (3, 1, 2)}
    assert len(merges([(1, 2), (3, 4)])) == 6
    assert merges([(1,), (2,), (3,)]) == set(permutations((1, 2, 3)))


@settings(max_examples=25, deadline=None)
@given(st.lists(st.integers(0, 3), min_size=1, max_size=3).filter(lambda c: sum(c) <= 7))
@example([3, 3, 3])
def test_explore_matches_merge_oracle(counts):
    p = program(emitters_source(counts))
    want = merges([tuple(k * 10 + j + 1 for j in range(n)) for k, n in enumerate(counts)])
    r = verify.explore(p, 200, prune=True)
    assert not r.truncated and r.traces == want


@settings(max_examples=15, deadline=None)
@given(st.lists(st.integers(0, 2), min_size=1, max_size=2))
def test_unpruned_matches_merge_oracle(counts):
    p = program(emitters_source(counts))
    want = merges([tuple(k * 10 + j + 1 for j in range(n)) for k, n in enumerate(counts)])
    assert verify.explore(p, 200).traces == want


def test_emit2x2_and_emit3x1():
    assert len(verify.explore(corpus.load("emit2x2"), 200, prune=True).traces) == 6
    assert verify.explore(corpus.load("emit3x1"), 200, prune=True).traces == set(permutations((1, 2, 3)))


@settings(max_examples=30, deadline=None)
@given(worker_programs(max_workers=2, max_ops=3))
def test_prune_preserves_traces_and_verdicts(src):
    p = program(src)
    plain = verify.explore(p, 40)
    pruned = verify.explore(p, 40, prune=True)
    assert pruned.traces == plain.traces == naive_traces(p, 40)
    assert {k: v.status for k, v in pruned.verdicts.items()} == {k: v.status for k, v in plain.verdicts.items()}
    assert pruned.states_visited <= plain.states_visited
    assert pruned.truncated == plain.truncated


@settings(max_examples=40, deadline=None)
@given(worker_programs(max_workers=2, max_ops=3), st.integers(3, 12))
def test_depth_bound_with_prune(src, depth):
    p = program(src)
    assert verify.explore(p, depth, prune=True).traces == naive_traces(p, depth)


@settings(max_examples=40, deadline=None)
@given(worker_programs(max_workers=2, max_ops=3))
def test_witnesses_replay(src):
    p = program(src)
    r = verify.explore(p, 40, prune=True)
    for v in r.verdicts.values():
        if v.witness is None:
            continue
        rerun = schedulers.replay(p, v.witness)
        assert len(rerun.schedule) == len(v.witness)
        if v.name == "observable-determinism":
            assert rerun.observable in r.traces


@settings(max_examples=40, deadline=None)
@given(worker_programs(max_workers=2, max_ops=3), st.sampled_from([Inline(), RoundRobin(1), RoundRobin(2)]))
def test_run_trace_is_explored(src, policy):
    p = program(src)
    run = schedulers.run(p, policy, 40)
    r = verify.explore(p, 40, prune=True)
    if run.verdict.kind != "step_limit":
        assert run.observable in r.traces or run.verdict.kind == "deadlock"


def test_p1_and_spawn2_counts():
    r = verify.explore(corpus.load("p1"), 50)
    assert (r.full_runs, len(r.traces), r.truncated) == (1, 1, False)
    assert r.verdicts["observable-determinism"].passed
    r = verify.explore(corpus.load("spawn2"), 50)
    assert r.traces == {(1, 2), (2, 1)} and r.full_runs == len(r.runs)


def test_truncation():
    r = verify.explore(corpus.load("spawn2"), 3)
    assert r.truncated and r.full_runs == 0 and all(leaf.cut for leaf in r.runs)
    r = verify.explore(corpus.load("spawn2"), 50, max_states=10)
    assert r.truncated and r.states_visited == 10


def test_depth_must_be_positive():
    with pytest.raises(ValueError):
        verify.explore(corpus.load("p1"), 0)


def test_lostupdate_determinism_fails_with_replayable_witness():
    p = corpus.load("lostupdate")
    r = verify.explore(p, 400, prune=True)
    assert {(1,), (2,)} <= r.traces
    v = r.verdicts["observable-determinism"]
    assert v.status == verify.FAIL
    assert schedulers.replay(p, v.witness).verdict.kind == "finished"


def test_mutex_checker_on_synthetic_log():
    lock = 5
    ev = [
        Event(0, "Spawn", (0, lock, "mech:lock")),
        Event(1, "Recv", (1, Sym("GRANT"), lock)),
        Event(2, "Recv", (2, Sym("GRANT"), lock)),
    ]
    assert verify.mutex_violation(ev) is ev[2]
    rel = Event(2, "Send", (1, lock, verify.Pair(Sym("REL"), Ref(1))))
    assert verify.mutex_violation([ev[0], ev[1], rel, Event(3, "Recv", (2, Sym("GRANT"), lock))]) is None


def test_mutex_monitor_flags_second_holder():
    from types import SimpleNamespace

    from funcobj.mechanisms import make_mechanism

    cfg = SimpleNamespace(mechanisms={5: make_mechanism(5, "lock")})
    mon, prob = verify._Monitor().advance([Event(1, "Recv", (1, Sym("GRANT"), 5))], cfg)
    assert prob is None and mon.holders == {(5, 1)}
    _, prob = mon.advance([Event(2, "Recv", (2, Sym("GRANT"), 5))], cfg)
    assert "two holders" in prob


def test_composition_checker_on_synthetic_log():
    ev = [Event(0, "Spawn", (0, 3, "mech:lock")), Event(1, "Cell", (3, "write", 1, 1), actor=3)]
    assert "Cell" in verify.composition_problem(ev)


def test_message_flow_checker_on_synthetic_log():
    ok = [Event(0, "Send", (0, 1, 4)), Event(1, "Recv", (1, 4, 0))]
    assert verify.message_flow_problem(ok) is None
    assert verify.message_flow_problem([Event(1, "Recv", (1, 4, 0))]) is not None


def test_inapplicable_checks():
    r = verify.explore(corpus.load("p1"), 50)
    for name in ("mutex", "channel-integrity", "composition", "serialization", "encapsulation"):
        assert r.verdicts[name].status == verify.INAPPLICABLE


def test_refinement_verdicts():
    p = corpus.load("spawn2")
    r = verify.explore(p, 200, prune=True)
    assert verify.check_refinement(schedulers.run(p, Inline()), r).passed
    pp = corpus.load("pingpong")
    v = verify.check_refinement(schedulers.run(pp, Inline()), verify.explore(pp, 200, prune=True))
    assert v.status == verify.INAPPLICABLE
    fake = schedulers.RunResult(Verdict("finished"), core.init(corpus.load("p1")), Schedule())
    assert verify.check_refinement(fake, r).status == verify.FAIL


def test_determinism_check():
    p = corpus.load("spawn2")
    assert verify.check_determinism(p, RoundRobin(1)).passed
    bad = verify.check_determinism(p, RoundRobin(1), replay_schedule=[0, 5])
    assert bad.status == verify.FAIL and bad.detail == "SCRIPT_CHOICE_NOT_RUNNABLE"


def test_compliance_object_corpus_strict():
    for name in ("counter_serialized", "account", "asyncnotify", "pair_twice_obj"):
        p = corpus.load(name)
        rep = verify.compliance_report(p, verify.explore(p, 400, strict_oo=True, prune=True))
        assert rep.passed, rep.lines()
        assert len(rep.not_modeled) == 5


def test_compliance_lostupdate_relations_fail():
    p = corpus.load("lostupdate")
    rep = verify.compliance_report(p, verify.explore(p, 400, prune=True))
    assert rep["relations"].status == verify.FAIL
    assert "STRICT_OO_RAW_MEMORY@incr:3" in rep["relations"].detail


def test_explore_text():
    lines = verify.explore_text(verify.explore(corpus.load("p1"), 50))
    assert lines[:4] == ["full_runs=1", "traces=1", "states_visited=4", "truncated=false"]
