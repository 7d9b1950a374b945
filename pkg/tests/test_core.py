from __future__ import annotations

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from funcobj import core, corpus, schedulers
from funcobj.core import StepError
from funcobj.parse import parse_program
from funcobj.records import Envelope
from funcobj.validate import ValidationError
from funcobj.values import UNIT, Pair, Ref

from programs import program, worker_programs


def _walk(c, data, limit=60):
    """Yield (before, chosen, after) along a hypothesis-chosen path."""
    for _ in range(limit):
        ready = core.runnable(c)
        if not ready:
            return
        i = data.draw(st.sampled_from(ready))
        after = core.step(c, i)
        yield c, i, after
        c = after


def test_init_p1():
    c = core.init(corpus.load("p1"))
    assert list(c.instances) == [0] and c.instances[0].ip == 0
    assert c.trace == () and c.step_count == 0 and c.next_id == 1
    assert core.runnable(c) == [0]


def test_init_statuschan_has_no_mechanism_yet():
    c = core.init(corpus.load("statuschan"))
    assert len(c.instances) == 1 and c.mechanisms == {}


def test_init_rejects_invalid_program():
    with pytest.raises(ValidationError):
        core.init(parse_program("fn main() { emit x }"))


def test_first_step_p1():
    c = core.step(core.init(corpus.load("p1")), 0)
    assert [(e.kind, e.args, e.step) for e in c.trace] == [("Emit", (1,), 0)]
    assert c.instances[0].ip == 1 and c.step_count == 1


def test_step_not_runnable():
    c = core.init(corpus.load("p1"))
    with pytest.raises(StepError) as e:
        core.step(c, 5)
    assert e.value.code == "STEP_NOT_RUNNABLE"


def test_runnable_after_spawns_with_main_blocked():
    p = parse_program(
        "fn main() {\n self me\n spawn a f me\n spawn b f me\n recv x\n recv y\n}\nfn f(p) {\n send p 1\n}\n"
    )
    c = core.init(p)
    for _ in range(4):
        c = core.step(c, 0)
    assert c.instances[0].status.kind == "blocked"
    assert core.runnable(c) == [1, 2]


def test_recv_on_empty_mailbox_blocks_without_events():
    c = core.init(parse_program("fn main() {\n recv x\n}"))
    c2 = core.step(c, 0)
    assert c2.instances[0].status.kind == "blocked" and c2.instances[0].ip == 0
    assert c2.trace == ()


def test_type_fault_ends_run():
    c = core.init(parse_program("fn main() {\n self me\n add x me 1\n emit x\n}"))
    c = core.step(core.step(c, 0), 0)
    assert c.fault[0] == "TYPE_FAULT"
    assert c.trace[-1].kind == "Fault" and core.runnable(c) == []
    assert schedulers.terminal_verdict(c).kind == "fault"


def test_send_to_finished_faults():
    p = parse_program("fn main() {\n spawn a f\n send a 1\n}\nfn f() {\n emit 0\n}")
    r = schedulers.run(p, schedulers.Inline())
    assert r.verdict.kind == "fault" and r.verdict.detail[0] == "SEND_TO_FINISHED"


def test_halt_event_when_entry_returns():
    r = schedulers.run(parse_program("fn main() {\n return 4\n}"), schedulers.Inline())
    assert r.final.trace[-1].kind == "Halt" and r.final.trace[-1]["result"] == 4
    assert str(r.verdict) == "finished(4)"


def test_lost_update_interleaving():
    """read, read, write, write on the shared cell leaves 1."""
    p = corpus.load("lostupdate")
    c = core.init(p)
    while sum(e.kind == "Spawn" for e in c.trace) < 2:
        c = core.step(c, 0)
    a, b = (e["child"] for e in c.trace if e.kind == "Spawn")

    def until(c, i, op):
        while True:
            n = len(c.trace)
            c = core.step(c, i)
            if any(e.kind == "Cell" and e["op"] == op for e in c.trace[n:]):
                return c

    c = until(c, a, "read")
    c = until(c, b, "read")
    c = until(c, a, "write")
    c = until(c, b, "write")
    assert set(c.cells.values()) == {1}


def test_call_returns_value_and_buffers_messages():
    p = parse_program(
        "fn main() {\n self me\n call v f me\n recv m\n emit v\n emit m\n}\n"
        "fn f(p) {\n send p 7\n return 3\n}\n"
    )
    for pol in (schedulers.Inline(), schedulers.RoundRobin(1)):
        assert schedulers.run(p, pol).observable == (3, 7)


def test_values_flow_through_pairs():
    p = parse_program("fn main() {\n pair a 1 :A\n fst x a\n snd y a\n emit y\n emit x\n emit a\n}")
    r = schedulers.run(p, schedulers.Inline())
    assert [str(v) for v in r.observable] == [":A", "1", "(1 . :A)"]


# -- properties ----------------------------------------------------------------


@settings(max_examples=80, deadline=None)
@given(worker_programs(), st.data())
def test_step_is_deterministic(src, data):
    p = program(src)
    for before, i, after in _walk(core.init(p), data):
        assert core.step(before, i) == after
        assert after.step_count == before.step_count + 1


@settings(max_examples=80, deadline=None)
@given(worker_programs(), st.data())
def test_runnable_is_pure(src, data):
    for before, _, after in _walk(core.init(program(src)), data):
        snap = (dict(before.instances), before.trace)
        core.runnable(before)
        assert snap == (dict(before.instances), before.trace)
        assert core.runnable(before) == sorted(core.runnable(before))


@settings(max_examples=80, deadline=None)
@given(worker_programs(), st.data())
def test_frame_property(src, data):
    for before, i, after in _walk(core.init(program(src)), data):
        new = after.trace[len(before.trace) :]
        targets = {e["dst"] for e in new if e.kind in ("Send", "Reply")}
        assert len(targets) <= 1
        spawned = {e["child"] for e in new if e.kind == "Spawn"}
        changed = {k for k in before.instances if before.instances[k] != after.instances[k]}
        assert changed <= {i} | targets
        assert set(after.instances) - set(before.instances) <= spawned
        cells = {k for k in after.cells if before.cells.get(k) != after.cells[k]}
        assert len(cells) <= 1


@settings(max_examples=80, deadline=None)
@given(worker_programs(), st.data())
def test_blocked_instances_do_not_advance(src, data):
    for before, i, after in _walk(core.init(program(src)), data):
        for k, inst in before.instances.items():
            if inst.status.kind == "blocked":
                assert after.instances[k].ip == inst.ip


@settings(max_examples=80, deadline=None)
@given(worker_programs(), st.data())
def test_message_conservation(src, data):
    """Receives match sends one to one, FIFO per mailbox."""
    last = core.init(program(src))
    for _, _, last in _walk(last, data):
        pass
    sent: dict[int, list] = {}
    for e in last.trace:
        if e.kind == "Send":
            sent.setdefault(e["dst"], []).append(Envelope(e["src"], e["value"]))
        elif e.kind == "Recv":
            assert sent[e["dst"]].pop(0) == Envelope(e["src"], e["value"])
    for ident, rest in sent.items():
        if ident in last.instances and last.instances[ident].status.kind != "finished":
            assert list(last.instances[ident].mailbox) == rest


@settings(max_examples=80, deadline=None)
@given(worker_programs(), st.data())
def test_identity_freshness(src, data):
    last = core.init(program(src))
    for _, _, last in _walk(last, data):
        pass
    kids = [e["child"] for e in last.trace if e.kind == "Spawn"]
    assert kids == sorted(set(kids)) and all(k > core.ENTRY_ID for k in kids)


def test_refs_are_not_ints():
    p = parse_program("fn main() {\n self me\n br_eq me 0 bad\n emit 1\n return\nbad: emit 2\n}")
    assert schedulers.run(p, schedulers.Inline()).observable == (1,)
    assert Ref(0) != 0 and Pair(UNIT, 1) == Pair(UNIT, 1)
