"""Bounded exhaustive exploration and the property checkers built on it.

``explore`` enumerates every schedule depth-first, branching over the
runnable set in ordinal order. Without pruning the leaf set is exactly the
set of maximal schedules up to ``depth`` steps. Properties are checked while
exploring: edge-local ones on every generated transition, state ones on every
visited configuration, and path ones through a small monitor carried along
each path and folded into the pruning key, so pruning never hides a
violation. The ``*_violation``/``*_problem`` helpers re-check a single event
log and are what a witness replay is judged by.
"""

from __future__ import annotations

from collections import Counter, defaultdict, deque
from dataclasses import dataclass, field
from typing import Iterable

from funcobj import core, schedulers
from funcobj.export import event_text
from funcobj.ir import ProgramDef
from funcobj.mechanisms import CHANNEL_KINDS, GRANT, REL, Mechanism
from funcobj.objects import ObjectInstance
from funcobj.records import Event, emit_values
from funcobj.schedulers import Policy, RunResult, Schedule, SchedulerError, Verdict
from funcobj.validate import validate
from funcobj.values import Pair, Value

PASS, FAIL, INAPPLICABLE = "pass", "fail", "inapplicable"


@dataclass(frozen=True)
class Leaf:
    schedule: Schedule
    verdict: Verdict
    events: tuple[Event, ...]

    @property
    def observable(self) -> tuple[Value, ...]:
        return emit_values(self.events)

    @property
    def cut(self) -> bool:
        return self.verdict.kind == "step_limit"


@dataclass(frozen=True)
class PropertyVerdict:
    name: str
    status: str
    witness: Schedule | None = None
    detail: str = ""

    @property
    def passed(self) -> bool:
        return self.status == PASS

    def __str__(self) -> str:
        s = {PASS: "PASS", FAIL: "FAIL", INAPPLICABLE: "n/a"}[self.status]
        if self.witness is not None:
            s += " witness=" + ",".join(map(str, self.witness.choices))
        if self.detail:
            s += f" ({self.detail})"
        return f"{self.name}: {s}"


@dataclass
class ExplorationResult:
    program: ProgramDef
    depth: int
    traces: frozenset[tuple[Value, ...]]
    runs: tuple[Leaf, ...]
    full_runs: int
    states_visited: int
    truncated: bool
    max_live_activations: dict[str, int] = field(default_factory=dict)
    strict_oo: bool = False
    pruned: bool = False
    violations: dict[str, tuple[Schedule, str]] = field(default_factory=dict)
    verdicts: dict[str, PropertyVerdict] = field(default_factory=dict)
    # generated edges; each one went through the transition checks
    transitions: int = 0


@dataclass(frozen=True)
class _Monitor:
    """Path summary that the path-dependent properties need.

    ``holders`` are (lock, client) pairs: the client received :GRANT and has
    not yet sent :REL. ``flows`` maps (channel, direction) to the values
    written and read so far, in service order.
    """

    observable: tuple = ()
    holders: frozenset = frozenset()
    flows: tuple = ()

    def advance(self, events, child: core.Configuration) -> tuple[_Monitor, str | None]:
        obs, holders, flows = self.observable, self.holders, None
        problem = None
        for e in events:
            k = e.kind
            if k == "Emit":
                obs = obs + (e.args[0],)
            elif k == "Recv" and e["value"] == GRANT and _kind(child, e["src"]) == "lock":
                holders = holders | {(e["src"], e["dst"])}
                n = sum(1 for lk, _ in holders if lk == e["src"])
                if n > 1 and problem is None:
                    problem = f"two holders of lock #{e['src']} at step {e.step}"
            elif k == "Send" and _kind(child, e["dst"]) == "lock":
                v = e["value"]
                if isinstance(v, Pair) and v.first == REL:
                    holders = holders - {(e["dst"], e["src"])}
            elif k == "MechOp" and e["op"] in ("WRITE", "READ") and _kind(child, e["mech"]) in CHANNEL_KINDS:
                if flows is None:
                    flows = {key: (list(w), list(r)) for key, w, r in self.flows}
                key = (e["mech"], _direction(child, e))
                w, r = flows.setdefault(key, ([], []))
                (w if e["op"] == "WRITE" else r).append(e["value"])
        new_flows = self.flows if flows is None else tuple(sorted((k, tuple(w), tuple(r)) for k, (w, r) in flows.items()))
        return _Monitor(obs, holders, new_flows), problem


def _kind(c: core.Configuration, ident) -> str | None:
    m = c.mechanisms.get(ident)
    return m.kind if m is not None else None


def _direction(c: core.Configuration, e: Event) -> str:
    m = c.mechanisms[e["mech"]]
    if m.kind != "bidirchan":
        return ""
    who = m.state.party(e["party"])
    writer_is_a = (who == "A") == (e["op"] == "WRITE")
    return "A->B" if writer_is_a else "B->A"


class _Hashed:
    """A signature with its hash computed once; equal entities usually share one."""

    __slots__ = ("sig", "h")

    def __init__(self, sig):
        self.sig = sig
        self.h = hash(sig)

    def __hash__(self) -> int:
        return self.h

    def __eq__(self, other) -> bool:
        return self is other or (self.h == other.h and self.sig == other.sig)


def _instance_sig(x):
    return (x.fn, tuple(sorted(x.locals.items())), x.ip, x.status, x.mailbox, x.waiting_caller, x.serial)


def _entity_sig(x):
    if isinstance(x, ObjectInstance):
        acts = tuple(_instance_sig(a) for a in x.activations)
        return (tuple(sorted(x.state.items())), x.queue, acts, x.inbox, x.next_serial, x.last_serial)
    if isinstance(x, Mechanism):
        return (x.kind, x.state, x.inbox, x.pending)
    return _instance_sig(x)


class _Signer:
    """Hashable configuration content, excluding the trace and step count.

    Configurations share unchanged entities with their parent, so per-entity
    signatures are cached by object identity and interned, so comparing two
    keys mostly compares pointers. The cache keeps each entity alive, which
    keeps its ``id`` from being reused.
    """

    def __init__(self):
        self.cache: dict[int, tuple[object, _Hashed]] = {}
        self.interned: dict[_Hashed, _Hashed] = {}

    def entity(self, x) -> _Hashed:
        hit = self.cache.get(id(x))
        if hit is not None and hit[0] is x:
            return hit[1]
        h = _Hashed(_entity_sig(x))
        h = self.interned.setdefault(h, h)
        self.cache[id(x)] = (x, h)
        return h

    def __call__(self, c: core.Configuration):
        # entity maps are keyed by fresh ids and only ever insert new keys,
        # so their iteration order is already id order
        ent = self.entity
        return (
            tuple([(i, ent(x)) for i, x in c.instances.items()]),
            tuple([(i, ent(x)) for i, x in c.mechanisms.items()]),
            tuple([(i, ent(x)) for i, x in c.objects.items()]),
            tuple(c.cells.items()),
            c.next_id,
            c.fault,
        )


def transition_problems(parent: core.Configuration, child: core.Configuration, events) -> list[tuple[str, str]]:
    """Edge-local properties of one step: composition, encapsulation, identity, conservation."""
    out = []
    actor_is_mech = events and events[0].actor in parent.mechanisms
    for e in events:
        k = e.kind
        if actor_is_mech and (k not in ("Recv", "Send", "MechOp") or (k == "Send" and e["src"] != e.actor)):
            out.append(("composition", f"mechanism #{e.actor} produced {k} at step {e.step}"))
        if k == "State" and e.actor != e["obj"]:
            out.append(("encapsulation", f"#{e.actor} touched {e['var']} of #{e['obj']} at step {e.step}"))
        elif k == "Spawn":
            if e["child"] < parent.next_id or parent.entity_kind(e["child"]) is not None:
                out.append(("identity", f"identity #{e['child']} reused at step {e.step}"))
        elif k == "Recv":
            head = _box(parent, e["dst"])
            if not head or head[0] != (e["src"], e["value"]):
                out.append(("message-conservation", f"receive at step {e.step} is not the head of #{e['dst']}'s mailbox"))
        elif k == "Send" and child.fault is None:
            box = _box(child, e["dst"])
            if (e["src"], e["value"]) not in box:
                out.append(("message-conservation", f"send at step {e.step} did not reach #{e['dst']}"))
    return out


def _box(c: core.Configuration, ident: int):
    if ident in c.instances:
        return c.instances[ident].mailbox
    if ident in c.mechanisms:
        return c.mechanisms[ident].inbox
    if ident in c.objects:
        return c.objects[ident].inbox
    return ()


def _flow_problem(mon: _Monitor, cut: bool) -> tuple[str, bool] | None:
    """(description, lost) for the first channel whose reads do not match its writes."""
    for (m, d), writes, reads in mon.flows:
        ok = reads == writes[: len(reads)] if cut else reads == writes
        if ok:
            continue
        label = f"#{m}{' ' + d if d else ''}"
        missing = Counter(writes) - Counter(reads)
        if missing and not cut:
            lost = ",".join(sorted(map(str, missing.elements())))
            return f"{label}: lost message {lost}; wrote {_seq(writes)} read {_seq(reads)}", True
        return f"{label}: wrote {_seq(writes)} read {_seq(reads)}", False
    return None


def _seq(vs) -> str:
    return "[" + ",".join(map(str, vs)) + "]"


def explore(
    p: ProgramDef,
    depth: int,
    strict_oo: bool = False,
    prune: bool = False,
    max_states: int | None = None,
    checks: bool = True,
) -> ExplorationResult:
    """Enumerate all schedules of at most ``depth`` steps, depth first.

    With ``prune`` the search is breadth first and a configuration is not
    expanded again when an equal one (same content, same observable trace so
    far, same monitor state) was already reached. Breadth first order means
    the first visit is at minimal depth, so the depth bound cuts exactly the
    same futures. The trace set and every verdict are unchanged; only
    ``runs``/``full_runs``/``states_visited`` shrink.
    ``max_states`` caps visited configurations; hitting it marks the result
    truncated with partial counts.
    """
    if depth < 1:
        raise ValueError("depth must be >= 1")
    c0 = core.init(p, strict_oo)
    serialized = {o.name for o in p.objects if o.method_policy == "serialized"}
    leaves: list[Leaf] = []
    max_live: dict[str, int] = {}
    violations: dict[str, tuple[Schedule, str]] = {}
    lost_witness: tuple[Schedule, str] | None = None
    seen: set = set()
    signature = _Signer()
    visited = edges = 0
    truncated = False

    def note(name: str, sched, detail: str) -> None:
        violations.setdefault(name, (Schedule(sched), detail))

    stack: deque[tuple[core.Configuration, tuple[int, ...], _Monitor]] = deque([(c0, (), _Monitor())])
    while stack:
        c, sched, mon = stack.popleft() if prune else stack.pop()
        if prune:
            key = _Hashed((signature(c), mon))
            if key in seen:
                continue
            seen.add(key)
        visited += 1
        for o in c.objects.values():
            if o.live > max_live.get(o.name, -1):
                max_live[o.name] = o.live
            if o.live > 1 and o.name in serialized:
                note("serialization", sched, f"{o.live} live activations of #{o.id}")
        verdict = schedulers.terminal_verdict(c)
        cut = verdict is None
        if cut and (len(sched) >= depth or (max_states is not None and visited >= max_states)):
            truncated = True
            verdict = Verdict("step_limit")
            if max_states is not None and visited >= max_states:
                stack.clear()
        if verdict is not None:
            if verdict.kind == "deadlock":
                c = core.with_deadlock(c)
            leaves.append(Leaf(Schedule(sched), verdict, c.trace))
            prob = _flow_problem(mon, cut)
            if prob is not None:
                if prob[1] and lost_witness is None:
                    lost_witness = (Schedule(sched), prob[0])
                note("channel-integrity", sched, prob[0])
            continue
        n = len(c.trace)
        order = core.runnable(c) if prune else reversed(core.runnable(c))
        for i in order:
            child = core.step(c, i)
            events = child.trace[n:]
            path = sched + (i,)
            edges += 1
            for name, detail in transition_problems(c, child, events):
                note(name, path, detail)
            new_mon, prob = mon.advance(events, child)
            if prob is not None:
                note("mutex", path, prob)
            stack.append((child, path, new_mon))
    if lost_witness is not None:
        violations["channel-integrity"] = lost_witness
    r = ExplorationResult(
        p,
        depth,
        frozenset(leaf.observable for leaf in leaves),
        tuple(leaves),
        sum(1 for leaf in leaves if not leaf.cut),
        visited,
        truncated,
        max_live,
        strict_oo,
        prune,
        violations,
        transitions=edges,
    )
    if checks:
        r.verdicts = {v.name: v for v in standard_checks(r)}
    return r


def standard_checks(r: ExplorationResult) -> list[PropertyVerdict]:
    return [
        check_observable_determinism(r),
        check_mutex(r),
        check_channel_integrity(r),
        check_composition(r),
        check_serialization(r),
        check_encapsulation(r),
        check_identity(r),
        check_message_conservation(r),
    ]


# -- helpers --------------------------------------------------------------------


def _uses(p: ProgramDef, pred) -> bool:
    return any(pred(ins) for _, f, _ in p.bodies() for ins in f.body)


def _created(events: Iterable[Event], prefix: str) -> dict[int, str]:
    return {e["child"]: e["fname"] for e in events if e.kind == "Spawn" and e["fname"].startswith(prefix)}


def _fail(name: str, leaf: Leaf, detail: str) -> PropertyVerdict:
    return PropertyVerdict(name, FAIL, leaf.schedule, detail)


# -- properties -----------------------------------------------------------------


def check_observable_determinism(r: ExplorationResult) -> PropertyVerdict:
    name = "observable-determinism"
    if len(r.traces) <= 1:
        return PropertyVerdict(name, PASS, detail=f"{len(r.traces)} trace")
    first = r.runs[0].observable
    for leaf in r.runs:
        if leaf.observable != first:
            return _fail(name, leaf, f"{len(r.traces)} distinct traces")
    raise AssertionError("unreachable")  # pragma: no cover


def mutex_violation(events: Iterable[Event]) -> Event | None:
    """First event after which two instances hold the same lock, if any.

    A client holds a lock from receiving :GRANT from it until it sends :REL.
    """
    locks = set()
    holders: dict[int, set[int]] = defaultdict(set)
    for e in events:
        if e.kind == "Spawn" and e["fname"] == "mech:lock":
            locks.add(e["child"])
        elif e.kind == "Recv" and e["src"] in locks and e["value"] == GRANT:
            held = holders[e["src"]]
            held.add(e["dst"])
            if len(held) > 1:
                return e
        elif e.kind == "Send" and e["dst"] in locks:
            v = e["value"]
            if isinstance(v, Pair) and v.first == REL:
                holders[e["dst"]].discard(e["src"])
    return None


def _from_violations(r: ExplorationResult, name: str, ok: str = "") -> PropertyVerdict:
    if name in r.violations:
        sched, detail = r.violations[name]
        return PropertyVerdict(name, FAIL, sched, detail)
    return PropertyVerdict(name, PASS, detail=ok)


def check_mutex(r: ExplorationResult) -> PropertyVerdict:
    name = "mutex"
    if not _uses(r.program, lambda i: i.op == "mech" and i.args[1] == "lock"):
        return PropertyVerdict(name, INAPPLICABLE, detail="no lock")
    return _from_violations(r, name, f"{r.states_visited} states")


def channel_flows(events: Iterable[Event]) -> dict[tuple[int, str], tuple[list[Value], list[Value]]]:
    """Per (channel, direction): values written and values read, in service order."""
    kinds = {}
    parties: dict[int, list[int]] = defaultdict(list)
    flows: dict[tuple[int, str], tuple[list, list]] = {}
    for e in events:
        if e.kind == "Spawn" and e["fname"].startswith("mech:") and e["fname"][5:] in CHANNEL_KINDS:
            kinds[e["child"]] = e["fname"][5:]
            if kinds[e["child"]] != "bidirchan":
                flows[(e["child"], "")] = ([], [])
        if e.kind != "MechOp" or e["mech"] not in kinds:
            continue
        m, op, who = e["mech"], e["op"], e["party"]
        if kinds[m] == "bidirchan":
            if op == "ATTACH":
                parties[m].append(who)
                if len(parties[m]) == 2:
                    flows[(m, "A->B")] = ([], [])
                    flows[(m, "B->A")] = ([], [])
                continue
            if op not in ("WRITE", "READ") or len(parties[m]) < 1:
                continue
            is_a = who == parties[m][0]
            if op == "WRITE":
                key = (m, "A->B" if is_a else "B->A")
            else:
                key = (m, "B->A" if is_a else "A->B")
            flows.setdefault((m, "A->B"), ([], []))
            flows.setdefault((m, "B->A"), ([], []))
        else:
            key = (m, "")
        if op == "WRITE":
            flows[key][0].append(e["value"])
        elif op == "READ":
            flows[key][1].append(e["value"])
    return flows


def integrity_problem(events: Iterable[Event], cut: bool = False) -> str | None:
    """First broken channel flow of one run, or None."""
    for (m, d), (writes, reads) in sorted(channel_flows(events).items()):
        ok = reads == writes[: len(reads)] if cut else reads == writes
        if not ok:
            return f"#{m}{' ' + d if d else ''}: wrote {_seq(writes)} read {_seq(reads)}"
    return None


def check_channel_integrity(r: ExplorationResult) -> PropertyVerdict:
    """Reads equal writes per channel; a prefix when the run was cut by depth.

    When several runs fail, the witness prefers one where a written value was
    never read.
    """
    name = "channel-integrity"
    if not _uses(r.program, lambda i: i.op == "mech" and i.args[1] in CHANNEL_KINDS):
        return PropertyVerdict(name, INAPPLICABLE, detail="no channels")
    return _from_violations(r, name, f"{len(r.runs)} runs")


def composition_problem(events: Iterable[Event]) -> str | None:
    """Mechanism steps may only receive, send and record their own op."""
    mechs: set[int] = set()
    for e in events:
        if e.kind == "Spawn" and e["fname"].startswith("mech:"):
            mechs.add(e["child"])
        elif e.actor in mechs and e.kind not in ("Recv", "Send", "MechOp"):
            return f"mechanism #{e.actor} produced a {e.kind} event at step {e.step}"
        elif e.actor in mechs and e.kind == "Send" and e["src"] != e.actor:
            return f"mechanism #{e.actor} sent on behalf of #{e['src']}"
    return None


def message_flow_problem(events: Iterable[Event], only: set[int] | None = None) -> str | None:
    """Receives on each (src, dst) link must be a FIFO prefix of its sends."""
    sent: dict[tuple[int, int], list[Value]] = defaultdict(list)
    got: dict[tuple[int, int], int] = defaultdict(int)
    for e in events:
        if e.kind == "Send":
            sent[(e["src"], e["dst"])].append(e["value"])
        elif e.kind == "Recv":
            link = (e["src"], e["dst"])
            if only is not None and not (set(link) & only):
                continue
            k = got[link]
            if k >= len(sent[link]) or sent[link][k] != e["value"]:
                return f"receive of {e['value']} on #{link[0]}->#{link[1]} at step {e.step} matches no send"
            got[link] = k + 1
    return None


def check_composition(r: ExplorationResult) -> PropertyVerdict:
    name = "composition"
    if not _uses(r.program, lambda i: i.op == "mech"):
        return PropertyVerdict(name, INAPPLICABLE, detail="no mechanisms")
    return _from_violations(r, name, "mechanisms interact by send/receive only")


def check_message_conservation(r: ExplorationResult) -> PropertyVerdict:
    return _from_violations(r, "message-conservation")


def serialization_problem(events: Iterable[Event], serialized: set[str]) -> str | None:
    objs = {}
    live: dict[int, int] = defaultdict(int)
    for e in events:
        if e.kind == "Spawn" and e["fname"].startswith("obj:"):
            objs[e["child"]] = e["fname"][4:]
        elif e.kind == "Activate" and objs.get(e["obj"]) in serialized:
            live[e["obj"]] += 1
            if live[e["obj"]] > 1:
                return f"two live activations of #{e['obj']} at step {e.step}"
        elif e.kind == "Retire" and e["obj"] in live:
            live[e["obj"]] -= 1
    return None


def check_serialization(r: ExplorationResult) -> PropertyVerdict:
    name = "serialization"
    serialized = {o.name for o in r.program.objects if o.method_policy == "serialized"}
    if not serialized:
        return PropertyVerdict(name, INAPPLICABLE, detail="no serialized objects")
    peak = max((r.max_live_activations.get(n, 0) for n in serialized), default=0)
    return _from_violations(r, name, f"max live activations {peak}")


def check_encapsulation(r: ExplorationResult) -> PropertyVerdict:
    name = "encapsulation"
    if not any(o.statevars for o in r.program.objects):
        return PropertyVerdict(name, INAPPLICABLE, detail="no state variables")
    return _from_violations(r, name)


def check_identity(r: ExplorationResult) -> PropertyVerdict:
    """Created identities are fresh: never equal to an existing one."""
    return _from_violations(r, "identity", "fresh on every transition")


def check_refinement(inline: RunResult, r: ExplorationResult) -> PropertyVerdict:
    name = "refinement"
    if inline.verdict.kind != "finished":
        return PropertyVerdict(name, INAPPLICABLE, detail=f"inline run ended {inline.verdict}")
    if r.truncated:
        return PropertyVerdict(name, INAPPLICABLE, detail="exploration truncated")
    if inline.observable in r.traces:
        return PropertyVerdict(name, PASS, detail=f"inline trace is one of {len(r.traces)}")
    return PropertyVerdict(name, FAIL, inline.schedule, "inline trace not in explored set")


def check_determinism(
    p: ProgramDef,
    policy: Policy,
    limit: int = 10_000,
    strict_oo: bool = False,
    replay_schedule=None,
) -> PropertyVerdict:
    """Run twice and replay the realized schedule; all three traces must match exactly.

    ``replay_schedule`` overrides the schedule handed to replay.
    """
    name = "determinism"
    a = schedulers.run(p, policy, limit, strict_oo)
    b = schedulers.run(p, policy, limit, strict_oo)
    sched = a.schedule if replay_schedule is None else replay_schedule
    try:
        c = schedulers.replay(p, sched, strict_oo)
    except SchedulerError as e:
        return PropertyVerdict(name, FAIL, schedulers.as_schedule(sched), e.code)
    texts = ["\n".join(map(event_text, x.final.trace)) for x in (a, b, c)]
    if texts[0] == texts[1] == texts[2] and a.verdict == b.verdict == c.verdict:
        return PropertyVerdict(name, PASS)
    return PropertyVerdict(name, FAIL, a.schedule, "traces differ")


# -- compliance -----------------------------------------------------------------

FUNDAMENTALS = ("identity", "state", "behaviour", "relations", "abstraction")
NOT_MODELED = (
    "types (object types as a language feature)",
    "information hiding (as a language feature)",
    "type composition (reference, inclusion)",
    "object composition (clusters acting as one object)",
    "abstract object types (generic object types)",
)


@dataclass(frozen=True)
class ComplianceReport:
    verdicts: tuple[PropertyVerdict, ...]
    not_modeled: tuple[str, ...] = NOT_MODELED

    def __getitem__(self, name: str) -> PropertyVerdict:
        for v in self.verdicts:
            if v.name == name:
                return v
        raise KeyError(name)

    @property
    def passed(self) -> bool:
        return all(v.status == PASS for v in self.verdicts)

    def lines(self) -> list[str]:
        out = [str(v) for v in self.verdicts]
        out += [f"not modeled: {item}" for item in self.not_modeled]
        return out


def _state_history(r: ExplorationResult) -> PropertyVerdict:
    """Every state read sees the latest write, or the initializer."""
    name = "state"
    inits = {o.name: dict(o.statevars) for o in r.program.objects}
    carried = 0
    for leaf in r.runs:
        current: dict[tuple[int, str], Value] = {}
        writer: dict[tuple[int, str], int] = {}
        active: dict[int, int] = {}
        for e in leaf.events:
            if e.kind == "Spawn" and e["fname"].startswith("obj:"):
                for var, v in inits[e["fname"][4:]].items():
                    current[(e["child"], var)] = v
            elif e.kind == "Activate":
                active[e["obj"]] = e["serial"]
            elif e.kind == "State":
                key = (e["obj"], e["var"])
                if e["op"] == "write":
                    current[key] = e["value"]
                    writer[key] = active.get(e["obj"], -1)
                else:
                    if current.get(key) != e["value"]:
                        return _fail(name, leaf, f"read of {e['var']} saw {e['value']}, last written {current.get(key)}")
                    if key in writer and writer[key] != active.get(e["obj"], -1):
                        carried += 1
    if not any(o.statevars for o in r.program.objects):
        return PropertyVerdict(name, PASS, detail="state held in locals only")
    return PropertyVerdict(name, PASS, detail=f"{carried} reads of state recorded by an earlier activation")


def _behaviour(r: ExplorationResult) -> PropertyVerdict:
    """Completed runs emit, and with objects present some emit carries an object-derived value."""
    name = "behaviour"
    done = [leaf for leaf in r.runs if not leaf.cut]
    for leaf in done:
        if not leaf.observable:
            return _fail(name, leaf, "run produced no observable effect")
    if not done:
        return PropertyVerdict(name, FAIL, detail="no completed run")
    if not r.program.objects:
        return PropertyVerdict(name, PASS, detail="every completed run emits")
    objs = {o.name for o in r.program.objects}
    for leaf in done:
        ids = {k for k, v in _created(leaf.events, "obj:").items() if v[4:] in objs}
        derived = set()
        for e in leaf.events:
            if e.kind == "State" and e["op"] == "read":
                derived.add(e["value"])
            elif e.kind in ("Reply", "Send") and e["src"] in ids:
                derived.add(e["value"])
            elif e.kind == "Emit" and e["value"] in derived:
                return PropertyVerdict(name, PASS, detail="emits depend on object state or replies")
    return PropertyVerdict(name, FAIL, detail="no emitted value derives from an object")


def _relations(p: ProgramDef) -> PropertyVerdict:
    diags = [d for d in validate(p, strict_oo=True) if d.code == "STRICT_OO_RAW_MEMORY"]
    if diags:
        return PropertyVerdict("relations", FAIL, detail=" ".join(d.tag for d in diags))
    return PropertyVerdict("relations", PASS, detail="interaction by messages only")


def _abstraction(r: ExplorationResult) -> PropertyVerdict:
    name = "abstraction"
    enc = check_encapsulation(r)
    if enc.status == FAIL:
        return PropertyVerdict(name, FAIL, enc.witness, enc.detail)
    for leaf in r.runs:
        systems = set(_created(leaf.events, "mech:")) | set(_created(leaf.events, "obj:"))
        for e in leaf.events:
            if e.kind == "Cell" and e.actor in systems:
                return _fail(name, leaf, f"#{e.actor} exposed shared cell #{e['cell']}")
    if "composition" in r.violations:
        sched, detail = r.violations["composition"]
        return PropertyVerdict(name, FAIL, sched, detail)
    return PropertyVerdict(name, PASS, detail="internal state never observed by clients")


def compliance_report(p: ProgramDef, r: ExplorationResult) -> ComplianceReport:
    """One verdict per object-orientation fundamental, plus the unmodeled list."""
    ident = check_identity(r)
    return ComplianceReport(
        (
            PropertyVerdict("identity", ident.status, ident.witness, ident.detail),
            _state_history(r),
            _behaviour(r),
            _relations(p),
            _abstraction(r),
        )
    )


def explore_text(r: ExplorationResult) -> list[str]:
    lines = [
        f"full_runs={r.full_runs}",
        f"traces={len(r.traces)}",
        f"states_visited={r.states_visited}",
        f"truncated={'true' if r.truncated else 'false'}",
    ]
    lines += [str(v) for v in r.verdicts.values()]
    return lines


__all__ = [
    "ComplianceReport",
    "ExplorationResult",
    "Leaf",
    "PropertyVerdict",
    "check_channel_integrity",
    "check_composition",
    "check_determinism",
    "check_encapsulation",
    "check_identity",
    "check_message_conservation",
    "check_mutex",
    "check_observable_determinism",
    "check_refinement",
    "check_serialization",
    "channel_flows",
    "compliance_report",
    "composition_problem",
    "integrity_problem",
    "message_flow_problem",
    "mutex_violation",
    "serialization_problem",
    "explore",
    "standard_checks",
]
