"""Configurations and the single-step transition relation.

``step(c, i)`` executes exactly one instruction of instance ``i``, or one
internal action of mechanism/object ``i``, and returns a new Configuration;
``c`` is never modified. Every scheduler and the explorer drive this one
function, so the whole framework of execution models shares the same
semantics and differs only in which runnable id gets chosen.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Iterable

from funcobj import mechanisms as mech
from funcobj import objects as objs
from funcobj.ir import ProgramDef
from funcobj.records import (
    BLOCKED_CALL,
    BLOCKED_RECV,
    RUNNABLE,
    Caller,
    Envelope,
    Event,
    Instance,
    emit_values,
    finished,
)
from funcobj.validate import ValidationError, validate
from funcobj.values import UNIT, Pair, Ref, Value, is_int

ENTRY_ID = 0


class StepError(Exception):
    """Misuse of the step API (as opposed to a guest fault)."""

    def __init__(self, code: str, detail: str = ""):
        self.code = code
        super().__init__(f"{code}: {detail}" if detail else code)


class Fault(Exception):
    def __init__(self, kind: str, detail: str):
        self.kind = kind
        self.detail = detail
        super().__init__(f"{kind}: {detail}")


@dataclass
class Configuration:
    program: ProgramDef
    instances: dict[int, Instance]
    cells: dict[int, int]
    mechanisms: dict[int, mech.Mechanism]
    objects: dict[int, objs.ObjectInstance]
    next_id: int
    trace: tuple[Event, ...]
    step_count: int
    fault: tuple[str, str] | None = None
    strict_oo: bool = False

    def entity_kind(self, ident: int) -> str | None:
        if ident in self.instances:
            return "instance"
        if ident in self.mechanisms:
            return "mechanism"
        if ident in self.objects:
            return "object"
        if ident in self.cells:
            return "cell"
        return None

    def blocked(self) -> list[int]:
        """Ids of instances, or objects with activations, that are waiting."""
        out = [i for i, inst in self.instances.items() if inst.status.kind == "blocked"]
        out += [o.id for o in self.objects.values() if any(a.status.kind == "blocked" for a in o.activations)]
        return sorted(out)

    def live_activations(self) -> dict[int, int]:
        return {o.id: o.live for o in self.objects.values()}


def init(p: ProgramDef, strict_oo: bool = False) -> Configuration:
    diags = validate(p, strict_oo)
    if diags:
        raise ValidationError(diags)
    entry = Instance(ENTRY_ID, p.entry, {})
    return Configuration(p, {ENTRY_ID: entry}, {}, {}, {}, ENTRY_ID + 1, (), 0, None, strict_oo)


def runnable(c: Configuration) -> list[int]:
    if c.fault is not None:
        return []
    ids = [i for i, inst in c.instances.items() if inst.status is RUNNABLE or inst.status.kind == "runnable"]
    ids += [i for i, m in c.mechanisms.items() if m.runnable()]
    ids += [i for i, o in c.objects.items() if o.runnable()]
    return sorted(ids)


def observable_trace(c: Configuration) -> tuple[Value, ...]:
    return emit_values(c.trace)


def is_terminal(c: Configuration) -> bool:
    return not runnable(c)


def with_deadlock(c: Configuration) -> Configuration:
    """Record that the run ended with waiting instances and nothing to run."""
    return replace(c, trace=c.trace + (Event(c.step_count, "Deadlock"),))


def step(c: Configuration, chosen: int) -> Configuration:
    if chosen not in runnable(c):
        raise StepError("STEP_NOT_RUNNABLE", f"#{chosen} is not runnable")
    m = _Machine(c, chosen)
    try:
        if chosen in c.instances:
            m.step_instance(chosen)
        elif chosen in c.mechanisms:
            m.step_mechanism(chosen)
        else:
            m.step_object(chosen)
    except Fault as f:
        ev = Event(c.step_count, "Fault", (f.kind, f.detail), chosen)
        return replace(c, trace=c.trace + (ev,), step_count=c.step_count + 1, fault=(f.kind, f.detail))
    return m.finish()


class _Frame:
    """An executing body: a top-level instance or an activation inside ``obj``."""

    __slots__ = ("inst", "obj")

    def __init__(self, inst: Instance, obj: objs.ObjectInstance | None):
        self.inst = inst
        self.obj = obj

    @property
    def identity(self) -> int:
        return self.inst.id

    @property
    def caller(self) -> Caller:
        return Caller(self.inst.id, "", self.inst.serial)


class _Machine:
    def __init__(self, c: Configuration, actor: int):
        self.c = c
        self.actor = actor
        self.prog = c.program
        self.instances = dict(c.instances)
        self.cells = dict(c.cells)
        self.mechs = dict(c.mechanisms)
        self.objects = dict(c.objects)
        self.next_id = c.next_id
        self.events: list[Event] = []
        self._own_inst: set[int] = set()
        self._own_obj: set[int] = set()

    # -- bookkeeping --------------------------------------------------------

    def finish(self) -> Configuration:
        c = self.c
        return Configuration(
            c.program,
            self.instances,
            self.cells,
            self.mechs,
            self.objects,
            self.next_id,
            c.trace + tuple(self.events),
            c.step_count + 1,
            None,
            c.strict_oo,
        )

    def event(self, kind: str, *args) -> None:
        self.events.append(Event(self.c.step_count, kind, args, self.actor))

    def fresh_id(self) -> int:
        i = self.next_id
        self.next_id += 1
        return i

    def inst_w(self, ident: int) -> Instance:
        if ident not in self._own_inst:
            self.instances[ident] = self.instances[ident].copy()
            self._own_inst.add(ident)
        return self.instances[ident]

    def obj_w(self, ident: int) -> objs.ObjectInstance:
        if ident not in self._own_obj:
            self.objects[ident] = self.objects[ident].copy()
            self._own_obj.add(ident)
        return self.objects[ident]

    # -- delivery -----------------------------------------------------------

    def send(self, src: int, dst: int, value: Value) -> None:
        self.event("Send", src, dst, value)
        env = Envelope(src, value)
        if dst in self.instances:
            inst = self.inst_w(dst)
            if inst.status.kind == "finished":
                raise Fault("SEND_TO_FINISHED", f"#{src} sent {value} to finished #{dst}")
            inst.mailbox = inst.mailbox + (env,)
            if inst.status == BLOCKED_RECV:
                inst.status = RUNNABLE
        elif dst in self.mechs:
            m = self.mechs[dst]
            self.mechs[dst] = replace(m, inbox=m.inbox + (env,))
        elif dst in self.objects:
            o = self.obj_w(dst)
            o.inbox = o.inbox + (env,)
            o.activations = tuple(_wake(a) for a in o.activations)
        else:
            raise Fault("TYPE_FAULT", f"send target #{dst} cannot receive messages")

    def reply(self, src: int, to: Caller, value: Value) -> None:
        """Deliver a call/request result into the waiting caller's local."""
        self.event("Reply", src, to.id, value)
        if to.serial is None:
            inst = self.inst_w(to.id)
            inst.locals[to.dst] = value
            inst.status = RUNNABLE
            return
        o = self.obj_w(to.id)
        acts = list(o.activations)
        for k, a in enumerate(acts):
            if a.serial == to.serial:
                a = a.copy()
                a.locals[to.dst] = value
                a.status = RUNNABLE
                acts[k] = a
                o.activations = tuple(acts)
                return
        raise Fault("OBJ_PROTOCOL", f"activation {to.serial} of #{to.id} vanished before its reply")

    # -- operands -----------------------------------------------------------

    def read(self, fr: _Frame, a) -> Value:
        if not isinstance(a, str):
            return a
        loc = fr.inst.locals
        if a in loc:
            return loc[a]
        if fr.obj is not None and a in fr.obj.state:
            v = fr.obj.state[a]
            self.event("State", fr.obj.id, a, "read", v)
            return v
        raise Fault("UNKNOWN_NAME", f"{a} is not defined in {fr.inst.fn}")

    def write(self, fr: _Frame, name: str, v: Value) -> None:
        if fr.obj is not None and name in fr.obj.state:
            if not is_int(v):
                raise Fault("TYPE_FAULT", f"state variable {name} holds integers, got {v}")
            fr.obj.state[name] = v
            self.event("State", fr.obj.id, name, "write", v)
        else:
            fr.inst.locals[name] = v

    def int_of(self, fr: _Frame, a, op: str) -> int:
        v = self.read(fr, a)
        if not is_int(v):
            raise Fault("TYPE_FAULT", f"{op} expects an integer, got {v}")
        return v

    def ref_of(self, fr: _Frame, a, op: str) -> int:
        v = self.read(fr, a)
        if not isinstance(v, Ref):
            raise Fault("TYPE_FAULT", f"{op} expects a reference, got {v}")
        return v.ordinal

    def cell_of(self, fr: _Frame, a, op: str) -> int:
        r = self.ref_of(fr, a, op)
        if r not in self.cells:
            raise Fault("TYPE_FAULT", f"{op} expects a cell, got #{r}")
        return r

    # -- entity steps -------------------------------------------------------

    def step_instance(self, ident: int) -> None:
        inst = self.inst_w(ident)
        self.execute(_Frame(inst, None))

    def step_object(self, ident: int) -> None:
        o = self.obj_w(ident)
        if o.can_start():
            params = self.prog.resolve(f"{o.name}.{o.queue[0].method}").params
            new, act, req = objs.start_request(o, params)
            self.objects[ident] = new
            self._own_obj.add(ident)
            self.event("Activate", ident, req.method, act.serial)
            return
        k = o.next_activation()
        act = o.activations[k].copy()
        acts = list(o.activations)
        acts[k] = act
        o.activations = tuple(acts)
        o.last_serial = act.serial
        self.execute(_Frame(act, o))

    def step_mechanism(self, ident: int) -> None:
        m = self.mechs[ident]
        k = m.next_pending()
        if k is not None:
            req = m.pending[k]
            m = replace(m, pending=m.pending[:k] + m.pending[k + 1 :])
            self.mechs[ident] = m
            self._serve(m, req)
            return
        env = m.inbox[0]
        m = replace(m, inbox=m.inbox[1:], arrivals=m.arrivals + 1)
        self.mechs[ident] = m
        self.event("Recv", ident, env.value, env.src)
        try:
            req = mech.decode_request(m.kind, env.value, m.arrivals)
        except mech.MechanismError as e:
            raise Fault(e.code, e.detail) from None
        if m.enabled(req):
            self._serve(m, req)
        else:
            self.mechs[ident] = replace(m, pending=m.pending + (req,))
            self.event("MechOp", ident, "defer:" + req.op, req.requester, req.value)

    def _serve(self, m: mech.Mechanism, req: mech.MechRequest) -> None:
        try:
            state, answer = mech.serve(m, req)
        except mech.MechanismError as e:
            raise Fault(e.code, e.detail) from None
        self.mechs[m.id] = replace(m, state=state)
        shown = answer if req.op == "READ" else req.value
        self.event("MechOp", m.id, req.op, req.requester, shown)
        self.send(m.id, req.requester, answer)

    # -- instructions -------------------------------------------------------

    def execute(self, fr: _Frame) -> None:
        inst = fr.inst
        f = self.prog.resolve(inst.fn)
        ins = f.body[inst.ip]
        op, a = ins.op, ins.args
        nxt = inst.ip + 1

        if op == "const":
            self.write(fr, a[0], a[1])
        elif op == "move":
            self.write(fr, a[0], self.read(fr, a[1]))
        elif op == "add":
            self.write(fr, a[0], self.int_of(fr, a[1], op) + self.int_of(fr, a[2], op))
        elif op == "pair":
            self.write(fr, a[0], Pair(self.read(fr, a[1]), self.read(fr, a[2])))
        elif op in ("fst", "snd"):
            p = self.read(fr, a[1])
            if not isinstance(p, Pair):
                raise Fault("TYPE_FAULT", f"{op} expects a pair, got {p}")
            self.write(fr, a[0], p.first if op == "fst" else p.second)
        elif op == "jmp":
            nxt = f.labels[a[0]]
        elif op == "br_eq":
            if self.read(fr, a[0]) == self.read(fr, a[1]):
                nxt = f.labels[a[2]]
        elif op in ("call", "spawn"):
            target = self.prog.resolve(a[1])
            args = [self.read(fr, x) for x in a[2:]]
            child = self.fresh_id()
            new = Instance(child, target.name, dict(zip(target.params, args)))
            self.event("Spawn", fr.identity, child, target.name)
            if op == "call":
                new.waiting_caller = fr.caller._replace(dst=a[0])
                inst.status = BLOCKED_CALL
            else:
                self.write(fr, a[0], Ref(child))
            self.instances[child] = new
            self._own_inst.add(child)
        elif op == "self":
            self.write(fr, a[0], Ref(fr.identity))
        elif op == "send":
            dst = self.ref_of(fr, a[0], op)
            msg = self.read(fr, a[1])
            self.send(fr.identity, dst, msg)
        elif op == "recv":
            box = fr.obj.inbox if fr.obj is not None else inst.mailbox
            if not box:
                inst.status = BLOCKED_RECV
                return
            env = box[0]
            if fr.obj is not None:
                fr.obj.inbox = box[1:]
            else:
                inst.mailbox = box[1:]
            self.event("Recv", fr.identity, env.value, env.src)
            self.write(fr, a[0], env.value)
        elif op == "newcell":
            cell = self.fresh_id()
            self.cells[cell] = 0
            self.event("Cell", fr.identity, "new", cell, 0)
            self.write(fr, a[0], Ref(cell))
        elif op == "cellread":
            cell = self.cell_of(fr, a[1], op)
            v = self.cells[cell]
            self.event("Cell", fr.identity, "read", cell, v)
            self.write(fr, a[0], v)
        elif op == "cellwrite":
            cell = self.cell_of(fr, a[0], op)
            v = self.int_of(fr, a[1], op)
            self.cells[cell] = v
            self.event("Cell", fr.identity, "write", cell, v)
        elif op == "mech":
            ident = self.fresh_id()
            self.mechs[ident] = mech.make_mechanism(ident, a[1], tuple(self.read(fr, x) for x in a[2:]))
            self.event("Spawn", fr.identity, ident, f"mech:{a[1]}")
            self.write(fr, a[0], Ref(ident))
        elif op == "newobj":
            ident = self.fresh_id()
            self.objects[ident] = objs.new_object(ident, self.prog.object(a[1]))
            self._own_obj.add(ident)
            self.event("Spawn", fr.identity, ident, f"obj:{a[1]}")
            self.write(fr, a[0], Ref(ident))
        elif op in ("req", "reqasync"):
            sync = op == "req"
            target_op, method, rest = (a[1], a[2], a[3:]) if sync else (a[0], a[1], a[2:])
            target = self.read(fr, target_op)
            if not (isinstance(target, Ref) and target.ordinal in self.objects):
                raise Fault("OBJ_PROTOCOL", f"{op} to {target}, which is not an object")
            args = tuple(self.read(fr, x) for x in rest)
            reply_to = fr.caller._replace(dst=a[0]) if sync else None
            o = self.obj_w(target.ordinal)
            try:
                new = objs.issue_request(o, objs.Request(method, args, fr.identity, reply_to))
            except objs.ObjectProtocolError as e:
                raise Fault("OBJ_PROTOCOL", str(e)) from None
            o.queue = new.queue
            self.event("ObjReq", target.ordinal, method, fr.identity)
            if sync:
                inst.status = BLOCKED_CALL
        elif op == "emit":
            self.event("Emit", self.read(fr, a[0]))
        elif op == "return":
            v = self.read(fr, a[0]) if a else UNIT
            self._return(fr, v)
            return
        else:  # pragma: no cover - validate rejects unknown mnemonics
            raise Fault("UNKNOWN_INSTRUCTION", op)
        inst.ip = nxt

    def _return(self, fr: _Frame, v: Value) -> None:
        inst = fr.inst
        if fr.obj is None:
            inst.status = finished(v)
            if inst.waiting_caller is not None:
                self.reply(inst.id, inst.waiting_caller, v)
            if inst.id == ENTRY_ID:
                self.event("Halt", v)
            return
        o = fr.obj
        o.activations = tuple(x for x in o.activations if x.serial != inst.serial)
        self.event("Retire", o.id, inst.serial, v)
        if inst.waiting_caller is not None:
            self.reply(o.id, inst.waiting_caller, v)


def _wake(a: Instance) -> Instance:
    if a.status == BLOCKED_RECV:
        a = a.copy()
        a.status = RUNNABLE
    return a


def events_of(c: Configuration, kinds: Iterable[str]) -> list[Event]:
    ks = set(kinds)
    return [e for e in c.trace if e.kind in ks]
