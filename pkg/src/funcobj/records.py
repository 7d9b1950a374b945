"""Runtime records shared by the stepping core, mechanisms and objects."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any, NamedTuple

from funcobj.values import UNIT, Value


@dataclass(frozen=True, slots=True)
class Status:
    kind: str  # runnable | blocked | finished
    detail: Any = None  # blocked: "recv" or "call"; finished: result value

    def __str__(self) -> str:
        if self.kind == "runnable":
            return "runnable"
        return f"{self.kind}({self.detail})"


RUNNABLE = Status("runnable")
BLOCKED_RECV = Status("blocked", "recv")
BLOCKED_CALL = Status("blocked", "call")


def finished(v: Value) -> Status:
    return Status("finished", v)


class Envelope(NamedTuple):
    src: int
    value: Value


class Caller(NamedTuple):
    """Where a call or synchronous request delivers its result."""

    id: int
    dst: str
    serial: int | None = None  # activation serial when the caller is a method activation


@dataclass(slots=True)
class Instance:
    """A function instance, or a method activation inside an object.

    Activations carry their object's id and a per-object ``serial``; they read
    the object's inbox instead of ``mailbox``.
    """

    id: int
    fn: str
    locals: dict[str, Value]
    ip: int = 0
    status: Status = RUNNABLE
    mailbox: tuple[Envelope, ...] = ()
    waiting_caller: Caller | None = None
    serial: int | None = None

    def copy(self) -> Instance:
        return Instance(self.id, self.fn, dict(self.locals), self.ip, self.status, self.mailbox, self.waiting_caller, self.serial)


# Argument names per event kind, in order. Emit is the only observable kind.
EVENT_FIELDS: dict[str, tuple[str, ...]] = {
    "Emit": ("value",),
    "Spawn": ("parent", "child", "fname"),
    "Send": ("src", "dst", "value"),
    "Recv": ("dst", "value", "src"),
    "Reply": ("src", "dst", "value"),
    "MechOp": ("mech", "op", "party", "value"),
    "ObjReq": ("obj", "method", "requester"),
    "Activate": ("obj", "method", "serial"),
    "Retire": ("obj", "serial", "value"),
    "State": ("obj", "var", "op", "value"),
    "Cell": ("instance", "op", "cell", "value"),
    "Deadlock": (),
    "Fault": ("kind", "detail"),
    "Halt": ("result",),
}


@dataclass(frozen=True, slots=True)
class Event:
    step: int
    kind: str
    args: tuple = ()
    actor: int | None = field(default=None)

    def __getitem__(self, name: str) -> Any:
        return self.args[EVENT_FIELDS[self.kind].index(name)]

    def asdict(self) -> dict[str, Any]:
        return dict(zip(EVENT_FIELDS[self.kind], self.args))


def emit_values(events) -> tuple[Value, ...]:
    return tuple(e.args[0] for e in events if e.kind == "Emit")


__all__ = [
    "BLOCKED_CALL",
    "BLOCKED_RECV",
    "Caller",
    "EVENT_FIELDS",
    "Envelope",
    "Event",
    "Instance",
    "RUNNABLE",
    "Status",
    "UNIT",
    "emit_values",
    "finished",
]
