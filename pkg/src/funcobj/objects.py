"""Objects that schedule their own method activations.

The global scheduler only picks an object; the object then decides what that
step means. Priority is fixed: start the next queued request if the policy
allows it, otherwise step one live activation. ``serialized`` objects allow
one live activation at a time; ``interleaved`` objects round-robin their
activations in creation order.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

from funcobj.ir import ObjectDef
from funcobj.records import Caller, Envelope, Instance
from funcobj.values import Value

SERIALIZED = "serialized"
INTERLEAVED = "interleaved"


class ObjectProtocolError(Exception):
    code = "OBJ_PROTOCOL"


@dataclass(frozen=True)
class Request:
    method: str
    args: tuple[Value, ...]
    requester: int
    reply_to: Caller | None = None


@dataclass
class ObjectInstance:
    id: int
    name: str
    policy: str
    state: dict[str, Value]
    queue: tuple[Request, ...] = ()
    activations: tuple[Instance, ...] = ()
    inbox: tuple[Envelope, ...] = ()
    next_serial: int = 0
    last_serial: int = -1
    methods: dict[str, int] = field(default_factory=dict, compare=False, repr=False)

    def copy(self) -> ObjectInstance:
        return replace(self, state=dict(self.state))

    @property
    def live(self) -> int:
        return len(self.activations)

    def can_start(self) -> bool:
        if not self.queue:
            return False
        return self.policy == INTERLEAVED or not self.activations

    def next_activation(self) -> int | None:
        """Index of the activation to step: round-robin by serial after the last one stepped."""
        ready = [i for i, a in enumerate(self.activations) if a.status.kind == "runnable"]
        if not ready:
            return None
        for i in ready:
            if self.activations[i].serial > self.last_serial:
                return i
        return ready[0]

    def runnable(self) -> bool:
        return self.can_start() or self.next_activation() is not None


def new_object(ident: int, d: ObjectDef) -> ObjectInstance:
    return ObjectInstance(
        ident,
        d.name,
        d.method_policy,
        {n: v for n, v in d.statevars},
        methods={m.name: len(m.params) for m in d.methods},
    )


def issue_request(obj: ObjectInstance, req: Request) -> ObjectInstance:
    """Return ``obj`` with ``req`` appended to its queue."""
    arity = obj.methods.get(req.method)
    if arity is None:
        raise ObjectProtocolError(f"object {obj.name} has no method {req.method}")
    if arity != len(req.args):
        raise ObjectProtocolError(f"{obj.name}.{req.method} takes {arity} arguments, got {len(req.args)}")
    return replace(obj, queue=obj.queue + (req,))


def start_request(obj: ObjectInstance, params: tuple[str, ...]) -> tuple[ObjectInstance, Instance, Request]:
    """Dequeue the head request and create its activation."""
    req = obj.queue[0]
    act = Instance(
        obj.id,
        f"{obj.name}.{req.method}",
        dict(zip(params, req.args)),
        waiting_caller=req.reply_to,
        serial=obj.next_serial,
    )
    new = replace(obj, queue=obj.queue[1:], activations=obj.activations + (act,), next_serial=obj.next_serial + 1)
    return new, act, req
