"""Communication mechanisms as natively implemented system instances.

A mechanism owns a location and the protocol that guards it. Clients reach it
only by sending a request value to its Ref and receiving the reply in their
own mailbox. Request and reply payloads::

    lock        (:ACQ . r)  -> :GRANT         (:REL . r)  -> :OK
    basiccomm   (:WRITE . (r . v)) -> :OK     (:READ . r) -> current value (0 initially)
    statuschan  (:WRITE . (r . v)) -> :OK     (:READ . r) -> v
    bidirchan   (:ATTACH . r) -> :A or :B, then WRITE/READ as statuschan

``r`` is the requester's Ref; replies always go to it. Requests that are not
yet enabled (lock held, channel slot in the wrong state) wait in ``pending``
and are served first-come first-served once enabled. Everything in this
module is pure: state in, state and reply out. The stepping itself lives in
``funcobj.core``.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Callable, Union

from funcobj.values import UNIT, Pair, Ref, Sym, Value

LOCK = "lock"
BASICCOMM = "basiccomm"
STATUSCHAN = "statuschan"
BIDIRCHAN = "bidirchan"
KINDS = (LOCK, BASICCOMM, STATUSCHAN, BIDIRCHAN)
CHANNEL_KINDS = (BASICCOMM, STATUSCHAN, BIDIRCHAN)

ACQ, REL, GRANT, OK = Sym("ACQ"), Sym("REL"), Sym("GRANT"), Sym("OK")
WRITE, READ, ATTACH = Sym("WRITE"), Sym("READ"), Sym("ATTACH")
PARTY_A, PARTY_B = Sym("A"), Sym("B")

EMPTY, FULL = "EMPTY", "FULL"
FULL_AB, FULL_BA = "FULL_AB", "FULL_BA"


class MechanismError(Exception):
    """Protocol violation; ``code`` is MECH_PROTOCOL or LOCK_PROTOCOL."""

    def __init__(self, code: str, detail: str):
        self.code = code
        self.detail = detail
        super().__init__(f"{code}: {detail}")


@dataclass(frozen=True)
class MechRequest:
    op: str
    requester: int
    value: Value = UNIT
    seq: int = 0


@dataclass(frozen=True)
class LockState:
    holder: int | None = None


@dataclass(frozen=True)
class CommState:
    location: Value = 0


@dataclass(frozen=True)
class StatusState:
    status: str = EMPTY
    slot: Value = UNIT


@dataclass(frozen=True)
class BidirState:
    party_a: int | None = None
    party_b: int | None = None
    state: str = EMPTY
    slot: Value = UNIT

    def party(self, ref: int) -> str | None:
        if ref == self.party_a:
            return "A"
        if ref == self.party_b:
            return "B"
        return None


MechState = Union[LockState, CommState, StatusState, BidirState]

_OPS = {
    LOCK: ("ACQ", "REL"),
    BASICCOMM: ("WRITE", "READ"),
    STATUSCHAN: ("WRITE", "READ"),
    BIDIRCHAN: ("ATTACH", "WRITE", "READ"),
}


def decode_request(kind: str, msg: Value, seq: int = 0) -> MechRequest:
    bad = MechanismError("MECH_PROTOCOL", f"malformed {kind} request {msg}")
    if not (isinstance(msg, Pair) and isinstance(msg.first, Sym)):
        raise bad
    op = msg.first.name
    if op not in _OPS[kind]:
        raise bad
    body = msg.second
    if op == "WRITE":
        if not (isinstance(body, Pair) and isinstance(body.first, Ref)):
            raise bad
        return MechRequest(op, body.first.ordinal, body.second, seq)
    if not isinstance(body, Ref):
        raise bad
    return MechRequest(op, body.ordinal, UNIT, seq)


# -- lock ---------------------------------------------------------------------


def lock_enabled(s: LockState, req: MechRequest) -> bool:
    return req.op == "REL" or s.holder is None


def lock_service(s: LockState, req: MechRequest) -> tuple[LockState, Value]:
    if req.op == "ACQ":
        assert s.holder is None
        return LockState(req.requester), GRANT
    if s.holder != req.requester:
        raise MechanismError("LOCK_PROTOCOL", f"#{req.requester} released a lock held by {_who(s.holder)}")
    return LockState(None), OK


def _who(holder: int | None) -> str:
    return "nobody" if holder is None else f"#{holder}"


# -- basic communication --------------------------------------------------------


def basiccomm_enabled(s: CommState, req: MechRequest) -> bool:
    return True


def basiccomm_service(s: CommState, req: MechRequest) -> tuple[CommState, Value]:
    if req.op == "WRITE":
        return CommState(req.value), OK
    return s, s.location


# -- status channel -------------------------------------------------------------


def statuschan_enabled(s: StatusState, req: MechRequest) -> bool:
    return (req.op == "WRITE") == (s.status == EMPTY)


def statuschan_service(s: StatusState, req: MechRequest) -> tuple[StatusState, Value]:
    if req.op == "WRITE":
        assert s.status == EMPTY
        return StatusState(FULL, req.value), OK
    assert s.status == FULL
    return StatusState(EMPTY, UNIT), s.slot


# -- bidirectional channel ------------------------------------------------------


def bidirchan_enabled(s: BidirState, req: MechRequest) -> bool:
    if req.op == "ATTACH":
        return True
    party = s.party(req.requester)
    if party is None:
        # rejected when served, so the fault is raised
        return True
    if req.op == "WRITE":
        return s.state == EMPTY
    return s.state == (FULL_BA if party == "A" else FULL_AB)


def bidirchan_service(s: BidirState, req: MechRequest) -> tuple[BidirState, Value]:
    if req.op == "ATTACH":
        if s.party_a is None:
            return replace(s, party_a=req.requester), PARTY_A
        if s.party_b is None:
            return replace(s, party_b=req.requester), PARTY_B
        raise MechanismError("MECH_PROTOCOL", f"third ATTACH by #{req.requester}")
    party = s.party(req.requester)
    if party is None:
        raise MechanismError("MECH_PROTOCOL", f"{req.op} by unattached #{req.requester}")
    if req.op == "WRITE":
        return replace(s, state=FULL_AB if party == "A" else FULL_BA, slot=req.value), OK
    return replace(s, state=EMPTY, slot=UNIT), s.slot


_ENABLED: dict[str, Callable] = {
    LOCK: lock_enabled,
    BASICCOMM: basiccomm_enabled,
    STATUSCHAN: statuschan_enabled,
    BIDIRCHAN: bidirchan_enabled,
}
SERVICES: dict[str, Callable] = {
    LOCK: lock_service,
    BASICCOMM: basiccomm_service,
    STATUSCHAN: statuschan_service,
    BIDIRCHAN: bidirchan_service,
}
_INITIAL: dict[str, Callable[[], MechState]] = {
    LOCK: LockState,
    BASICCOMM: CommState,
    STATUSCHAN: StatusState,
    BIDIRCHAN: BidirState,
}


@dataclass(frozen=True)
class Mechanism:
    """A mechanism instance: kind-specific state plus inbox and deferred requests."""

    id: int
    kind: str
    state: MechState
    inbox: tuple = ()
    pending: tuple[MechRequest, ...] = ()
    arrivals: int = 0

    @property
    def waiters(self) -> tuple[int, ...]:
        """Requesters queued for a lock grant, in arrival order."""
        return tuple(r.requester for r in self.pending if r.op == "ACQ")

    def enabled(self, req: MechRequest) -> bool:
        return _ENABLED[self.kind](self.state, req)

    def next_pending(self) -> int | None:
        """Index of the earliest-arrived deferred request that can be served now."""
        for i, req in enumerate(self.pending):
            if self.enabled(req):
                return i
        return None

    def runnable(self) -> bool:
        return bool(self.inbox) or self.next_pending() is not None


def make_mechanism(ident: int, kind: str, params: tuple = ()) -> Mechanism:
    if kind not in KINDS:
        raise ValueError(f"unknown mechanism kind {kind!r}")
    if params:
        raise ValueError(f"mechanism {kind} takes no parameters")
    return Mechanism(ident, kind, _INITIAL[kind]())


def serve(m: Mechanism, req: MechRequest) -> tuple[MechState, Value]:
    return SERVICES[m.kind](m.state, req)
