"""Scheduling policies and the run loop.

Every policy is a chooser over ``runnable(c)``; the run loop applies
``core.step`` until the configuration is terminal, faulted, or the step limit
is reached.

Random scheduling uses SplitMix64 so that a seed replays identically in any
implementation::

    state = (state + 0x9E3779B97F4A7C15) mod 2**64
    z = state
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) mod 2**64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) mod 2**64
    z = z ^ (z >> 31)
    choice = runnable[z mod len(runnable)]

The seed is the initial state, reduced mod 2**64.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path
from typing import Iterator, Sequence, Union

from funcobj import core
from funcobj.core import Configuration
from funcobj.ir import ProgramDef
from funcobj.values import Value

_MASK = (1 << 64) - 1
DEADLOCK = "deadlock"


class SchedulerError(Exception):
    def __init__(self, code: str, detail: str = ""):
        self.code = code
        super().__init__(f"{code}: {detail}" if detail else code)


class SplitMix64:
    def __init__(self, seed: int):
        self.state = seed & _MASK

    def next(self) -> int:
        self.state = (self.state + 0x9E3779B97F4A7C15) & _MASK
        z = self.state
        z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK
        z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK
        return z ^ (z >> 31)


# -- policies -------------------------------------------------------------------


@dataclass(frozen=True)
class Inline:
    """Sequential execution on a call stack: a created instance runs to completion first."""

    def __str__(self) -> str:
        return "inline"


@dataclass(frozen=True)
class RoundRobin:
    quantum: int = 1

    def __post_init__(self):
        if self.quantum < 1:
            raise ValueError("round-robin quantum must be >= 1")

    def __str__(self) -> str:
        return f"rr:{self.quantum}"


@dataclass(frozen=True)
class Random:
    seed: int = 0

    def __str__(self) -> str:
        return f"random:{self.seed}"


@dataclass(frozen=True)
class Schedule:
    """A realized choice list. ``halt`` is set when the policy itself ended the run."""

    choices: tuple[int, ...] = ()
    halt: str | None = None

    def __len__(self) -> int:
        return len(self.choices)

    def __iter__(self) -> Iterator[int]:
        return iter(self.choices)

    def __getitem__(self, k):
        if isinstance(k, slice):
            return Schedule(self.choices[k])
        return self.choices[k]

    def dumps(self) -> str:
        lines = [str(i) for i in self.choices]
        if self.halt:
            lines.append(self.halt)
        return "\n".join(lines) + "\n"

    @classmethod
    def loads(cls, text: str) -> Schedule:
        choices, halt = [], None
        for raw in text.splitlines():
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if halt is not None:
                raise ValueError("nothing may follow the halt marker")
            if line == DEADLOCK:
                halt = DEADLOCK
            else:
                choices.append(int(line))
        return cls(tuple(choices), halt)


@dataclass(frozen=True)
class Script:
    schedule: Schedule

    def __init__(self, choices: Union[Schedule, Sequence[int]]):
        object.__setattr__(self, "schedule", as_schedule(choices))

    def __str__(self) -> str:
        return f"script[{len(self.schedule)}]"


Policy = Union[Inline, RoundRobin, Random, Script]


def as_schedule(s: Union[Schedule, Sequence[int]]) -> Schedule:
    return s if isinstance(s, Schedule) else Schedule(tuple(int(i) for i in s))


def parse_policy(text: str, seed: int | None = None) -> Policy:
    """Parse ``inline | rr[:q] | random[:seed] | script:FILE``."""
    name, _, arg = text.partition(":")
    if name == "inline" and not arg:
        return Inline()
    if name == "rr":
        return RoundRobin(int(arg) if arg else 1)
    if name == "random":
        if seed is None:
            seed = int(arg) if arg else 0
        return Random(seed)
    if name == "script" and arg:
        return Script(Schedule.loads(Path(arg).read_text()))
    raise ValueError(f"unknown scheduler {text!r}")


# -- choosers -------------------------------------------------------------------

_STOP = object()


class _InlineChooser:
    def __init__(self):
        self.stack = [core.ENTRY_ID]

    def __call__(self, c: Configuration, ready: list[int]):
        for ev in _last_step_events(c):
            if ev.kind == "Spawn" and ev["child"] in c.instances:
                self.stack.append(ev["child"])
            elif ev.kind == "Send" and ev["dst"] in c.mechanisms and ev["src"] not in c.mechanisms:
                self.stack.append(ev["dst"])
            elif ev.kind == "ObjReq":
                self.stack.append(ev["obj"])
        while self.stack:
            top = self.stack[-1]
            if top in ready:
                return top
            inst = c.instances.get(top)
            if inst is not None:
                if inst.status.kind == "finished":
                    self.stack.pop()
                    continue
                # the top of the stack waits and nothing above it can ever run
                return DEADLOCK
            obj = c.objects.get(top)
            if obj is not None and obj.activations:
                return DEADLOCK
            self.stack.pop()
        if ready:
            self.stack.append(ready[0])
            return ready[0]
        return _STOP


def _last_step_events(c: Configuration):
    k = c.step_count - 1
    out = []
    for ev in reversed(c.trace):
        if ev.step != k:
            break
        out.append(ev)
    return reversed(out)


class _RoundRobinChooser:
    def __init__(self, quantum: int):
        self.quantum = quantum
        self.current: int | None = None
        self.left = 0

    def __call__(self, c: Configuration, ready: list[int]):
        if self.current in ready and self.left > 0:
            self.left -= 1
            return self.current
        after = [i for i in ready if self.current is None or i > self.current]
        self.current = after[0] if after else ready[0]
        self.left = self.quantum - 1
        return self.current


class _RandomChooser:
    def __init__(self, seed: int):
        self.rng = SplitMix64(seed)

    def __call__(self, c: Configuration, ready: list[int]):
        return ready[self.rng.next() % len(ready)]


class _ScriptChooser:
    def __init__(self, schedule: Schedule):
        self.schedule = schedule
        self.k = 0

    def __call__(self, c: Configuration, ready: list[int]):
        if self.k >= len(self.schedule.choices):
            return DEADLOCK if self.schedule.halt == DEADLOCK else _STOP
        choice = self.schedule.choices[self.k]
        self.k += 1
        if choice not in ready:
            raise SchedulerError(
                "SCRIPT_CHOICE_NOT_RUNNABLE", f"choice {self.k - 1} is #{choice}, runnable set is {ready}"
            )
        return choice


def _chooser(policy: Policy):
    if isinstance(policy, Inline):
        return _InlineChooser()
    if isinstance(policy, RoundRobin):
        return _RoundRobinChooser(policy.quantum)
    if isinstance(policy, Random):
        return _RandomChooser(policy.seed)
    if isinstance(policy, Script):
        return _ScriptChooser(policy.schedule)
    raise TypeError(f"not a scheduler policy: {policy!r}")


# -- running --------------------------------------------------------------------


@dataclass(frozen=True)
class Verdict:
    kind: str  # finished | deadlock | fault | step_limit
    detail: object = None

    def __str__(self) -> str:
        if self.kind == "finished":
            return f"finished({self.detail})"
        if self.kind == "fault":
            return f"fault({self.detail[0]})"
        return self.kind


def terminal_verdict(c: Configuration) -> Verdict | None:
    """Verdict of a configuration with nothing left to run, else None."""
    if c.fault is not None:
        return Verdict("fault", c.fault)
    if core.runnable(c):
        return None
    if c.blocked():
        return Verdict("deadlock")
    entry = c.instances[core.ENTRY_ID]
    return Verdict("finished", entry.status.detail)


@dataclass(frozen=True)
class RunResult:
    verdict: Verdict
    final: Configuration
    schedule: Schedule

    @property
    def observable(self) -> tuple[Value, ...]:
        return core.observable_trace(self.final)


def run(p: ProgramDef, policy: Policy, step_limit: int = 10_000, strict_oo: bool = False) -> RunResult:
    if step_limit < 1:
        raise ValueError("step_limit must be >= 1")
    c = core.init(p, strict_oo)
    choose = _chooser(policy)
    choices: list[int] = []
    while True:
        v = terminal_verdict(c)
        if v is not None:
            if v.kind == "deadlock":
                c = core.with_deadlock(c)
            return RunResult(v, c, Schedule(tuple(choices)))
        if len(choices) >= step_limit:
            return RunResult(Verdict("step_limit"), c, Schedule(tuple(choices)))
        pick = choose(c, core.runnable(c))
        if pick is _STOP:
            return RunResult(Verdict("step_limit"), c, Schedule(tuple(choices)))
        if pick == DEADLOCK:
            c = core.with_deadlock(c)
            return RunResult(Verdict("deadlock"), c, Schedule(tuple(choices), DEADLOCK))
        c = core.step(c, pick)
        choices.append(pick)


def replay(p: ProgramDef, schedule: Union[Schedule, Sequence[int]], strict_oo: bool = False) -> RunResult:
    s = as_schedule(schedule)
    return run(p, Script(s), step_limit=len(s) + 1, strict_oo=strict_oo)
