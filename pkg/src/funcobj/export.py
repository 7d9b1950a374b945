"""Trace and report serialization.

Text form, one event per line::

    step=<n> kind=<Kind> <field>=<value> ...

Record form, one JSON object per line with exactly the keys ``step``,
``kind`` and ``args``; ``args`` maps field names (see ``EVENT_FIELDS``) to
values encoded by ``values.value_to_json``. Non-value fields (ids, names,
ops) are plain JSON numbers/strings.
"""

from __future__ import annotations

import json
from typing import Iterable

from funcobj.records import EVENT_FIELDS, Event
from funcobj.values import Pair, Ref, Sym, _Unit, format_value, value_from_json, value_to_json

# Fields holding guest values; the rest are ids or names.
_VALUE_FIELDS = frozenset({"value", "result"})


def _text(v) -> str:
    if isinstance(v, (Sym, Ref, Pair, _Unit)) or type(v) is int:
        return format_value(v)
    if v is None:
        return "-"
    return str(v)


def event_text(ev: Event) -> str:
    parts = [f"step={ev.step}", f"kind={ev.kind}"]
    parts += [f"{k}={_text(v)}" for k, v in zip(EVENT_FIELDS[ev.kind], ev.args)]
    return " ".join(parts)


def event_record(ev: Event) -> str:
    args = {}
    for k, v in zip(EVENT_FIELDS[ev.kind], ev.args):
        args[k] = value_to_json(v) if k in _VALUE_FIELDS else v
    return json.dumps({"step": ev.step, "kind": ev.kind, "args": args}, separators=(",", ":"))


def event_from_record(line: str) -> Event:
    obj = json.loads(line)
    kind = obj["kind"]
    args = tuple(
        value_from_json(obj["args"][k]) if k in _VALUE_FIELDS else obj["args"][k] for k in EVENT_FIELDS[kind]
    )
    return Event(obj["step"], kind, args)


def trace_lines(events: Iterable[Event], fmt: str = "text", debug: bool = False) -> list[str]:
    """Render events; without ``debug`` only Emit events are shown."""
    evs = [e for e in events if debug or e.kind == "Emit"]
    if fmt == "records":
        return [event_record(e) for e in evs]
    if fmt != "text":
        raise ValueError(f"unknown trace format {fmt!r}")
    if debug:
        return [event_text(e) for e in evs]
    return [f"emit {format_value(e.args[0])}" for e in evs]


def observable_text(trace) -> str:
    return "".join(f"emit {format_value(v)}\n" for v in trace)


def parse_observable_text(text: str) -> tuple[str, ...]:
    """Read a golden observable-trace file back as rendered value strings."""
    out = []
    for raw in text.splitlines():
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if not line.startswith("emit "):
            raise ValueError(f"not an observable trace line: {raw!r}")
        out.append(line[5:])
    return tuple(out)
