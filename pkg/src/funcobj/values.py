"""Guest values: integers, symbols, instance references, pairs and unit.

Integers are plain Python ``int``. The other variants are small frozen
dataclasses, so structural equality and hashing come for free and a ``Ref``
never compares equal to the integer carrying the same ordinal.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Any, Union


@dataclass(frozen=True, slots=True)
class Sym:
    name: str

    def __str__(self) -> str:
        return ":" + self.name


@dataclass(frozen=True, slots=True)
class Ref:
    """Identity of an instance, mechanism, object or cell.

    Guest code cannot build one from an integer; refs only come out of
    creation instructions and ``self``.
    """

    ordinal: int

    def __str__(self) -> str:
        return f"#{self.ordinal}"


@dataclass(frozen=True, slots=True)
class Pair:
    first: Value
    second: Value

    def __str__(self) -> str:
        return f"({format_value(self.first)} . {format_value(self.second)})"


class _Unit:
    __slots__ = ()
    _instance: _Unit | None = None

    def __new__(cls) -> _Unit:
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self) -> str:
        return "UNIT"

    def __str__(self) -> str:
        return "unit"

    def __reduce__(self):
        return (_Unit, ())


UNIT = _Unit()

Value = Union[int, Sym, Ref, Pair, _Unit]


def is_int(v: object) -> bool:
    return type(v) is int


def is_value(v: object) -> bool:
    if type(v) is int or isinstance(v, (Sym, Ref, _Unit)):
        return True
    if isinstance(v, Pair):
        return is_value(v.first) and is_value(v.second)
    return False


def format_value(v: Value) -> str:
    return str(v)


def value_to_json(v: Value) -> Any:
    """Encode a value for the line-delimited record format.

    Int -> number, Unit -> null, Sym -> {"sym": name}, Ref -> {"ref": n},
    Pair -> [first, second].
    """
    if type(v) is int:
        return v
    if v is UNIT:
        return None
    if isinstance(v, Sym):
        return {"sym": v.name}
    if isinstance(v, Ref):
        return {"ref": v.ordinal}
    if isinstance(v, Pair):
        return [value_to_json(v.first), value_to_json(v.second)]
    raise TypeError(f"not a guest value: {v!r}")


def value_from_json(obj: Any) -> Value:
    if obj is None:
        return UNIT
    if type(obj) is int:
        return obj
    if isinstance(obj, list) and len(obj) == 2:
        return Pair(value_from_json(obj[0]), value_from_json(obj[1]))
    if isinstance(obj, dict) and set(obj) == {"sym"}:
        return Sym(obj["sym"])
    if isinstance(obj, dict) and set(obj) == {"ref"}:
        return Ref(obj["ref"])
    raise ValueError(f"cannot decode value from {obj!r}")


def refs_in(v: Value):
    """Yield every Ref nested inside ``v``."""
    if isinstance(v, Ref):
        yield v
    elif isinstance(v, Pair):
        yield from refs_in(v.first)
        yield from refs_in(v.second)
