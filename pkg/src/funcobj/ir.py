"""Guest instruction set: instructions, function/object/program definitions.

An operand is one of: a local name (``str``), an integer literal, a symbol
literal (``Sym``) or the unit literal. Which of these an instruction accepts
at each position is fixed by ``SIGNATURES``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterator, Mapping, Union

from funcobj.values import UNIT, Sym, Value, _Unit

Operand = Union[str, int, Sym, _Unit]

# Operand roles. A trailing "*" marks a variadic tail, "?" an optional last slot.
#   dst    local written by the instruction
#   val    value operand (local name or literal)
#   lit    literal only
#   label / fname / kind / objname / method   bare names resolved statically
SIGNATURES: dict[str, tuple[str, ...]] = {
    "const": ("dst", "lit"),
    "move": ("dst", "val"),
    "add": ("dst", "val", "val"),
    "pair": ("dst", "val", "val"),
    "fst": ("dst", "val"),
    "snd": ("dst", "val"),
    "jmp": ("label",),
    "br_eq": ("val", "val", "label"),
    "call": ("dst", "fname", "val*"),
    "spawn": ("dst", "fname", "val*"),
    "self": ("dst",),
    "send": ("val", "val"),
    "recv": ("dst",),
    "newcell": ("dst",),
    "cellread": ("dst", "val"),
    "cellwrite": ("val", "val"),
    "mech": ("dst", "kind", "val*"),
    "newobj": ("dst", "objname"),
    "req": ("dst", "val", "method", "val*"),
    "reqasync": ("val", "method", "val*"),
    "emit": ("val",),
    "return": ("val?",),
}

MNEMONICS = frozenset(SIGNATURES)
RAW_MEMORY_OPS = frozenset({"newcell", "cellread", "cellwrite"})
TERMINATORS = frozenset({"return", "jmp"})
UNIT_LITERAL = "unit"
POLICIES = ("serialized", "interleaved")


def roles(op: str, nargs: int) -> list[str]:
    """Expand the signature of ``op`` to one role per operand."""
    sig = SIGNATURES[op]
    out: list[str] = []
    for i in range(nargs):
        if i < len(sig):
            out.append(sig[i].rstrip("*?"))
        elif sig and sig[-1].endswith("*"):
            out.append(sig[-1][:-1])
        else:
            out.append("extra")
    return out


def arity_ok(op: str, nargs: int) -> bool:
    sig = SIGNATURES[op]
    if sig and sig[-1].endswith("*"):
        return nargs >= len(sig) - 1
    if sig and sig[-1].endswith("?"):
        return len(sig) - 1 <= nargs <= len(sig)
    return nargs == len(sig)


@dataclass(frozen=True)
class Instr:
    op: str
    args: tuple[Operand, ...] = ()
    line: int | None = field(default=None, compare=False, repr=False)
    col: int | None = field(default=None, compare=False, repr=False)

    def operands(self) -> Iterator[tuple[str, Operand]]:
        yield from zip(roles(self.op, len(self.args)), self.args)

    def reads(self) -> list[str]:
        return [a for r, a in self.operands() if r == "val" and isinstance(a, str)]

    def writes(self) -> str | None:
        for r, a in self.operands():
            if r == "dst":
                return a  # type: ignore[return-value]
        return None

    def label(self) -> str | None:
        for r, a in self.operands():
            if r == "label":
                return a  # type: ignore[return-value]
        return None

    def __str__(self) -> str:
        return format_instr(self)


@dataclass(frozen=True)
class FunctionDef:
    name: str
    params: tuple[str, ...]
    body: tuple[Instr, ...]
    labels: Mapping[str, int] = field(default_factory=dict)
    line: int | None = field(default=None, compare=False, repr=False)


@dataclass(frozen=True)
class ObjectDef:
    name: str
    statevars: tuple[tuple[str, int], ...]
    methods: tuple[FunctionDef, ...]
    method_policy: str = "serialized"
    line: int | None = field(default=None, compare=False, repr=False)

    def method(self, name: str) -> FunctionDef | None:
        for m in self.methods:
            if m.name == name:
                return m
        return None

    @property
    def statevar_names(self) -> frozenset[str]:
        return frozenset(n for n, _ in self.statevars)


@dataclass(frozen=True)
class ProgramDef:
    functions: tuple[FunctionDef, ...]
    objects: tuple[ObjectDef, ...] = ()
    entry: str = "main"

    @cached_property
    def _index(self) -> dict[str, FunctionDef]:
        idx = {f.name: f for f in self.functions}
        for o in self.objects:
            for m in o.methods:
                idx[f"{o.name}.{m.name}"] = m
        return idx

    def function(self, name: str) -> FunctionDef | None:
        for f in self.functions:
            if f.name == name:
                return f
        return None

    def object(self, name: str) -> ObjectDef | None:
        for o in self.objects:
            if o.name == name:
                return o
        return None

    def resolve(self, qualname: str) -> FunctionDef:
        """Look up a function name or an ``Object.method`` qualified name."""
        return self._index[qualname]

    def bodies(self) -> Iterator[tuple[str, FunctionDef, ObjectDef | None]]:
        for f in self.functions:
            yield f.name, f, None
        for o in self.objects:
            for m in o.methods:
                yield f"{o.name}.{m.name}", m, o


@dataclass(frozen=True)
class Diagnostic:
    code: str
    message: str
    function: str | None = None
    index: int | None = None
    line: int | None = None
    col: int | None = None

    @property
    def tag(self) -> str:
        if self.function is not None and self.index is not None:
            return f"{self.code}@{self.function}:{self.index}"
        return self.code

    def __str__(self) -> str:
        pos = f"{self.line}:{self.col}: " if self.line is not None else ""
        return f"{pos}{self.tag}: {self.message}"


def function(name: str, params, body, labels=None) -> FunctionDef:
    """Build a FunctionDef, appending the implicit ``return unit`` if needed."""
    body = tuple(body)
    if not body or body[-1].op not in TERMINATORS:
        body = body + (Instr("return", (UNIT,)),)
    return FunctionDef(name, tuple(params), body, dict(labels or {}))


def format_operand(a: Operand) -> str:
    if isinstance(a, str):
        return a
    if a is UNIT:
        return UNIT_LITERAL
    return str(a)


def format_instr(ins: Instr) -> str:
    if ins.op == "return" and ins.args in ((), (UNIT,)):
        return "return"
    return " ".join([ins.op, *map(format_operand, ins.args)])


def _format_fn(f: FunctionDef, indent: str) -> list[str]:
    by_index: dict[int, list[str]] = {}
    for lab, i in f.labels.items():
        by_index.setdefault(i, []).append(lab)
    lines = [f"{indent}fn {f.name}({', '.join(f.params)}) {{"]
    for i, ins in enumerate(f.body):
        prefix = "".join(f"{lab}: " for lab in by_index.get(i, []))
        lines.append(f"{indent}    {prefix}{format_instr(ins)}")
    lines.append(f"{indent}}}")
    return lines


def print_program(p: ProgramDef) -> str:
    """Render a program in canonical source form."""
    out: list[str] = []
    for f in p.functions:
        out.extend(_format_fn(f, ""))
        out.append("")
    for o in p.objects:
        out.append(f"obj {o.name} [{o.method_policy}] {{")
        for n, v in o.statevars:
            out.append(f"    state {n} = {v}")
        for m in o.methods:
            out.extend(_format_fn(m, "    "))
        out.append("}")
        out.append("")
    return "\n".join(out)
