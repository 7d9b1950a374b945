"""Static checks that make a parsed program safe to execute.

A program with no diagnostics never hits an unknown local, label, function,
object or method at run time. ``strict_oo`` additionally rejects the raw
shared-memory instructions so that instances can only interact by messages.
"""

from __future__ import annotations

from funcobj.ir import (
    MNEMONICS,
    RAW_MEMORY_OPS,
    Diagnostic,
    FunctionDef,
    Instr,
    ObjectDef,
    ProgramDef,
    arity_ok,
    roles,
)
from funcobj.mechanisms import KINDS as MECHANISM_KINDS


class ValidationError(Exception):
    def __init__(self, diagnostics: list[Diagnostic]):
        self.diagnostics = diagnostics
        super().__init__("\n".join(map(str, diagnostics)))


def _successors(f: FunctionDef, i: int) -> list[int]:
    ins = f.body[i]
    if ins.op == "return":
        return []
    nxt = [i + 1] if i + 1 < len(f.body) else [len(f.body)]
    lab = ins.label()
    target = f.labels.get(lab) if lab is not None else None
    if ins.op == "jmp":
        return [target] if target is not None else []
    if ins.op == "br_eq" and target is not None:
        return nxt + [target]
    return nxt


def _defined_before(f: FunctionDef, initial: frozenset[str]) -> dict[int, frozenset[str]]:
    """Locals definitely written on every path reaching each reachable instruction."""
    n = len(f.body)
    ins_sets: dict[int, frozenset[str]] = {0: initial}
    work = [0]
    while work:
        i = work.pop()
        cur = ins_sets[i]
        w = f.body[i].writes()
        out = cur | {w} if w is not None else cur
        for j in _successors(f, i):
            if j >= n:
                continue
            old = ins_sets.get(j)
            new = out if old is None else old & out
            if new != old:
                ins_sets[j] = new
                work.append(j)
    return ins_sets


def _falls_off(f: FunctionDef, reachable) -> int | None:
    n = len(f.body)
    for i in sorted(reachable):
        if n in _successors(f, i):
            return i
    return None


def validate(p: ProgramDef, strict_oo: bool = False) -> list[Diagnostic]:
    """Return diagnostics for ``p``; an empty list means it is executable."""
    diags: list[Diagnostic] = []

    seen: set[str] = set()
    for name in [f.name for f in p.functions] + [o.name for o in p.objects]:
        if name in seen:
            diags.append(Diagnostic("DUPLICATE_NAME", f"duplicate name {name}"))
        seen.add(name)

    entry = p.function(p.entry)
    if entry is None:
        diags.append(Diagnostic("NO_ENTRY", f"entry function {p.entry} is not defined"))
    elif entry.params:
        diags.append(Diagnostic("ENTRY_PARAMS", f"entry function {p.entry} must take no parameters"))

    statevar_owner: dict[str, str] = {}
    for o in p.objects:
        for var, _ in o.statevars:
            statevar_owner.setdefault(var, o.name)

    for o in p.objects:
        diags.extend(_check_object(o))
    for qual, f, owner in p.bodies():
        diags.extend(_check_body(p, qual, f, owner, statevar_owner, strict_oo))
    return diags


def _check_object(o: ObjectDef) -> list[Diagnostic]:
    out = []
    names = [m.name for m in o.methods]
    for n in sorted({n for n in names if names.count(n) > 1}):
        out.append(Diagnostic("DUPLICATE_NAME", f"duplicate method {n} in object {o.name}"))
    vars_ = [v for v, _ in o.statevars]
    for n in sorted({n for n in vars_ if vars_.count(n) > 1}):
        out.append(Diagnostic("DUPLICATE_NAME", f"duplicate state variable {n} in object {o.name}"))
    for m in o.methods:
        for prm in m.params:
            if prm in o.statevar_names:
                out.append(Diagnostic("DUPLICATE_NAME", f"parameter {prm} of {o.name}.{m.name} shadows a state variable"))
    return out


def _diag(code, msg, qual, i, ins: Instr) -> Diagnostic:
    return Diagnostic(code, msg, function=qual, index=i, line=ins.line, col=ins.col)


def _check_body(
    p: ProgramDef,
    qual: str,
    f: FunctionDef,
    owner: ObjectDef | None,
    statevar_owner: dict[str, str],
    strict_oo: bool,
) -> list[Diagnostic]:
    out: list[Diagnostic] = []
    if len(set(f.params)) != len(f.params):
        out.append(Diagnostic("DUPLICATE_NAME", f"duplicate parameter in {qual}", function=qual))
    if not f.body:
        out.append(Diagnostic("EMPTY_BODY", f"{qual} has an empty body", function=qual))
        return out

    statevars = owner.statevar_names if owner else frozenset()
    structural_ok = True
    for i, ins in enumerate(f.body):
        if ins.op not in MNEMONICS:
            out.append(_diag("UNKNOWN_MNEMONIC", f"unknown instruction {ins.op}", qual, i, ins))
            structural_ok = False
            continue
        if not arity_ok(ins.op, len(ins.args)):
            out.append(_diag("BAD_ARITY", f"{ins.op} has {len(ins.args)} operands", qual, i, ins))
            structural_ok = False
            continue
        for role, a in zip(roles(ins.op, len(ins.args)), ins.args):
            if role not in ("val", "lit", "extra") and not isinstance(a, str):
                out.append(_diag("BAD_OPERAND", f"{ins.op}: {role} must be a name", qual, i, ins))
                structural_ok = False
            if role == "lit" and isinstance(a, str):
                out.append(_diag("BAD_OPERAND", f"{ins.op}: expected a literal", qual, i, ins))
                structural_ok = False
        lab = ins.label()
        if lab is not None and lab not in f.labels:
            out.append(_diag("UNKNOWN_LABEL", f"unknown label {lab}", qual, i, ins))
            structural_ok = False
        out.extend(_check_refs(p, qual, i, ins, statevars))
        if strict_oo and ins.op in RAW_MEMORY_OPS:
            out.append(_diag("STRICT_OO_RAW_MEMORY", f"{ins.op} touches raw shared memory", qual, i, ins))
    for lab, idx in f.labels.items():
        if not 0 <= idx < len(f.body):
            out.append(Diagnostic("UNKNOWN_LABEL", f"label {lab} points outside {qual}", function=qual))
            structural_ok = False
    if not structural_ok:
        return out

    defined = _defined_before(f, frozenset(f.params) | statevars)
    off = _falls_off(f, defined)
    if off is not None:
        out.append(_diag("MISSING_RETURN", f"control falls off the end of {qual}", qual, off, f.body[off]))
    for i in sorted(defined):
        ins = f.body[i]
        for name in ins.reads():
            if name in defined[i]:
                continue
            if name in statevar_owner and name not in statevars:
                out.append(
                    _diag(
                        "STATEVAR_OUTSIDE_OBJECT",
                        f"{name} is a state variable of {statevar_owner[name]} and is not accessible here",
                        qual, i, ins,
                    )
                )
            else:
                out.append(_diag("UNDECLARED_LOCAL", f"{name} may be read before it is written", qual, i, ins))
    return out


def _check_refs(p: ProgramDef, qual: str, i: int, ins: Instr, statevars: frozenset[str]) -> list[Diagnostic]:
    out: list[Diagnostic] = []
    op, args = ins.op, ins.args
    if op in ("call", "spawn"):
        target = p.function(args[1])  # type: ignore[arg-type]
        if target is None:
            out.append(_diag("UNKNOWN_FUNCTION", f"unknown function {args[1]}", qual, i, ins))
        elif len(target.params) != len(args) - 2:
            out.append(
                _diag("ARITY_MISMATCH", f"{args[1]} takes {len(target.params)} arguments, got {len(args) - 2}", qual, i, ins)
            )
    elif op == "newobj":
        if p.object(args[1]) is None:  # type: ignore[arg-type]
            out.append(_diag("UNKNOWN_OBJECT", f"unknown object {args[1]}", qual, i, ins))
    elif op == "mech":
        if args[1] not in MECHANISM_KINDS:
            out.append(_diag("UNKNOWN_MECHANISM", f"unknown mechanism kind {args[1]}", qual, i, ins))
        elif len(args) > 2:
            out.append(_diag("MECH_PARAMS", f"mechanism {args[1]} takes no parameters", qual, i, ins))
    elif op in ("req", "reqasync"):
        method, nargs = (args[2], len(args) - 3) if op == "req" else (args[1], len(args) - 2)
        candidates = [m for o in p.objects if (m := o.method(method)) is not None]  # type: ignore[arg-type]
        if not candidates:
            out.append(_diag("UNKNOWN_METHOD", f"no object defines method {method}", qual, i, ins))
        elif all(len(m.params) != nargs for m in candidates):
            out.append(_diag("ARITY_MISMATCH", f"method {method} does not take {nargs} arguments", qual, i, ins))
    if op in ("call", "req") and args and args[0] in statevars:
        out.append(_diag("STATEVAR_REPLY_TARGET", f"{op} cannot deliver its reply into state variable {args[0]}", qual, i, ins))
    return out
