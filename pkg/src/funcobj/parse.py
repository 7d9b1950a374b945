"""Parser for guest program text (``.gp`` files).

Grammar, one instruction per line, ``#`` starts a line comment::

    program   := (fndef | objdef)+
    fndef     := "fn" NAME "(" params? ")" "{" line+ "}"
    objdef    := "obj" NAME policy "{" statevar* fndef+ "}"
    policy    := "[serialized]" | "[interleaved]"
    statevar  := "state" NAME "=" INT
    line      := (LABEL ":")* instr
    instr     := mnemonic operand*
    operand   := NAME | INT | :SYMBOL

Parameters may be separated by commas or whitespace. A label must be
followed by whitespace (``L: emit 1``); ``L:x`` reads as name ``L`` then
symbol ``:x``.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

from funcobj.ir import (
    MNEMONICS,
    POLICIES,
    UNIT_LITERAL,
    Diagnostic,
    FunctionDef,
    Instr,
    ObjectDef,
    ProgramDef,
    arity_ok,
    function,
    roles,
)
from funcobj.values import UNIT, Sym

_TOKEN_RE = re.compile(
    r"""
    (?P<ws>[ \t\r\f]+)
  | (?P<comment>\#[^\n]*)
  | (?P<nl>\n)
  | (?P<label>[A-Za-z_][A-Za-z0-9_]*:(?![A-Za-z0-9_]))
  | (?P<sym>:[A-Za-z_][A-Za-z0-9_]*)
  | (?P<int>-?[0-9]+)
  | (?P<name>[A-Za-z_][A-Za-z0-9_]*)
  | (?P<punct>[(){}\[\],=])
    """,
    re.VERBOSE,
)


class ParseError(Exception):
    def __init__(self, diagnostics: list[Diagnostic]):
        self.diagnostics = diagnostics
        super().__init__("\n".join(map(str, diagnostics)))


@dataclass(frozen=True)
class Token:
    kind: str
    text: str
    line: int
    col: int


class _Syntax(Exception):
    pass


def tokenize(text: str) -> list[Token]:
    toks: list[Token] = []
    line, line_start, pos = 1, 0, 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if m is None:
            col = pos - line_start + 1
            raise ParseError([Diagnostic("SYNTAX", f"unexpected character {text[pos]!r}", line=line, col=col)])
        kind = m.lastgroup
        if kind == "nl":
            line += 1
            line_start = m.end()
        elif kind not in ("ws", "comment"):
            toks.append(Token(kind, m.group(), line, pos - line_start + 1))
        pos = m.end()
    toks.append(Token("eof", "", line, pos - line_start + 1))
    return toks


class _Parser:
    def __init__(self, text: str):
        self.toks = tokenize(text)
        self.i = 0
        self.diags: list[Diagnostic] = []

    # -- token helpers -----------------------------------------------------

    @property
    def tok(self) -> Token:
        return self.toks[self.i]

    def fail(self, expected: str) -> None:
        t = self.tok
        got = t.text or "end of input"
        self.diags.append(Diagnostic("SYNTAX", f"expected {expected}, got {got!r}", line=t.line, col=t.col))
        raise _Syntax

    def expect(self, kind: str, text: str | None = None) -> Token:
        t = self.tok
        if t.kind != kind or (text is not None and t.text != text):
            self.fail(repr(text) if text else kind)
        self.i += 1
        return t

    def at(self, kind: str, text: str | None = None) -> bool:
        t = self.tok
        return t.kind == kind and (text is None or t.text == text)

    # -- grammar -----------------------------------------------------------

    def program(self) -> ProgramDef:
        functions: list[FunctionDef] = []
        objects: list[ObjectDef] = []
        seen: dict[str, int] = {}
        if self.at("eof"):
            self.fail("'fn' or 'obj'")
        while not self.at("eof"):
            if self.at("name", "fn"):
                f = self.fndef(None)
                functions.append(f)
                self._unique(seen, f.name, f.line)
            elif self.at("name", "obj"):
                o = self.objdef()
                objects.append(o)
                self._unique(seen, o.name, o.line)
            else:
                self.fail("'fn' or 'obj'")
        return ProgramDef(tuple(functions), tuple(objects))

    def _unique(self, seen: dict[str, int], name: str, line: int | None, what: str = "name") -> None:
        if name in seen:
            self.diags.append(
                Diagnostic("DUPLICATE_NAME", f"duplicate {what} {name} (first defined on line {seen[name]})", line=line, col=1)
            )
        else:
            seen[name] = line or 0

    def objdef(self) -> ObjectDef:
        start = self.expect("name", "obj")
        name = self.expect("name").text
        self.expect("punct", "[")
        pol = self.expect("name")
        if pol.text not in POLICIES:
            self.diags.append(
                Diagnostic("SYNTAX", f"expected 'serialized' or 'interleaved', got {pol.text!r}", line=pol.line, col=pol.col)
            )
            raise _Syntax
        self.expect("punct", "]")
        self.expect("punct", "{")
        statevars: list[tuple[str, int]] = []
        seen_vars: dict[str, int] = {}
        while self.at("name", "state"):
            t = self.expect("name", "state")
            var = self.expect("name").text
            self.expect("punct", "=")
            val = int(self.expect("int").text)
            self._unique(seen_vars, var, t.line, "state variable")
            statevars.append((var, val))
        methods: list[FunctionDef] = []
        seen_methods: dict[str, int] = {}
        while self.at("name", "fn"):
            m = self.fndef(name)
            self._unique(seen_methods, m.name, m.line, "method")
            methods.append(m)
        if not methods:
            self.fail("'fn'")
        self.expect("punct", "}")
        return ObjectDef(name, tuple(statevars), tuple(methods), pol.text, line=start.line)

    def fndef(self, owner: str | None) -> FunctionDef:
        start = self.expect("name", "fn")
        name = self.expect("name").text
        qual = f"{owner}.{name}" if owner else name
        self.expect("punct", "(")
        params: list[str] = []
        while not self.at("punct", ")"):
            p = self.expect("name")
            if p.text in params:
                self.diags.append(Diagnostic("DUPLICATE_NAME", f"duplicate parameter {p.text} in {qual}", line=p.line, col=p.col))
            params.append(p.text)
            if self.at("punct", ","):
                self.i += 1
        self.expect("punct", ")")
        self.expect("punct", "{")
        body: list[Instr] = []
        labels: dict[str, int] = {}
        while not self.at("punct", "}"):
            if self.at("eof"):
                self.fail("'}'")
            body.append(self.line(qual, len(body), labels))
        self.expect("punct", "}")
        if not body:
            self.diags.append(Diagnostic("SYNTAX", f"function {qual} has an empty body", line=start.line, col=start.col))
        for k, ins in enumerate(body):
            lab = ins.label()
            if lab is not None and lab not in labels:
                self.diags.append(
                    Diagnostic("UNKNOWN_LABEL", f"unknown label {lab}", function=qual, index=k, line=ins.line, col=ins.col)
                )
        f = function(name, params, body, labels)
        return FunctionDef(f.name, f.params, f.body, f.labels, line=start.line)

    def line(self, qual: str, index: int, labels: dict[str, int]) -> Instr:
        while self.at("label"):
            t = self.expect("label")
            lab = t.text[:-1]
            if lab in labels:
                self.diags.append(Diagnostic("DUPLICATE_LABEL", f"duplicate label {lab} in {qual}", line=t.line, col=t.col))
            labels[lab] = index
        head = self.tok
        if head.kind != "name":
            self.fail("instruction mnemonic")
        if head.text not in MNEMONICS:
            self.diags.append(Diagnostic("SYNTAX", f"unknown mnemonic {head.text!r}", line=head.line, col=head.col))
            raise _Syntax
        self.i += 1
        raw: list[Token] = []
        while self.tok.line == head.line and self.tok.kind in ("name", "int", "sym"):
            raw.append(self.tok)
            self.i += 1
        if self.tok.line == head.line and not self.at("punct", "}") and not self.at("eof"):
            self.fail("operand or end of line")
        op = head.text
        if not arity_ok(op, len(raw)):
            self.diags.append(
                Diagnostic("BAD_ARITY", f"{op} takes {_arity_text(op)} operands, got {len(raw)}", function=qual, index=index, line=head.line, col=head.col)
            )
        args = []
        for role, t in zip(roles(op, len(raw)), raw):
            args.append(self.operand(role, t, op, qual, index))
        if op == "return" and not args:
            args.append(UNIT)
        return Instr(op, tuple(args), line=head.line, col=head.col)

    def operand(self, role: str, t: Token, op: str, qual: str, index: int):
        if t.kind == "int":
            value = int(t.text)
        elif t.kind == "sym":
            value = Sym(t.text[1:])
        elif t.text == UNIT_LITERAL:
            value = UNIT
        else:
            value = t.text
        ok = {
            "dst": isinstance(value, str),
            "lit": not isinstance(value, str),
            "val": True,
            "extra": True,
        }.get(role, isinstance(value, str))
        if not ok:
            self.diags.append(
                Diagnostic("BAD_OPERAND", f"{op}: operand {t.text!r} cannot be used as {role}", function=qual, index=index, line=t.line, col=t.col)
            )
        return value


def _arity_text(op: str) -> str:
    from funcobj.ir import SIGNATURES

    sig = SIGNATURES[op]
    if sig and sig[-1].endswith("*"):
        return f"at least {len(sig) - 1}"
    if sig and sig[-1].endswith("?"):
        return f"{len(sig) - 1} or {len(sig)}"
    return str(len(sig))


def parse_program(text: str) -> ProgramDef:
    """Parse program text; raises ``ParseError`` carrying every diagnostic found."""
    p = _Parser(text)
    try:
        prog = p.program()
    except _Syntax:
        raise ParseError(p.diags) from None
    if p.diags:
        raise ParseError(p.diags)
    return prog
