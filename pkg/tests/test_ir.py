from __future__ import annotations

import pytest
from hypothesis import given, settings

from funcobj import corpus
from funcobj.ir import Instr, ProgramDef, function, print_program
from funcobj.parse import ParseError, parse_program
from funcobj.validate import validate
from funcobj.values import UNIT, Pair, Ref, Sym, format_value, value_from_json, value_to_json

from programs import emitters_source, values, worker_programs


def test_value_rendering():
    assert format_value(Pair(1, Pair(Sym("A"), UNIT))) == "(1 . (:A . unit))"
    assert format_value(Ref(3)) == "#3"
    assert Ref(3) != 3


@given(values)
def test_value_json_round_trip(v):
    assert value_from_json(value_to_json(v)) == v


def test_minimal_program():
    p = parse_program("fn main() { emit 1 \n return }")
    assert [f.name for f in p.functions] == ["main"]
    assert p.function("main").body == (Instr("emit", (1,)), Instr("return", (UNIT,)))


def test_implicit_return_appended():
    p = parse_program("fn main() {\n emit 1\n}")
    assert p.function("main").body[-1] == Instr("return", (UNIT,))


def test_unknown_label():
    with pytest.raises(ParseError) as e:
        parse_program("fn main() { jmp L }")
    assert [d.code for d in e.value.diagnostics] == ["UNKNOWN_LABEL"]
    assert "unknown label L" in str(e.value)


@pytest.mark.parametrize(
    "src, code",
    [
        ("fn main() { emit }", "BAD_ARITY"),
        ("fn main() { emit 1 2 }", "BAD_ARITY"),
        ("fn main() {\n L: emit 1\n L: emit 2\n}", "DUPLICATE_LABEL"),
        ("fn main() { emit 1 }\nfn main() { emit 2 }", "DUPLICATE_NAME"),
        ("fn main( { emit 1 }", "SYNTAX"),
        ("fn main() { frob 1 }", "SYNTAX"),
    ],
)
def test_structural_errors(src, code):
    with pytest.raises(ParseError) as e:
        parse_program(src)
    assert code in {d.code for d in e.value.diagnostics}
    assert all(d.line is not None for d in e.value.diagnostics)


def test_statuschan_structure():
    p = corpus.load("statuschan")
    assert [f.name for f in p.functions] == ["main", "producer", "consumer"]
    mechs = [i for _, f, _ in p.bodies() for i in f.body if i.op == "mech"]
    assert len(mechs) == 1 and mechs[0].args[1] == "statuschan"


def test_statuschan_matches_hand_built_main():
    main = function(
        "main",
        (),
        [
            Instr("mech", ("ch", "statuschan")),
            Instr("spawn", ("p", "producer", "ch")),
            Instr("spawn", ("c", "consumer", "ch")),
        ],
    )
    assert corpus.load("statuschan").function("main") == main


def test_objects_parse():
    p = parse_program(
        "obj C [serialized] {\n state n = 0\n fn get() {\n return n\n }\n}\n"
        "fn main() {\n newobj c C\n req v c get\n emit v\n}\n"
    )
    o = p.object("C")
    assert o.method_policy == "serialized" and o.statevars == (("n", 0),)
    assert p.resolve("C.get").params == ()


@pytest.mark.parametrize("name", corpus.names())
def test_corpus_round_trip(name):
    p = corpus.load(name)
    text = print_program(p)
    assert parse_program(text) == p
    assert print_program(parse_program(text)) == text


@settings(max_examples=60)
@given(worker_programs())
def test_generated_round_trip(src):
    p = parse_program(src)
    assert parse_program(print_program(p)) == p


# -- validation ---------------------------------------------------------------


def test_lock_demo_is_strict_clean_except_raw_cells():
    # the lock demo keeps its counter in a raw cell, so strict mode flags only cell ops
    diags = validate(corpus.load("lockcounter"), strict_oo=True)
    assert {d.code for d in diags} == {"STRICT_OO_RAW_MEMORY"}


def test_mechanism_only_program_is_strict_clean():
    assert validate(corpus.load("statuschan"), strict_oo=True) == []
    assert validate(corpus.load("counter_serialized"), strict_oo=True) == []


def test_lostupdate_strict():
    p = corpus.load("lostupdate")
    assert validate(p) == []
    tags = [d.tag for d in validate(p, strict_oo=True)]
    assert "STRICT_OO_RAW_MEMORY@incr:3" in tags
    assert all(t.startswith("STRICT_OO_RAW_MEMORY@") for t in tags)


@pytest.mark.parametrize(
    "src, code",
    [
        ("fn f() { emit 1 }", "NO_ENTRY"),
        ("fn main(x) { emit x }", "ENTRY_PARAMS"),
        ("fn main() { emit x }", "UNDECLARED_LOCAL"),
        ("fn main() { spawn a nope }", "UNKNOWN_FUNCTION"),
        ("fn main() { spawn a f 1 2 }\nfn f(x) { emit x }", "ARITY_MISMATCH"),
        ("fn main() { newobj o Nope }", "UNKNOWN_OBJECT"),
        ("fn main() { mech m semaphore }", "UNKNOWN_MECHANISM"),
        ("fn main() { mech m lock 3 }", "MECH_PARAMS"),
        ("obj C [serialized] {\n fn get() {\n return 1\n }\n}\nfn main() {\n newobj c C\n req v c put\n}", "UNKNOWN_METHOD"),
        ("obj C [serialized] {\n state n = 0\n fn get() {\n return n\n }\n}\nfn main() {\n emit n\n}", "STATEVAR_OUTSIDE_OBJECT"),
    ],
)
def test_reference_errors(src, code):
    assert code in {d.code for d in validate(parse_program(src))}


def test_undeclared_on_one_path_only():
    src = "fn main() {\n const a 1\n br_eq a 1 skip\n const b 2\nskip: emit b\n}"
    assert [d.code for d in validate(parse_program(src))] == ["UNDECLARED_LOCAL"]


def test_validate_is_deterministic():
    src = "fn main() {\n emit x\n spawn a nope\n emit y\n}"
    a = [str(d) for d in validate(parse_program(src))]
    b = [str(d) for d in validate(parse_program(src))]
    assert a == b and len(a) == 3


@pytest.mark.parametrize("counts", [[1], [2, 2], [1, 1, 1]])
def test_emitters_validate(counts):
    assert validate(parse_program(emitters_source(counts))) == []


def test_program_without_entry_rejected_by_hand():
    p = ProgramDef((function("f", (), [Instr("emit", (1,))]),), ())
    assert [d.code for d in validate(p)] == ["NO_ENTRY"]
