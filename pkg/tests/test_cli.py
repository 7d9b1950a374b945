from __future__ import annotations

import pytest

from funcobj import cli, corpus


def run(capsys, *argv) -> tuple[int, list[str], str]:
    code = cli.main(list(argv))
    out = capsys.readouterr()
    return code, out.out.splitlines(), out.err


def gp(name: str) -> str:
    return str(corpus.path(name))


def test_run_p1(capsys):
    code, out, _ = run(capsys, "run", gp("p1"))
    assert code == 0 and out == ["finished(unit)", "emit 1", "emit 2"]


def test_run_pingpong_deadlocks(capsys):
    code, out, _ = run(capsys, "run", gp("pingpong"))
    assert code == 3 and out[0].startswith("deadlock")


def test_run_rr_pingpong_finishes(capsys):
    code, out, _ = run(capsys, "run", gp("pingpong"), "--scheduler", "rr:1")
    assert code == 0 and out[-1] == "emit 7"


def test_bad_program_exits_2(tmp_path, capsys):
    bad = tmp_path / "bad.gp"
    bad.write_text("fn main() {\n frobnicate x\n}\n")
    code, _, err = run(capsys, "run", str(bad))
    assert code == 2 and "bad.gp" in err
    assert run(capsys, "run", str(tmp_path / "missing.gp"))[0] == 2


def test_unknown_flag_and_bad_scheduler(capsys):
    with pytest.raises(SystemExit) as e:
        cli.main(["run", gp("p1"), "--frobnicate"])
    assert e.value.code == 2
    assert run(capsys, "run", gp("p1"), "--scheduler", "fifo")[0] == 2


def test_save_schedule_then_replay(tmp_path, capsys):
    f = tmp_path / "s.txt"
    code, first, _ = run(capsys, "run", gp("spawn2"), "--scheduler", "random:5", "--save-schedule", str(f))
    assert code == 0
    _, again, _ = run(capsys, "run", gp("spawn2"), "--scheduler", f"script:{f}")
    assert again == first


def test_debug_events_show_more(capsys):
    _, plain, _ = run(capsys, "run", gp("spawn2"))
    _, debug, _ = run(capsys, "run", gp("spawn2"), "--debug-events")
    assert len(debug) > len(plain)


def test_explore_counts(capsys):
    code, out, _ = run(capsys, "explore", gp("p1"))
    assert code == 0 and "traces=1" in out
    code, out, _ = run(capsys, "explore", gp("spawn2"), "--dump-traces")
    assert "traces=2" in out and {"trace 1 2", "trace 2 1"} <= set(out)


def test_explore_lostupdate_fails(capsys):
    code, out, _ = run(capsys, "explore", gp("lostupdate"))
    assert code == 1 and any(line.startswith("observable-determinism: FAIL") for line in out)


def test_explore_bad_depth(capsys):
    assert run(capsys, "explore", gp("p1"), "--depth", "0")[0] == 2


def test_compare_against_explored(capsys):
    code, out, _ = run(capsys, "compare", gp("spawn2"), "--against-explored")
    assert code == 0 and out[0].startswith("PASS")


def test_compare_against_policy(capsys):
    code, out, _ = run(capsys, "compare", gp("p1"), "--scheduler", "rr:1", "--against", "rr:2")
    assert (code, out) == (0, ["EQUAL"])
    code, out, _ = run(capsys, "compare", gp("lostupdate"), "--scheduler", "inline", "--against", "rr:1")
    assert (code, out) == (1, ["DIFFERENT"])


def test_compare_needs_one_mode(capsys):
    assert run(capsys, "compare", gp("p1"))[0] == 2
    assert run(capsys, "compare", gp("p1"), "--against", "rr", "--against-explored")[0] == 2


def test_compare_golden(tmp_path, capsys):
    golden = corpus.path("spawn2").with_suffix(".golden")
    code, out, _ = run(capsys, "compare", gp("spawn2"), "--scheduler", "rr:1", "--golden", str(golden))
    assert (code, out) == (0, ["PASS"])
    tampered = tmp_path / "t.golden"
    tampered.write_text(golden.read_text().replace("1", "9"))
    code, out, _ = run(capsys, "compare", gp("spawn2"), "--scheduler", "rr:1", "--golden", str(tampered))
    assert (code, out) == (1, ["FAIL"])


def test_check_needs_programs(capsys):
    assert run(capsys, "check")[0] == 2


def test_check_object_suite_strict(capsys):
    progs = [gp(n) for n in ("counter_serialized", "account", "asyncnotify")]
    code, out, _ = run(capsys, "check", *progs, "--strict-oo")
    assert code == 0
    assert not [line for line in out if "FAIL" in line]
    assert sum("compliance" in line and "not modeled" in line for line in out) == 15


def test_check_lostupdate_strict_relations_fail(capsys):
    code, out, _ = run(capsys, "check", gp("lostupdate"), "--strict-oo")
    assert code == 1
    assert any("relations" in line and "FAIL" in line for line in out)


def test_validate(capsys):
    assert run(capsys, "validate", gp("p1"))[:2] == (0, ["ok"])
    code, out, _ = run(capsys, "validate", gp("lostupdate"), "--strict-oo")
    assert code == 2 and all("STRICT_OO_RAW_MEMORY" in line for line in out)


def test_golden_regenerates(tmp_path, capsys):
    f = tmp_path / "spawn2.gp"
    f.write_text(corpus.source("spawn2"))
    assert run(capsys, "golden", str(f))[0] == 0
    assert f.with_suffix(".golden").read_text() == corpus.path("spawn2").with_suffix(".golden").read_text()


@pytest.mark.parametrize("argv", [["run", "statuschan", "--scheduler", "random:7"], ["explore", "bidir", "--dump-traces"]])
def test_output_is_byte_identical(capsys, argv):
    argv = [argv[0], gp(argv[1]), *argv[2:]]
    first = run(capsys, *argv)
    assert run(capsys, *argv) == first


def test_timing_goes_to_stderr(capsys):
    code, out, err = run(capsys, "run", gp("p1"), "--timing")
    assert out == ["finished(unit)", "emit 1", "emit 2"] and err.startswith("elapsed")
