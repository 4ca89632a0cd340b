import io
import json
import subprocess
import sys

import pytest

from lambdagen.cli import main
from lambdagen.terms import is_closed, parse, parse_combinator, size


def run(*argv, stdin=""):
    out = io.StringIO()
    code = main(list(argv), out=out, stdin=io.StringIO(stdin))
    return code, out.getvalue()


def test_count():
    assert run("count", "--model", "natural", "--openness", "0", "--size", "4") == (0, "3\n")
    assert run("count", "--openness", "0", "--size", "0") == (0, "0\n")
    assert run("count", "--size", "14") == (0, "65168\n")


def test_count_bad_size(capsys):
    code, _ = run("count", "--size", "-1")
    assert code == 2
    assert "--size" in capsys.readouterr().err


def test_count_openness_above_truncation(capsys):
    code, _ = run("count", "--size", "5", "--openness", "4", "--truncation", "2")
    assert code == 2
    assert "--openness" in capsys.readouterr().err


def test_sample_recursive_unique():
    assert run("sample", "--method", "recursive", "--size", "2", "--seed", "7") == (0, "\\ 0\n")


def test_sample_sk_support():
    code, out = run("sample", "--method", "sk", "--size", "1", "--count", "4", "--seed", "1")
    lines = out.splitlines()
    assert code == 0 and len(lines) == 4
    assert set(lines) <= {"(S S)", "(S K)", "(K S)", "(K K)"}


def test_sample_boltzmann_window_and_stats():
    code, out = run("sample", "--method", "boltzmann", "--size", "10000", "--tolerance", "0.1",
                    "--count", "3", "--stats", "--seed", "4")
    lines = out.splitlines()
    assert code == 0 and len(lines) == 4
    stats = json.loads(lines[-1])
    assert all(9000 <= s <= 11000 for s in stats["sizes"])
    for line, s in zip(lines[:3], stats["sizes"]):
        t = parse(line)
        assert is_closed(t) and size(t) == s
    assert 0 < stats["acceptance_rate"] <= 1


def test_sample_json_array():
    code, out = run("sample", "--method", "recursive", "--size", "9", "--count", "3", "--format", "json")
    data = json.loads(out)
    assert code == 0 and len(data) == 3 and all("abs" in d for d in data)
    code, out = run("sample", "--method", "remy", "--size", "3", "--count", "0", "--format", "json")
    assert json.loads(out) == []


def test_sample_typed_and_remy():
    code, out = run("sample", "--method", "typed", "--size", "8", "--count", "2", "--seed", "3")
    assert code == 0
    for line in out.splitlines():
        term, ty = line.split(" : ")
        assert size(parse(term)) == 8 and "->" in ty
    code, out = run("sample", "--method", "remy", "--size", "5", "--seed", "3")
    assert code == 0 and out.strip().count("1") == 5


def test_sample_sk_large_size_renders():
    code, out = run("sample", "--method", "sk", "--size", "2000", "--seed", "3")
    assert code == 0
    assert sum(1 for c in out if c == "(") == 2000
    parse_combinator(out.strip())


def test_jobs_merge_is_deterministic():
    args = ("sample", "--method", "recursive", "--size", "30", "--count", "7", "--seed", "5")
    one = run(*args, "--jobs", "3")
    two = run(*args, "--jobs", "3")
    assert one == two and len(one[1].splitlines()) == 7


def test_sampling_failure_exit_code(capsys):
    code, _ = run("sample", "--method", "recursive", "--size", "0")
    assert code == 3
    assert "EmptySizeClass" in capsys.readouterr().err
    code, _ = run("sample", "--method", "boltzmann", "--size", "1000", "--tolerance", "0",
                  "--max-attempts", "2")
    assert code == 3
    assert "AttemptsExhausted" in capsys.readouterr().err


def test_bad_flags(capsys):
    assert run("sample", "--method", "nope", "--size", "3")[0] == 2
    assert "--method" in capsys.readouterr().err
    assert run("sample", "--method", "boltzmann", "--size", "10", "--tolerance", "1.5")[0] == 2
    assert "--tolerance" in capsys.readouterr().err
    assert run("sample", "--method", "tuned", "--size", "100")[0] == 2
    assert "--profile" in capsys.readouterr().err
    assert run("sample", "--method", "recursive")[0] == 2
    assert "--size" in capsys.readouterr().err


def test_typecheck():
    assert run("typecheck", stdin="\\ 0\n") == (0, "a -> a\n")
    assert run("typecheck", stdin="\\ (0 0)") == (1, "untypeable\n")
    assert run("typecheck", "--format", "sexp", stdin="(lam (lam 1))") == (0, "a -> b -> a\n")


def test_typecheck_bad_input(capsys):
    assert run("typecheck", stdin="\\ (0")[0] == 2
    assert "offset" in capsys.readouterr().err
    assert run("typecheck", stdin="1")[0] == 2


def test_tune_and_sample_with_profile(tmp_path):
    targets = tmp_path / "t.json"
    targets.write_text(json.dumps({"n": 400, "targets": [{"index": 0, "fraction": 0.1},
                                                          {"index": 1, "fraction": 0.1}]}))
    code, out = run("tune", "--targets", str(targets))
    assert code == 0
    profile = json.loads(out)
    assert len(profile["weights"]) == 2 and profile["n"] == 400
    path = tmp_path / "p.json"
    path.write_text(out)
    code, out = run("sample", "--method", "tuned", "--profile", str(path), "--count", "2",
                    "--tolerance", "0.2", "--seed", "1")
    assert code == 0
    assert all(320 <= size(parse(line)) <= 480 for line in out.splitlines())


def test_tune_infeasible(tmp_path, capsys):
    targets = tmp_path / "bad.json"
    targets.write_text(json.dumps({"n": 100, "targets": [{"index": 0, "fraction": 0.7},
                                                          {"index": 1, "fraction": 0.7}]}))
    assert run("tune", "--targets", str(targets))[0] == 2
    assert "Infeasible" in capsys.readouterr().err


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "lambdagen", "count", "--size", "6"],
                          capture_output=True, text=True, check=False)
    assert proc.returncode == 0 and proc.stdout == "17\n"
