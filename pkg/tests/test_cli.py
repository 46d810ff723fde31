import json

import pytest

from moduli import ENGINE_VERSION
from moduli.cli import QueryResult, main, parse_insertions, parse_label_counts, parse_passports


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def value_of(capsys, *argv):
    code, out, err = run(capsys, "--json", *argv)
    assert code == 0, err
    return QueryResult.from_json(out.strip().splitlines()[-1])


def test_parsers():
    assert parse_passports("4;2,2;2,1,1") == ((4,), (2, 2), (2, 1, 1))
    assert parse_label_counts("1:3,0:1") == [1, 1, 1, 0]
    assert parse_label_counts("") == []
    assert parse_insertions("0:1,1:2") == ((0, 1), (1, 2))


def test_query_result_round_trip():
    qr = QueryResult(
        query={"n": 2}, value="1/2", method="brute", diagnostics={"elapsed": 0.1}
    )
    assert QueryResult.from_json(qr.to_json()) == qr


def test_hurwitz_command(capsys):
    r = value_of(capsys, "hurwitz", "--n", "2", "--passports", "2;2")
    assert r.value == "1/2"
    assert "+" in r.method  # auto cross-validated two methods
    r = value_of(
        capsys, "hurwitz", "--n", "4", "--passports", "4;2,2;2,1,1",
        "--method", "closed-form",
    )
    assert r.value == "1/2" and r.method == "closed-form"
    r = value_of(
        capsys, "hurwitz", "--n", "4", "--passports", "4;3,1;2,1,1",
        "--method", "psi-classes", "--dump-class",
    )
    assert r.value == "1" and "class" in r.diagnostics


def test_correlator_command(capsys):
    r = value_of(capsys, "correlator", "--r", "3", "--tau", "6,1", "--genus", "3")
    assert r.value == "1/31104" and r.method == "spin-recursion"
    r = value_of(capsys, "correlator", "--r", "4", "--tau", "1,0", "--genus", "1")
    assert r.value == "1/8"
    r = value_of(
        capsys, "correlator", "--r", "3", "--tau", "1,1", "--tau0", "1:3,0:1",
        "--genus", "0",
    )
    assert r.value == "1/3"


def test_snumber_shat1_tau3g_commands(capsys):
    r = value_of(
        capsys, "snumber", "--r", "3", "--n", "7", "--g", "3", "--m", "1",
        "--insertions", "0:1,0:1,0:1,0:1",
    )
    assert r.value == "209/362880"
    r = value_of(capsys, "shat1", "--r", "4", "--key", "2:2,2:-2")
    assert r.value == "1/32"
    r = value_of(capsys, "tau3g", "--g", "1", "--l", "2")
    assert r.value == "1/24"


def test_bouss_check_command(capsys):
    code, out, _ = run(capsys, "bouss-check", "--n", "8", "--m", "1")
    assert code == 0 and "holds" in out
    code, out, _ = run(capsys, "--json", "bouss-check", "--n", "6", "--m", "1",
                       "--extra", "1:1")
    assert code == 0
    report = json.loads(out)
    assert report["equal"] and report["lhs"] == report["rhs"]
    assert report["terms"]


def test_decimal_flag(capsys):
    code, out, _ = run(capsys, "tau3g", "--g", "1", "--l", "0", "--decimal")
    assert code == 0 and "1/24" in out and "0.0416" in out


def test_exit_codes(capsys):
    code, _, err = run(capsys, "hurwitz", "--n", "4", "--passports", "oops")
    assert code == 2 and "usage error" in err
    # valid syntax, but the profile violates the closed form's domain
    code, _, err = run(
        capsys, "hurwitz", "--n", "2", "--passports", "2;2", "--method", "closed-form"
    )
    assert code == 1
    code, _, _ = run(capsys, "no-such-command")
    assert code == 2


def test_cache_round_trip(tmp_path, capsys, monkeypatch):
    monkeypatch.delenv("MODULI_CACHE", raising=False)
    cache = tmp_path / "cache.ndjson"
    argv = ("correlator", "--r", "3", "--tau", "6,1", "--genus", "3",
            "--cache", str(cache))
    cold = value_of(capsys, *argv)
    assert cache.exists() and cold.value == "1/31104"
    warm = value_of(capsys, *argv)
    assert warm.value == cold.value
    assert warm.diagnostics["cache_misses"] == 0
    # a version bump invalidates the file instead of poisoning results
    lines = cache.read_text().splitlines()
    rec = json.loads(lines[0])
    rec["version"] = "something-else"
    rec["value"] = "999"
    cache.write_text(json.dumps(rec) + "\n")
    again = value_of(capsys, *argv)
    assert again.value == "1/31104"


def test_cache_env_override(tmp_path, capsys, monkeypatch):
    env_cache = tmp_path / "env.ndjson"
    monkeypatch.setenv("MODULI_CACHE", str(env_cache))
    value_of(capsys, "correlator", "--r", "3", "--tau", "3,0", "--genus", "1",
             "--cache", str(tmp_path / "flag.ndjson"))
    assert env_cache.exists()
    assert not (tmp_path / "flag.ndjson").exists()
    for line in env_cache.read_text().splitlines():
        assert json.loads(line)["version"] == ENGINE_VERSION
