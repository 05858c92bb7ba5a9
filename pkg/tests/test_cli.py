"""Exercises the command-line front end through main()."""

import io
import json

import pytest

from ssg import is_stopping, parse_game, serialize_game
from ssg.cli import main
from ssg.fixtures import GAME_A, GAME_B, GAME_E, GAME_G


@pytest.fixture
def game_file(tmp_path):
    def write(game, name="game.ssg"):
        path = tmp_path / name
        path.write_text(serialize_game(game), encoding="utf-8")
        return str(path)

    return write


def run(capsys, *argv):
    code = main(list(argv))
    captured = capsys.readouterr()
    return code, captured.out, captured.err


# ------------------------------------------------------------ validate


def test_validate_reports_shape(game_file, capsys):
    code, out, _ = run(capsys, "validate", game_file(GAME_A))
    assert code == 0
    assert out == "ok: n=3 start=1 max=0 min=0 avg=1 (stopping)\n"


def test_validate_flags_non_stopping(game_file, capsys):
    code, out, _ = run(capsys, "validate", game_file(GAME_E))
    assert code == 0
    assert "(non-stopping)" in out


def test_validate_json(game_file, capsys):
    code, out, _ = run(capsys, "validate", "--format", "json", game_file(GAME_B))
    doc = json.loads(out)
    assert code == 0
    assert doc["schema"] == 1
    assert doc["ok"] is True
    assert doc["kinds"] == {"max": 0, "min": 0, "avg": 2}


def test_reads_game_from_stdin(capsys, monkeypatch):
    monkeypatch.setattr("sys.stdin", io.StringIO(serialize_game(GAME_A)))
    code, out, _ = run(capsys, "validate")
    assert code == 0
    assert out.startswith("ok: n=3")


# --------------------------------------------------------------- solve


def test_solve_text_output(game_file, capsys):
    code, out, _ = run(capsys, "solve", game_file(GAME_A))
    assert code == 0
    lines = out.splitlines()
    assert "v(1) = 1/2" in lines
    assert "v(2) = 0" in lines
    assert "v(3) = 1" in lines
    assert lines[-1] == "value = 1/2"
    assert "tau: -" in lines and "sigma: -" in lines


def test_solve_reports_strategies(game_file, capsys):
    code, out, _ = run(capsys, "solve", game_file(GAME_G))
    assert code == 0
    assert "sigma: 1->3" in out.splitlines()


def test_solve_json_schema(game_file, capsys):
    code, out, _ = run(capsys, "solve", "--format", "json", game_file(GAME_G))
    doc = json.loads(out)
    assert code == 0
    assert doc["schema"] == 1
    assert doc["verb"] == "solve"
    assert doc["value"] == "3/4"
    assert doc["values"] == ["3/4", "1/2", "3/4", "0", "1"]
    assert doc["strategies"]["sigma"] == [[1, 3]]
    assert doc["certificate"] is None


def test_solve_json_byte_stable(game_file, capsys):
    path = game_file(GAME_G)
    _, first, _ = run(capsys, "solve", "--format", "json", path)
    _, second, _ = run(capsys, "solve", "--format", "json", path)
    assert first == second


def test_solve_approx_rendering(game_file, capsys):
    code, out, _ = run(capsys, "solve", "--approx", "3", game_file(GAME_A))
    assert code == 0
    assert "value = 1/2 ~ 0.500" in out


def test_solve_method_override(game_file, capsys):
    code, out, _ = run(capsys, "solve", "--method", "oracle", game_file(GAME_E))
    assert code == 0
    assert "method: oracle" in out.splitlines()


# ------------------------------------------------------- value, decide


def test_value_prints_bare_rational(game_file, capsys):
    code, out, _ = run(capsys, "value", game_file(GAME_B))
    assert code == 0
    assert out == "2/3\n"


def test_decide_true_exits_zero(game_file, capsys):
    code, out, _ = run(capsys, "decide", "--alpha", "1/2", game_file(GAME_B))
    assert code == 0
    assert out == "true (value 2/3 > alpha 1/2)\n"


def test_decide_false_exits_three(game_file, capsys):
    code, out, _ = run(capsys, "decide", "--alpha", "1/2", game_file(GAME_A))
    assert code == 3
    assert out == "false (value 1/2 <= alpha 1/2)\n"


def test_decide_alpha_out_of_range_is_domain_error(game_file, capsys):
    code, _, err = run(capsys, "decide", "--alpha", "3/2", game_file(GAME_A))
    assert code == 1
    assert err.startswith("error:")


def test_decide_alpha_garbage_is_usage_error(game_file, capsys):
    code, _, _ = run(capsys, "decide", "--alpha", "half", game_file(GAME_A))
    assert code == 2


# ---------------------------------------------------------- strategies


def test_strategies_verb(game_file, capsys):
    code, out, _ = run(capsys, "strategies", game_file(GAME_E))
    assert code == 0
    assert out == "tau: 2->1\nsigma: 1->2\n"


# -------------------------------------------------------------- reduce


def test_reduce_solves_fixed_chain(game_file, capsys):
    code, out, _ = run(capsys, "reduce", "--sigma", "1->3", game_file(GAME_G))
    assert code == 0
    assert "value = 3/4" in out.splitlines()


def test_reduce_both_strategies(game_file, capsys):
    code, out, _ = run(
        capsys, "reduce", "--tau", "2->4", "--sigma", "1->2", game_file(GAME_E)
    )
    assert code == 0
    assert "value = 1" in out.splitlines()


def test_reduce_missing_pick_is_domain_error(game_file, capsys):
    code, _, err = run(capsys, "reduce", "--sigma", "1->2", game_file(GAME_E))
    assert code == 1
    assert "error:" in err


def test_reduce_bad_edge_syntax_is_usage_error(game_file, capsys):
    code, _, _ = run(capsys, "reduce", "--sigma", "1=>2", game_file(GAME_E))
    assert code == 2


# ----------------------------------------------------------- transform


def test_transform_emits_valid_stopping_game(game_file, capsys):
    code, out, _ = run(capsys, "transform", "--c", "9", game_file(GAME_A))
    assert code == 0
    companion = parse_game(out)
    assert companion.n == 57
    assert is_stopping(companion)


def test_transform_map_comments(game_file, capsys):
    code, out, _ = run(capsys, "transform", "--map", game_file(GAME_A))
    assert code == 0
    assert "# map 1 -> 1" in out
    assert "# map 2 -> 56" in out
    assert "# map 3 -> 57" in out
    # comment lines must not break reparsing
    assert parse_game(out).n == 57


def test_transform_json_map(game_file, capsys):
    code, out, _ = run(
        capsys, "transform", "--map", "--format", "json", game_file(GAME_A)
    )
    doc = json.loads(out)
    assert code == 0
    assert doc["map"] == {"1": 1, "2": 56, "3": 57}
    assert parse_game(doc["game"]).n == doc["n"] == 57


# ------------------------------------------------------------- certify


def test_solve_certificate_roundtrip(game_file, tmp_path, capsys):
    game = game_file(GAME_B)
    cert = str(tmp_path / "cert.json")
    code, out, _ = run(capsys, "solve", "--cert-out", cert, game)
    assert code == 0
    assert f"certificate written to {cert}" in out

    code, out, _ = run(capsys, "certify", "--cert", cert, game)
    assert code == 0
    assert out == "certificate accepted\n"


def test_certify_rejects_tampered_certificate(game_file, tmp_path, capsys):
    game = game_file(GAME_B)
    cert = str(tmp_path / "cert.json")
    run(capsys, "solve", "--cert-out", cert, game)

    doc = json.loads((tmp_path / "cert.json").read_text())
    doc["z"][0] = "1/3"
    (tmp_path / "cert.json").write_text(json.dumps(doc))

    code, out, _ = run(capsys, "certify", "--cert", cert, game)
    assert code == 1
    assert out == "certificate rejected\n"


def test_certify_malformed_certificate_is_domain_error(game_file, tmp_path, capsys):
    bad = tmp_path / "cert.json"
    bad.write_text('{"z": ["1/2"], "s": ["0"]}')
    code, _, err = run(capsys, "certify", "--cert", str(bad), game_file(GAME_A))
    assert code == 1
    assert "missing field 'c'" in err


# ----------------------------------------------------------------- gen


def test_gen_is_deterministic_per_seed(capsys):
    _, a, _ = run(capsys, "gen", "--n", "7", "--seed", "11")
    _, b, _ = run(capsys, "gen", "--n", "7", "--seed", "11")
    _, c, _ = run(capsys, "gen", "--n", "7", "--seed", "12")
    assert a == b
    assert a != c
    assert parse_game(a).n == 7


def test_gen_stopping_flag(capsys):
    _, out, _ = run(capsys, "gen", "--n", "8", "--seed", "3", "--stopping")
    assert is_stopping(parse_game(out))


def test_gen_weights_shape_the_mix(capsys):
    _, out, _ = run(capsys, "gen", "--n", "9", "--seed", "0", "--weights", "0:0:1")
    game = parse_game(out)
    assert all(line.split()[1] == "avg" for line in out.splitlines()[1:] if line)
    assert game.n == 9


def test_gen_bad_weights_is_usage_error(capsys):
    code, _, _ = run(capsys, "gen", "--n", "6", "--weights", "1:2")
    assert code == 2


# -------------------------------------------------------------- oracle


def test_oracle_verb(game_file, capsys):
    code, out, _ = run(capsys, "oracle", game_file(GAME_E))
    assert code == 0
    assert "method: oracle" in out.splitlines()
    assert "value = 0" in out.splitlines()


def test_oracle_budget_exceeded(game_file, capsys):
    code, _, err = run(capsys, "oracle", "--budget", "1", game_file(GAME_E))
    assert code == 1
    assert "budget" in err


# --------------------------------------------------------------- bench


def test_bench_table(game_file, tmp_path, capsys):
    game_file(GAME_B, "b.ssg")
    suite = tmp_path / "suite.txt"
    suite.write_text("b.ssg\n# a comment line\n")
    code, out, _ = run(capsys, "bench", "--suite", str(suite))
    assert code == 0
    lines = out.splitlines()
    assert lines[0].split() == ["game", "n", "method", "backend", "iters", "ms", "value"]
    assert any("auto" in line for line in lines[1:])
    vi_rows = [line for line in lines[1:] if " vi " in line]
    assert any("numpy" in line for line in vi_rows)


def test_bench_json_rows(game_file, tmp_path, capsys):
    game_file(GAME_G, "g.ssg")
    suite = tmp_path / "suite.txt"
    suite.write_text("g.ssg\n")
    code, out, _ = run(
        capsys, "bench", "--suite", str(suite), "--methods", "auto,mc",
        "--plays", "500", "--format", "json",
    )
    doc = json.loads(out)
    assert code == 0
    methods = {row["method"] for row in doc["rows"]}
    assert methods == {"auto", "mc"}
    for row in doc["rows"]:
        assert row["error"] is None
        assert row["ms"] >= 0


def test_bench_vi_row_degrades_on_non_stopping_game(game_file, tmp_path, capsys):
    game_file(GAME_E, "e.ssg")
    suite = tmp_path / "suite.txt"
    suite.write_text("e.ssg\n")
    code, out, _ = run(
        capsys, "bench", "--suite", str(suite), "--methods", "vi", "--format", "json"
    )
    doc = json.loads(out)
    assert code == 0
    assert all(row["error"] == "PreconditionError" for row in doc["rows"])


def test_bench_empty_suite_is_domain_error(tmp_path, capsys):
    suite = tmp_path / "suite.txt"
    suite.write_text("# nothing here\n")
    code, _, err = run(capsys, "bench", "--suite", str(suite))
    assert code == 1
    assert "no game files" in err


def test_bench_unknown_method_is_usage_error(tmp_path, capsys):
    suite = tmp_path / "suite.txt"
    suite.write_text("x.ssg\n")
    code, _, _ = run(capsys, "bench", "--suite", str(suite), "--methods", "fast")
    assert code == 2


# ------------------------------------------------------------- failures


def test_missing_file_is_domain_error(capsys):
    code, _, err = run(capsys, "validate", "/nonexistent/game.ssg")
    assert code == 1
    assert err.startswith("error:")


def test_malformed_game_is_domain_error(tmp_path, capsys):
    bad = tmp_path / "bad.ssg"
    bad.write_text("ssg 3 1\n1 avg 2\n")
    code, _, err = run(capsys, "validate", str(bad))
    assert code == 1
    assert "error: line" in err


def test_unknown_verb_is_usage_error(capsys):
    code, _, _ = run(capsys, "frobnicate")
    assert code == 2


def test_no_verb_is_usage_error(capsys):
    assert run(capsys)[0] == 2
