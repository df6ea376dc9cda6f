import json
import subprocess
import sys

import pytest

from latrans import cyclic_square, parse_square, serialize_square
from latrans.bounds import upper_bound_log
from latrans.cli import main


@pytest.fixture
def c5(tmp_path):
    p = tmp_path / "c5.txt"
    p.write_text(serialize_square(cyclic_square(5)))
    return str(p)


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def test_gen_cyclic(capsys):
    code, out, _ = run(capsys, "gen", "cyclic", "-n", "3")
    assert code == 0
    assert parse_square(out) == cyclic_square(3)


def test_gen_random_is_seeded(capsys):
    a = run(capsys, "gen", "random", "-n", "6", "--seed", "4")[1]
    b = run(capsys, "gen", "random", "-n", "6", "--seed", "4")[1]
    c = run(capsys, "gen", "random", "-n", "6", "--seed", "5")[1]
    assert a == b and a != c
    assert '# seed=4' in a


def test_gen_mols_writes_two_squares(capsys, tmp_path):
    out = tmp_path / "m.txt"
    assert run(capsys, "gen", "mols", "-n", "5", "--out", str(out))[0] == 0
    blocks = out.read_text().strip().split("\n\n")
    assert len(blocks) == 2
    a, b = (parse_square(t) for t in blocks)
    from latrans.latin import is_orthogonal
    assert is_orthogonal(a, b)


def test_gen_unsupported_order(capsys):
    code, _, err = run(capsys, "gen", "mols", "-n", "6")
    assert code == 2 and "UnsupportedOrder" in err


def test_validate(capsys, c5, tmp_path):
    assert run(capsys, "validate", c5)[0] == 0
    bad = tmp_path / "bad.txt"
    bad.write_text("3 0\n0 1 2\n0 2 1\n2 0 1")
    code, out, _ = run(capsys, "validate", str(bad))
    assert code == 1 and "col-dup" in out


def test_validate_parse_error(capsys, tmp_path):
    bad = tmp_path / "bad.txt"
    bad.write_text("3 0\n0 1 2\n1 2\n2 0 1")
    code, _, err = run(capsys, "validate", str(bad))
    assert code == 2 and "line 3" in err


def test_count(capsys, c5):
    code, out, _ = run(capsys, "count", c5, "--format", "json", "--list", "2")
    obj = json.loads(out)
    assert code == 0 and obj["count"] == 15 and len(obj["transversals"]) == 2
    assert run(capsys, "count", c5, "--workers", "2")[1].startswith("order 5: 15 transversals")


def test_count_too_large(capsys, tmp_path):
    p = tmp_path / "c15.txt"
    p.write_text(serialize_square(cyclic_square(15)))
    assert run(capsys, "count", str(p))[0] == 2


def test_estimate(capsys, c5):
    code, out, _ = run(capsys, "estimate", c5, "--samples", "4000", "--format", "json")
    obj = json.loads(out)
    assert code == 0 and obj["samples"] == 4000
    assert abs(obj["mean"] - 15) < 5 * obj["stderr"]


def test_construct_and_pad(capsys, tmp_path):
    out = tmp_path / "L.txt"
    code, _, err = run(capsys, "construct", "--b", "3", "--k", "1", "--seed", "2", "--out", str(out))
    assert code == 0 and "54 disjoint special transversals" in err
    sq = parse_square(out.read_text())
    assert sq.order == 81
    code, out, err = run(capsys, "pad", "--b", "3", "--k", "1", "--nprime", "84")
    assert code == 0 and parse_square(out).order == 84


def test_pad_rejects_small_s(capsys):
    assert run(capsys, "pad", "--b", "3", "--k", "1", "--nprime", "82")[0] == 2


def test_bounds(capsys):
    code, out, _ = run(capsys, "bounds", "-n", "5", "--format", "json")
    assert code == 0 and json.loads(out)["log_upper"] == upper_bound_log(2, 5).log_upper
    assert run(capsys, "bounds", "-n", "3")[0] == 2


def test_verify_claims(capsys, c5):
    code, out, _ = run(capsys, "verify-claims", c5, "--format", "json")
    obj = json.loads(out)
    assert code == 0 and obj["transversals"] == 15 and obj["checked"] == 75 and obj["failures"] == 0
    code, out, _ = run(capsys, "verify-claims", "--group", "3", "3", "--format", "json")
    assert code == 0 and json.loads(out)["transversals"] == 27
    assert run(capsys, "verify-claims")[0] == 2


def test_experiment(capsys, tmp_path, monkeypatch):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"pipelines": [{"source": "generate", "generator": "cyclic", "orders": [3, 5]}]}))
    monkeypatch.setenv("LATRANS_OUT_DIR", str(tmp_path / "env"))
    code, out, _ = run(capsys, "experiment", str(cfg), "--stem", "x")
    assert code == 0 and (tmp_path / "env" / "x.csv").exists()
    code, _, _ = run(capsys, "experiment", str(cfg), "--out", str(tmp_path / "flag"))
    assert code == 0 and (tmp_path / "flag" / "report.json").exists()
    cfg.write_text(json.dumps({"pipelines": [{"source": "nowhere"}]}))
    code, _, err = run(capsys, "experiment", str(cfg))
    assert code == 2 and "$.pipelines[0].source" in err


def test_usage_error_exit_code(capsys):
    with pytest.raises(SystemExit) as ei:
        main(["gen"])
    assert ei.value.code == 2


def test_module_entry_point(c5):
    res = subprocess.run([sys.executable, "-m", "latrans", "count", c5], capture_output=True, text=True)
    assert res.returncode == 0 and "15 transversals" in res.stdout
