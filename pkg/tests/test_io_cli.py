import json
import subprocess
import sys

import pytest

from freiman import GroupSpec, SubsetSample
from freiman.cli import main
from freiman.io import FormatError, read_map, read_set, write_map, write_set


def run(argv, capsys):
    code = main([str(a) for a in argv])
    out, err = capsys.readouterr()
    return code, out, err


def test_set_roundtrip(tmp_path):
    A = SubsetSample.explicit(GroupSpec((4, 9)), [0, 5, 17])
    path = tmp_path / "a.txt"
    write_set(path, A)
    assert path.read_text() == "group=4,9\n0\n5\n17\n"
    assert read_set(path) == A


def test_map_roundtrip(tmp_path):
    path = tmp_path / "m.txt"
    write_map(path, GroupSpec.cyclic(7), {1: 5, 0: 2})
    assert path.read_text() == "target=7\n0 2\n1 5\n"
    assert read_map(path) == (GroupSpec.cyclic(7), {0: 2, 1: 5})


@pytest.mark.parametrize("text", [
    "",
    "0\n1\n",
    "group=6\n1\nx\n",
    "group=6\n6\n",
    "group=6\n3\n1\n",
    "group=6\n1\n1\n",
])
def test_bad_set_files(tmp_path, text):
    path = tmp_path / "bad.txt"
    path.write_text(text)
    with pytest.raises(FormatError):
        read_set(path)


@pytest.mark.parametrize("text", ["target=5\n0\n", "target=5\n0 5\n", "target=5\n0 1\n0 2\n", "target=5\na b\n"])
def test_bad_map_files(tmp_path, text):
    path = tmp_path / "bad.txt"
    path.write_text(text)
    with pytest.raises(FormatError):
        read_map(path)


def test_comments_and_blank_lines(tmp_path):
    path = tmp_path / "c.txt"
    path.write_text("# a set\ngroup=6\n\n0  # first\n1\n3\n")
    assert read_set(path).tolist() == [0, 1, 3]


def test_analyze_example(tmp_path, capsys):
    path = tmp_path / "b.txt"
    path.write_text("group=6\n0\n1\n3\n")
    code, out, _ = run(["analyze", "--set", path], capsys)
    rep = json.loads(out)
    assert code == 0
    assert rep["n_quads"] == 2 and rep["isolated"] == [1] and rep["freiman_dim"] == 1 and rep["rigidity"] is False
    code, out, _ = run(["analyze", "--n", 5, "--elements", "0,1,2,3,4", "--eta", 0.2], capsys)
    rep = json.loads(out)
    assert rep["freiman_dim"] == 0 and rep["isolated"] == [] and rep["connectivity"]["verdict"] == "connected"
    assert rep["rigidity"] is True


def test_analyze_errors(tmp_path, capsys):
    path = tmp_path / "e.txt"
    path.write_text("group=6\n")
    code, _, err = run(["analyze", "--set", path], capsys)
    assert code == 2 and "empty set" in err
    assert run(["analyze", "--set", tmp_path / "missing.txt"], capsys)[0] == 2
    assert run(["analyze", "--group", "4,x", "--elements", "1"], capsys)[0] == 2
    assert run(["analyze", "--n", 5], capsys)[0] == 1
    assert run(["frobnicate"], capsys)[0] == 1
    assert run([], capsys)[0] == 1


def test_require_verdict(capsys):
    argv = ["analyze", "--n", 40, "--elements", ",".join(str(x) for x in range(0, 40, 2)), "--eta", 0.5, "--wmax", 2]
    code, out, _ = run(argv, capsys)
    assert code == 0 and json.loads(out)["connectivity"]["verdict"] == "inconclusive"
    assert run(argv + ["--require-verdict"], capsys)[0] == 3


def test_analyze_sampled_and_rigidity_skip(capsys):
    code, out, _ = run(["analyze", "--n", 3000, "--C", 6, "--seed", 4, "--rigidity-max", 10], capsys)
    rep = json.loads(out)
    assert code == 0 and rep["size"] > 10
    if rep["freiman_dim"] == 0:
        assert rep["rigidity"] is None and rep["notes"]


def test_config_precedence(tmp_path, capsys):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"n": 500, "C": [1.0], "trials": 4, "seed": 7, "format": "json"}))
    code, out, _ = run(["scan", "--config", cfg], capsys)
    rows = json.loads(out)
    assert code == 0 and rows[0]["trials"] == 4 and rows[0]["seed"] == 7
    code, out, _ = run(["scan", "--config", cfg, "--trials", 2], capsys)
    assert json.loads(out)[0]["trials"] == 2
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps({"nonsense": 1}))
    assert run(["scan", "--config", bad], capsys)[0] == 1
    bad.write_text("{")
    assert run(["scan", "--config", bad], capsys)[0] == 2


def test_scan_and_hitting_outputs(tmp_path, capsys):
    out = tmp_path / "scan.csv"
    assert run(["scan", "--n", 400, "--C", 1, "--C", 3, "--trials", 3, "--out", out], capsys)[0] == 0
    lines = out.read_text().splitlines()
    assert lines[0].startswith("n,C,p,trials,frac_no_isolated,frac_dim0,mean_dim,std_dim,ci_half,seed")
    assert len(lines) == 3
    assert run(["scan", "--n", 400, "--trials", 3], capsys)[0] == 1
    assert run(["scan", "--n", 400, "--C", 500], capsys)[0] == 2
    code, text, _ = run(["hitting", "--n", 30, "--trials", 2, "--format", "json"], capsys)
    data = json.loads(text)
    assert code == 0 and len(data["records"]) == 2 and "coincide_frac" in data["summary"]
    assert run(["hitting", "--n", 30, "--trials", 0], capsys)[0] == 2


def test_extract(tmp_path, capsys):
    s, m = tmp_path / "u.txt", tmp_path / "phi.txt"
    n, elems = 101, [0, 3, 7, 12, 20, 33, 41, 52, 64, 77, 85, 90, 95]
    s.write_text("group=101\n" + "".join(f"{x}\n" for x in elems))
    m.write_text("target=101\n" + "".join(f"{x} {(5 * x + 2) % n}\n" for x in elems))
    code, out, _ = run(["extract", "--set", s, "--map", m], capsys)
    rep = json.loads(out)
    assert code == 0 and rep["notes"] == [] and rep["input_is_freiman_hom"]
    assert rep["alpha"] == {"hom": [5], "shift": 2} and rep["agreement"] == 1.0
    m.write_text("target=101\n" + "".join(f"{x} {(x * x) % n}\n" for x in elems))
    code, out, _ = run(["extract", "--set", s, "--map", m], capsys)
    rep = json.loads(out)
    assert code == 0 and rep["notes"] == ["input not a Freiman homomorphism"] and "agreement" in rep
    m.write_text("target=101\n0 1\n")
    code, _, err = run(["extract", "--set", s, "--map", m], capsys)
    assert code == 2 and "not total" in err
    assert run(["extract", "--set", s], capsys)[0] == 1


def test_module_entry_point():
    res = subprocess.run([sys.executable, "-m", "freiman", "analyze", "--n", "5", "--elements", "0,1,2"],
                         capture_output=True, text=True)
    assert res.returncode == 0 and json.loads(res.stdout)["freiman_dim"] == 1
