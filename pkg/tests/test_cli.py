import json

import numpy as np
import pytest

from psnet.cli import main, parse_mode_list, parse_squeezing, UsageError
from psnet.counting import load_grouped
from psnet.network import load_matrix


def test_parse_mode_list():
    assert parse_mode_list("2,10,100") == [2, 10, 100]
    assert parse_mode_list("2..6") == [2, 3, 4, 5, 6]
    assert parse_mode_list("2..500:100") == [2, 102, 202, 302, 402]
    with pytest.raises(UsageError):
        parse_mode_list("1")


def test_parse_squeezing():
    assert np.allclose(parse_squeezing("0.3:1.0", 8), np.linspace(0.3, 1.0, 8))
    assert np.allclose(parse_squeezing("0.5", 3), 0.5)
    assert np.allclose(parse_squeezing("0.1,0.2", 2), [0.1, 0.2])
    with pytest.raises(UsageError):
        parse_squeezing("0.1,0.2", 3)


def test_matgen_haar_and_chain(tmp_path):
    out = tmp_path / "u.txt"
    assert main(["matgen", "--kind", "haar", "--modes", "5", "--seed", "3", "-o", str(out)]) == 0
    T = load_matrix(out)
    assert T.M == 5 and T.is_unitary()
    assert "config:" in out.read_text().splitlines()[0]
    out2 = tmp_path / "c.txt"
    assert main(["matgen", "--kind", "bschain", "--modes", "3", "--reflectivities", "0.6,0.8", "-o", str(out2)]) == 0
    assert load_matrix(out2).entries[0, 0] == pytest.approx(0.6)
    assert main(["matgen", "--kind", "bschain", "--modes", "3", "--reflectivities", "0.6", "-o", str(out2)]) == 2


def test_gbs_thermal_with_reference(tmp_path, capsys):
    out = tmp_path / "g.csv"
    rep = tmp_path / "r.json"
    code = main(["gbs", "--modes", "6", "--input", "thermal", "--haar", "--reference", "exact-thermal",
                 "--repeats", "10", "--chunk", "500", "--seed", "2", "--report", str(rep), "-o", str(out)])
    assert code == 0
    d = load_grouped(out)
    assert d.shape == (7,) and d.total() == pytest.approx(1.0)
    assert d.meta["config"]["seed"] == 2 and "threads" not in d.meta["config"]
    assert json.loads(rep.read_text())["k_valid"] >= 1
    assert "chi2/k" in capsys.readouterr().out


def test_gbs_deterministic_across_threads(tmp_path):
    args = ["gbs", "--modes", "4", "--r", "0.3:0.9", "--groups", "2+2", "--repeats", "4", "--chunk", "100"]
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    assert main(args + ["--threads", "1", "-o", str(a)]) == 0
    assert main(args + ["--threads", "3", "-o", str(b)]) == 0
    assert a.read_text() == b.read_text()


def test_gbs_chi2_gate_exit_code(tmp_path):
    code = main(["gbs", "--modes", "4", "--r", "0.8", "--reference", "exact-independent", "--repeats", "4",
                 "--chunk", "200", "--max-chi2-per-k", "0", "-o", str(tmp_path / "g.csv")])
    assert code == 4


def test_gbs_errors(tmp_path):
    out = str(tmp_path / "g.csv")
    assert main(["gbs", "--modes", "4", "--repeats", "1", "-o", out]) == 2
    assert main(["gbs", "--modes", "4", "--matrix", str(tmp_path / "missing.txt"), "-o", out]) == 3
    bad = tmp_path / "bad.txt"
    bad.write_text("2 2\n1 0\n")
    assert main(["gbs", "--modes", "2", "--matrix", str(bad), "-o", out]) == 3
    assert main(["gbs", "--modes", "4", "--groups", "0;0", "-o", out]) == 2
    assert main(["gbs", "--modes", "4", "--reference", "exact-thermal", "-o", out]) == 2
    assert main(["gbs", "--bogus"]) == 2


def test_config_file_defaults_and_precedence(tmp_path):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("# small run\nmodes = 3\nrepeats = 3\nchunk = 50\nseed = 4\n")
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    assert main(["gbs", "--config", str(cfg), "-o", str(a)]) == 0
    assert load_grouped(a).meta["config"]["seed"] == 4
    assert main(["gbs", "--config", str(cfg), "--seed", "9", "-o", str(b)]) == 0
    assert load_grouped(b).meta["config"]["seed"] == 9
    cfg.write_text("modes = three\n")
    assert main(["gbs", "--config", str(cfg), "-o", str(a)]) == 2
    cfg.write_text("nonsense = 1\n")
    assert main(["gbs", "--config", str(cfg), "-o", str(a)]) == 2
    assert main(["gbs", "--config", str(tmp_path / "none.cfg"), "-o", str(a)]) == 3


def test_entangle_writes_json_lines(tmp_path, capsys):
    out = tmp_path / "e.jsonl"
    assert main(["entangle", "--modes", "2,5", "--r", "1.0", "--repeats", "4", "--chunk", "500", "-o", str(out)]) == 0
    lines = [json.loads(l) for l in out.read_text().splitlines()]
    assert lines[0]["config"]["r"] == 1.0
    assert [l["M"] for l in lines[1:]] == [2, 5]
    assert lines[1]["statistics"][2]["statistic"] == "product"
    assert "product" in capsys.readouterr().out


def test_compare(tmp_path):
    sim, ref, rep = tmp_path / "s.csv", tmp_path / "r.csv", tmp_path / "c.json"
    base = ["gbs", "--modes", "3", "--r", "0.7", "--repeats", "4", "--chunk", "500"]
    assert main(base + ["--seed", "1", "-o", str(sim)]) == 0
    assert main(base + ["--seed", "2", "-o", str(ref)]) == 0
    assert main(["compare", "--sim", str(sim), "--ref", str(ref), "-o", str(rep)]) == 0
    assert json.loads(rep.read_text())["k_valid"] >= 1
