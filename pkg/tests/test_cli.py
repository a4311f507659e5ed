import json
import math
import subprocess
import sys

import pytest

from shiftmatch.cli import EXIT, main, parse_k_values, resolve_k_rule


@pytest.fixture
def models(tmp_path):
    (tmp_path / "ising.toml").write_text("[ising]\nJ = 0.5\nh = 0.0\n")
    (tmp_path / "zero.toml").write_text("[zero]\nsize = 2\n")
    (tmp_path / "iid.toml").write_text("[iid]\np = [0.8, 0.2]\n")
    return tmp_path


def run(argv, capsys):
    code = main([str(a) for a in argv])
    out, err = capsys.readouterr()
    return code, out, err


def test_thermo_alpha(models, capsys):
    code, out, err = run(["thermo", "--model", models / "ising.toml", "--alpha"], capsys)
    assert code == 0
    name, value = out.split()
    assert name == "alpha" and float(value) == pytest.approx(0.249798, abs=1e-6)
    assert err.startswith("# seed=314159 model=ising digest=")


def test_thermo_csv_table(models, capsys):
    code, out, _ = run(["thermo", "--model", models / "iid.toml", "--format", "csv",
                        "--n", 100000, "--k", 4], capsys)
    assert code == 0
    rows = [line.split(",") for line in out.strip().splitlines()]
    assert rows[0] == ["quantity", "param", "value"]
    table = {(r[0], r[1]): float(r[2]) for r in rows[1:]}
    assert table[("alpha", "")] == pytest.approx(-0.5 * math.log(0.68), abs=1e-12)
    assert table[("rho_hat", "")] == pytest.approx(0.8)
    assert table[("k_star", "n=100000")] == pytest.approx(59.7047, abs=1e-4)


def test_thermo_alpha_tilde(models, capsys):
    code, out, _ = run(["thermo", "--model", models / "zero.toml", "--model2",
                        models / "iid.toml", "--alpha-tilde"], capsys)
    assert code == 0
    assert float(out.split()[1]) == pytest.approx(math.log(2) / 2, abs=1e-12)


def test_missing_model_file(tmp_path, capsys):
    code, out, err = run(["thermo", "--model", tmp_path / "nope.toml", "--alpha"], capsys)
    assert code == EXIT["missing-file"] != 0
    assert out == ""
    assert err.strip().startswith("error[missing-file]:")
    assert "nope.toml" in err
    assert len(err.strip().splitlines()) == 1


def test_bad_model_file(tmp_path, capsys):
    f = tmp_path / "bad.toml"
    f.write_text('alphabet = ["a"]\nrange = 0\n[[term]]\noffsets = [1]\npattern = ["a"]\nvalue = 1\n')
    code, _, err = run(["thermo", "--model", f], capsys)
    assert code == EXIT["model-file"]
    assert "bad.toml:3:" in err


def test_unknown_flag(models, capsys):
    code, _, err = run(["thermo", "--model", models / "ising.toml", "--bogus"], capsys)
    assert code == EXIT["usage"]
    assert err.startswith("error[usage]:")


def test_no_subcommand(capsys):
    code, _, err = run([], capsys)
    assert code == EXIT["usage"]


def test_sample_and_match(models, tmp_path, capsys):
    a, b = tmp_path / "a.txt", tmp_path / "b.txt"
    assert run(["sample", "--model", models / "zero.toml", "--n", 200, "--seed", 1, "--out", a], capsys)[0] == 0
    assert run(["sample", "--model", models / "zero.toml", "--n", 200, "--seed", 2, "--out", b], capsys)[0] == 0
    head, body = a.read_text().splitlines()
    assert head == "# model=zero n=200 seed=1"
    assert len(body) == 200 and set(body) <= {"a", "b"}

    code, out, err = run(["match", "--seq", a, "--k", "3..5"], capsys)
    assert code == 0
    lines = out.strip().splitlines()
    assert lines[0] == "n,k,N,M,M_i,M_j,T,T_i,T_j"
    assert [line.split(",")[1] for line in lines[1:]] == ["3", "4", "5"]
    assert "seed=1" in err

    code, out, _ = run(["match", "--seq", a, "--seq", b, "--k", "4"], capsys)
    assert code == 0
    header, row = out.strip().splitlines()
    assert header.split(",")[-3:] == ["M_free", "M_free_i", "M_free_j"]


def test_match_values(tmp_path, capsys):
    f = tmp_path / "m.txt"
    f.write_text("mississippi\n")
    code, out, _ = run(["match", "--seq", f, "--k", "1,4,5"], capsys)
    rows = [r.split(",") for r in out.strip().splitlines()[1:]]
    assert rows[0][:4] == ["11", "1", "13", "4"]
    assert rows[1][2] == "1" and rows[1][4:6] == ["1", "4"]
    assert rows[2][2] == "0" and rows[2][6] == "inf"


def test_match_length_mismatch(tmp_path, capsys):
    a, b = tmp_path / "a.txt", tmp_path / "b.txt"
    a.write_text("ababa\n")
    b.write_text("abab\n")
    code, out, err = run(["match", "--seq", a, "--seq", b, "--k", "5"], capsys)
    assert code == EXIT["length-mismatch"]
    assert out == ""
    assert err.startswith("error[length-mismatch]:")
    assert "equal lengths" in err


def test_match_k_rule(models, tmp_path, capsys):
    f = tmp_path / "s.txt"
    run(["sample", "--model", models / "zero.toml", "--n", 1024, "--out", f], capsys)
    code, out, _ = run(["match", "--seq", f, "--model", models / "zero.toml",
                        "--k-rule", "kstar+-1"], capsys)
    assert code == 0
    assert [r.split(",")[1] for r in out.strip().splitlines()[1:]] == ["19", "20", "21"]


def test_match_k_out_of_range(tmp_path, capsys):
    f = tmp_path / "s.txt"
    f.write_text("abc\n")
    code, _, err = run(["match", "--seq", f, "--k", "9"], capsys)
    assert code == EXIT["invalid-value"]


def test_k_parsing():
    assert parse_k_values("5") == [5]
    assert parse_k_values("3..5,9") == [3, 4, 5, 9]
    assert parse_k_values("2:3") == [2, 3]
    assert resolve_k_rule("kstar±2", 20.0) == [18, 19, 20, 21, 22]
    assert resolve_k_rule("kstar+3", 19.9999999999) == [23]
    assert resolve_k_rule("kstar-1", 20.5) == [19]


PLAN = """
seed = 7
model = "zero.toml"

[[scan]]
name = "moment"
mode = "pair-same"
n = [50, 100]
k = [4]
trials = 60

[[scan]]
name = "tight"
kind = "tightness"
mode = "self"
n = [64, 256]
trials = 60

[[scan]]
name = "slope"
kind = "slope"
n = [32, 256, 2048, 32768]
trials = 5

[[scan]]
name = "dirac"
kind = "dirac"
symbol = "b"
n = [500, 5000]
trials = 20
"""


def test_experiment_outputs_and_workers(models, tmp_path, capsys):
    plan = models / "plan.toml"
    plan.write_text(PLAN)
    out1, out2 = tmp_path / "r1", tmp_path / "r2"
    assert run(["experiment", plan, "--out", out1, "--plot-data"], capsys)[0] == 0
    assert run(["experiment", plan, "--out", out2, "--plot-data", "--workers", 2], capsys)[0] == 0
    names = sorted(p.name for p in out1.iterdir())
    assert "manifest.json" in names and "moment.csv" in names and "tight_exceed.csv" in names
    assert not [n for n in names if n.endswith(".tmp")]
    for p in out1.iterdir():
        if p.suffix in (".csv", ".dat"):
            assert p.read_bytes() == (out2 / p.name).read_bytes(), p.name
    header = (out1 / "moment.csv").read_text().splitlines()[0]
    assert header == "n,k,trials,mean,var,q05,q50,q95,zero_frac,pred_mean,ratio"
    row = (out1 / "moment.csv").read_text().splitlines()[2].split(",")
    assert float(row[9]) == pytest.approx(97 * 96 * 2**-4)
    manifest = json.loads((out1 / "manifest.json").read_text())
    assert manifest["seed"] == 7
    assert manifest["models"][0]["id"] == "zero"
    assert {s["name"] for s in manifest["scans"]} == {"moment", "tight", "slope", "dirac"}


def test_experiment_failure_leaves_no_files(models, tmp_path, capsys):
    plan = models / "plan.toml"
    plan.write_text(PLAN + '\n[[scan]]\nname = "late"\nkind = "slope"\nn = [10, 20, 40]\ntrials = 2\n')
    out = tmp_path / "r"
    code, _, err = run(["experiment", plan, "--out", out], capsys)
    assert code == EXIT["invalid-value"]
    assert "late" in err
    assert not out.exists()


def test_experiment_plan_errors(models, tmp_path, capsys):
    plan = models / "p.toml"
    plan.write_text('model = "zero.toml"\n[[scan]]\nn = [100, 50]\n')
    code, _, err = run(["experiment", plan, "--out", tmp_path / "o"], capsys)
    assert code == EXIT["plan-file"] and "increasing" in err
    code, _, err = run(["experiment", tmp_path / "missing.toml", "--out", tmp_path / "o"], capsys)
    assert code == EXIT["missing-file"]
    plan.write_text('model = "nothere.toml"\n[[scan]]\nn = [100]\n')
    code, _, err = run(["experiment", plan, "--out", tmp_path / "o"], capsys)
    assert code == EXIT["missing-file"] and "nothere.toml" in err


def test_inline_model_in_plan(tmp_path, capsys):
    plan = tmp_path / "p.toml"
    plan.write_text('[model]\nising = { J = 0.5 }\n[[scan]]\nname = "r"\nn = [64]\nk = [3]\ntrials = 4\n')
    assert run(["experiment", plan, "--out", tmp_path / "o"], capsys)[0] == 0
    assert (tmp_path / "o" / "r.csv").exists()


def test_module_entry_point(models):
    res = subprocess.run([sys.executable, "-m", "shiftmatch", "thermo", "--model",
                          str(models / "zero.toml"), "--pressure"],
                         capture_output=True, text=True)
    assert res.returncode == 0
    assert float(res.stdout.split()[1]) == pytest.approx(math.log(2))
