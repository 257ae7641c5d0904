import csv
import json

import pytest

from qpcocycle.cli import main


def rows(path):
    with open(path, newline="") as fh:
        return list(csv.reader(fh))


def test_freq_json(capsys):
    assert main(["freq", "--alpha", "golden", "--max-q", "1000", "--json"]) == 0
    data = json.loads(capsys.readouterr().out)
    assert data["convergents"][-1] == [610, 987]
    assert set(data["partial_quotients"]) == {1}


def test_freq_text(tmp_path):
    out = tmp_path / "f.txt"
    assert main(["--out", str(out), "freq", "--alpha", "sqrt2m1", "--max-q", "100"]) == 0
    assert "q=70" in out.read_text()


def test_lyapunov_constant_cocycle(tmp_path):
    out = tmp_path / "l.csv"
    argv = ["lyapunov", "--v", "amo", "--lambda", "0", "--E", "3", "--n", "10000",
            "--phases", "1", "--method", "birkhoff", "--csv", str(out)]
    assert main(argv) == 0
    table = rows(out)
    assert table[0] == ["E", "n", "phases", "method", "L", "stderr"]
    assert abs(float(table[1][4]) - 0.962424) <= 1e-3


def test_lyapunov_assert_modes(tmp_path):
    base = ["--assert", "--out", str(tmp_path / "l.csv"), "lyapunov", "--lambda", "0",
            "--E", "3", "--n", "2000", "--phases", "1"]
    assert main(base + ["--expect", "0.9624", "--tol", "1e-2"]) == 0
    assert main(base + ["--expect", "0.5", "--tol", "1e-2"]) == 4


def test_ids_and_thouless(tmp_path):
    ids = tmp_path / "ids.csv"
    assert main(["--out", str(ids), "ids", "--lambda", "0", "--E-range=-3,3,400",
                 "--n", "1000", "--phases", "1"]) == 0
    assert rows(ids)[0] == ["E", "N"]
    out = tmp_path / "t.txt"
    assert main(["--assert", "--out", str(out), "thouless", "--lambda", "0", "--E", "3",
                 "--ids-csv", str(ids), "--n", "5000", "--phases", "1"]) == 0
    assert "L_thouless" in out.read_text()


def test_ldt_csv(tmp_path):
    out = tmp_path / "ldt.csv"
    argv = ["--assert", "ldt", "--v", "amo", "--lambda", "10", "--E", "0", "--alpha", "golden",
            "--scales", "50,100,200,400", "--phases", "100000", "--csv", str(out)]
    assert main(argv) == 0
    table = rows(out)
    assert table[0] == ["lambda", "i", "kappa", "phases", "fraction", "delta_hat_running"]
    assert len(table) == 5
    fr = [float(r[4]) for r in table[1:]]
    assert all(b <= a + 3 / 100000**0.5 for a, b in zip(fr, fr[1:]))


def test_induct_json(tmp_path):
    out = tmp_path / "ind.json"
    assert main(["--assert", "induct", "--lambda", "20", "--levels", "1", "--json", str(out)]) == 0
    (level,) = json.loads(out.read_text())
    for key in ("level", "q", "case", "type", "critical_points", "r_plus_min", "r_minus_min",
                "growth_margin_min", "nondeg_c", "drift"):
        assert key in level


def test_holder_from_csv(tmp_path):
    src = tmp_path / "curve.csv"
    src.write_text("E,f\n" + "".join(f"{e / 200 - 1!r},{abs(e / 200 - 1) ** 0.5!r}\n"
                                     for e in range(401)))
    out = tmp_path / "h.txt"
    assert main(["--assert", "--out", str(out), "holder", "--input-csv", str(src)]) == 0
    sigma = float(out.read_text().split()[2])
    assert abs(sigma - 0.5) <= 0.05


def test_ap_check(tmp_path):
    out = tmp_path / "ap.csv"
    assert main(["--assert", "ap-check", "--m", "8", "--trials", "10", "--csv", str(out)]) == 0
    assert rows(out)[0] == ["trial", "m", "mu", "cond8", "cond9", "defect", "defect_over_bound"]


@pytest.mark.parametrize("argv", [
    ["lyapunov", "--lambda", "-1", "--E", "0"],
    ["lyapunov", "--lambda", "1"],
    ["ids", "--E-range=3,-3,10"],
    ["freq", "--alpha", "banana"],
    ["freq", "--max-q", "0"],
    ["nonsense"],
])
def test_config_errors(argv, capsys):
    assert main(argv) == 2
    assert capsys.readouterr().err


def test_numerical_error_exit(capsys):
    assert main(["holder", "--lambda", "0", "--window=2.5,3.5", "--grid", "50",
                 "--n", "500", "--phases", "2"]) == 3
    assert "vacuous" in capsys.readouterr().err


def test_config_file_and_override(tmp_path):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"lambda": 0, "E": 3, "n": 1000, "phases": 2}))
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    assert main(["--config", str(cfg), "--out", str(a), "lyapunov"]) == 0
    assert main(["--config", str(cfg), "--out", str(b), "lyapunov", "--n", "500"]) == 0
    assert rows(a)[1][1] == "1000" and rows(b)[1][1] == "500"
    cfg.write_text("[1, 2]")
    assert main(["--config", str(cfg), "lyapunov"]) == 2


def test_manifest_and_replay(tmp_path):
    man, a, b = tmp_path / "m.json", tmp_path / "a.csv", tmp_path / "b.csv"
    argv = ["--manifest", str(man), "--out", str(a), "--threads", "3", "ids", "--lambda", "2",
            "--E-range=-5,5,60", "--n", "300", "--phases", "4"]
    assert main(argv) == 0
    data = json.loads(man.read_text())
    assert data["argv"] == argv
    assert data["config"]["lam"] == 2.0
    assert data["convergents"] and data["versions"]["numpy"]
    assert data["wall_time"] >= 0
    assert main(["--out", str(b), "--config", str(man)]) == 0
    assert a.read_bytes() == b.read_bytes()


def test_thread_count_does_not_change_output(tmp_path):
    outs = []
    for threads in ("1", "4"):
        out = tmp_path / f"l{threads}.csv"
        assert main(["--threads", threads, "--out", str(out), "lyapunov", "--lambda", "3",
                     "--E-range=-2,2,9", "--n", "2000", "--phases", "8"]) == 0
        outs.append(out.read_bytes())
    assert outs[0] == outs[1]
