import csv
import json
import subprocess
import sys

import pytest

from gipj import __version__
from gipj.cli import RunConfig, main, parse_range
from gipj.errors import ConfigError


def read_body(path):
    lines = path.read_text().splitlines()
    head = [ln for ln in lines if ln.startswith("#")]
    body = [ln for ln in lines if not ln.startswith("#")]
    return head, body


def test_parse_range():
    assert parse_range("0:1:5") == [0.0, 0.25, 0.5, 0.75, 1.0]
    assert parse_range("0.3") == [0.3]
    assert parse_range("2:3:1") == [2.0]
    for bad in ("0:1", "a:b:3", "0:1:0", ""):
        with pytest.raises(ConfigError):
            parse_range(bad)


def test_config_digest_ignores_output_dir():
    a = RunConfig("classify", lam=3.0, data="sin4pi", out="x")
    b = RunConfig("classify", lam=3.0, data="sin4pi", out="y")
    c = RunConfig("classify", lam=2.0, data="sin4pi")
    assert a.digest() == b.digest() != c.digest()


def test_classify_writes_report(tmp_path):
    code = main(["classify", "--lambda", "3", "--data", "sin4pi", "--p", "2", "--p", "inf", "--out", str(tmp_path)])
    assert code == 0
    head, body = read_body(tmp_path / "classify.json")
    assert head[0] == f"# gipj {__version__}"
    assert head[1].startswith("# config ") and head[2].startswith("# tolerances ")
    rep = json.loads("\n".join(body))
    assert [r["theorem"]["p"] for r in rep["results"]] == [2.0, "+inf"]
    r = rep["results"][0]
    assert r["verdict"] == "two-sided-everywhere"
    assert r["t_star"] == pytest.approx(0.541882609401924, rel=1e-9)


def test_classify_with_trends(tmp_path):
    code = main(["classify", "--lambda", "-0.5", "--data", "ex4", "--trends", "--out", str(tmp_path)])
    assert code == 0
    rep = json.loads("\n".join(read_body(tmp_path / "classify.json")[1]))
    assert rep["results"][0]["agreement"] == {"lp": True, "E": True, "dE/dt": True}


def test_solve_tables(tmp_path):
    code = main(["solve", "--lambda", "1", "--data", "sin4pi", "--time", "0:1:3", "--grid-alpha", "9",
                 "--eulerian", "--out", str(tmp_path)])
    assert code == 0
    _, body = read_body(tmp_path / "lagrangian.csv")
    rows = list(csv.DictReader(body))
    assert len(rows) == 27 and list(rows[0]) == ["alpha", "eta", "t", "ux", "gamma_alpha", "uxx"]
    _, body = read_body(tmp_path / "scalars.csv")
    sc = list(csv.DictReader(body))
    assert float(sc[2]["I"]) == pytest.approx(-1.0, abs=1e-10)
    assert float(sc[1]["kbar0"]) == pytest.approx(1 / (1 - float(sc[1]["eta"]) ** 2) ** 0.5, rel=1e-10)
    assert (tmp_path / "eulerian.csv").exists()


def test_solve_lambda_zero_has_nan_kbar(tmp_path):
    assert main(["solve", "--lambda", "0", "--data", "remark", "--eta", "0.5", "--out", str(tmp_path)]) == 0
    _, body = read_body(tmp_path / "scalars.csv")
    assert list(csv.DictReader(body))[0]["kbar0"] == "nan"


def test_verify_pass_fail_and_guard(tmp_path):
    assert main(["verify", "--lambda", "3", "--data", "sin4pi", "--t", "0.1:0.25:2", "--out", str(tmp_path)]) == 0
    rep = json.loads("\n".join(read_body(tmp_path / "verify.json")[1]))
    assert rep["pass"] and rep["max_sup"] <= 1e-4
    assert main(["verify", "--lambda", "3", "--data", "sin4pi", "--t", "0.25", "--tol", "1e-14", "--oracle-n", "16",
                 "--out", str(tmp_path)]) == 1
    assert main(["verify", "--lambda", "3", "--data", "sin4pi", "--t", "0.5", "--out", str(tmp_path)]) == 2


def test_config_errors_exit_two(tmp_path, capsys):
    assert main(["solve", "--lambda", "1", "--data", "sin4pi"]) == 2
    assert main(["classify", "--lambda", "1", "--data", "nope"]) == 2
    assert main(["classify", "--lambda", "1", "--data", "sin4pi", "--p", "0.5"]) == 2
    assert main(["verify", "--lambda", "1", "--data", "sin4pi", "--t", "0.1", "--oracle-n", "100"]) == 2
    assert main(["reproduce", "9"]) == 2
    assert "error:" in capsys.readouterr().err
    with pytest.raises(SystemExit):
        main(["classify", "--data", "sin4pi"])


def test_data_file_input(tmp_path):
    f = tmp_path / "pc.yaml"
    f.write_text("kind: pc\nbreakpoints: [0, 1/4, 3/4, 1]\nvalues: [-1, 1, -1]\n")
    assert main(["classify", "--lambda", "-2", "--data", str(f), "--out", str(tmp_path)]) == 0
    rep = json.loads("\n".join(read_body(tmp_path / "classify.json")[1]))
    assert rep["results"][0]["t_star"] == pytest.approx(2 / 3, rel=1e-9)


@pytest.mark.parametrize("n", [1, 2, 3, 4, 5, 6])
def test_reproduce_examples(n, tmp_path, capsys):
    assert main(["reproduce", str(n), "--out", str(tmp_path)]) == 0
    err = capsys.readouterr().err
    assert "FAIL" not in err and "PASS" in err
    rep = json.loads("\n".join(read_body(tmp_path / f"example{n}.json")[1]))
    assert rep["pass"]


def test_output_is_deterministic_across_thread_counts(tmp_path, monkeypatch):
    argv = ["solve", "--lambda", "-0.6", "--data", "remark", "--time", "0:0.5:6", "--grid-alpha", "17", "--eulerian"]
    monkeypatch.setenv("PJ_THREADS", "1")
    main(argv + ["--out", str(tmp_path / "a")])
    main(argv + ["--out", str(tmp_path / "b")])
    monkeypatch.setenv("PJ_THREADS", "4")
    main(argv + ["--out", str(tmp_path / "c")])
    for name in ("lagrangian.csv", "scalars.csv", "eulerian.csv"):
        a = (tmp_path / "a" / name).read_bytes()
        assert a == (tmp_path / "b" / name).read_bytes() == (tmp_path / "c" / name).read_bytes()
    monkeypatch.setenv("PJ_THREADS", "many")
    assert main(argv + ["--out", str(tmp_path / "d")]) == 2


def test_stdout_mode_and_module_entry():
    out = subprocess.run(
        [sys.executable, "-m", "gipj", "classify", "--lambda", "1", "--data", "pc-ex56"],
        capture_output=True, text=True, check=True,
    ).stdout
    assert out.startswith("## classify.json\n# gipj ")
    assert '"verdict": "norm-inflation-no-pointwise"' in out
