import csv
import io
import json
import subprocess
import sys

import pytest

from holocircles.cli import main


def run(argv, capsys):
    code = main(argv)
    out, err = capsys.readouterr()
    return code, out, err


def test_defect_json(capsys):
    code, out, err = run(["defect", "--fn", "z^2/conj(z)", "--circle", "0.3,0,1"], capsys)
    assert code == 0 and err == ""
    assert out.splitlines()[0] == '{"schema": "holocircles.defect/1",'
    doc = json.loads(out)
    assert doc["verdict"] == "extends"
    assert doc["center_re"] == 0.3 and doc["radius"] == 1 and doc["N"] == 4096
    for key in ("center_im", "defect", "aliasing_floor"):
        assert key in doc


def test_defect_prints_17_digits(capsys):
    _, out, _ = run(["defect", "--fn", "z", "--circle", "0.1,0,1", "--N", "64"], capsys)
    assert '"center_re": 0.10000000000000001' in out


def test_defect_batch_csv(tmp_path, capsys):
    circles = tmp_path / "circles.csv"
    circles.write_text("re,im,radius\n0.3,0,1\n2,0,1\n", encoding="utf-8")
    code, out, _ = run(["defect", "--fn", "z^2/conj(z)", "--circles", str(circles),
                        "--format", "csv", "--N", "256"], capsys)
    assert code == 0
    rows = list(csv.DictReader(io.StringIO(out)))
    assert [r["verdict"] for r in rows] == ["extends", "does_not_extend"]
    code, out, _ = run(["defect", "--fn", "z^2/conj(z)", "--circles", str(circles),
                        "--N", "256"], capsys)
    assert len(json.loads(out)["reports"]) == 2


def test_defect_from_definition_file(tmp_path, capsys):
    defs = tmp_path / "defs.txt"
    defs.write_text("g(w) = w^2\nf = g(z/conj(z))\nh = conj(z)\n", encoding="utf-8")
    code, out, _ = run(["defect", "--fn-file", str(defs), "--fn-name", "f",
                        "--circle", "0.2,0.1,1", "--N", "256"], capsys)
    assert code == 0 and json.loads(out)["verdict"] == "extends"
    code, out, _ = run(["defect", "--fn-file", str(defs), "--circle", "0,0,1",
                        "--N", "256"], capsys)
    assert json.loads(out)["function"] == "h"
    assert json.loads(out)["defect"] == pytest.approx(1)


@pytest.mark.parametrize("argv", [
    ["defect", "--fn", "z +", "--circle", "0,0,1"],
    ["defect", "--fn", "z", "--circle", "0,0"],
    ["defect", "--fn", "z", "--circle", "0,0,1", "--N", "1000"],
    ["defect", "--fn", "z", "--circle", "0,0,1", "--tol", "-1"],
    ["defect", "--fn", "z"],
    ["defect", "--circle", "0,0,1"],
    ["defect", "--fn", "h(z)", "--circle", "0,0,1"],
    ["scan", "--fn", "z", "--radius", "1", "--grid", "0:1:0:1:0"],
    ["scan", "--fn", "z", "--radius", "1"],
    ["nonsense"],
    [],
])
def test_usage_errors_exit_2(argv, capsys):
    code, out, err = run(argv, capsys)
    assert code == 2
    assert out == "" and err


def test_sampling_failure_exits_1(capsys):
    code, out, err = run(["defect", "--fn", "1/z", "--circle", "1,0,1", "--N", "64"], capsys)
    assert code == 1 and out == "" and "k=32" in err


def test_scan_csv_and_negative_grid(capsys, tmp_path):
    out_file = tmp_path / "map.csv"
    code, out, _ = run(["scan", "--fn", "@example9_1(0.5)", "--radius", "1",
                        "--grid", "-0.5:0.5:-0.25:0.25:0.25", "--N", "1024",
                        "--out", str(out_file)], capsys)
    assert code == 0 and out == ""
    text = out_file.read_text(encoding="utf-8")
    assert text.splitlines()[0] == "center_re,center_im,defect,verdict"
    rows = list(csv.DictReader(io.StringIO(text)))
    assert len(rows) == 15
    ext = [(float(r["center_re"]), float(r["center_im"])) for r in rows
           if r["verdict"] == "extends"]
    assert ext == [(-0.5, 0.0), (0.5, 0.0)]


def test_scan_is_deterministic_across_workers(tmp_path, monkeypatch, capsys):
    argv = ["scan", "--fn", "@example9_2(w^3)", "--radius", "1",
            "--grid", "-0.3:0.3:-0.3:0.3:0.15", "--N", "512"]
    run(argv + ["--workers", "1", "--out", str(tmp_path / "a.csv")], capsys)
    run(argv + ["--workers", "3", "--out", str(tmp_path / "b.csv")], capsys)
    monkeypatch.setenv("HOLOCIRCLES_WORKERS", "2")
    run(argv + ["--out", str(tmp_path / "c.csv")], capsys)
    a = (tmp_path / "a.csv").read_bytes()
    assert a == (tmp_path / "b.csv").read_bytes() == (tmp_path / "c.csv").read_bytes()


def test_scan_json(capsys):
    code, out, _ = run(["scan", "--fn", "z", "--radius", "1", "--grid", "0:1:0:0:0.5",
                        "--N", "64", "--format", "json"], capsys)
    doc = json.loads(out)
    assert doc["schema"] == "holocircles.scan/1"
    assert len(doc["cells"]) == 3 and len(doc["minima"]) == 3


def test_geometry_suite(tmp_path, capsys):
    out1 = tmp_path / "g1.json"
    out2 = tmp_path / "g2.json"
    code = main(["geometry-suite", "--trials", "300", "--seed", "7", "--out", str(out1)])
    assert code == 0
    main(["geometry-suite", "--trials", "300", "--seed", "7", "--out", str(out2)])
    assert out1.read_bytes() == out2.read_bytes()
    doc = json.loads(out1.read_text())
    assert doc["passed"] and all(p["passed"] for p in doc["properties"])
    assert len(doc["properties"]) == 9


def test_geometry_suite_failure_exits_1(capsys):
    # a tolerance no floating point computation can meet
    code, out, _ = run(["geometry-suite", "--trials", "50", "--tol", "1e-300"], capsys)
    assert code == 1
    assert json.loads(out)["passed"] is False


def test_characterize_suite(capsys):
    code, out, _ = run(["characterize-suite", "--no-scans"], capsys)
    doc = json.loads(out)
    assert code == 0 and doc["passed"]
    names = [r["name"] for r in doc["verdicts"]]
    assert len(names) == len(set(names)) > 30


def test_extend_eval(capsys):
    code, out, _ = run(["extend-eval", "--fn", "z^2/conj(z)", "--circle", "0,0,1",
                        "--point", "0.5,0"], capsys)
    doc = json.loads(out)
    assert code == 0
    assert doc["spectral"][0] == pytest.approx(0.125, abs=1e-14)
    assert doc["rational"] == [0.125, 0]
    assert doc["poles"] == []
    code, out, _ = run(["extend-eval", "--fn", "z^2/conj(z)", "--circle", "2,0,1",
                        "--point", "1.5,0"], capsys)
    doc = json.loads(out)
    assert doc["rational"] is None and "pole" in doc["rational_error"]
    assert doc["poles"] == [[1.5, 0]]
    code, _, _ = run(["extend-eval", "--fn", "z", "--circle", "0,0,1",
                      "--point", "2,0"], capsys)
    assert code == 2


def test_logs_go_to_stderr(capsys):
    code, out, err = run(["-v", "defect", "--fn", "z", "--circle", "0,0,1", "--N", "64"],
                         capsys)
    assert code == 0 and "INFO" in err and "INFO" not in out
    json.loads(out)


def test_console_script_entry_point():
    proc = subprocess.run([sys.executable, "-m", "holocircles.cli", "defect", "--fn", "z",
                           "--circle", "-3,0,1", "--N", "64"],
                          capture_output=True, text=True, check=False)
    assert proc.returncode == 0
    assert json.loads(proc.stdout)["verdict"] == "extends"
