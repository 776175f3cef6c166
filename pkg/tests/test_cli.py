import json

import pandas as pd

import src.config as config
from src.cli import cli_main


def _data(name: str) -> str:
    return str(config.DATA_DIR / name)


def test_classify_prints_the_label(capsys):
    assert cli_main(["classify", _data("nilpotent_operator.json")]) == 0
    payload = json.loads(capsys.readouterr().out)
    assert payload["kind"] == "parabolic1"


def test_verify_writes_the_report(tmp_path):
    out = tmp_path / "report.json"
    csv = tmp_path / "samples.csv"
    code = cli_main([
        "verify", _data("bryant_case1.json"), "--ids", "I1", "I2", "--samples", "4",
        "--threads", "1", "--out", str(out), "--csv", str(csv),
    ])
    assert code == 0
    report = json.loads(out.read_text(encoding="utf-8"))
    assert [c["id"] for c in report["checks"]] == ["I1", "I2"]
    assert report["env"]["samples"] == 4
    assert len(pd.read_csv(csv)) == 8


def test_verify_with_empty_selection(capsys):
    assert cli_main(["verify", _data("flat.json"), "--ids"]) == 0
    assert json.loads(capsys.readouterr().out)["checks"] == []


def test_verify_passes_on_the_flat_cone(capsys):
    assert cli_main(["verify", _data("flat.json"), "--samples", "5", "--threads", "2"]) == 0
    report = json.loads(capsys.readouterr().out)
    assert report["summary"]["fail"] == 0
    i16 = next(c for c in report["checks"] if c["id"] == "I16")
    assert "‖R‖ below floor" in i16["notes"]


def test_verify_reports_failures_with_exit_code_1(capsys):
    assert cli_main(["verify", _data("negative_control.json"), "--ids", "I19"]) == 1
    report = json.loads(capsys.readouterr().out)
    assert report["summary"] == {"pass": 0, "fail": 1, "seconds": 0.0}


def test_reports_are_reproducible(tmp_path):
    paths = [tmp_path / "a.json", tmp_path / "b.json"]
    for p, threads in zip(paths, ("1", "3")):
        args = ["verify", _data("bryant_case1.json"), "--ids", "I1", "I16", "--samples", "3"]
        assert cli_main(args + ["--threads", threads, "--out", str(p)]) == 0
    assert paths[0].read_bytes() == paths[1].read_bytes()


def test_invalid_input_exits_with_2(tmp_path, capsys):
    bad = tmp_path / "bad.json"
    bad.write_text("{not json", encoding="utf-8")
    assert cli_main(["verify", str(bad)]) == 2
    assert cli_main(["verify", str(tmp_path / "missing.json")]) == 2
    assert cli_main(["verify", _data("flat.json"), "--ids", "I99"]) == 2
    assert "UnknownId" in capsys.readouterr().err
    assert cli_main([]) == 2


def test_polys(capsys):
    assert cli_main(["polys", _data("case4_order_one.json")]) == 0
    payload = json.loads(capsys.readouterr().out)
    assert payload["type"] == "parabolic1"
    assert "order_one" in payload


def test_example(tmp_path, capsys):
    out = tmp_path / "einstein.json"
    assert cli_main(["example", "einstein", "1", "--out", str(out)]) == 0
    printed = json.loads(capsys.readouterr().out)
    assert printed["d"] == -0.5
    assert json.loads(out.read_text(encoding="utf-8")) == printed


def test_scan_writes_a_table(tmp_path):
    out = tmp_path / "scan.csv"
    assert cli_main(["scan", _data("grid.json"), "--threads", "1", "--out", str(out)]) in (0, 1)
    table = pd.read_csv(out)
    assert len(table) == 4
    assert {"pass", "fail", "error"} <= set(table.columns)
