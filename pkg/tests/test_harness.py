import csv
import json

import numpy as np
import pytest

from christoffel.cli import main
from christoffel.errors import ParamOutOfRange, UnknownExperiment
from christoffel.geometry import Ball, LpBall
from christoffel.harness import REGISTRY, ExperimentReport, emit, fit_slope, parse_body, run_experiment, summarize
from christoffel.harness.experiments import Param


def test_param_parsing():
    assert Param([1], int).parse("n", "8,12,16") == [8, 12, 16]
    assert Param(0.5, float, False).parse("s", "0.25") == 0.25
    assert Param(["disc"], str).parse("b", "disc,square") == ["disc", "square"]
    with pytest.raises(ParamOutOfRange):
        Param([1], int, hi=10).parse("n", "4,40")
    with pytest.raises(ParamOutOfRange):
        Param(1.0, float, False).parse("s", "1,2")
    with pytest.raises(ParamOutOfRange):
        Param([1.0]).parse("d", "abc")


def test_registry_errors():
    with pytest.raises(UnknownExperiment):
        run_experiment("no-such-thing")
    with pytest.raises(ParamOutOfRange):
        run_experiment("disc-center", {"bogus": "1"})
    with pytest.raises(ParamOutOfRange):
        run_experiment("disc-center", {"n": "40"})


def test_every_experiment_has_a_summary():
    from christoffel.harness.experiments import SUMMARIES
    assert set(REGISTRY) == set(SUMMARIES)


def test_parse_body_presets():
    body, x = parse_body("disc")
    assert isinstance(body, Ball) and x is None
    body, x = parse_body("sharp2d:0.004,0.05,0.08")
    assert x == pytest.approx([1.996, 0.0])
    body, _ = parse_body("lpball:4")
    assert isinstance(body, LpBall) and body.alpha == 4.0
    with pytest.raises(ValueError):
        parse_body("nonsense")


def test_parse_body_file(tmp_path):
    path = tmp_path / "b.json"
    path.write_text(LpBall(3.0).to_json())
    body, _ = parse_body(str(path))
    assert isinstance(body, LpBall) and body.alpha == 3.0


def test_fit_slope_exact_power():
    x = np.geomspace(0.01, 1, 6)
    f = fit_slope(x, 3.0 * x ** 0.75)
    assert f["slope"] == pytest.approx(0.75, abs=1e-12)
    assert f["stderr"] < 1e-7
    assert np.exp(f["intercept"]) == pytest.approx(3.0)
    with pytest.raises(ValueError):
        fit_slope([1, 2], [1, 2])


@pytest.fixture(scope="module")
def small_report():
    return run_experiment("disc-edge", {"n": "6,8,10", "delta": "0.1,0.2"})


def test_report_records_and_summary(small_report):
    rep = small_report
    assert len(rep.records) == 6
    for r in rep.records:
        assert {"body", "n", "x", "lambda", "ratio"} <= set(r)
    again = summarize(rep.name, rep.records, rep.params)
    assert json.loads(json.dumps(again)) == json.loads(json.dumps(rep.summary))


def test_report_json_round_trip(small_report):
    back = ExperimentReport.from_json(small_report.to_json())
    assert back.to_dict() == small_report.to_dict()


def test_emit_csv_json_svg(small_report, tmp_path):
    (csv_path,) = emit(small_report, "csv", tmp_path)
    rows = list(csv.DictReader(open(csv_path)))
    assert len(rows) == len(small_report.records)
    assert json.loads(rows[0]["x"]) == small_report.records[0]["x"]
    (json_path,) = emit(small_report, "json", tmp_path)
    assert ExperimentReport.from_json(json_path.read_text()).records == small_report.to_dict()["records"]
    svgs = emit(small_report, "svg", tmp_path)
    assert len(svgs) == 1 and svgs[0].read_text().lstrip().startswith("<?xml")
    with pytest.raises(ValueError):
        emit(small_report, "xlsx", tmp_path)


def test_svg_one_file_per_slice(tmp_path):
    rep = run_experiment("lp-exponent", {"alpha": "1.5,2", "n": "8", "delta": "0.05,0.1,0.2"})
    svgs = emit(rep, "svg", tmp_path)
    assert len(svgs) == 2
    assert set(rep.summary["fits"]) == {"1.5", "2.0"}


def test_cli_eval_and_measure(capsys):
    assert main(["eval", "--body", "disc", "--point", "0,0", "--n", "6"]) == 0
    out = json.loads(capsys.readouterr().out)
    assert out["lambda"] == pytest.approx(np.pi / 16, rel=1e-9)
    assert main(["measure", "--body", "square", "--point", "0.9,0.2", "--format", "csv"]) == 0
    rows = list(csv.DictReader(capsys.readouterr().out.splitlines()))
    assert float(rows[0]["delta"]) == pytest.approx(0.1)


def test_cli_certify_and_bound(capsys):
    assert main(["certify", "--body", "disc", "--point", "0,0.9", "--n", "8"]) == 0
    out = json.loads(capsys.readouterr().out)
    assert out["lambda"] <= out["l2sq"]["value"] + 1e-9
    assert main(["bound", "--body", "disc", "--point", "0.9,0", "--n", "10"]) == 0
    assert json.loads(capsys.readouterr().out)["bound_rhs"] > 0


def test_cli_experiment_writes_files(tmp_path, capsys):
    code = main(["experiment", "disc-center", "--param", "n=4,8", "--out", str(tmp_path)])
    assert code == 0
    names = sorted(p.name for p in tmp_path.iterdir())
    assert names == ["disc-center.csv", "disc-center.json", "disc-center.svg"]


def test_cli_exit_codes(tmp_path, capsys):
    assert main(["eval", "--body", "disc", "--n", "3", "--point", "0,0,0"]) == 1
    assert main(["eval", "--body", "disc", "--point", "0,0"]) == 1
    assert main(["nonsense"]) == 1
    assert main(["experiment", "no-such", "--out", str(tmp_path)]) == 1
    assert main(["experiment", "disc-center", "--param", "n", "--out", str(tmp_path)]) == 1
    assert main(["eval", "--body", "disc", "--point", "0,0", "--n", "40"]) == 1
    # delta n^2 below sigma is an invariant violation
    assert main(["bound", "--body", "disc", "--point", "0.999,0", "--n", "20"]) == 2
