import json

import pytest

from relic.cli import main
from relic.dlab import template_text
from relic.synth import monosource_biases


@pytest.fixture(scope="module")
def fact_dir(tmp_path_factory):
    out = tmp_path_factory.mktemp("facts")
    rc = main(["synth", "--seed", "1", "--per-class", "2", "--out", str(out)])
    assert rc == 0
    return out


@pytest.fixture(scope="module")
def bias_dir(tmp_path_factory):
    out = tmp_path_factory.mktemp("biases")
    for source, bias in monosource_biases("full").items():
        (out / f"{source}.dlab").write_text(template_text(bias) + "\n")
    return out


def test_synth_writes_parseable_files(fact_dir):
    from relic import parse_model_file

    ecg = (fact_dir / "ECG.facts").read_text()
    abp = (fact_dir / "ABP.facts").read_text()
    assert len(parse_model_file(ecg)) == 14
    assert len(parse_model_file(abp)) == 14


def test_count_space(bias_dir, capsys):
    rc = main(["count-space", "--bias", str(bias_dir / "ECG.dlab")])
    assert rc == 0
    assert int(capsys.readouterr().out.strip()) > 0


def test_learn_mono(fact_dir, bias_dir, capsys):
    rc = main(["learn", "--source", "ECG", "--bias",
               str(bias_dir / "ECG.dlab"),
               str(fact_dir / "ECG.facts"), str(fact_dir / "ABP.facts")])
    assert rc == 0
    out = capsys.readouterr().out
    assert "class(vt)" in out and "class(sr)" in out


def test_learn_biased_with_artifacts(fact_dir, bias_dir, tmp_path, capsys):
    constraints = tmp_path / "constraints.txt"
    constraints.write_text("forbid_between ABP dias sys\n")
    art = tmp_path / "artifacts"
    rc = main(["learn-biased",
               "--bias", f"ECG={bias_dir / 'ECG.dlab'}",
               "--bias", f"ABP={bias_dir / 'ABP.dlab'}",
               "--constraints", str(constraints),
               "--artifacts", str(art),
               str(fact_dir / "ECG.facts"), str(fact_dir / "ABP.facts")])
    assert rc == 0
    assert (art / "mono_ECG.rules").exists()
    assert list(art.glob("bias_*.dlab"))
    assert list(art.glob("bottoms_*.rules"))
    assert "class(" in capsys.readouterr().out


def test_crossval_and_report_round_trip(fact_dir, bias_dir, tmp_path, capsys):
    report_json = tmp_path / "report.json"
    rc = main(["crossval", "--folds", "2", "--mode", "mono",
               "--source", "ECG", "--bias", f"ECG={bias_dir / 'ECG.dlab'}",
               "--format", "csv", "--json", str(report_json),
               str(fact_dir / "ECG.facts"), str(fact_dir / "ABP.facts")])
    assert rc == 0
    csv_out = capsys.readouterr().out
    assert "class,nodes,time_ms,tracc,acc,comp" in csv_out
    payload = json.loads(report_json.read_text())
    assert len(payload["rows"]) == 7

    rc = main(["report", "--format", "markdown", str(report_json)])
    assert rc == 0
    assert "tracc" in capsys.readouterr().out


def test_usage_error_exit_code(fact_dir, bias_dir):
    # fold count 1 is invalid
    rc = main(["crossval", "--folds", "1", "--mode", "mono",
               "--source", "ECG", "--bias", f"ECG={bias_dir / 'ECG.dlab'}",
               str(fact_dir / "ECG.facts")])
    assert rc == 2


def test_bad_bias_pair_exit_code(fact_dir):
    rc = main(["learn-biased", "--bias", "nodelimiter",
               str(fact_dir / "ECG.facts")])
    assert rc == 2


def test_empty_data_usage_error(tmp_path, bias_dir):
    empty = tmp_path / "empty.facts"
    empty.write_text("")
    rc = main(["learn", "--source", "ECG", "--bias",
               str(bias_dir / "ECG.dlab"), str(empty)])
    assert rc == 2
