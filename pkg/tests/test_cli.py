import json

import numpy as np
import pytest

from dqe import __version__
from dqe.cli import main


@pytest.fixture
def scored(tmp_path):
    t = np.arange(400)
    y = np.zeros(400, dtype=int)
    y[100:110] = y[300:305] = 1
    s = 0.2 * np.sin(2 * np.pi * t / 50) + 0.8 * y
    p = tmp_path / "s.csv"
    p.write_text("label,score\n" + "".join(f"{a},{b!r}\n" for a, b in zip(y, s.tolist())))
    return p


@pytest.fixture
def labels_only(tmp_path):
    p = tmp_path / "binary.csv"
    p.write_text("label\n" + "0\n" * 10 + "1\n" * 5 + "0\n" * 10)
    return p


def test_eval_writes_report(scored, tmp_path, capsys):
    out = tmp_path / "r.json"
    assert main(["eval", "--input", str(scored), "--l-nm", "25", "--thresholds", "100", "--output", str(out)]) == 0
    data = json.loads(out.read_text())
    assert list(data) == ["series", "T", "config", "dqe", "components", "events", "baselines", "provenance"]
    assert data["config"] == {"l_nm": 25, "thresholds": 100, "mode": "score"}
    assert data["provenance"]["tool"] == f"dqe {__version__}"
    assert "DQE" in capsys.readouterr().out


def test_binary_override_ignores_scores(scored, tmp_path):
    out = tmp_path / "r.json"
    assert main(["eval", "--input", str(scored), "--l-nm", "25", "--mode", "binary", "--output", str(out)]) == 0
    assert json.loads(out.read_text())["config"]["thresholds"] == 1


def test_period_flags(scored, tmp_path, capsys):
    assert main(["eval", "--input", str(scored), "--period", "50"]) == 0
    assert "l_nm=25" in capsys.readouterr().out
    assert main(["eval", "--input", str(scored), "--auto-period"]) == 0
    assert main(["period", "--input", str(scored), "--max-lag", "120"]) == 0
    assert capsys.readouterr().out.strip().endswith("tau=50 l_nm=25")


@pytest.mark.parametrize(
    "argv, code, message",
    [
        (["eval", "--auto-period"], 2, "binary mode requires --l-nm"),
        (["eval", "--l-nm", "0"], 2, "--l-nm"),
        (["eval", "--l-nm", "3", "--mode", "score"], 2, "no score column"),
        (["eval"], 2, "binary mode requires --l-nm"),
    ],
)
def test_eval_config_errors(labels_only, capsys, argv, code, message):
    argv = [argv[0], "--input", str(labels_only), *argv[1:]]
    assert main(argv) == code
    assert message in capsys.readouterr().err


def test_data_errors(tmp_path, capsys):
    bad = tmp_path / "bad.csv"
    bad.write_text("label,score\n2,0.5\n")
    assert main(["eval", "--input", str(bad), "--l-nm", "3"]) == 3
    assert "line 2" in capsys.readouterr().err
    assert main(["eval", "--input", str(tmp_path / "missing.csv"), "--l-nm", "3"]) == 3
    clean = tmp_path / "clean.csv"
    clean.write_text("label,score\n0,1\n0,2\n")
    assert main(["eval", "--input", str(clean), "--l-nm", "3"]) == 3


def test_unwritable_output(scored, tmp_path):
    assert main(["eval", "--input", str(scored), "--l-nm", "5", "--output", str(tmp_path / "no" / "r.json")]) == 2


def test_bad_thread_setting(scored, monkeypatch):
    monkeypatch.setenv("DQE_THREADS", "lots")
    assert main(["eval", "--input", str(scored), "--l-nm", "5"]) == 2


def test_compare_table(scored, tmp_path, capsys):
    other = tmp_path / "t.csv"
    other.write_text(scored.read_text())
    assert main(["compare", "--input", str(scored), str(other), "--l-nm", "25", "--metrics", "dqe,auc_roc"]) == 0
    lines = capsys.readouterr().out.splitlines()
    assert lines[0].startswith("# dqe ")
    assert lines[1] == "series,dqe,auc_roc,rank_dqe,rank_auc_roc"
    assert len(lines) == 4
    assert main(["compare", "--input", str(scored), "--l-nm", "25", "--metrics", "dqe,f1"]) == 2
    assert "valid: dqe" in capsys.readouterr().err


def test_compare_event_level_aggregate(tmp_path, capsys):
    a = tmp_path / "a.csv"
    b = tmp_path / "b.csv"
    a.write_text("label,detection\n0,0\n1,1\n0,0\n0,0\n")
    b.write_text("label,detection\n" + "0,0\n1,0\n0,0\n0,0\n" * 3)
    assert main(["compare", "--input", str(a), str(b), "--mode", "binary", "--l-nm", "1", "--metrics", "dqe",
                 "--aggregate", "event_level"]) == 0
    rows = capsys.readouterr().out.splitlines()
    assert rows[-1].startswith("aggregate[event_level],0.25")
    assert main(["compare", "--input", str(a), str(b), "--mode", "binary", "--l-nm", "1", "--metrics", "dqe",
                 "--aggregate", "sequence_level"]) == 0
    assert capsys.readouterr().out.splitlines()[-1].startswith("aggregate[sequence_level],0.5")


def test_synth_tables(tmp_path, capsys):
    assert main(["synth", "--scenario", "score-gap", "--axis", "anomaly-len", "--values", "1,5,10,20", "--metric", "dqe"]) == 0
    lines = capsys.readouterr().out.splitlines()
    assert lines[1] == "axis,value,metric,score_max,score_gap" and len(lines) == 6
    assert main(["synth", "--scenario", "random", "--p", "1.5"]) == 2
    assert "p must be in (0,1)" in capsys.readouterr().err
    assert main(["synth", "--scenario", "minimal-all", "--T", "30", "--num-anomalies", "5"]) == 2


def test_synth_output_feeds_eval(tmp_path):
    p = tmp_path / "p2.csv"
    assert main(["synth", "--scenario", "minimal-all", "--T", "500", "--num-anomalies", "5", "--output", str(p)]) == 0
    r = tmp_path / "r.json"
    assert main(["eval", "--input", str(p), "--mode", "binary", "--l-nm", "10", "--output", str(r)]) == 0
    assert json.loads(r.read_text())["dqe"] == 1.0


def test_robustness_rows(scored, capsys):
    assert main(["robustness", "--input", str(scored), "--l-nm", "25", "--seed", "7", "--samples", "3",
                 "--metrics", "dqe,original_f"]) == 0
    lines = capsys.readouterr().out.splitlines()
    assert lines[1] == "axis,metric,std_dev"
    assert [l.split(",")[0] for l in lines[2:]] == ["lag", "lag", "noise", "noise", "ratio", "ratio", "overall", "overall"]


def test_doc_check_is_hidden(capsys):
    with pytest.raises(SystemExit):
        main(["--help"])
    assert "doc-check" not in capsys.readouterr().out
