import json

import pytest

from hetsmcg import cli
from hetsmcg.errors import NumericalError


@pytest.fixture(scope="module")
def corpus(tmp_path_factory):
    root = tmp_path_factory.mktemp("cli") / "corpus"
    assert cli.main(["gen-synth", "--out", str(root), "--articles", "12", "--seed", "1", "--dtext", "8"]) == 0
    return root


@pytest.fixture(scope="module")
def graphs(corpus):
    out = corpus.parent / "graphs"
    assert cli.main(["build-graphs", "--corpus", str(corpus), "--out", str(out), "--setup", "2", "--folds", "2"]) == 0
    return out


def test_gen_synth_writes_a_corpus(corpus):
    manifest = json.loads((corpus / "manifest.json").read_text(encoding="utf-8"))
    assert len(manifest["articles"]) == 12
    assert manifest["embedder"]["dim"] == 8


def test_build_graphs(graphs):
    manifest = json.loads((graphs / "manifest.json").read_text(encoding="utf-8"))
    assert manifest["metadata"]["setup"] == 2
    assert manifest["metadata"]["d_text"] == 8
    folds = json.loads((graphs / "folds.json").read_text(encoding="utf-8"))
    assert folds["k"] == 2 and len(folds["assignment"]) == 12


def test_train_and_evaluate(graphs, capsys):
    checkpoint = graphs.parent / "model.json"
    code = cli.main(
        [
            "train",
            "--graphs", str(graphs),
            "--conv", "sage",
            "--epochs", "2",
            "--hidden", "4",
            "--lr", "1e-3",
            "--fold", "0",
            "--out", str(checkpoint),
        ]
    )
    assert code == 0
    trained = json.loads(capsys.readouterr().out)
    assert len(trained["epoch_losses"]) == 2
    assert checkpoint.is_file()

    assert cli.main(["evaluate", "--graphs", str(graphs), "--ckpt", str(checkpoint), "--fold", "0"]) == 0
    metrics = json.loads(capsys.readouterr().out)
    assert 0.0 <= metrics["macro_f1"] <= 1.0
    assert sum(map(sum, metrics["confusion"])) == 6


def test_run_matrix(corpus, tmp_path, capsys):
    config = tmp_path / "matrix.yaml"
    config.write_text("setups: [1]\nconvs: [sage]\nhidden_dim: 4\nfolds: 2\nepochs: 1\nd_text: 8\n")
    out = tmp_path / "report.json"
    assert cli.main(["-q", "run-matrix", "--corpus", str(corpus), "--config", str(config), "--out", str(out)]) == 0

    report = json.loads(out.read_text(encoding="utf-8"))
    assert [entry["name"] for entry in report["reports"]] == ["S1/text/sage/hetero"]
    timing = json.loads((tmp_path / "report.timing.json").read_text(encoding="utf-8"))
    assert len(timing["S1/text/sage/hetero"]) == 2
    table = (tmp_path / "report.txt").read_text(encoding="utf-8")
    assert table.startswith("mode")
    assert capsys.readouterr().out == table


def test_input_errors_exit_with_1(tmp_path, graphs):
    assert cli.main(["build-graphs", "--corpus", str(tmp_path / "none"), "--out", str(tmp_path), "--setup", "1"]) == 1
    assert cli.main(["evaluate", "--graphs", str(graphs), "--ckpt", str(tmp_path / "missing.json")]) == 1
    bad = tmp_path / "bad.yaml"
    bad.write_text("epochs: 0\n")
    assert cli.main(["run-matrix", "--corpus", str(tmp_path), "--config", str(bad), "--out", str(tmp_path / "r.json")]) == 1


def test_numerical_failure_exits_with_2(graphs, monkeypatch, tmp_path):
    def diverge(*args, **kwargs):
        raise NumericalError("Loss became nan in epoch 0", {"epoch": 0, "loss": float("nan")})

    monkeypatch.setattr(cli, "train_fold", diverge)
    code = cli.main(["train", "--graphs", str(graphs), "--conv", "hgt", "--out", str(tmp_path / "m.json")])
    assert code == 2


def test_unknown_command_is_rejected():
    with pytest.raises(SystemExit):
        cli.main(["fly"])


@pytest.mark.slow
def test_run_matrix_twice_gives_identical_bytes(tmp_path):
    corpus = tmp_path / "corpus"
    assert cli.main(["-q", "gen-synth", "--out", str(corpus), "--articles", "40", "--seed", "9"]) == 0
    config = tmp_path / "matrix.yaml"
    config.write_text(
        "setups: [1, 5]\n"
        "feature_modes: [text, text+social]\n"
        "convs: [sage, gat, hgt]\n"
        "graph_modes: [hetero, homo-truncate]\n"
        "epochs: 3\n"
        "workers: 2\n"
    )

    outputs = []
    for run in ("first", "second"):
        out = tmp_path / run / "report.json"
        assert cli.main(["-q", "run-matrix", "--corpus", str(corpus), "--config", str(config), "--out", str(out)]) == 0
        outputs.append(out.parent)

    first, second = outputs
    for name in ("report.json", "report.txt"):
        assert (first / name).read_bytes() == (second / name).read_bytes()
    report = json.loads((first / "report.json").read_text(encoding="utf-8"))
    assert len(report["reports"]) == 2 * 2 * 3 * 2
