import numpy as np
import pytest

from hetsmcg.errors import ConfigurationError, ContractError, InputError, NumericalError
from hetsmcg.gnn import GraphView, ModelConfig, init_params
from hetsmcg.harness import (
    Cell,
    ExperimentReport,
    MatrixResult,
    TrainConfig,
    bonferroni,
    class_weights,
    classification_metrics,
    comparison_pairs,
    evaluate,
    load_folds,
    paired_test,
    render_table,
    run_matrix,
    save_folds,
    significance,
    stratified_kfold,
    train_fold,
)
from hetsmcg.harness.metrics import ClassificationMetrics
from hetsmcg.harness.training import batch_loss, view_input_dims
from hetsmcg.helpers import dumps
from hetsmcg.hetgraph import NodeType
from hetsmcg.numkit import Tape

# folds


def test_balanced_folds():
    labels = [0, 1] * 5
    split = stratified_kfold(labels, k=5, seed=0)
    for fold in split.folds:
        assert sorted(np.asarray(labels)[fold].tolist()) == [0, 1]


def test_large_unbalanced_folds():
    labels = np.array([0] * 10302 + [1] * 2395)
    split = stratified_kfold(labels, k=5, seed=1)
    for fold in split.folds:
        assert abs(int(np.sum(labels[fold] == 0)) - 2060) <= 1
        assert abs(int(np.sum(labels[fold] == 1)) - 479) <= 1
    sizes = [fold.size for fold in split.folds]
    assert max(sizes) - min(sizes) <= 1


def test_folds_are_seeded():
    labels = [0] * 13 + [1] * 7
    assert stratified_kfold(labels, 5, seed=4) == stratified_kfold(labels, 5, seed=4)
    assert stratified_kfold(labels, 5, seed=4).assignment != stratified_kfold(labels, 5, seed=5).assignment


def test_fold_errors(tmp_path):
    with pytest.raises(ConfigurationError):
        stratified_kfold([0] * 10 + [1] * 4, k=5)
    split = stratified_kfold([0, 1] * 3, k=3, ids=[f"a{i}" for i in range(6)])
    with pytest.raises(ConfigurationError):
        split.train_test(3)
    with pytest.raises(ContractError):
        split.check_ids([f"b{i}" for i in range(6)])
    with pytest.raises(InputError):
        load_folds(tmp_path / "missing.json")


def test_folds_file(tmp_path):
    split = stratified_kfold([0, 1] * 4, k=2, seed=3, ids=[f"a{i}" for i in range(8)])
    save_folds(split, tmp_path / "folds.json")
    loaded = load_folds(tmp_path / "folds.json")
    assert loaded == split
    assert loaded.fingerprint == split.fingerprint
    train, test = loaded.train_test(0)
    assert sorted(train.tolist() + test.tolist()) == list(range(8))


# metrics


def brute_force_metrics(labels, predictions):
    precision, recall, f1 = [], [], []
    for c in (0, 1):
        tp = sum(1 for y, p in zip(labels, predictions) if y == c and p == c)
        fp = sum(1 for y, p in zip(labels, predictions) if y != c and p == c)
        fn = sum(1 for y, p in zip(labels, predictions) if y == c and p != c)
        pc = tp / (tp + fp) if tp + fp else 0.0
        rc = tp / (tp + fn) if tp + fn else 0.0
        precision.append(pc)
        recall.append(rc)
        f1.append(2 * pc * rc / (pc + rc) if pc + rc else 0.0)
    accuracy = sum(1 for y, p in zip(labels, predictions) if y == p) / len(labels)
    return sum(precision) / 2, sum(recall) / 2, sum(f1) / 2, accuracy


def test_metrics_example():
    metrics = classification_metrics([1, 0, 0, 0], [1, 1, 0, 0])
    assert metrics.accuracy == pytest.approx(0.75)
    assert metrics.per_class_f1 == pytest.approx([0.8, 2 / 3])
    assert metrics.macro_f1 == pytest.approx((0.8 + 2 / 3) / 2)
    assert metrics.confusion == [[2, 1], [0, 1]]


def test_macro_f1_is_the_unweighted_mean():
    metrics = classification_metrics([1, 0, 0, 0, 0], [1, 1, 0, 0, 0])
    assert metrics.accuracy == pytest.approx(0.8)
    assert metrics.per_class_f1 == pytest.approx([6 / 7, 2 / 3])
    assert metrics.macro_f1 == pytest.approx(0.7619, abs=1e-4)

    perfect = classification_metrics([1, 0, 1], [1, 0, 1])
    assert perfect.to_json()["macro_f1"] == 1.0 and perfect.accuracy == 1.0 and not perfect.zero_division


def test_degenerate_predictions():
    metrics = classification_metrics([0, 0, 0, 1], [0, 0, 0, 0])
    majority = 2 * 0.75 / 1.75
    assert metrics.per_class_f1 == pytest.approx([majority, 0.0])
    assert metrics.macro_f1 == pytest.approx(majority / 2)
    assert "precision of class 1" in metrics.zero_division


def test_metrics_brute_force():
    rng = np.random.default_rng(0)
    for _ in range(1000):
        size = int(rng.integers(1, 30))
        labels = rng.integers(0, 2, size=size).tolist()
        predictions = rng.integers(0, 2, size=size).tolist()
        metrics = classification_metrics(labels, predictions)
        precision, recall, f1, accuracy = brute_force_metrics(labels, predictions)
        assert abs(metrics.precision - precision) <= 1e-12
        assert abs(metrics.recall - recall) <= 1e-12
        assert abs(metrics.macro_f1 - f1) <= 1e-12
        assert abs(metrics.accuracy - accuracy) <= 1e-12


# training


def test_class_weights():
    assert class_weights([0, 1, 1, 0]).tolist() == [1.0, 1.0]
    assert class_weights([0, 0, 0, 1]) == pytest.approx([2 / 3, 2.0])
    weights = class_weights([0] * 10067 + [1] * 2147)
    assert weights == pytest.approx([0.607, 2.844], abs=1e-3)
    with pytest.raises(ConfigurationError):
        class_weights([1, 1, 1])


def test_train_config_validation():
    with pytest.raises(ConfigurationError):
        TrainConfig(epochs=0)
    with pytest.raises(ConfigurationError):
        TrainConfig(learning_rate=0.0)
    assert TrainConfig.from_json(TrainConfig(seed=3).to_json()) == TrainConfig(seed=3)


def test_identical_batch_has_the_single_graph_gradient(make_graph):
    config = ModelConfig(conv_type="gat", hidden_dim=4)
    view = GraphView.from_graph(make_graph(label=1), config.mode)
    params = init_params(config, view_input_dims(view), seed=0)
    weights = np.array([0.5, 1.5])

    def gradients(views):
        params.zero_grad()
        with Tape() as tape:
            loss = batch_loss(views, np.ones(len(views), dtype=np.int64), params, weights)
        tape.backward(loss)
        return {
            name: np.zeros(tensor.shape) if tensor.grad is None else tensor.grad.copy()
            for name, tensor in params.items()
        }

    single = gradients([view])
    tripled = gradients([view, view, view])
    for name in single:
        assert np.allclose(single[name], tripled[name], atol=1e-12)


def test_train_fold(make_graph):
    graphs = [make_graph(label=i % 2, article_id=f"a{i}") for i in range(6)]
    train_config = TrainConfig(epochs=3, batch_size=4, learning_rate=1e-3, seed=1)
    model_config = ModelConfig(conv_type="sage", hidden_dim=4)

    first = train_fold(graphs, train_config, model_config)
    second = train_fold(graphs, train_config, model_config)
    assert len(first.epoch_losses) == 3
    assert len(first.batch_losses) == 6
    assert first.epoch_losses == second.epoch_losses
    assert first.class_weights == [1.0, 1.0]

    other = train_fold(graphs, train_config, model_config, seed=2)
    assert other.epoch_losses != first.epoch_losses

    result = evaluate(first.params, graphs)
    assert len(result.predictions) == 6
    assert result.labels == [0, 1, 0, 1, 0, 1]

    with pytest.raises(ContractError):
        train_fold([], train_config, model_config)
    with pytest.raises(ContractError):
        evaluate(first.params, [])


def test_nan_loss_aborts(make_graph):
    graphs = [make_graph(label=i % 2) for i in range(4)]
    graphs[2].features[NodeType.NEWS][:] = np.nan
    with pytest.raises(NumericalError) as error:
        train_fold(graphs, TrainConfig(epochs=1, batch_size=4), ModelConfig(conv_type="sage", hidden_dim=4))
    assert error.value.diagnostic["epoch"] == 0


# significance


def report(name, scores, fingerprint="f"):
    cell = Cell.parse(name)
    metrics = [ClassificationMetrics(score, score, score, score) for score in scores]
    return ExperimentReport(cell, metrics, fingerprint, {}, {})


def test_significant_difference():
    a = report("5/text/hgt/hetero", [0.9, 0.91, 0.9, 0.92, 0.9])
    b = report("5/text/hgt/homo-truncate", [0.6, 0.61, 0.6, 0.62, 0.6])
    result = significance(a, b, n_comparisons=1)
    assert result.p_value < 0.001
    assert result.significant
    assert result.mean_difference == pytest.approx(0.3)


def test_identical_scores():
    a = report("5/text/hgt/hetero", [0.8, 0.7, 0.9, 0.8, 0.75])
    b = report("5/text/sage/hetero", [0.8, 0.7, 0.9, 0.8, 0.75])
    result = significance(a, b)
    assert result.p_value == 1.0
    assert result.note == "no difference"
    assert not result.significant


def test_paired_test_matches_hand_computation():
    a = np.array([0.8, 0.85, 0.9, 0.7, 0.75])
    b = np.array([0.7, 0.8, 0.85, 0.72, 0.7])
    statistic, p_value, note = paired_test(a, b)
    differences = a - b
    expected = differences.mean() / (differences.std(ddof=1) / np.sqrt(5))
    assert statistic == pytest.approx(expected)
    assert 0 < p_value < 1 and note == ""
    assert paired_test([0.75, 0.5], [0.5, 0.25])[1:] == (0.0, "constant nonzero difference")


def test_bonferroni():
    assert bonferroni(0.02, 10) == (pytest.approx(0.005), False)
    assert bonferroni(0.02, 1) == (0.05, True)
    with pytest.raises(ConfigurationError):
        bonferroni(0.01, 0)


def test_mismatched_folds():
    a = report("5/text/hgt/hetero", [0.9] * 5, fingerprint="x")
    b = report("5/text/gat/hetero", [0.8] * 5, fingerprint="y")
    with pytest.raises(ContractError):
        significance(a, b)


def test_comparison_pairs():
    cells = [
        Cell(5, "text", "hgt", "hetero"),
        Cell(5, "text", "hgt", "homo-truncate"),
        Cell(5, "text", "sage", "hetero"),
        Cell(5, "text", "sage", "homo-pad"),
    ]
    pairs = comparison_pairs(cells, Cell(5, "text", "hgt", "hetero"))
    assert pairs == [
        (cells[0], cells[1]),
        (cells[2], cells[3]),
        (cells[0], cells[2]),
        (cells[0], cells[3]),
    ]
    assert comparison_pairs(cells[:1], None) == []


def test_cell_names():
    cell = Cell.parse("S3/text+social/gat/homo-pad")
    assert cell == Cell(3, "text+social", "gat", "homo-pad")
    assert cell.name == "S3/text+social/gat/homo-pad"
    with pytest.raises(ConfigurationError):
        Cell.parse("3/text/gat")


def test_render_table():
    hetero = report("5/text/hgt/hetero", [0.9, 0.91, 0.9, 0.92, 0.9])
    homo = report("5/text/hgt/homo-truncate", [0.6, 0.61, 0.6, 0.62, 0.6])
    result = MatrixResult(
        reports=[hetero, homo],
        comparisons=[significance(hetero, homo)],
        n_comparisons=1,
        settings={"alpha": 0.05},
    )
    lines = render_table(result).splitlines()
    assert "S5 F1" in lines[0] and "S5 ACC" in lines[0]
    assert lines[2].startswith("hetero") and "0.906" in lines[2] and "**" not in lines[2]
    assert lines[3].startswith("homo-truncate") and "0.606**" in lines[3]
    assert "Bonferroni" in lines[-1]


def test_report_json():
    original = report("2/text/sage/hetero", [0.5, 0.7])
    data = original.to_json()
    assert data["mean"]["macro_f1"] == pytest.approx(0.6, abs=1e-12)
    assert "wall_clock" not in data
    assert ExperimentReport.from_json(data).to_json() == data


# matrix


SMALL_MATRIX = {
    "d_text": 16,
    "setups": [1],
    "convs": ["sage"],
    "graph_modes": ["hetero", "homo-truncate"],
    "hidden_dim": 4,
    "folds": 2,
    "epochs": 2,
    "batch_size": 8,
    "learning_rate": 1e-3,
}


def test_run_matrix_is_deterministic(small_corpus):
    root, bookkeeping = small_corpus
    first = run_matrix(root, **SMALL_MATRIX)
    second = run_matrix(root, **SMALL_MATRIX)
    assert dumps(first.to_json()) == dumps(second.to_json())

    assert [report.name for report in first.reports] == ["S1/text/sage/hetero", "S1/text/sage/homo-truncate"]
    assert first.data["kept"] == len(bookkeeping)
    assert first.n_comparisons == 1
    assert len(first.comparisons) == 1
    assert first.comparisons[0].a == "S1/text/sage/hetero"
    for report_ in first.reports:
        assert report_.n_graphs == len(bookkeeping)
        assert report_.fold_fingerprint == first.reports[0].fold_fingerprint
        assert len(report_.wall_clock) == 2
        fold_mean = np.mean([metrics.macro_f1 for metrics in report_.fold_metrics])
        assert abs(report_.mean["macro_f1"] - fold_mean) <= 1e-12
    assert first.reports[0].fold_seeds == first.reports[1].fold_seeds


def test_single_cell_matrix(small_corpus):
    root, _ = small_corpus
    result = run_matrix(root, **dict(SMALL_MATRIX, graph_modes=["hetero"], reference="1/text/sage/hetero"))
    assert len(result.reports) == 1
    assert result.comparisons == []
    with pytest.raises(ConfigurationError):
        run_matrix(root, **dict(SMALL_MATRIX, reference="5/text/hgt/hetero"))
