"""Cross-validated experiment matrix over setups, features, convolutions and graph modes."""

from __future__ import annotations

import logging
import time
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

from hetsmcg.errors import ConfigurationError, ContractError
from hetsmcg.gnn import GraphMode, GraphView, ModelConfig
from hetsmcg.harness.folds import FoldSplit, stratified_kfold
from hetsmcg.harness.report import Cell, ExperimentReport, MatrixResult
from hetsmcg.harness.significance import significance
from hetsmcg.harness.training import TrainConfig, evaluate, train_fold
from hetsmcg.helpers import derive_seed
from hetsmcg.ingest import CorpusIndex, EmbedderSpec, build_dataset, load_corpus, select_articles
from hetsmcg.settings import ExperimentSettings, matrix_settings

logger = logging.getLogger(__name__)

DEFAULT_REFERENCE = Cell(5, "text", "hgt", "hetero")


def fold_seeds(seed: int, k: int) -> list:
    """The seed of every fold, shared by all cells."""
    return [derive_seed(seed, fold) for fold in range(k)]


def run_cell(
    cell: Cell,
    graphs: list,
    split: FoldSplit,
    train_config: TrainConfig,
    model_config: ModelConfig,
) -> ExperimentReport:
    """Trains and evaluates one cell on every fold.

    Args:
        cell (Cell): The cell.
        graphs (list): All graphs of the cell's setup and feature mode, in split order.
        split (FoldSplit): The shared fold split.
        train_config (TrainConfig): The hyperparameters.
        model_config (ModelConfig): The architecture.

    Returns:
        ExperimentReport: The per-fold metrics.
    """
    split.check_ids([getattr(graph, "article_id", index) for index, graph in enumerate(graphs)])
    views = [GraphView.from_graph(graph, model_config.mode) for graph in graphs]
    seeds = fold_seeds(train_config.seed, split.k)

    fold_metrics, final_losses, wall_clock = [], [], []
    for fold in range(split.k):
        started = time.perf_counter()
        train, test = split.train_test(fold)
        trained = train_fold([views[i] for i in train], train_config, model_config, seed=seeds[fold])
        evaluation = evaluate(trained.params, [views[i] for i in test])
        fold_metrics.append(evaluation.metrics)
        final_losses.append(trained.epoch_losses[-1])
        wall_clock.append(time.perf_counter() - started)
        logger.info(
            "%s fold %d: macro-F1 %.4f, accuracy %.4f",
            cell.name,
            fold,
            evaluation.metrics.macro_f1,
            evaluation.metrics.accuracy,
        )

    return ExperimentReport(
        cell=cell,
        fold_metrics=fold_metrics,
        fold_fingerprint=split.fingerprint,
        model_config=model_config.to_json(),
        train_config=train_config.to_json(),
        fold_seeds=seeds,
        final_losses=final_losses,
        n_graphs=len(graphs),
        wall_clock=wall_clock,
    )


def _run_cell_task(args: tuple) -> ExperimentReport:
    return run_cell(*args)


def comparison_pairs(cells: list, reference: Cell | None) -> list:
    """The (a, b) cell pairs compared in a matrix run.

    Every homogeneous cell is compared against its heterogeneous counterpart,
    and the reference cell, if it was run, against every other cell.

    Args:
        cells (list): The cells of the run.
        reference (Cell | None): The reference cell.

    Returns:
        list: (a, b) pairs without duplicates, in a fixed order.
    """
    present = set(cells)
    pairs = []
    for cell in cells:
        if cell.mode == GraphMode.HETERO.value:
            continue
        partner = Cell(cell.setup, cell.features, cell.conv, GraphMode.HETERO.value)
        if partner in present:
            pairs.append((partner, cell))
    if reference is not None and reference in present:
        for cell in cells:
            if cell != reference and (reference, cell) not in pairs:
                pairs.append((reference, cell))
    return pairs


def _reference(settings: ExperimentSettings, cells: list) -> Cell | None:
    if settings.reference:
        reference = Cell.parse(settings.reference)
        if reference not in cells:
            raise ConfigurationError(f"Reference cell {reference.name} is not part of the matrix")
        return reference
    return DEFAULT_REFERENCE if DEFAULT_REFERENCE in cells else None


def run_matrix(
    corpus: CorpusIndex | Path | str,
    settings: ExperimentSettings = None,
    **overrides,
) -> MatrixResult:
    """Runs every cell of the experiment matrix on one shared fold split.

    The kept article set is selected once, the folds are drawn once over it and
    every setup, feature mode, convolution and graph mode is trained and
    evaluated on exactly those folds with the same fold seeds.

    Args:
        corpus (CorpusIndex | Path | str): A loaded corpus or its directory.
        settings (ExperimentSettings, optional): Matrix settings, the defaults if None.
        **overrides: Setting values replacing those of ``settings``.

    Returns:
        MatrixResult: The reports, comparisons and run metadata.
    """
    settings = settings or matrix_settings()
    settings.update_values(overrides)
    if not isinstance(corpus, CorpusIndex):
        corpus = load_corpus(corpus, settings.datasets)

    spec = EmbedderSpec.parse(settings.embedder, settings.d_text, settings.embedder_seed)
    embedder = spec.build()
    kept, skipped = select_articles(corpus, settings.min_nodes, settings.timeline_cap)
    labels = [corpus[article_id].label for article_id in kept]
    split = stratified_kfold(labels, settings.folds, settings.seed, ids=kept)

    train_config = TrainConfig(
        epochs=settings.epochs,
        batch_size=settings.batch_size,
        learning_rate=settings.learning_rate,
        use_class_weights=settings.class_weights,
        seed=settings.seed,
    )

    tasks = []
    for setup in settings.setups:
        for features in settings.feature_modes:
            build = build_dataset(
                corpus,
                setup,
                features,
                embedder,
                scaling=settings.count_scaling,
                min_nodes=settings.min_nodes,
                timeline_cap=settings.timeline_cap,
                article_ids=kept,
            )
            if [graph.article_id for graph in build.graphs] != kept:
                raise ContractError(f"Setup {setup} lost articles of the kept set")
            for conv in settings.convs:
                for mode in settings.graph_modes:
                    model_config = ModelConfig(
                        conv_type=conv,
                        hidden_dim=settings.hidden_dim,
                        heads=settings.heads,
                        activation=settings.activation,
                        readout=settings.readout,
                        mode=mode,
                    )
                    cell = Cell(int(setup), features, conv, mode)
                    tasks.append((cell, build.graphs, split, train_config, model_config))

    logger.info("Running %d cells on %d graphs with %d workers", len(tasks), len(kept), settings.workers)
    if settings.workers > 1:
        with ProcessPoolExecutor(max_workers=settings.workers) as executor:
            reports = list(executor.map(_run_cell_task, tasks))
    else:
        reports = [_run_cell_task(task) for task in tasks]

    fingerprints = {report.fold_fingerprint for report in reports}
    if fingerprints != {split.fingerprint}:
        raise ContractError("Cells were evaluated on different fold splits")

    cells = [report.cell for report in reports]
    pairs = comparison_pairs(cells, _reference(settings, cells))
    n_comparisons = settings.n_comparisons or max(len(pairs), 1)
    by_cell = {report.cell: report for report in reports}
    comparisons = [
        significance(by_cell[a], by_cell[b], n_comparisons, settings.alpha) for a, b in pairs
    ]

    return MatrixResult(
        reports=reports,
        comparisons=comparisons,
        n_comparisons=n_comparisons,
        settings=settings.to_json(),
        folds=split.to_json(),
        data={
            "kept": len(kept),
            "real": labels.count(0),
            "fake": labels.count(1),
            "skipped": dict(sorted(_count_reasons(skipped).items())),
            "load_warnings": dict(sorted(corpus.report.warnings.items())),
        },
    )


def _count_reasons(skipped: dict) -> dict:
    counts = {}
    for reason in skipped.values():
        counts[reason] = counts.get(reason, 0) + 1
    return counts
