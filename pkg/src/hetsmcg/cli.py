"""Command line interface: corpus generation, graph building, training, evaluation and the experiment matrix."""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from hetsmcg.errors import ConfigurationError, ContractError, InputError, NumericalError
from hetsmcg.gnn import ModelConfig, load_checkpoint, parameter_count, save_checkpoint
from hetsmcg.harness import (
    TrainConfig,
    evaluate,
    load_folds,
    render_table,
    run_matrix,
    save_folds,
    stratified_kfold,
    train_fold,
)
from hetsmcg.helpers import dumps, write_json
from hetsmcg.hetgraph import GraphDataset, load_dataset, save_dataset
from hetsmcg.ingest import EmbedderSpec, FeatureMode, Setup, build_dataset, load_corpus, select_articles
from hetsmcg.settings import (
    CONV_TYPES,
    DATASETS,
    FEATURE_MODES,
    GRAPH_MODES,
    SETUPS,
    load_settings,
    matrix_settings,
)
from hetsmcg.synth import SynthConfig, generate_corpus, null_signal

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_INPUT = 1
EXIT_NUMERICAL = 2

FOLDS_FILE = "folds.json"
DEFAULT_DTEXT = 64


def gen_synth(args: argparse.Namespace) -> int:
    """Writes a synthetic corpus."""
    params = {
        "n_articles": args.articles,
        "fake_fraction": args.fake_frac,
        "seed": args.seed,
        "dtext": args.dtext,
    }
    if args.beta is not None:
        params["beta"] = args.beta
    config = null_signal(**params) if args.null_signal else SynthConfig(**params)
    generate_corpus(config, args.out)
    return EXIT_OK


def build_graphs(args: argparse.Namespace) -> int:
    """Builds and stores the graphs of one setup and feature mode with a fold split."""
    corpus = load_corpus(args.corpus, args.datasets)
    dtext = args.dtext or corpus.metadata.get("embedder", {}).get("dim", DEFAULT_DTEXT)
    spec = EmbedderSpec.parse(args.embedder, dtext, args.embedder_seed, args.on_miss)
    setup = Setup.parse(args.setup)

    kept, _ = select_articles(corpus, args.min_nodes)
    build = build_dataset(
        corpus,
        setup,
        args.features,
        spec,
        scaling=args.scaling,
        min_nodes=args.min_nodes,
        article_ids=kept,
    )
    labels = [graph.label for graph in build.graphs]
    ids = [graph.article_id for graph in build.graphs]
    split = stratified_kfold(labels, args.folds, args.folds_seed, ids=ids)

    dataset = GraphDataset(
        graphs=build.graphs,
        metadata={
            "setup": int(setup),
            "feature_mode": FeatureMode(args.features).value,
            "d_text": dtext,
            "embedder": args.embedder,
            "scaling": args.scaling,
            "folds": {"k": split.k, "seed": split.seed, "fingerprint": split.fingerprint},
            "skipped": len(build.skipped),
        },
        folds=list(split.assignment),
        datasets=build.datasets,
    )
    save_dataset(dataset, args.out)
    save_folds(split, Path(args.out) / FOLDS_FILE)
    return EXIT_OK


def _selected(dataset: GraphDataset, fold: int | None, keep_fold: bool) -> list:
    if fold is None:
        return list(dataset.graphs)
    if dataset.folds is None:
        raise InputError("The graph dataset has no fold assignment")
    return [
        graph
        for graph, assigned in zip(dataset.graphs, dataset.folds)
        if (assigned == fold) == keep_fold
    ]


def train(args: argparse.Namespace) -> int:
    """Trains one model and writes its checkpoint."""
    dataset = load_dataset(args.graphs)
    graphs = _selected(dataset, args.fold, keep_fold=False)
    model_config = ModelConfig(
        conv_type=args.conv,
        hidden_dim=args.hidden,
        heads=args.heads,
        mode=args.mode,
    )
    train_config = TrainConfig(
        epochs=args.epochs,
        batch_size=args.batch,
        learning_rate=args.lr,
        use_class_weights=not args.no_class_weights,
        seed=args.seed,
    )
    result = train_fold(graphs, train_config, model_config)
    save_checkpoint(args.out, result.params)
    print(dumps({"epoch_losses": result.epoch_losses, "parameters": parameter_count(result.params)}))
    return EXIT_OK


def evaluate_command(args: argparse.Namespace) -> int:
    """Evaluates a checkpoint on the graphs listed in a folds file."""
    dataset = load_dataset(args.graphs)
    params = load_checkpoint(args.ckpt)
    folds_path = Path(args.folds) if args.folds else Path(args.graphs) / FOLDS_FILE
    split = load_folds(folds_path)

    by_id = {graph.article_id: graph for graph in dataset.graphs}
    ids = list(split.ids) if split.ids is not None else dataset.article_ids
    if len(ids) != len(split.assignment):
        raise InputError(f"Folds file {folds_path} does not match the graph dataset")
    missing = [article_id for article_id in ids if article_id not in by_id]
    if missing:
        raise InputError(f"{len(missing)} articles of the folds file are not in {args.graphs}")

    if args.fold is None:
        graphs = [by_id[article_id] for article_id in ids]
    else:
        _, test = split.train_test(args.fold)
        graphs = [by_id[ids[index]] for index in test]

    result = evaluate(params, graphs)
    print(dumps(result.metrics.to_json()))
    return EXIT_OK


def run_matrix_command(args: argparse.Namespace) -> int:
    """Runs the experiment matrix and writes the report files."""
    settings = load_settings(args.config) if args.config else matrix_settings()
    if args.workers:
        settings.workers = args.workers
    result = run_matrix(args.corpus, settings)

    out = Path(args.out)
    write_json(out, result.to_json())
    write_json(out.with_suffix(".timing.json"), result.timing_json())
    table = render_table(result)
    out.with_suffix(".txt").write_text(table, encoding="utf-8")
    print(table, end="")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    """Creates the argument parser with all subcommands."""
    parser = argparse.ArgumentParser(
        prog="hetsmcg",
        description="Fake news detection on heterogeneous social media context graphs.",
    )
    verbosity = parser.add_mutually_exclusive_group()
    verbosity.add_argument("-v", "--verbose", action="store_true", help="Log debug messages")
    verbosity.add_argument("-q", "--quiet", action="store_true", help="Log warnings and errors only")
    commands = parser.add_subparsers(dest="command", required=True)

    synth = commands.add_parser("gen-synth", help="Generate a synthetic corpus")
    synth.add_argument("--out", required=True, help="Corpus directory")
    synth.add_argument("--articles", type=int, default=200)
    synth.add_argument("--fake-frac", type=float, default=0.5)
    synth.add_argument("--seed", type=int, default=0)
    synth.add_argument("--beta", type=float, default=None, help="Topic word bias")
    synth.add_argument("--dtext", type=int, default=DEFAULT_DTEXT, help="Advertised embedding dimension")
    synth.add_argument("--null-signal", action="store_true", help="Label independent data")
    synth.set_defaults(handler=gen_synth)

    graphs = commands.add_parser("build-graphs", help="Build the graphs of one setup")
    graphs.add_argument("--corpus", required=True)
    graphs.add_argument("--out", required=True)
    graphs.add_argument("--setup", type=int, choices=SETUPS, required=True)
    graphs.add_argument("--features", choices=FEATURE_MODES, default="text")
    graphs.add_argument("--dtext", type=int, default=None, help="Defaults to the corpus hint or 64")
    graphs.add_argument("--embedder", default="hashing", help="hashing or precomputed:FILE")
    graphs.add_argument("--embedder-seed", type=int, default=0)
    graphs.add_argument("--on-miss", choices=["error", "zero"], default="error")
    graphs.add_argument("--datasets", nargs="+", choices=DATASETS, default=None)
    graphs.add_argument("--scaling", choices=["log1p", "raw"], default="log1p")
    graphs.add_argument("--min-nodes", type=int, default=5)
    graphs.add_argument("--folds", type=int, default=5)
    graphs.add_argument("--folds-seed", type=int, default=0)
    graphs.set_defaults(handler=build_graphs)

    training = commands.add_parser("train", help="Train one model")
    training.add_argument("--graphs", required=True)
    training.add_argument("--conv", choices=CONV_TYPES, required=True)
    training.add_argument("--mode", choices=GRAPH_MODES, default="hetero")
    training.add_argument("--epochs", type=int, default=20)
    training.add_argument("--batch", type=int, default=16)
    training.add_argument("--lr", type=float, default=8e-5)
    training.add_argument("--seed", type=int, default=0)
    training.add_argument("--hidden", type=int, default=64)
    training.add_argument("--heads", type=int, default=1)
    training.add_argument("--no-class-weights", action="store_true")
    training.add_argument("--fold", type=int, default=None, help="Hold out this fold")
    training.add_argument("--out", required=True, help="Checkpoint file")
    training.set_defaults(handler=train)

    evaluation = commands.add_parser("evaluate", help="Evaluate a checkpoint")
    evaluation.add_argument("--graphs", required=True)
    evaluation.add_argument("--ckpt", required=True)
    evaluation.add_argument("--folds", default=None, help="Defaults to folds.json of the graphs")
    evaluation.add_argument("--fold", type=int, default=None, help="Evaluate on this fold only")
    evaluation.set_defaults(handler=evaluate_command)

    matrix = commands.add_parser("run-matrix", help="Run the experiment matrix")
    matrix.add_argument("--corpus", required=True)
    matrix.add_argument("--config", default=None, help="YAML or JSON settings")
    matrix.add_argument("--out", required=True, help="Report json")
    matrix.add_argument("--workers", type=int, default=None)
    matrix.set_defaults(handler=run_matrix_command)

    return parser


def main(argv: list = None) -> int:
    """Runs the command line interface.

    Returns:
        int: 0 on success, 1 on input, configuration or contract errors, 2 on numerical failures.
    """
    args = build_parser().parse_args(argv)
    level = logging.DEBUG if args.verbose else logging.WARNING if args.quiet else logging.INFO
    logging.basicConfig(level=level, format="%(asctime)s %(levelname)s %(name)s: %(message)s")

    try:
        return args.handler(args)
    except NumericalError as error:
        logger.error("%s %s", error, json.dumps(error.diagnostic, sort_keys=True))
        return EXIT_NUMERICAL
    except (InputError, ConfigurationError, ContractError) as error:
        logger.error("%s", error)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
