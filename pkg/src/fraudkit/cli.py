"""Command-line entry points.

    fraudkit run <config>                     experiment grid + artifacts
    fraudkit screen <model> <csv> [--threshold T] [--out decisions.csv]
    fraudkit tsne <csv> [--perplexity P] [--seed S] [...]
    fraudkit synth <out.csv> [--rows N] [--positive-rate R] [...]

Exit codes: 0 success, 1 validation error (bad config, schema or file
format), 2 runtime error.
"""

from __future__ import annotations

import argparse
import sys

import numpy as np

from . import embed, synth, tabular
from .config import load_config
from .errors import (
    ConfigError,
    EmptyDataset,
    FormatError,
    FraudkitError,
    MissingColumn,
    NonBinaryLabel,
    ParseError,
    SchemaMismatch,
)
from .experiment import run_experiment, screen_transactions, write_decisions_csv

_VALIDATION_ERRORS = (ConfigError, MissingColumn, ParseError, NonBinaryLabel,
                      EmptyDataset, FormatError, SchemaMismatch,
                      FileNotFoundError)


def _cmd_run(args) -> int:
    config = load_config(args.config)
    state = run_experiment(config)
    print(f"wrote artifacts to {config.output_dir}/")
    print(f"{'model':<22} {'precision':>9} {'recall':>9} {'f1':>9} {'roc_auc':>9}")
    for name, p, r, f1, auc in state.report.rows:
        print(f"{name:<22} {p:>9.4f} {r:>9.4f} {f1:>9.4f} {auc:>9.4f}")
    return 0


def _cmd_screen(args) -> int:
    decisions, summary = screen_transactions(args.model, args.transactions,
                                             threshold=args.threshold)
    write_decisions_csv(decisions, args.out)
    print(f"approved: {summary['approved']}")
    print(f"forwarded for review: {summary['review']}")
    print(f"decisions written to {args.out}")
    return 0


def _cmd_tsne(args) -> int:
    ds = tabular.load_csv(args.data, label_column=args.label_column)
    rows = ds.rows
    labels = ds.labels
    if args.max_points and ds.n_rows > args.max_points:
        rng = np.random.default_rng(args.seed)
        idx = np.sort(rng.choice(ds.n_rows, size=args.max_points, replace=False))
        rows, labels = rows[idx], labels[idx]
    params = embed.TsneParams(perplexity=args.perplexity,
                              iterations=args.iterations,
                              learning_rate=args.learning_rate,
                              seed=args.seed)
    result = embed.run_tsne(rows, params)
    embed.write_embedding_csv(result, labels, args.out)
    print(f"embedding written to {args.out} "
          f"(final KL {result.kl_history[-1]:.4f})")
    if args.figure:
        from . import plots
        plots.plot_embedding(result.Y, labels, args.figure)
        print(f"figure written to {args.figure}")
    return 0


def _cmd_synth(args) -> int:
    ds = synth.make_synthetic(n_rows=args.rows, positive_rate=args.positive_rate,
                              n_features=args.features,
                              n_informative=args.informative, seed=args.seed)
    tabular.save_csv(ds, args.out)
    n0, n1 = ds.class_counts()
    print(f"wrote {ds.n_rows} rows ({n1} positive) to {args.out}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="fraudkit",
                                     description="Imbalanced-classification "
                                                 "experiment toolkit")
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="run the experiment grid from a config file")
    p_run.add_argument("config")
    p_run.set_defaults(func=_cmd_run)

    p_screen = sub.add_parser("screen", help="screen transactions with a saved model")
    p_screen.add_argument("model")
    p_screen.add_argument("transactions")
    p_screen.add_argument("--threshold", type=float, default=0.5)
    p_screen.add_argument("--out", default="decisions.csv")
    p_screen.set_defaults(func=_cmd_screen)

    p_tsne = sub.add_parser("tsne", help="embed a CSV into 2-D")
    p_tsne.add_argument("data")
    p_tsne.add_argument("--perplexity", type=float, default=30.0)
    p_tsne.add_argument("--seed", type=int, default=0)
    p_tsne.add_argument("--iterations", type=int, default=1000)
    p_tsne.add_argument("--learning-rate", type=float, default=200.0)
    p_tsne.add_argument("--label-column", default="Class")
    p_tsne.add_argument("--max-points", type=int, default=1000)
    p_tsne.add_argument("--out", default="embedding.csv")
    p_tsne.add_argument("--figure", default=None)
    p_tsne.set_defaults(func=_cmd_tsne)

    p_synth = sub.add_parser("synth", help="generate the bundled synthetic dataset")
    p_synth.add_argument("out")
    p_synth.add_argument("--rows", type=int, default=10_000)
    p_synth.add_argument("--positive-rate", type=float, default=0.01)
    p_synth.add_argument("--features", type=int, default=20)
    p_synth.add_argument("--informative", type=int, default=10)
    p_synth.add_argument("--seed", type=int, default=0)
    p_synth.set_defaults(func=_cmd_synth)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except _VALIDATION_ERRORS as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except (FraudkitError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
