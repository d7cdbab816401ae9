"""Command-line interface: ``dblp-linkpred <command> [options]``."""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from .classifiers import ModelError
from .pipeline import (
    FORMATS,
    TEST_MODES,
    PipelineConfig,
    PipelineError,
    cmd_build,
    cmd_dataset,
    cmd_eval,
    cmd_ingest,
    cmd_reproduce,
    cmd_train,
    stage,
)
from .synthetic import community_publications, dblp_xml

REPRODUCE_MAX_LINES = 50000


def year_range(text: str) -> tuple[int, int]:
    try:
        lo, hi = (int(x) for x in text.split(":"))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected LO:HI, got {text!r}") from None
    if lo > hi:
        raise argparse.ArgumentTypeError(f"empty range {text!r}")
    return lo, hi


def comma_list(text: str) -> tuple[str, ...]:
    return tuple(x.strip() for x in text.split(",") if x.strip())


def line_budget(text: str) -> int | None:
    n = int(text)
    if n < 0:
        raise argparse.ArgumentTypeError(f"must not be negative, got {n}")
    return n or None


def positive_int(text: str) -> int:
    n = int(text)
    if n < 1:
        raise argparse.ArgumentTypeError(f"must be positive, got {n}")
    return n


def _add_common(p: argparse.ArgumentParser, max_lines_default=None) -> None:
    p.add_argument("--input", help="DBLP XML file (.gz allowed)")
    p.add_argument("--max-lines", type=line_budget, default=max_lines_default,
                   help="only read this many physical lines of the input (0: all)")
    p.add_argument("--train-years", type=year_range, default=(2012, 2016), metavar="LO:HI")
    p.add_argument("--test-years", type=year_range, default=(2017, 2018), metavar="LO:HI")
    p.add_argument("--features", type=comma_list, default=("dist", "neighbors", "papers"),
                   help="comma list of dist, neighbors, papers")
    p.add_argument("--exclude-direct-edge", action="store_true",
                   help="measure distance with the pair's own edge removed")
    p.add_argument("--papers-scope", choices=("total", "joint"), default="total",
                   help="sum_of_papers as the two authors' paper counts, or their joint papers")
    p.add_argument("--neg-ratio", type=float, default=1.0, metavar="R")
    p.add_argument("--max-neg-distance", type=int, default=None,
                   help="sample negatives only within this many hops")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--models", type=comma_list, default=("j48", "nb", "logreg", "mlp", "svm"))
    p.add_argument("--k", type=int, default=10)
    p.add_argument("--test-mode", choices=TEST_MODES, default="holdout",
                   help="test split: train on the training split (holdout) or k-fold on it alone (cv)")
    p.add_argument("--kinds", type=comma_list, default=None,
                   help="record kinds counted as papers")
    p.add_argument("--cumulative-test-graph", action="store_true",
                   help="build the test graph from all papers since the training period began")
    p.add_argument("--future-links", action="store_true",
                   help="experimental: test pairs are new links among authors active in both "
                        "periods, with features from the training graph")
    p.add_argument("--on-malformed", choices=("skip_record", "abort"), default="skip_record")
    p.add_argument("--param", action="append", default=[], metavar="MODEL.NAME=VALUE",
                   help="hyperparameter override, e.g. mlp.epochs=200")
    p.add_argument("--out", default="out", metavar="DIR")
    p.add_argument("--format", choices=FORMATS, default="text")
    p.add_argument("-v", "--verbose", action="store_true", default=argparse.SUPPRESS)


def _hyperparameters(items: list[str]) -> dict:
    from .classifiers import resolve_kind

    out: dict[str, dict] = {}
    for item in items:
        key, sep, value = item.partition("=")
        kind, dot, name = key.partition(".")
        if not sep or not dot:
            raise PipelineError("cli", f"bad --param {item!r}; expected MODEL.NAME=VALUE")
        try:
            parsed = json.loads(value)
        except json.JSONDecodeError:
            parsed = value
        with stage("cli"):
            out.setdefault(resolve_kind(kind), {})[name] = parsed
    return out


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="dblp-linkpred", description=__doc__)
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    for name, help_text in (
        ("ingest", "parse the XML and dump publications as JSON lines"),
        ("build", "co-authorship graphs of the train and test periods"),
        ("dataset", "labelled pair datasets as ARFF and CSV"),
    ):
        _add_common(sub.add_parser(name, help=help_text))
    p = sub.add_parser("train", help="train and save models")
    _add_common(p)
    p.add_argument("--data", help="training ARFF instead of --input")
    p = sub.add_parser("eval", help="evaluate models, printing result tables")
    _add_common(p)
    p.add_argument("--data", help="training ARFF instead of --input")
    p.add_argument("--test-data", help="test ARFF (with --data)")
    _add_common(sub.add_parser("reproduce", help="full pipeline, one table per feature set and split"),
                max_lines_default=REPRODUCE_MAX_LINES)

    p = sub.add_parser("synth", help="write a synthetic DBLP-style XML file")
    p.add_argument("--authors", type=positive_int, default=2000)
    p.add_argument("--papers", type=positive_int, default=2000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True, metavar="FILE")
    return parser


def config_from_args(args: argparse.Namespace) -> PipelineConfig:
    kw = dict(
        input=args.input,
        max_lines=args.max_lines,
        train_years=args.train_years,
        test_years=args.test_years,
        features=args.features,
        exclude_direct_edge=args.exclude_direct_edge,
        neg_ratio=args.neg_ratio,
        max_neg_distance=args.max_neg_distance,
        seed=args.seed,
        models=args.models,
        k=args.k,
        out=args.out,
        format=args.format,
        papers_scope=args.papers_scope,
        test_mode=args.test_mode,
        on_malformed=args.on_malformed,
        cumulative_test_graph=args.cumulative_test_graph,
        future_links=args.future_links,
        hyperparameters=_hyperparameters(args.param),
    )
    if args.kinds:
        kw["kinds"] = args.kinds
    cfg = PipelineConfig(**kw)
    if cfg.input and not Path(cfg.input).is_file():
        raise PipelineError("cli", f"cannot read input {cfg.input!r}")
    return cfg.validated()


def run(argv: list[str] | None = None) -> str:
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.INFO if args.verbose else logging.WARNING,
        format="%(levelname)s %(message)s",
        stream=sys.stderr,
    )
    if args.command == "synth":
        data = dblp_xml(community_publications(args.authors, args.papers, seed=args.seed))
        with stage("cli"):
            Path(args.out).write_bytes(data)
        return f"wrote {args.out}\n"

    cfg = config_from_args(args)
    if args.command == "ingest":
        return cmd_ingest(cfg)
    if args.command == "build":
        return cmd_build(cfg)
    if args.command == "dataset":
        return cmd_dataset(cfg)
    if args.command == "train":
        return cmd_train(cfg, args.data)
    if args.command == "eval":
        return cmd_eval(cfg, args.data, args.test_data)
    return cmd_reproduce(cfg)


def main(argv: list[str] | None = None) -> int:
    try:
        sys.stdout.write(run(argv))
    except PipelineError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except ModelError as exc:
        print(f"error: [classifiers] {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
