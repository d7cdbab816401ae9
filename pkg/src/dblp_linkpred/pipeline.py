"""End-to-end orchestration: resolved configuration, stages and run outputs."""

from __future__ import annotations

import gzip
import hashlib
import io
import json
import logging
import os
import tempfile
import warnings
from contextlib import contextmanager
from dataclasses import asdict, dataclass, field, replace
from pathlib import Path
from typing import Callable, Iterator, Sequence

from . import __version__
from .arff import read_arff, write_arff
from .classifiers import KINDS, ModelSpec, resolve_kind, save_model, train
from .dataset import (
    Dataset,
    DatasetMeta,
    SplitSpec,
    assemble,
    future_link_pairs,
    sample_pairs,
    temporal_split,
    write_csv,
)
from .evaluation import (
    ModelResult,
    cross_validate,
    evaluate_holdout,
    format_table,
    results_csv,
    results_json,
    roc_csv,
)
from .features import FEATURE_NAMES, PAPERS_SCOPES, parse_mask, short_mask
from .graph import build_graph, graph_summary, write_edge_list, write_node_table
from .ingest import (
    PAPER_KINDS,
    IngestConfig,
    Publication,
    filter_publications,
    parse_stream,
    write_jsonl,
)

log = logging.getLogger("dblp_linkpred")

MANIFEST = "manifest.json"
FORMATS = ("text", "csv", "json")
TEST_MODES = ("holdout", "cv")
# feature combinations of the reported result tables
REPRODUCE_SETS = (
    ("shortest_distance",),
    ("sum_of_neighbors",),
    ("shortest_distance", "sum_of_neighbors"),
    FEATURE_NAMES,
)


class PipelineError(Exception):
    """A stage failed; carries the stage (module) name for the diagnostic."""

    def __init__(self, stage: str, message: str):
        super().__init__(f"[{stage}] {message}")
        self.stage = stage


@contextmanager
def stage(name: str) -> Iterator[None]:
    try:
        yield
    except PipelineError:
        raise
    except (ValueError, KeyError, OSError, EOFError) as exc:
        raise PipelineError(name, str(exc) or type(exc).__name__) from exc


@dataclass(frozen=True)
class PipelineConfig:
    input: str | None = None
    max_lines: int | None = None
    train_years: tuple[int, int] = (2012, 2016)
    test_years: tuple[int, int] = (2017, 2018)
    features: tuple[str, ...] = FEATURE_NAMES
    exclude_direct_edge: bool = False
    neg_ratio: float = 1.0
    max_neg_distance: int | None = None
    seed: int = 0
    models: tuple[str, ...] = KINDS
    k: int = 10
    out: str = "out"
    format: str = "text"
    papers_scope: str = "total"
    test_mode: str = "holdout"
    kinds: tuple[str, ...] = tuple(sorted(PAPER_KINDS))
    on_malformed: str = "skip_record"
    cumulative_test_graph: bool = False
    future_links: bool = False
    hyperparameters: dict = field(default_factory=dict, compare=False)

    def validated(self) -> PipelineConfig:
        """Normalized copy; raises ``PipelineError`` on the first invalid setting."""
        with stage("cli"):
            split = SplitSpec(tuple(self.train_years), tuple(self.test_years))
            models = tuple(dict.fromkeys(resolve_kind(m) for m in self.models))
            if not models:
                raise ValueError("no models selected")
            if self.k < 2:
                raise ValueError(f"k must be at least 2, got {self.k}")
            if not self.neg_ratio > 0:
                raise ValueError(f"neg ratio must be positive, got {self.neg_ratio}")
            if self.format not in FORMATS:
                raise ValueError(f"format must be one of {FORMATS}")
            if self.test_mode not in TEST_MODES:
                raise ValueError(f"test mode must be one of {TEST_MODES}")
            if self.papers_scope not in PAPERS_SCOPES:
                raise ValueError(f"papers scope must be one of {PAPERS_SCOPES}")
            cfg = replace(
                self,
                train_years=split.train_years,
                test_years=split.test_years,
                features=parse_mask(self.features),
                models=models,
                kinds=tuple(sorted(set(self.kinds))),
            )
            cfg.ingest_config()
            for kind in models:
                cfg.model_spec(kind)
        return cfg

    def ingest_config(self) -> IngestConfig:
        return IngestConfig(
            max_lines=self.max_lines, on_malformed=self.on_malformed, kinds=frozenset(self.kinds)
        )

    def model_spec(self, kind: str) -> ModelSpec:
        return ModelSpec(kind, dict(self.hyperparameters.get(kind, {})), self.seed)

    def to_dict(self) -> dict:
        """Every setting with model defaults expanded for the configured features."""
        d = asdict(self)
        d["train_years"] = list(self.train_years)
        d["test_years"] = list(self.test_years)
        d["hyperparameters"] = {
            kind: self.model_spec(kind).hyperparameters(len(self.features)) for kind in self.models
        }
        return d


def sha256_file(path: str | Path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for block in iter(lambda: fh.read(1 << 20), b""):
            h.update(block)
    return h.hexdigest()


class RunOutput:
    """Files written under one output directory, each atomically.

    Any manifest from an earlier run is removed first and the new one is
    only written by ``finish``, so a failed run never advertises files.
    """

    def __init__(self, root: str | Path):
        self.root = Path(root)
        self.files: dict[str, str] = {}
        with stage("cli"):
            self.root.mkdir(parents=True, exist_ok=True)
            (self.root / MANIFEST).unlink(missing_ok=True)

    def _atomic(self, rel: str, data: bytes) -> Path:
        path = self.root / rel
        path.parent.mkdir(parents=True, exist_ok=True)
        fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
        try:
            with os.fdopen(fd, "wb") as fh:
                fh.write(data)
            os.replace(tmp, path)
        except BaseException:
            Path(tmp).unlink(missing_ok=True)
            raise
        return path

    def write(self, rel: str, data: bytes | str) -> Path:
        if isinstance(data, str):
            data = data.encode("utf-8")
        path = self._atomic(rel, data)
        self.files[rel] = hashlib.sha256(data).hexdigest()
        return path

    def write_with(self, rel: str, writer: Callable[[io.StringIO], object]) -> Path:
        buf = io.StringIO()
        writer(buf)
        return self.write(rel, buf.getvalue())

    def finish(self, command: str, cfg: PipelineConfig, extra: dict | None = None) -> Path:
        doc = {
            "command": command,
            "version": __version__,
            # the output directory is where this file lives; leaving it out keeps
            # manifests of identical runs into different directories identical
            "config": {k: v for k, v in cfg.to_dict().items() if k != "out"},
            "files": dict(sorted(self.files.items())),
            **(extra or {}),
        }
        return self._atomic(MANIFEST, (json.dumps(doc, indent=2, sort_keys=True) + "\n").encode())


def open_input(path: str) -> io.BufferedIOBase:
    if path.endswith(".gz"):
        return gzip.open(path, "rb")
    return open(path, "rb")


def load_publications(cfg: PipelineConfig):
    if not cfg.input:
        raise PipelineError("cli", "--input is required")
    with stage("dblp_ingest"):
        with open_input(cfg.input) as fh:
            pubs, stats = parse_stream(fh, cfg.ingest_config())
    log.info("ingested %d publications from %s", len(pubs), cfg.input)
    return pubs, stats


@dataclass
class SplitData:
    name: str
    years: tuple[int, int]
    pubs: list[Publication]
    graph: object
    index: object


def split_graphs(pubs: Sequence[Publication], cfg: PipelineConfig) -> list[SplitData]:
    """One co-authorship graph per period, each from that period's papers only.

    With ``cumulative_test_graph`` the test graph also contains every paper
    from the start of the training period on.
    """
    with stage("graph"):
        train_pubs, test_pubs = temporal_split(pubs, SplitSpec(cfg.train_years, cfg.test_years))
        if cfg.cumulative_test_graph:
            lo = min(cfg.train_years[0], cfg.test_years[0])
            test_pubs = filter_publications(pubs, lo, cfg.test_years[1])
        out = []
        for name, years, part in (
            ("train", cfg.train_years, train_pubs),
            ("test", cfg.test_years, test_pubs),
        ):
            g, index = build_graph(part)
            out.append(SplitData(name, years, part, g, index))
    return out


@dataclass
class BuiltDatasets:
    train: Dataset
    test: Dataset
    warnings: list[str]


def build_datasets(splits: Sequence[SplitData], cfg: PipelineConfig) -> BuiltDatasets:
    """All-feature datasets for both splits; feature sets are column selections.

    The test split reuses the training unreachable sentinel unless its own
    finite distances reach it, so a held-out model sees a consistent code.
    """
    if not cfg.exclude_direct_edge:
        log.warning(
            "shortest_distance is measured with each pair's own edge present, so it is 1 "
            "exactly for positive pairs; pass --exclude-direct-edge for a non-trivial feature"
        )
    caught: list[str] = []
    built = {}
    sentinel = None
    with stage("dataset"), warnings.catch_warnings(record=True) as record:
        warnings.simplefilter("always")
        for sp in splits:
            graph, labels = sp.graph, None
            if cfg.future_links and sp.name == "test":
                # features from the training graph, labels from new test-period links
                train_sp = splits[0]
                graph = train_sp.graph
                pairs = future_link_pairs(
                    train_sp.graph, train_sp.index, sp.graph, sp.index, cfg.neg_ratio, cfg.seed
                )
                labels = [p[2] for p in pairs]
            else:
                pairs = sample_pairs(sp.graph, cfg.neg_ratio, cfg.max_neg_distance, cfg.seed)
            meta = DatasetMeta(
                relation=f"linkpred_{sp.name}_{sp.years[0]}_{sp.years[1]}",
                split=sp.name,
                year_range=sp.years,
                seed=cfg.seed,
                neg_ratio=cfg.neg_ratio,
            )
            d = assemble(
                graph,
                pairs,
                FEATURE_NAMES,
                cfg.exclude_direct_edge,
                papers_scope=cfg.papers_scope,
                labels=labels,
                meta=meta,
            )
            if sentinel is not None and d.meta.unreachable_sentinel < sentinel:
                d = assemble(
                    graph,
                    pairs,
                    FEATURE_NAMES,
                    cfg.exclude_direct_edge,
                    papers_scope=cfg.papers_scope,
                    labels=labels,
                    unreachable=sentinel,
                    meta=meta,
                )
            sentinel = d.meta.unreachable_sentinel
            built[sp.name] = d
            log.info("%s dataset: %d instances, class counts %s", sp.name, len(d), d.class_counts())
        for w in record:
            msg = f"{w.category.__name__}: {w.message}"
            if msg not in caught:
                caught.append(msg)
                log.warning("%s", msg)
    return BuiltDatasets(built["train"], built["test"], caught)


def _table_name(split: str, mask: Sequence[str]) -> str:
    return f"{split}/{short_mask(mask).replace(',', '+')}"


def evaluate_tables(
    train_d: Dataset,
    test_d: Dataset | None,
    cfg: PipelineConfig,
    feature_sets: Sequence[Sequence[str]],
) -> list[tuple[str, list[ModelResult]]]:
    """For each feature set: k-fold CV on train, then the test split per ``test_mode``."""
    tables = []
    with stage("eval"):
        for mask in feature_sets:
            tr = train_d.select(mask)
            te = test_d.select(mask) if test_d is not None else None
            cv_rows = []
            test_rows = []
            for kind in cfg.models:
                spec = cfg.model_spec(kind)
                log.info("%s on %s", kind, short_mask(mask))
                cv_rows.append(cross_validate(tr, spec, cfg.k, cfg.seed).results[0])
                if te is None:
                    continue
                if cfg.test_mode == "holdout":
                    test_rows.append(evaluate_holdout(tr, te, spec).results[0])
                else:
                    test_rows.append(cross_validate(te, spec, cfg.k, cfg.seed).results[0])
            tables.append((_table_name("train", mask), cv_rows))
            if te is not None:
                tables.append((_table_name("test", mask), test_rows))
    return tables


def render_report(tables, fmt: str, protocol: dict) -> str:
    if fmt == "csv":
        return results_csv(tables)
    if fmt == "json":
        return results_json(tables, protocol)
    parts = []
    for name, rows in tables:
        split = name.split("/")[0]
        how = f"{protocol['k']}-fold CV" if split == "train" else protocol["test_mode"]
        if split == "test" and protocol["test_mode"] == "cv":
            how = f"{protocol['k']}-fold CV"
        parts.append(format_table(rows, f"[{name}] {how}"))
    return "\n".join(parts)


def write_report(out: RunOutput, tables, cfg: PipelineConfig, protocol: dict) -> str:
    out.write("results.txt", render_report(tables, "text", protocol))
    out.write("results.csv", results_csv(tables))
    out.write("results.json", results_json(tables, protocol))
    for name, rows in tables:
        for r in rows:
            if r.roc is not None:
                out.write(f"roc/{name.replace('/', '_')}_{r.model}.csv", roc_csv(r.roc))
    return render_report(tables, cfg.format, protocol)


def _protocol(cfg: PipelineConfig, datasets: BuiltDatasets | None = None) -> dict:
    p = {
        "k": cfg.k,
        "seed": cfg.seed,
        "test_mode": cfg.test_mode,
        "threshold": 0.5,
        "aggregation": "pooled over folds",
    }
    if datasets is not None:
        p["train"] = datasets.train.meta.to_dict() | {"class_counts": list(datasets.train.class_counts())}
        p["test"] = datasets.test.meta.to_dict() | {"class_counts": list(datasets.test.class_counts())}
        p["warnings"] = datasets.warnings
    return p


# commands ------------------------------------------------------------------


def cmd_ingest(cfg: PipelineConfig) -> str:
    out = RunOutput(cfg.out)
    pubs, stats = load_publications(cfg)
    out.write_with("publications.jsonl", lambda fh: write_jsonl(pubs, fh))
    out.write("ingest_stats.json", json.dumps(stats.to_dict(), indent=2, sort_keys=True) + "\n")
    out.finish("ingest", cfg)
    return f"{len(pubs)} publications; {json.dumps(stats.to_dict(), sort_keys=True)}\n"


def cmd_build(cfg: PipelineConfig) -> str:
    out = RunOutput(cfg.out)
    pubs, _ = load_publications(cfg)
    summary = {}
    for sp in split_graphs(pubs, cfg):
        out.write_with(f"graph_{sp.name}.edges", lambda fh, g=sp.graph: write_edge_list(g, fh))
        out.write_with(
            f"authors_{sp.name}.tsv", lambda fh, s=sp: write_node_table(s.graph, s.index, fh)
        )
        summary[sp.name] = {"years": list(sp.years), **graph_summary(sp.graph, sp.pubs)}
    out.write("graph_summary.json", json.dumps(summary, indent=2, sort_keys=True) + "\n")
    out.finish("build", cfg)
    return json.dumps(summary, indent=2, sort_keys=True) + "\n"


def _datasets_from_input(cfg: PipelineConfig) -> BuiltDatasets:
    pubs, _ = load_publications(cfg)
    return build_datasets(split_graphs(pubs, cfg), cfg)


def _write_datasets(out: RunOutput, built: BuiltDatasets, cfg: PipelineConfig) -> None:
    with stage("arff_io"):
        for d in (built.train, built.test):
            sub = d.select(cfg.features)
            out.write(f"{d.meta.split}.arff", write_arff(sub))
            out.write_with(f"{d.meta.split}.csv", lambda fh, s=sub: write_csv(s, fh))


def cmd_dataset(cfg: PipelineConfig) -> str:
    out = RunOutput(cfg.out)
    built = _datasets_from_input(cfg)
    _write_datasets(out, built, cfg)
    protocol = _protocol(cfg, built)
    out.write("datasets.json", json.dumps(protocol, indent=2, sort_keys=True) + "\n")
    out.finish("dataset", cfg)
    return (
        f"train: {len(built.train)} instances {built.train.class_counts()}; "
        f"test: {len(built.test)} instances {built.test.class_counts()}\n"
    )


def _read_arff(path: str) -> Dataset:
    with stage("arff_io"), open(path, "rb") as fh:
        return read_arff(fh)


def _training_data(cfg: PipelineConfig, data: str | None, test_data: str | None):
    if data:
        train_d = _read_arff(data)
        test_d = _read_arff(test_data) if test_data else None
        return replace(cfg, features=train_d.schema), train_d, test_d, None
    built = _datasets_from_input(cfg)
    return cfg, built.train.select(cfg.features), built.test.select(cfg.features), built


def cmd_train(cfg: PipelineConfig, data: str | None = None) -> str:
    out = RunOutput(cfg.out)
    cfg, train_d, _, _ = _training_data(cfg, data, None)
    lines = []
    for kind in cfg.models:
        spec = cfg.model_spec(kind)
        with stage("classifiers"):
            model, norm = train(train_d, spec)
        out.write_with(f"models/{kind}.model", lambda fh: save_model(model, norm, fh, spec))
        lines.append(f"models/{kind}.model")
    out.finish("train", cfg, {"training_data": data or "derived from input"})
    return "\n".join(lines) + "\n"


def cmd_eval(cfg: PipelineConfig, data: str | None = None, test_data: str | None = None) -> str:
    out = RunOutput(cfg.out)
    cfg, train_d, test_d, built = _training_data(cfg, data, test_data)
    tables = evaluate_tables(train_d, test_d, cfg, [cfg.features])
    report = write_report(out, tables, cfg, _protocol(cfg, built))
    out.finish("eval", cfg)
    return report


def cmd_reproduce(cfg: PipelineConfig) -> str:
    """Datasets, then one result table per feature set and split."""
    out = RunOutput(cfg.out)
    pubs, stats = load_publications(cfg)
    splits = split_graphs(pubs, cfg)
    built = build_datasets(splits, cfg)
    _write_datasets(out, built, replace(cfg, features=FEATURE_NAMES))
    tables = evaluate_tables(built.train, built.test, cfg, REPRODUCE_SETS)
    protocol = _protocol(cfg, built)
    protocol["ingest"] = stats.to_dict()
    protocol["splits"] = {
        sp.name: {"years": list(sp.years), "papers": len(sp.pubs), "authors": sp.graph.n, "edges": sp.graph.n_edges}
        for sp in splits
    }
    report = write_report(out, tables, cfg, protocol)
    out.finish("reproduce", cfg)
    return report
