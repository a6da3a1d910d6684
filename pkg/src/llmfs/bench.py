"""Method x classifier comparison grid and its CSV outputs."""

from __future__ import annotations

import csv
import dataclasses
import logging
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

from llmfs import fs_classic
from llmfs.data import LABEL_COLUMN, Dataset, load_csv, split
from llmfs.errors import IncompleteGrid
from llmfs.llm_select import (
    Backend,
    LlmConfig,
    ScoreCache,
    TaskContext,
    make_backend,
    prefilter_rerank,
    score_all_features,
)
from llmfs.metrics import EvalReport, evaluate
from llmfs.models import CLASSIFIERS, ClassifierSpec, fit
from llmfs.seeding import derive_seed
from llmfs.selection import DEFAULT_K, ScoreVector, SelectionResult, project, top_k

log = logging.getLogger(__name__)

METHODS = fs_classic.CLASSIC_METHODS + ("llm", "llm_prefilter")

TABLE_HEADER = (
    "fs_method", "classifier", "n_features", "accuracy", "precision",
    "recall", "f1", "auc", "mcc", "runtime_seconds",
)


@dataclass
class BenchConfig:
    data_path: str | None = None
    methods: tuple[str, ...] = METHODS
    classifiers: tuple[str, ...] = CLASSIFIERS
    k: int = DEFAULT_K
    train_fraction: float = 0.8
    master_seed: int = 0
    llm: LlmConfig = field(default_factory=LlmConfig)
    task: str = TaskContext().text
    prefilter_method: str = "mi"
    prefilter_m: int | None = None
    output_dir: str | None = None
    label_column: str = LABEL_COLUMN
    averaging: str = "weighted"
    workers: int = 1

    def __post_init__(self):
        self.methods = tuple(self.methods)
        self.classifiers = tuple(self.classifiers)
        if not self.methods or not self.classifiers:
            raise ValueError("need at least one method and one classifier")
        bad = [m for m in self.methods if m not in METHODS]
        if bad:
            raise ValueError(f"unknown methods {bad}; choose from {METHODS}")
        bad = [c for c in self.classifiers if c not in CLASSIFIERS]
        if bad:
            raise ValueError(f"unknown classifiers {bad}; choose from {CLASSIFIERS}")
        if self.k < 1:
            raise ValueError("k must be >= 1")
        if self.prefilter_method not in fs_classic.CLASSIC_METHODS or self.prefilter_method == "sequential":
            raise ValueError(f"prefilter must be a scoring classic method, got {self.prefilter_method!r}")
        if self.workers < 1:
            raise ValueError("workers must be >= 1")


_INT_KEYS = {"k", "master_seed", "workers", "prefilter.m"}
_FLOAT_KEYS = {"train_fraction"}
_LIST_KEYS = {"methods", "classifiers"}
_PREFIX_MAP = {"prefilter.method": "prefilter_method", "prefilter.m": "prefilter_m"}


def parse_config_text(text: str) -> BenchConfig:
    """``key = value`` lines, ``#`` comments, ``llm.*`` / ``prefilter.*`` dotted keys."""
    top: dict[str, Any] = {}
    llm: dict[str, Any] = {}
    llm_fields = {f.name: f for f in dataclasses.fields(LlmConfig)}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValueError(f"config line {lineno}: expected 'key = value'")
        key, value = (s.strip() for s in line.split("=", 1))
        if key.startswith("llm."):
            name = key[4:]
            if name not in llm_fields:
                raise ValueError(f"config line {lineno}: unknown key {key!r}")
            default = getattr(LlmConfig(), name)
            if isinstance(default, bool):
                llm[name] = value.lower() in ("1", "true", "yes")
            elif isinstance(default, int):
                llm[name] = int(value)
            elif isinstance(default, float):
                llm[name] = float(value)
            else:
                llm[name] = value or None
            continue
        if key in _LIST_KEYS:
            parsed: Any = tuple(v.strip() for v in value.split(",") if v.strip())
        elif key in _INT_KEYS:
            parsed = int(value)
        elif key in _FLOAT_KEYS:
            parsed = float(value)
        else:
            parsed = value
        name = _PREFIX_MAP.get(key, key)
        if name not in {f.name for f in dataclasses.fields(BenchConfig)} or name == "llm":
            raise ValueError(f"config line {lineno}: unknown key {key!r}")
        top[name] = parsed
    return BenchConfig(llm=LlmConfig(**llm), **top)


def load_config(path: str | Path) -> BenchConfig:
    return parse_config_text(Path(path).read_text(encoding="utf-8"))


@dataclass
class BenchRow:
    method_name: str
    classifier_name: str
    n_features: int
    report: EvalReport | None
    error: str | None = None
    info: dict[str, Any] = field(default_factory=dict)
    selected: tuple[int, ...] = ()


@dataclass
class BenchmarkReport:
    rows: list[BenchRow]

    def row(self, method: str, classifier: str) -> BenchRow:
        for r in self.rows:
            if r.method_name == method and r.classifier_name == classifier:
                return r
        raise KeyError((method, classifier))


def compute_selection(
    method: str,
    train: Dataset,
    k: int,
    seed: int,
    *,
    llm_cfg: LlmConfig | None = None,
    task: TaskContext = TaskContext(),
    backend: Backend | None = None,
    cache: ScoreCache | None = None,
    llm_seed: int | None = None,
    prefilter_method: str = "mi",
    prefilter_m: int | None = None,
) -> tuple[SelectionResult, ScoreVector | None]:
    """Run one feature-selection method on ``train`` and take its top ``k``."""
    llm_cfg = llm_cfg or LlmConfig()
    llm_seed = seed if llm_seed is None else llm_seed
    if method == "sequential":
        return fs_classic.sequential_forward_select(train, k, seed=seed), None
    if method == "llm":
        sv = score_all_features(train, llm_cfg, task, llm_seed, backend=backend, cache=cache)
    elif method == "llm_prefilter":
        base = score_method(prefilter_method, train, derive_seed(seed, "prefilter"))
        m = prefilter_m if prefilter_m is not None else 3 * k
        m = max(k, min(m, train.n_features))
        sv = prefilter_rerank(train, base, m, llm_cfg, task, llm_seed, backend=backend, cache=cache)
        sv.info["prefilter_info"] = base.info
    else:
        sv = score_method(method, train, seed)
    return top_k(sv, k), sv


def score_method(method: str, train: Dataset, seed: int) -> ScoreVector:
    """ScoreVector for any classic scoring method (not ``sequential``)."""
    if method == "variance":
        return fs_classic.variance_scores(train)
    if method == "chi2":
        return fs_classic.chi2_scores(train)
    if method == "anova":
        return fs_classic.anova_f_scores(train)
    if method == "mi":
        return fs_classic.mutual_info_scores(train)
    if method == "correlation":
        return fs_classic.correlation_filter_scores(train)
    if method == "tree":
        return fs_classic.tree_importance_scores(train, seed=seed)
    if method == "extratrees":
        return fs_classic.extratrees_importance_scores(train, seed=seed)
    if method == "random":
        return fs_classic.random_scores(train, seed=seed)
    raise ValueError(f"{method!r} has no score vector")


def run_grid(
    cfg: BenchConfig,
    dataset: Dataset | None = None,
    backend: Backend | None = None,
) -> BenchmarkReport:
    """Evaluate every (method, classifier) cell; rows come back method-major.

    Feature selection only ever sees the training split. Each cell's timer
    starts before feature selection and stops after evaluation. A failing
    cell becomes a row with ``error`` set instead of aborting the grid.
    """
    if dataset is None:
        if cfg.data_path is None:
            raise ValueError("no dataset: set data_path or pass one in")
        dataset = load_csv(cfg.data_path, cfg.label_column)
    train, test = split(dataset, cfg.train_fraction, cfg.master_seed)
    log.info(
        "grid: %d methods x %d classifiers, k=%d, train=%d test=%d",
        len(cfg.methods), len(cfg.classifiers), cfg.k, train.n_samples, test.n_samples,
    )
    if backend is None and any(m.startswith("llm") for m in cfg.methods):
        backend = make_backend(cfg.llm)
    cache = ScoreCache(cfg.llm.cache_path)
    task = TaskContext(cfg.task)
    llm_seed = derive_seed(cfg.master_seed, "llm-descriptors")
    cells = [(m, c) for m in cfg.methods for c in cfg.classifiers]

    def run_cell(cell: tuple[str, str]) -> BenchRow:
        method, clf = cell
        t0 = time.perf_counter()
        try:
            sel, sv = compute_selection(
                method, train, cfg.k, derive_seed(cfg.master_seed, "fs", method),
                llm_cfg=cfg.llm, task=task, backend=backend, cache=cache,
                llm_seed=llm_seed, prefilter_method=cfg.prefilter_method,
                prefilter_m=cfg.prefilter_m,
            )
            model = fit(
                ClassifierSpec(clf, seed=derive_seed(cfg.master_seed, method, clf)),
                project(train, sel),
            )
            report = evaluate(model, project(test, sel), t0, cfg.averaging)
        except Exception as exc:  # noqa: BLE001 - one bad cell must not sink the grid
            log.error("cell %s/%s failed: %s", method, clf, exc)
            return BenchRow(method, clf, cfg.k, None, f"{type(exc).__name__}: {exc}")
        info = dict(sv.info) if sv is not None else {}
        if info:
            log.info("cell %s/%s: %s", method, clf, info)
        log.info(
            "cell %s/%s: accuracy=%.4f runtime=%.3fs", method, clf,
            report.accuracy, report.runtime_seconds,
        )
        return BenchRow(method, clf, len(sel.indices), report, None, info, tuple(sel.indices))

    if cfg.workers > 1:
        with ThreadPoolExecutor(max_workers=cfg.workers) as pool:
            rows = list(pool.map(run_cell, cells))
    else:
        rows = [run_cell(c) for c in cells]
    return BenchmarkReport(rows)


def _fmt(v: float | None) -> str:
    return "" if v is None else f"{v:.3f}"


def emit_table(report: BenchmarkReport, path: str | Path) -> None:
    if not report.rows:
        raise ValueError("empty report")
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(TABLE_HEADER)
        for row in report.rows:
            r = row.report
            if r is None:
                writer.writerow([row.method_name, row.classifier_name, row.n_features] + [""] * 7)
                continue
            writer.writerow([
                row.method_name, row.classifier_name, row.n_features,
                _fmt(r.accuracy), _fmt(r.precision), _fmt(r.recall), _fmt(r.f1),
                _fmt(r.auc), _fmt(r.mcc), _fmt(r.runtime_seconds),
            ])


def emit_heatmap_matrix(report: BenchmarkReport, path: str | Path) -> None:
    """Accuracy matrix: one row per method, one column per classifier."""
    methods = list(dict.fromkeys(r.method_name for r in report.rows))
    classifiers = list(dict.fromkeys(r.classifier_name for r in report.rows))
    cells = {(r.method_name, r.classifier_name): r for r in report.rows}
    missing = [(m, c) for m in methods for c in classifiers if (m, c) not in cells]
    if missing or not methods:
        raise IncompleteGrid(f"missing cells: {missing}")
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["fs_method", *classifiers])
        for m in methods:
            writer.writerow([
                m,
                *(
                    _fmt(cells[(m, c)].report.accuracy) if cells[(m, c)].report else ""
                    for c in classifiers
                ),
            ])
