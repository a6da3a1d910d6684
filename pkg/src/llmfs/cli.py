"""``llmfs`` command line: stats | select | bench | synth."""

from __future__ import annotations

import argparse
import csv
import dataclasses
import logging
import sys
from pathlib import Path

from llmfs import __version__
from llmfs.bench import (
    METHODS,
    BenchConfig,
    compute_selection,
    emit_heatmap_matrix,
    emit_table,
    load_config,
    run_grid,
)
from llmfs.data import LABEL_COLUMN, SynthSpec, generate_synthetic, load_csv, split, write_csv
from llmfs.llm_select import LlmConfig, TaskContext
from llmfs.models import CLASSIFIERS
from llmfs.seeding import derive_seed
from llmfs.selection import DEFAULT_K, write_selection_csv
from llmfs.stats import SAMPLES_PER_CLASS, describe_all, write_descriptors_csv

log = logging.getLogger("llmfs")


def _setup_logging(verbose: bool, logfile: Path | None = None) -> None:
    fmt = logging.Formatter("%(asctime)s %(levelname)s %(name)s: %(message)s")
    root = logging.getLogger("llmfs")
    root.setLevel(logging.INFO)
    root.handlers.clear()
    console = logging.StreamHandler(sys.stderr)
    console.setLevel(logging.INFO if verbose else logging.WARNING)
    console.setFormatter(fmt)
    root.addHandler(console)
    if logfile is not None:
        logfile.parent.mkdir(parents=True, exist_ok=True)
        fh = logging.FileHandler(logfile, mode="w", encoding="utf-8")
        fh.setFormatter(fmt)
        root.addHandler(fh)


def _llm_config(args, base: LlmConfig | None = None) -> LlmConfig:
    base = base or LlmConfig()
    overrides = {}
    if getattr(args, "backend", None):
        overrides["backend_kind"] = args.backend
    if getattr(args, "model", None):
        overrides["model_name"] = args.model
    if getattr(args, "endpoint", None):
        overrides["endpoint_url"] = args.endpoint
    if getattr(args, "cache", None):
        overrides["cache_path"] = args.cache
    if getattr(args, "max_parallel", None):
        overrides["max_parallel"] = args.max_parallel
    return dataclasses.replace(base, **overrides)


def _training_rows(args):
    ds = load_csv(args.data, args.label_column)
    if args.all_rows:
        return ds
    train, _ = split(ds, args.train_fraction, args.seed)
    return train


def cmd_synth(args) -> int:
    ds = generate_synthetic(
        SynthSpec(args.n_samples, args.n_features, args.n_informative, args.mean_shift, args.seed)
    )
    write_csv(ds, args.out, args.label_column)
    print(f"wrote {ds.n_samples} x {ds.n_features} dataset to {args.out}")
    return 0


def cmd_stats(args) -> int:
    train = _training_rows(args)
    descs = describe_all(train, args.samples_per_class, args.seed)
    write_descriptors_csv(descs, args.out)
    print(f"wrote {len(descs)} descriptors to {args.out}")
    return 0


def cmd_select(args) -> int:
    train = _training_rows(args)
    cfg = _llm_config(args)
    sel, sv = compute_selection(
        args.method, train, args.k, args.seed,
        llm_cfg=cfg, task=TaskContext(args.task), llm_seed=args.seed,
        prefilter_method=args.prefilter_method, prefilter_m=args.prefilter_m,
    )
    with open(args.out, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        if sv is None:
            writer.writerow(["feature_name", "rank"])
            for rank, j in enumerate(sel.indices, start=1):
                writer.writerow([train.feature_names[j], rank])
        else:
            writer.writerow(["feature_name", "score"])
            for name, s in zip(train.feature_names, sv.scores):
                writer.writerow([name, repr(float(s))])
    if args.selection_out:
        write_selection_csv(sel, train.feature_names, args.selection_out)
    if sv is not None and sv.info:
        log.info("%s: %s", args.method, sv.info)
    print(f"{args.method}: top-{args.k} = {[train.feature_names[j] for j in sel.indices[:10]]}"
          + (" ..." if args.k > 10 else ""))
    return 0


def cmd_bench(args) -> int:
    cfg = load_config(args.config) if args.config else BenchConfig()
    changes = {}
    if args.data:
        changes["data_path"] = args.data
    if args.method:
        changes["methods"] = tuple(m.strip() for m in args.method.split(",") if m.strip())
    if args.classifiers:
        changes["classifiers"] = tuple(c.strip() for c in args.classifiers.split(",") if c.strip())
    if args.k is not None:
        changes["k"] = args.k
    if args.seed is not None:
        changes["master_seed"] = args.seed
    if args.averaging:
        changes["averaging"] = args.averaging
    if args.workers:
        changes["workers"] = args.workers
    if args.label_column:
        changes["label_column"] = args.label_column
    if args.out:
        changes["output_dir"] = args.out
    changes["llm"] = _llm_config(args, cfg.llm)
    cfg = dataclasses.replace(cfg, **changes)
    out = Path(cfg.output_dir or "llmfs-out")
    out.mkdir(parents=True, exist_ok=True)
    _setup_logging(args.verbose, out / "run.log")
    report = run_grid(cfg)
    emit_table(report, out / "report.csv")
    emit_heatmap_matrix(report, out / "heatmap.csv")
    failed = [r for r in report.rows if r.error]
    print(f"{len(report.rows)} cells ({len(failed)} failed); outputs in {out}")
    return 1 if failed else 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="llmfs", description=__doc__)
    p.add_argument("--version", action="version", version=__version__)
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, seed_default: int | None = 0):
        sp.add_argument("--label-column", default=LABEL_COLUMN if seed_default is not None else None)
        sp.add_argument("--seed", type=int, default=seed_default)
        sp.add_argument("-v", "--verbose", action="store_true")

    def llm_flags(sp):
        sp.add_argument("--backend", choices=("http", "mock"))
        sp.add_argument("--model")
        sp.add_argument("--endpoint")
        sp.add_argument("--cache")
        sp.add_argument("--max-parallel", type=int)

    def split_flags(sp):
        sp.add_argument("--data", required=True)
        sp.add_argument("--train-fraction", type=float, default=0.8)
        sp.add_argument("--all-rows", action="store_true",
                        help="use every row instead of the training split")

    s = sub.add_parser("synth", help="write a synthetic Gaussian dataset")
    common(s)
    s.add_argument("--n-samples", type=int, default=1000)
    s.add_argument("--n-features", type=int, default=50)
    s.add_argument("--n-informative", type=int, default=5)
    s.add_argument("--mean-shift", type=float, default=2.0)
    s.add_argument("--out", required=True)
    s.set_defaults(func=cmd_synth)

    s = sub.add_parser("stats", help="per-feature descriptors as CSV")
    common(s)
    split_flags(s)
    s.add_argument("--samples-per-class", type=int, default=SAMPLES_PER_CLASS)
    s.add_argument("--out", required=True)
    s.set_defaults(func=cmd_stats)

    s = sub.add_parser("select", help="score features with one method")
    common(s)
    split_flags(s)
    llm_flags(s)
    s.add_argument("--method", required=True, choices=METHODS)
    s.add_argument("--k", type=int, default=DEFAULT_K)
    s.add_argument("--task", default=TaskContext().text)
    s.add_argument("--prefilter-method", default="mi")
    s.add_argument("--prefilter-m", type=int)
    s.add_argument("--out", required=True, help="feature_name,score CSV")
    s.add_argument("--selection-out", help="rank,feature_index,feature_name,score CSV")
    s.set_defaults(func=cmd_select)

    s = sub.add_parser("bench", help="run the method x classifier grid")
    common(s, seed_default=None)
    llm_flags(s)
    s.add_argument("--config")
    s.add_argument("--data")
    s.add_argument("--method", help=f"comma list from {','.join(METHODS)}")
    s.add_argument("--classifiers", help=f"comma list from {','.join(CLASSIFIERS)}")
    s.add_argument("--k", type=int)
    s.add_argument("--averaging", choices=("weighted", "binary"))
    s.add_argument("--workers", type=int)
    s.add_argument("--out", help="output directory")
    s.set_defaults(func=cmd_bench)
    return p


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    if args.command != "bench":
        _setup_logging(args.verbose)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
