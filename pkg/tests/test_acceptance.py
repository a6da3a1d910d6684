"""Acceptance gate: one test per criterion, each under its wall-clock budget.

Every criterion prints a single ``ACCEPTANCE <n> PASS|FAIL`` line; the same
lines are repeated in the pytest terminal summary.
"""

import contextlib
import dataclasses
import itertools
import math
import time

import numpy as np
import pytest

from llmfs.bench import METHODS, BenchConfig, compute_selection, emit_heatmap_matrix, emit_table, run_grid
from llmfs.data import Dataset, SynthSpec, generate_synthetic, split
from llmfs.errors import BackendUnreachable
from llmfs.fs_classic import (
    anova_f_scores,
    chi2_scores,
    label_correlations,
    mutual_info_scores,
    variance_scores,
)
from llmfs.llm_select import LlmConfig, MockBackend, ScoreCache, score_all_features
from llmfs.metrics import auc, confusion, point_metrics
from llmfs.models import CLASSIFIERS, ClassifierSpec, fit, mlp_init, mlp_loss, mlp_loss_and_grad
from llmfs.selection import top_k

from conftest import ACCEPTANCE_RESULTS, make_dataset

CLASSIC_NON_RANDOM = ("variance", "chi2", "anova", "mi", "correlation", "tree", "extratrees", "sequential")


@contextlib.contextmanager
def criterion(n, title, budget_s):
    t0 = time.perf_counter()
    status, detail = "FAIL", ""
    try:
        yield
        elapsed = time.perf_counter() - t0
        if elapsed >= budget_s:
            detail = f" over budget {budget_s:g}s"
            raise AssertionError(f"criterion {n} took {elapsed:.2f}s, budget {budget_s}s")
        status = "PASS"
    except BaseException as exc:
        detail = detail or f" {type(exc).__name__}: {str(exc).splitlines()[0][:120] if str(exc) else ''}"
        raise
    finally:
        elapsed = time.perf_counter() - t0
        line = f"ACCEPTANCE {n} {status:4s} {title} ({elapsed:.2f}s / {budget_s:g}s){detail if status == 'FAIL' else ''}"
        ACCEPTANCE_RESULTS[n] = line
        print(line)


# --- independent oracles ---

def oracle_point_metrics(t, p):
    """Per-sample loops; weighted averaging over the two classes."""
    tp = tn = fp = fn = 0
    for a, b in zip(t, p):
        if a == 1 and b == 1:
            tp += 1
        elif a == 0 and b == 0:
            tn += 1
        elif a == 0:
            fp += 1
        else:
            fn += 1
    n = len(t)

    def prf(pos):
        tp_c = sum(1 for a, b in zip(t, p) if a == pos and b == pos)
        pred_c = sum(1 for b in p if b == pos)
        true_c = sum(1 for a in t if a == pos)
        prec = tp_c / pred_c if pred_c else 0.0
        rec = tp_c / true_c if true_c else 0.0
        f = 2 * prec * rec / (prec + rec) if prec + rec else 0.0
        return prec, rec, f, true_c / n

    per_class = [prf(1), prf(0)]
    weighted = [sum(c[i] * c[3] for c in per_class) for i in range(3)]
    den = (tp + fp) * (tp + fn) * (tn + fp) * (tn + fn)
    m = (tp * tn - fp * fn) / math.sqrt(den) if den else 0.0
    return [(tp + tn) / n, *weighted, m], [(tp + tn) / n, *per_class[0][:3], m]


def oracle_auc(t, s):
    pos = [x for x, a in zip(s, t) if a == 1]
    neg = [x for x, a in zip(s, t) if a == 0]
    wins = sum(1.0 if a > b else 0.5 if a == b else 0.0 for a in pos for b in neg)
    return wins / (len(pos) * len(neg))


# --- criteria ---

def test_1_metric_oracle_equivalence():
    with criterion(1, "metric oracle equivalence", 10):
        rng = np.random.default_rng(20240601)
        for _ in range(100):
            t = rng.integers(0, 2, 200)
            t[:2] = (0, 1)
            # rounded scores force plenty of ties
            s = np.round(rng.random(200) * 0.6 + 0.4 * t * rng.random(200), 2)
            p = (s > 0.5).astype(int)
            c = confusion(t, p)
            want_w, want_b = oracle_point_metrics(t.tolist(), p.tolist())
            np.testing.assert_allclose(point_metrics(c, "weighted"), want_w, rtol=0, atol=1e-9)
            np.testing.assert_allclose(point_metrics(c, "binary"), want_b, rtol=0, atol=1e-9)
            assert abs(auc(t, s) - oracle_auc(t.tolist(), s.tolist())) <= 1e-12


def test_2_statistic_oracles():
    with criterion(2, "statistic oracles on worked examples", 1):
        tol = 1e-6
        assert abs(chi2_scores(make_dataset([1, 2, 3, 4], [0, 0, 1, 1])).scores[0] - 1.6) <= tol
        assert abs(anova_f_scores(make_dataset([0, 1, 2, 3], [0, 0, 1, 1])).scores[0] - 8.0) <= tol
        assert abs(mutual_info_scores(make_dataset([0, 0, 1, 1], [0, 0, 1, 1])).scores[0] - math.log(2)) <= tol
        assert abs(variance_scores(make_dataset([0, 1, 2, 3], [0, 0, 1, 1])).scores[0] - 1.25) <= tol
        # point-biserial: cov = 0.5, sd_x = sqrt(1.25), sd_y = 0.5
        r = label_correlations(make_dataset([0, 1, 2, 3], [0, 0, 1, 1]))[0]
        assert abs(r - 0.5 / (math.sqrt(1.25) * 0.5)) <= tol
        assert abs(label_correlations(make_dataset([0, 0, 1, 1], [0, 0, 1, 1]))[0] - 1.0) <= tol
        assert abs(auc([0, 0, 1, 1], [0.1, 0.4, 0.35, 0.8]) - 0.75) <= tol


def test_3_informative_feature_recovery():
    with criterion(3, "informative-feature recovery", 60):
        ds = generate_synthetic(SynthSpec(1000, 50, 5, 2.0, 7))
        informative = set(range(5))
        for method in CLASSIC_NON_RANDOM + ("llm", "llm_prefilter"):
            sel, _ = compute_selection(method, ds, 10, 0, backend=MockBackend())
            hits = len(informative & set(sel.indices))
            assert hits >= 4, f"{method}: {hits} of 5 informative features in top-10"
        sv = score_all_features(ds, backend=MockBackend())
        assert set(top_k(sv, 5).indices) == informative


class AlwaysDown:
    def complete(self, prompt_text):
        raise BackendUnreachable("refused")


class Constant:
    def __init__(self, content):
        self.content = content

    def complete(self, prompt_text):
        return self.content


def test_4_algorithm_robustness():
    with criterion(4, "fallback robustness", 30):
        ds = generate_synthetic(SynthSpec(300, 15, 3, 2.0, 1))
        sv = score_all_features(ds, backend=AlwaysDown())
        assert np.all(sv.scores == 0.5)
        report = run_grid(BenchConfig(methods=("llm", "llm_prefilter", "mi"), classifiers=CLASSIFIERS, k=5),
                          ds, backend=AlwaysDown())
        assert len(report.rows) == 12 and all(r.error is None for r in report.rows)
        assert all(r.info["fallbacks"] > 0 for r in report.rows if r.method_name.startswith("llm"))
        for content in ("1.7", "This feature looks quite important."):
            assert np.all(score_all_features(ds, backend=Constant(content)).scores == 0.5)


def test_5_grid_determinism():
    with criterion(5, "full-grid determinism", 300):
        ds = generate_synthetic(SynthSpec(1000, 50, 5, 2.0, 7))
        cfg = BenchConfig(methods=METHODS, classifiers=CLASSIFIERS, k=10, master_seed=3)
        assert len(cfg.methods) == 11

        def metrics(report):
            assert all(r.error is None for r in report.rows), [r.error for r in report.rows if r.error]
            return [
                (r.method_name, r.classifier_name, r.n_features, r.report.accuracy, r.report.precision,
                 r.report.recall, r.report.f1, r.report.auc, r.report.mcc)
                for r in report.rows
            ]

        a = metrics(run_grid(cfg, ds))
        b = metrics(run_grid(cfg, ds))
        c = metrics(run_grid(dataclasses.replace(cfg, workers=4), ds))
        assert len(a) == 44
        assert a == b == c


def test_6_classifier_sanity():
    with criterion(6, "classifier sanity and MLP gradients", 60):
        ds = generate_synthetic(SynthSpec(1000, 10, 10, 4.0, 5))
        train, test = split(ds, 0.8, 0)
        for kind in CLASSIFIERS:
            model = fit(ClassifierSpec(kind, seed=1), train)
            acc = float(np.mean(model.predict(test.features) == test.labels))
            assert acc >= 0.95, f"{kind}: {acc}"
        rng = np.random.default_rng(7)
        X = rng.standard_normal((16, 4))
        y = rng.integers(0, 2, 16).astype(float)
        params = mlp_init(4, 6, rng)
        params = {k: np.array(v * 10) for k, v in params.items()}
        params["b1"] = rng.standard_normal(6)
        h = 1e-6
        pre = X @ params["W1"] + params["b1"]
        assert np.min(np.abs(pre)) > 100 * h
        _, grads = mlp_loss_and_grad(params, X, y)
        for name, g in grads.items():
            num = np.zeros_like(params[name])
            for idx in itertools.product(*(range(s) for s in num.shape)):
                up = {k: v.copy() for k, v in params.items()}
                dn = {k: v.copy() for k, v in params.items()}
                up[name][idx] += h
                dn[name][idx] -= h
                num[idx] = (mlp_loss(up, X, y) - mlp_loss(dn, X, y)) / (2 * h)
            rel = np.linalg.norm(g - num) / max(np.linalg.norm(g) + np.linalg.norm(num), 1e-12)
            assert rel < 1e-4, f"{name}: relative error {rel:.2e}"


def test_7_leakage_guard():
    with criterion(7, "leakage guard", 120):
        ds = generate_synthetic(SynthSpec(400, 20, 4, 2.0, 8))
        cfg = BenchConfig(methods=METHODS, classifiers=("knn",), k=5, master_seed=4)
        train, test = split(ds, cfg.train_fraction, cfg.master_seed)
        train_rows = {tuple(r) for r in train.features}
        X = np.array(ds.features)
        rng = np.random.default_rng(1)
        for i in range(X.shape[0]):
            if tuple(X[i]) not in train_rows:
                X[i] = rng.standard_normal(X.shape[1]) * 25 + 3
        perturbed = Dataset(X, ds.labels, ds.feature_names)
        assert not np.array_equal(perturbed.features, ds.features)
        a = run_grid(cfg, ds)
        b = run_grid(cfg, perturbed)
        assert all(r.error is None for r in a.rows + b.rows)
        assert [r.selected for r in a.rows] == [r.selected for r in b.rows]


def test_8_output_fidelity(tmp_path):
    with criterion(8, "output fidelity", 120):
        ds = generate_synthetic(SynthSpec(400, 400, 20, 1.0, 9))
        cfg = BenchConfig(methods=("variance", "anova", "mi", "correlation", "random", "llm"),
                          classifiers=CLASSIFIERS, k=341)
        report = run_grid(cfg, ds)
        emit_table(report, tmp_path / "report.csv")
        emit_heatmap_matrix(report, tmp_path / "heatmap.csv")
        lines = (tmp_path / "report.csv").read_text().splitlines()
        assert lines[0] == "fs_method,classifier,n_features,accuracy,precision,recall,f1,auc,mcc,runtime_seconds"
        assert len(lines) == 1 + 24
        by_cell = {}
        for line in lines[1:]:
            cells = line.split(",")
            assert len(cells) == 10 and cells[2] == "341"
            for v in cells[3:]:
                whole, frac = v.split(".")
                assert len(frac) == 3
            by_cell[(cells[0], cells[1])] = cells[3]
        heat = [l.split(",") for l in (tmp_path / "heatmap.csv").read_text().splitlines()]
        assert heat[0] == ["fs_method", *CLASSIFIERS]
        assert [r[0] for r in heat[1:]] == list(cfg.methods)
        for r in heat[1:]:
            assert len(r) == 5
            for clf, v in zip(CLASSIFIERS, r[1:]):
                assert v == by_cell[(r[0], clf)]


def test_9_cache_economics(tmp_path):
    with criterion(9, "cache economics", 30):
        ds = generate_synthetic(SynthSpec(1000, 50, 5, 2.0, 7))
        cfg = LlmConfig(cache_path=str(tmp_path / "scores.tsv"))
        cold = MockBackend()
        first = score_all_features(ds, cfg, seed=11, backend=cold, cache=ScoreCache(cfg.cache_path))
        assert cold.calls == 50
        warm = MockBackend()
        second = score_all_features(ds, cfg, seed=11, backend=warm, cache=ScoreCache(cfg.cache_path))
        assert warm.calls == 0
        assert second.info["cache_hits"] == 50
        assert second.scores.tobytes() == first.scores.tobytes()
