import math
import time

import numpy as np
import pytest

from llmfs.errors import EmptyInput, LengthMismatch, SingleClassDataset
from llmfs.metrics import ConfusionCounts, auc, confusion, evaluate, mcc, point_metrics

from conftest import make_dataset


def oracle_metrics(y, p, averaging):
    """Textbook definitions evaluated with explicit loops."""
    def prf(pos):
        tp = sum(1 for a, b in zip(y, p) if a == pos and b == pos)
        fp = sum(1 for a, b in zip(y, p) if a != pos and b == pos)
        fn = sum(1 for a, b in zip(y, p) if a == pos and b != pos)
        prec = tp / (tp + fp) if tp + fp else 0.0
        rec = tp / (tp + fn) if tp + fn else 0.0
        f1 = 2 * prec * rec / (prec + rec) if prec + rec else 0.0
        return prec, rec, f1

    n = len(y)
    acc = sum(1 for a, b in zip(y, p) if a == b) / n
    if averaging == "binary":
        prec, rec, f1 = prf(1)
    else:
        w1 = sum(y) / n
        p1, p0 = prf(1), prf(0)
        prec, rec, f1 = (w1 * a + (1 - w1) * b for a, b in zip(p1, p0))
    tp = sum(1 for a, b in zip(y, p) if a == 1 and b == 1)
    tn = sum(1 for a, b in zip(y, p) if a == 0 and b == 0)
    fp = sum(1 for a, b in zip(y, p) if a == 0 and b == 1)
    fn = sum(1 for a, b in zip(y, p) if a == 1 and b == 0)
    den = (tp + fp) * (tp + fn) * (tn + fp) * (tn + fn)
    m = (tp * tn - fp * fn) / math.sqrt(den) if den else 0.0
    return acc, prec, rec, f1, m


def oracle_auc(y, s):
    pos = [v for v, lab in zip(s, y) if lab == 1]
    neg = [v for v, lab in zip(s, y) if lab == 0]
    wins = sum(1.0 if a > b else 0.5 if a == b else 0.0 for a in pos for b in neg)
    return wins / (len(pos) * len(neg))


def test_confusion_examples():
    assert confusion([1, 0, 1], [1, 0, 1]) == ConfusionCounts(2, 1, 0, 0)
    c = confusion([1, 0, 1, 0], [0, 1, 0, 1])
    assert c.tp == c.tn == 0
    assert confusion([0, 0, 1, 1], [0, 1, 1, 1]) == ConfusionCounts(2, 1, 1, 0)
    with pytest.raises(LengthMismatch):
        confusion([0, 1], [0])
    with pytest.raises(EmptyInput):
        confusion([], [])


def test_point_metrics_examples():
    assert point_metrics(ConfusionCounts(5, 5, 0, 0), "binary") == (1, 1, 1, 1, 1)
    assert point_metrics(ConfusionCounts(5, 5, 0, 0), "weighted") == (1, 1, 1, 1, 1)
    acc, p, r, f, m = point_metrics(ConfusionCounts(tp=1, tn=2, fp=1, fn=0), "binary")
    assert acc == 0.75 and p == 0.5 and r == 1.0
    assert f == pytest.approx(2 / 3, abs=1e-12)
    assert m == pytest.approx(2 / math.sqrt(12), abs=1e-12)
    acc, p, r, f, m = point_metrics(confusion([0, 1, 1, 0], [0, 0, 0, 0]), "binary")
    assert m == 0.0 and r == 0.0 and p == 0.0
    with pytest.raises(EmptyInput):
        point_metrics(ConfusionCounts(0, 0, 0, 0))


def test_auc_examples():
    assert auc([0, 0, 1, 1], [0.1, 0.2, 0.8, 0.9]) == 1.0
    assert auc([0, 1, 0, 1], [0.3] * 4) == 0.5
    assert auc([0, 0, 1, 1], [0.1, 0.4, 0.35, 0.8]) == pytest.approx(0.75, abs=1e-12)
    with pytest.raises(SingleClassDataset):
        auc([1, 1], [0.1, 0.2])
    with pytest.raises(LengthMismatch):
        auc([0, 1], [0.1])


def test_metrics_match_oracle_on_random_instances():
    rng = np.random.default_rng(99)
    for _ in range(100):
        y = rng.integers(0, 2, 200)
        y[:2] = [0, 1]
        s = np.round(rng.random(200), 2)  # coarse grid forces ties
        p = (s > rng.uniform(0.2, 0.8)).astype(int)
        c = confusion(y, p)
        for mode in ("binary", "weighted"):
            got = point_metrics(c, mode)
            want = oracle_metrics(y.tolist(), p.tolist(), mode)
            assert np.allclose(got, want, rtol=0, atol=1e-9)
        assert abs(auc(y, s) - oracle_auc(y.tolist(), s.tolist())) < 1e-12


def test_auc_complement_and_mcc_sign():
    rng = np.random.default_rng(5)
    for _ in range(50):
        y = rng.integers(0, 2, 60)
        y[:2] = [0, 1]
        s = rng.random(60)
        assert auc(y, s) + auc(y, -s) == pytest.approx(1.0, abs=1e-12)
        p = (s > 0.5).astype(int)
        c, cf = confusion(y, p), confusion(y, 1 - p)
        if all(v > 0 for v in (c.tp + c.fp, c.tn + c.fn, cf.tp + cf.fp, cf.tn + cf.fn)):
            assert mcc(c) == pytest.approx(-mcc(cf), abs=1e-12)


def test_weighted_metrics_agree_on_balanced_data():
    rng = np.random.default_rng(3)
    y = np.array([0, 1] * 500)
    p = np.where(rng.random(1000) < 0.92, y, 1 - y)
    acc, prec, rec, f1, _ = point_metrics(confusion(y, p), "weighted")
    assert max(acc, prec, rec, f1) - min(acc, prec, rec, f1) < 0.02


class _Fixed:
    def __init__(self, scores):
        self.scores = np.asarray(scores, dtype=float)

    def predict_score(self, X):
        return self.scores

    def predict(self, X):
        return (self.scores > 0.5).astype(int)


def test_evaluate_perfect_model():
    test = make_dataset(np.zeros((4, 2)), [0, 1, 0, 1])
    t0 = time.perf_counter()
    rep = evaluate(_Fixed([0.1, 0.9, 0.2, 0.8]), test, t0)
    assert (rep.accuracy, rep.precision, rep.recall, rep.f1, rep.auc, rep.mcc) == (1, 1, 1, 1, 1, 1)
    assert rep.runtime_seconds >= 0 and rep.n_features == 2


def test_evaluate_single_class_test_leaves_auc_blank():
    test = make_dataset(np.zeros((3, 1)), [1, 1, 1])
    rep = evaluate(_Fixed([0.9, 0.9, 0.2]), test, time.perf_counter())
    assert rep.auc is None and rep.accuracy == pytest.approx(2 / 3)
