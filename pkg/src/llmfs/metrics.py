"""Confusion-matrix metrics, rank-based AUC, MCC and per-cell timing."""

from __future__ import annotations

import logging
import math
import time
from dataclasses import dataclass

import numpy as np
from scipy.stats import rankdata

from llmfs.data import Dataset
from llmfs.errors import EmptyInput, LengthMismatch, SingleClassDataset

log = logging.getLogger(__name__)

AVERAGING_MODES = ("weighted", "binary")


@dataclass(frozen=True)
class ConfusionCounts:
    tp: int
    tn: int
    fp: int
    fn: int

    @property
    def total(self) -> int:
        return self.tp + self.tn + self.fp + self.fn


@dataclass(frozen=True)
class EvalReport:
    accuracy: float
    precision: float
    recall: float
    f1: float
    auc: float | None
    mcc: float
    runtime_seconds: float
    n_features: int


def _labels(y, name: str) -> np.ndarray:
    arr = np.asarray(y).ravel()
    if arr.size and not np.all((arr == 0) | (arr == 1)):
        raise ValueError(f"{name} must contain only 0 and 1")
    return arr.astype(np.int8)


def confusion(y_true, y_pred) -> ConfusionCounts:
    t = _labels(y_true, "y_true")
    p = _labels(y_pred, "y_pred")
    if t.shape != p.shape:
        raise LengthMismatch(f"{t.size} labels vs {p.size} predictions")
    if t.size == 0:
        raise EmptyInput("no samples to evaluate")
    tp = int(np.count_nonzero((t == 1) & (p == 1)))
    tn = int(np.count_nonzero((t == 0) & (p == 0)))
    fp = int(np.count_nonzero((t == 0) & (p == 1)))
    fn = int(np.count_nonzero((t == 1) & (p == 0)))
    return ConfusionCounts(tp, tn, fp, fn)


def _ratio(num: float, den: float) -> float:
    return num / den if den > 0 else 0.0


def _prf(tp: int, fp: int, fn: int) -> tuple[float, float, float]:
    p = _ratio(tp, tp + fp)
    r = _ratio(tp, tp + fn)
    return p, r, _ratio(2 * p * r, p + r)


def mcc(c: ConfusionCounts) -> float:
    factors = ((c.tp + c.fp), (c.tp + c.fn), (c.tn + c.fp), (c.tn + c.fn))
    if any(f == 0 for f in factors):
        return 0.0
    den = math.sqrt(float(factors[0]) * factors[1] * factors[2] * factors[3])
    return (c.tp * c.tn - c.fp * c.fn) / den


def point_metrics(c: ConfusionCounts, averaging: str = "weighted") -> tuple[float, float, float, float, float]:
    """(accuracy, precision, recall, f1, mcc).

    ``binary`` scores the positive class only. ``weighted`` averages the
    per-class precision/recall/F1 with weights equal to each class's share of
    true labels.
    """
    if c.total <= 0:
        raise EmptyInput("confusion counts are empty")
    if averaging not in AVERAGING_MODES:
        raise ValueError(f"averaging must be one of {AVERAGING_MODES}")
    acc = (c.tp + c.tn) / c.total
    if averaging == "binary":
        p, r, f = _prf(c.tp, c.fp, c.fn)
    else:
        pos = _prf(c.tp, c.fp, c.fn)
        neg = _prf(c.tn, c.fn, c.fp)
        w_pos = (c.tp + c.fn) / c.total
        w_neg = (c.tn + c.fp) / c.total
        p, r, f = (w_pos * a + w_neg * b for a, b in zip(pos, neg))
    return acc, p, r, f, mcc(c)


def auc(y_true, scores) -> float:
    """Mann-Whitney estimate of P(score of a positive > score of a negative), ties count 1/2."""
    t = _labels(y_true, "y_true")
    s = np.asarray(scores, dtype=np.float64).ravel()
    if t.shape != s.shape:
        raise LengthMismatch(f"{t.size} labels vs {s.size} scores")
    n_pos = int(t.sum())
    n_neg = t.size - n_pos
    if n_pos == 0 or n_neg == 0:
        raise SingleClassDataset("AUC needs both classes")
    ranks = rankdata(s, method="average")
    u = ranks[t == 1].sum() - n_pos * (n_pos + 1) / 2.0
    return float(u / (n_pos * n_neg))


def evaluate(model, test: Dataset, timer_start: float, averaging: str = "weighted") -> EvalReport:
    """Score ``model`` on ``test``. ``timer_start`` is a ``time.perf_counter()`` reading."""
    pred = model.predict(test.features)
    score = model.predict_score(test.features)
    acc, p, r, f, m = point_metrics(confusion(test.labels, pred), averaging)
    if test.has_both_classes():
        u = auc(test.labels, score)
    else:
        log.warning("test split has a single class; AUC left blank")
        u = None
    runtime = max(0.0, time.perf_counter() - timer_start)
    return EvalReport(acc, p, r, f, u, m, runtime, test.n_features)
