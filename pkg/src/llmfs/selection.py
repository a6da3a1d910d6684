"""Score vectors, top-k selection and column projection."""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Sequence

import numpy as np

from llmfs.data import Dataset
from llmfs.errors import IndexOutOfRange, KTooLarge

DEFAULT_K = 341

_FMAX = np.finfo(np.float64).max


@dataclass(frozen=True, eq=False)
class ScoreVector:
    """One score per feature; higher is always better.

    ``info`` carries per-run diagnostics (shifts applied, fallback counts...)
    and never influences ranking.
    """

    scores: np.ndarray
    method_name: str
    higher_is_better: bool = True
    info: dict[str, Any] = field(default_factory=dict)

    def __post_init__(self):
        s = np.array(self.scores, dtype=np.float64, copy=True).ravel()
        if np.isnan(s).any():
            raise ValueError(f"{self.method_name}: NaN score")
        s = np.clip(s, -_FMAX, _FMAX)
        s.flags.writeable = False
        object.__setattr__(self, "scores", s)

    def __len__(self) -> int:
        return self.scores.shape[0]


@dataclass(frozen=True)
class SelectionResult:
    indices: tuple[int, ...]
    method_name: str
    k: int
    scores: tuple[float, ...] | None = None

    def __post_init__(self):
        idx = tuple(int(i) for i in self.indices)
        if len(idx) != self.k:
            raise ValueError(f"{len(idx)} indices for k={self.k}")
        if len(set(idx)) != len(idx):
            raise ValueError("duplicate feature indices")
        if any(i < 0 for i in idx):
            raise IndexOutOfRange("negative feature index")
        object.__setattr__(self, "indices", idx)


def top_k(scores: ScoreVector, k: int = DEFAULT_K) -> SelectionResult:
    """The k highest scores, best first; equal scores go to the lower index."""
    d = len(scores)
    if k > d:
        raise KTooLarge(f"k={k} exceeds {d} features")
    if k < 1:
        raise ValueError("k must be >= 1")
    # lexsort: last key is primary
    order = np.lexsort((np.arange(d), -scores.scores))[:k]
    return SelectionResult(
        tuple(int(i) for i in order),
        scores.method_name,
        k,
        tuple(float(scores.scores[i]) for i in order),
    )


def project(ds: Dataset, sel: SelectionResult | Sequence[int]) -> Dataset:
    indices = list(sel.indices if isinstance(sel, SelectionResult) else sel)
    bad = [i for i in indices if not 0 <= i < ds.n_features]
    if bad:
        raise IndexOutOfRange(f"indices {bad} outside [0, {ds.n_features})")
    return Dataset(
        ds.features[:, indices],
        ds.labels,
        tuple(ds.feature_names[i] for i in indices),
    )


def write_selection_csv(sel: SelectionResult, names: Sequence[str], path: str | Path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["rank", "feature_index", "feature_name", "score"])
        for rank, j in enumerate(sel.indices, start=1):
            score = "" if sel.scores is None else repr(sel.scores[rank - 1])
            writer.writerow([rank, j, names[j], score])
