"""Dataset container, CSV ingestion, stratified splitting and synthetic data."""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np

from llmfs.errors import (
    DegenerateSplit,
    EmptyFile,
    InvalidDataset,
    InvalidSpec,
    MissingLabelColumn,
    NonBinaryLabel,
    NonNumericCell,
)
from llmfs.seeding import as_seed

LABEL_COLUMN = "label"


@dataclass(frozen=True, eq=False)
class Dataset:
    """Feature matrix ``features`` (n x d), binary ``labels`` and column names.

    Arrays are copied on construction and made read-only, so a Dataset can be
    shared freely between threads.
    """

    features: np.ndarray
    labels: np.ndarray
    feature_names: tuple[str, ...]

    def __post_init__(self):
        X = np.array(self.features, dtype=np.float64, order="C", copy=True)
        y = np.array(self.labels, copy=True)
        names = tuple(str(s) for s in self.feature_names)
        if X.ndim != 2:
            raise InvalidDataset(f"features must be 2-D, got shape {X.shape}")
        n, d = X.shape
        if n < 1 or d < 1:
            raise InvalidDataset(f"need at least one row and one column, got {X.shape}")
        if y.shape != (n,):
            raise InvalidDataset(f"labels shape {y.shape} does not match {n} rows")
        if not np.all((y == 0) | (y == 1)):
            raise InvalidDataset("labels must be 0 or 1")
        if len(names) != d:
            raise InvalidDataset(f"{len(names)} feature names for {d} columns")
        if any(not s for s in names):
            raise InvalidDataset("feature names must be non-empty")
        if len(set(names)) != d:
            raise InvalidDataset("feature names must be unique")
        if not np.all(np.isfinite(X)):
            raise InvalidDataset("features contain NaN or infinite values")
        y = y.astype(np.int8)
        X.flags.writeable = False
        y.flags.writeable = False
        object.__setattr__(self, "features", X)
        object.__setattr__(self, "labels", y)
        object.__setattr__(self, "feature_names", names)

    @property
    def n_samples(self) -> int:
        return self.features.shape[0]

    @property
    def n_features(self) -> int:
        return self.features.shape[1]

    @property
    def class_counts(self) -> tuple[int, int]:
        n1 = int(self.labels.sum())
        return self.n_samples - n1, n1

    def has_both_classes(self) -> bool:
        n0, n1 = self.class_counts
        return n0 > 0 and n1 > 0

    def take_rows(self, rows: Sequence[int] | np.ndarray) -> "Dataset":
        rows = np.asarray(rows, dtype=np.intp)
        return Dataset(self.features[rows], self.labels[rows], self.feature_names)

    def equals(self, other: "Dataset") -> bool:
        return (
            self.feature_names == other.feature_names
            and np.array_equal(self.labels, other.labels)
            and np.array_equal(self.features, other.features)
        )


@dataclass(frozen=True)
class SynthSpec:
    n_samples: int
    n_features: int
    n_informative: int
    mean_shift: float
    seed: int


def _parse_float(text: str, row: int, column: str) -> float:
    try:
        value = float(text)
    except ValueError:
        raise NonNumericCell(row, column, text) from None
    if not math.isfinite(value):
        raise NonNumericCell(row, column, text)
    return value


def load_csv(path: str | Path, label_column: str = LABEL_COLUMN) -> Dataset:
    """Read a header-first CSV with a 0/1 ``label_column`` and numeric features.

    Row numbers in errors are 1-based data rows (the header is not counted).
    """
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if not header:
            raise EmptyFile(f"{path}: no header row")
        header = [h.strip() for h in header]
        if label_column not in header:
            raise MissingLabelColumn(label_column)
        label_at = header.index(label_column)
        names = [h for i, h in enumerate(header) if i != label_at]
        rows: list[list[float]] = []
        labels: list[int] = []
        for rownum, record in enumerate(reader, start=1):
            if not record or (len(record) == 1 and not record[0].strip()):
                continue
            if len(record) != len(header):
                raise InvalidDataset(
                    f"{path}: row {rownum} has {len(record)} fields, header has {len(header)}"
                )
            raw_label = record[label_at].strip()
            try:
                lab = float(raw_label)
            except ValueError:
                raise NonBinaryLabel(rownum, raw_label) from None
            if lab not in (0.0, 1.0):
                raise NonBinaryLabel(rownum, raw_label)
            labels.append(int(lab))
            rows.append(
                [
                    _parse_float(cell.strip(), rownum, header[i])
                    for i, cell in enumerate(record)
                    if i != label_at
                ]
            )
    if not rows:
        raise EmptyFile(f"{path}: header but no data rows")
    if not names:
        raise InvalidDataset(f"{path}: no feature columns besides {label_column!r}")
    return Dataset(np.asarray(rows, dtype=np.float64), np.asarray(labels), tuple(names))


def write_csv(ds: Dataset, path: str | Path, label_column: str = LABEL_COLUMN) -> None:
    """Write ``ds`` with features in column order and the label last (12 significant digits)."""
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow([*ds.feature_names, label_column])
        for row, lab in zip(ds.features, ds.labels):
            writer.writerow([*(f"{v:.12g}" for v in row), int(lab)])


def split(ds: Dataset, train_fraction: float = 0.8, seed: int = 0) -> tuple[Dataset, Dataset]:
    """Seeded stratified split.

    Per class, ``max(1, floor(train_fraction * count))`` rows go to train and
    the rest to test. Both partitions keep the original row order.
    """
    if not 0.0 < train_fraction < 1.0:
        raise ValueError(f"train_fraction must lie in (0, 1), got {train_fraction}")
    rng = np.random.default_rng(as_seed(seed))
    train_rows: list[np.ndarray] = []
    test_rows: list[np.ndarray] = []
    for cls in (0, 1):
        members = np.flatnonzero(ds.labels == cls)
        if members.size == 0:
            raise DegenerateSplit(f"class {cls} has no samples")
        # the epsilon guards products such as 0.8 * 90 landing just under an integer
        n_train = max(1, math.floor(train_fraction * members.size + 1e-9))
        shuffled = rng.permutation(members)
        train_rows.append(shuffled[:n_train])
        test_rows.append(shuffled[n_train:])
    train_idx = np.sort(np.concatenate(train_rows))
    test_idx = np.sort(np.concatenate(test_rows))
    if train_idx.size == 0 or test_idx.size == 0:
        raise DegenerateSplit(
            f"split of {ds.n_samples} rows at {train_fraction} leaves an empty partition"
        )
    return ds.take_rows(train_idx), ds.take_rows(test_idx)


def generate_synthetic(spec: SynthSpec) -> Dataset:
    """Balanced Gaussian data with ``n_informative`` shifted columns up front.

    Every column has unit noise. For informative columns the positive class
    mean sits ``mean_shift`` above the negative class mean; the rest are
    label-independent.
    """
    if spec.n_samples < 2 or spec.n_features < 1:
        raise InvalidSpec("need n_samples >= 2 and n_features >= 1")
    if not 0 <= spec.n_informative <= spec.n_features:
        raise InvalidSpec("n_informative must lie in [0, n_features]")
    if not spec.mean_shift >= 0:
        raise InvalidSpec("mean_shift must be >= 0")
    rng = np.random.default_rng(as_seed(spec.seed))
    n = spec.n_samples
    labels = np.zeros(n, dtype=np.int8)
    labels[: (n + 1) // 2] = 1
    labels = rng.permutation(labels)
    X = rng.standard_normal((n, spec.n_features))
    X[:, : spec.n_informative] += spec.mean_shift * labels[:, None]
    names = tuple(f"f{j}" for j in range(spec.n_features))
    return Dataset(X, labels, names)
