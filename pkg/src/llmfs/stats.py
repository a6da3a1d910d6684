"""Per-feature global and class-conditional descriptors."""

from __future__ import annotations

import csv
from concurrent.futures import ThreadPoolExecutor
from dataclasses import astuple, dataclass, fields
from pathlib import Path

import numpy as np

from llmfs.data import Dataset
from llmfs.errors import IndexOutOfRange, SingleClassDataset
from llmfs.seeding import as_seed

SAMPLES_PER_CLASS = 5


@dataclass(frozen=True)
class FeatureDescriptor:
    name: str
    mu: float
    sigma: float
    median: float
    min: float
    max: float
    iqr: float
    mu_pos: float
    mu_neg: float
    sigma_pos: float
    sigma_neg: float
    delta_mu: float
    samples_pos: tuple[float, ...]
    samples_neg: tuple[float, ...]


FIELD_NAMES = tuple(f.name for f in fields(FeatureDescriptor))


def _mean_std(x: np.ndarray) -> tuple[float, float]:
    # population (1/n) weighting
    mu = float(x.mean())
    return mu, float(np.sqrt(np.mean((x - mu) ** 2)))


def describe_feature(
    ds: Dataset, j: int, samples_per_class: int = SAMPLES_PER_CLASS, seed: int = 0
) -> FeatureDescriptor:
    if not 0 <= j < ds.n_features:
        raise IndexOutOfRange(f"feature index {j} outside [0, {ds.n_features})")
    if not ds.has_both_classes():
        raise SingleClassDataset("descriptors need both classes present")
    x = ds.features[:, j]
    pos = x[ds.labels == 1]
    neg = x[ds.labels == 0]
    mu, sigma = _mean_std(x)
    mu_pos, sigma_pos = _mean_std(pos)
    mu_neg, sigma_neg = _mean_std(neg)
    q1, median, q3 = np.quantile(x, [0.25, 0.5, 0.75], method="linear")
    rng = np.random.default_rng(as_seed(seed))
    samples_pos = rng.choice(pos, size=min(samples_per_class, pos.size), replace=False)
    samples_neg = rng.choice(neg, size=min(samples_per_class, neg.size), replace=False)
    return FeatureDescriptor(
        name=ds.feature_names[j],
        mu=mu,
        sigma=sigma,
        median=float(median),
        min=float(x.min()),
        max=float(x.max()),
        iqr=max(0.0, float(q3 - q1)),
        mu_pos=mu_pos,
        mu_neg=mu_neg,
        sigma_pos=sigma_pos,
        sigma_neg=sigma_neg,
        delta_mu=mu_pos - mu_neg,
        samples_pos=tuple(float(v) for v in samples_pos),
        samples_neg=tuple(float(v) for v in samples_neg),
    )


def feature_seed(seed: int, j: int) -> int:
    return int(np.random.SeedSequence([as_seed(seed), j]).generate_state(1, np.uint64)[0])


def describe_all(
    ds: Dataset,
    samples_per_class: int = SAMPLES_PER_CLASS,
    seed: int = 0,
    n_jobs: int = 1,
) -> list[FeatureDescriptor]:
    """Descriptors for every feature; feature ``j`` samples with a sub-seed of ``(seed, j)``."""
    if not ds.has_both_classes():
        raise SingleClassDataset("descriptors need both classes present")

    def one(j: int) -> FeatureDescriptor:
        return describe_feature(ds, j, samples_per_class, feature_seed(seed, j))

    if n_jobs > 1:
        with ThreadPoolExecutor(max_workers=n_jobs) as pool:
            return list(pool.map(one, range(ds.n_features)))
    return [one(j) for j in range(ds.n_features)]


def write_descriptors_csv(descs: list[FeatureDescriptor], path: str | Path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(FIELD_NAMES)
        for desc in descs:
            row = []
            for value in astuple(desc):
                if isinstance(value, tuple):
                    row.append(";".join(repr(v) for v in value))
                elif isinstance(value, float):
                    row.append(repr(value))
                else:
                    row.append(value)
            writer.writerow(row)
