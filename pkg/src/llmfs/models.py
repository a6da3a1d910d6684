"""The four benchmark classifiers behind one fit / predict / predict_score contract."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any

import numpy as np

from llmfs.data import Dataset
from llmfs.errors import DimensionMismatch, SingleClassDataset, TooFewSamples
from llmfs.forest import Forest, fit_forest
from llmfs.seeding import as_seed

CLASSIFIERS = ("knn", "random_forest", "extra_trees", "mlp")

DEFAULTS: dict[str, dict[str, Any]] = {
    "knn": {"k_neighbors": 5},
    "random_forest": {"n_trees": 100, "max_depth": 12},
    "extra_trees": {"n_trees": 100, "max_depth": 12},
    "mlp": {"hidden_width": 32, "epochs": 50, "batch": 32, "learning_rate": 0.01},
}


@dataclass(frozen=True)
class ClassifierSpec:
    kind: str
    hyperparameters: dict[str, Any] = field(default_factory=dict)
    seed: int = 0

    def __post_init__(self):
        if self.kind not in DEFAULTS:
            raise ValueError(f"unknown classifier {self.kind!r}; choose from {CLASSIFIERS}")
        unknown = set(self.hyperparameters) - set(DEFAULTS[self.kind])
        if unknown:
            raise ValueError(f"{self.kind}: unknown hyperparameters {sorted(unknown)}")
        hp = self.params
        if self.kind == "knn" and hp["k_neighbors"] < 1:
            raise ValueError("k_neighbors must be >= 1")
        if self.kind in ("random_forest", "extra_trees") and hp["n_trees"] < 1:
            raise ValueError("n_trees must be >= 1")
        if self.kind == "mlp" and (hp["hidden_width"] < 1 or hp["learning_rate"] <= 0):
            raise ValueError("mlp needs hidden_width >= 1 and learning_rate > 0")

    @property
    def params(self) -> dict[str, Any]:
        return {**DEFAULTS[self.kind], **self.hyperparameters}


class TrainedModel:
    """Base for fitted classifiers. Subclasses implement ``_score``."""

    kind: str
    n_features: int

    def _check(self, features: np.ndarray) -> np.ndarray:
        X = np.asarray(features, dtype=np.float64)
        if X.ndim != 2 or X.shape[1] != self.n_features:
            raise DimensionMismatch(
                f"{self.kind} was trained on {self.n_features} features, got shape {X.shape}"
            )
        return np.ascontiguousarray(X)

    def predict_score(self, features: np.ndarray) -> np.ndarray:
        return self._score(self._check(features))

    def predict(self, features: np.ndarray) -> np.ndarray:
        # ties at exactly 0.5 go to class 0
        return (self.predict_score(features) > 0.5).astype(np.int8)

    def _score(self, X: np.ndarray) -> np.ndarray:
        raise NotImplementedError


def _standardizer(X: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    mean = X.mean(axis=0)
    std = X.std(axis=0)
    std[std == 0] = 1.0
    return mean, std


class KNNModel(TrainedModel):
    kind = "knn"

    def __init__(self, train: Dataset, k_neighbors: int):
        self.n_features = train.n_features
        self.k = k_neighbors
        self.mean, self.std = _standardizer(train.features)
        self.points = (train.features - self.mean) / self.std
        self.labels = train.labels.astype(np.float64)
        self._sq = np.einsum("ij,ij->i", self.points, self.points)

    def neighbors(self, X: np.ndarray, chunk: int = 1024) -> np.ndarray:
        """Indices of the k nearest training points (distance ties -> lower index)."""
        Z = (X - self.mean) / self.std
        out = np.empty((Z.shape[0], self.k), dtype=np.intp)
        for start in range(0, Z.shape[0], chunk):
            block = Z[start : start + chunk]
            d2 = np.einsum("ij,ij->i", block, block)[:, None] - 2.0 * block @ self.points.T + self._sq
            if self.k < d2.shape[1]:
                part = np.argpartition(d2, self.k - 1, axis=1)[:, : self.k]
                kth = np.take_along_axis(d2, part, axis=1).max(axis=1)
                # any row with points tied at the k-th distance needs a full stable sort
                for r in range(block.shape[0]):
                    if np.count_nonzero(d2[r] <= kth[r]) > self.k:
                        part[r] = np.argsort(d2[r], kind="stable")[: self.k]
            else:
                part = np.argsort(d2, axis=1, kind="stable")[:, : self.k]
            out[start : start + chunk] = part
        return out

    def _score(self, X):
        return self.labels[self.neighbors(X)].mean(axis=1)


class ForestModel(TrainedModel):
    def __init__(self, kind: str, forest: Forest):
        self.kind = kind
        self.forest = forest
        self.n_features = forest.n_features

    def _score(self, X):
        return self.forest.positive_fraction(X)


def _sigmoid(z: np.ndarray) -> np.ndarray:
    out = np.empty_like(z)
    pos = z >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-z[pos]))
    ez = np.exp(z[~pos])
    out[~pos] = ez / (1.0 + ez)
    return out


def mlp_forward(params: dict[str, np.ndarray], X: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Hidden activations and output logits."""
    H = np.maximum(X @ params["W1"] + params["b1"], 0.0)
    return H, H @ params["w2"] + params["b2"]


def mlp_loss(params: dict[str, np.ndarray], X: np.ndarray, y: np.ndarray) -> float:
    """Mean binary cross-entropy, computed from logits."""
    _, z = mlp_forward(params, X)
    return float(np.mean(np.logaddexp(0.0, z) - y * z))


def mlp_loss_and_grad(params, X, y):
    H, z = mlp_forward(params, X)
    loss = float(np.mean(np.logaddexp(0.0, z) - y * z))
    dz = (_sigmoid(z) - y) / X.shape[0]
    dH = np.outer(dz, params["w2"]) * (H > 0)
    grads = {
        "W1": X.T @ dH,
        "b1": dH.sum(axis=0),
        "w2": H.T @ dz,
        "b2": np.array(dz.sum()),
    }
    return loss, grads


def mlp_init(n_in: int, width: int, rng: np.random.Generator) -> dict[str, np.ndarray]:
    return {
        "W1": rng.uniform(-0.1, 0.1, size=(n_in, width)),
        "b1": np.zeros(width),
        "w2": rng.uniform(-0.1, 0.1, size=width),
        "b2": np.array(0.0),
    }


class MLPModel(TrainedModel):
    kind = "mlp"

    def __init__(self, train: Dataset, hidden_width, epochs, batch, learning_rate, seed):
        self.n_features = train.n_features
        self.mean, self.std = _standardizer(train.features)
        X = (train.features - self.mean) / self.std
        y = train.labels.astype(np.float64)
        rng = np.random.default_rng(as_seed(seed))
        self.params = mlp_init(self.n_features, hidden_width, rng)
        self.epoch_losses: list[float] = []
        n = X.shape[0]
        for _ in range(epochs):
            order = rng.permutation(n)
            for start in range(0, n, batch):
                rows = order[start : start + batch]
                _, grads = mlp_loss_and_grad(self.params, X[rows], y[rows])
                for name, g in grads.items():
                    self.params[name] = self.params[name] - learning_rate * g
            self.epoch_losses.append(mlp_loss(self.params, X, y))

    def _score(self, X):
        _, z = mlp_forward(self.params, (X - self.mean) / self.std)
        return _sigmoid(z)


def fit(spec: ClassifierSpec, train: Dataset) -> TrainedModel:
    if not train.has_both_classes():
        raise SingleClassDataset(f"{spec.kind}: training data has a single class")
    hp = spec.params
    if spec.kind == "knn":
        if train.n_samples < hp["k_neighbors"]:
            raise TooFewSamples(f"knn with k={hp['k_neighbors']} on {train.n_samples} rows")
        return KNNModel(train, hp["k_neighbors"])
    if spec.kind in ("random_forest", "extra_trees"):
        rf = spec.kind == "random_forest"
        forest = fit_forest(
            train.features, train.labels, n_trees=hp["n_trees"], max_depth=hp["max_depth"],
            bootstrap=rf, extra=not rf, seed=spec.seed,
        )
        return ForestModel(spec.kind, forest)
    return MLPModel(train, hp["hidden_width"], hp["epochs"], hp["batch"], hp["learning_rate"], spec.seed)


def predict(model: TrainedModel, features: np.ndarray) -> np.ndarray:
    return model.predict(features)


def predict_score(model: TrainedModel, features: np.ndarray) -> np.ndarray:
    return model.predict_score(features)
