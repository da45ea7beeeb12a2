"""Gradient boosting for squared-error regression.

Stagewise fitting on residuals with a shrinkage factor: the prediction is
the training-target mean plus ``learning_rate`` times the sum of tree
outputs. No stochastic subsampling, so fits are exact functions of the
data and hyperparameters.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .tree import (
    EmptyTrainingSet,
    NonFiniteTarget,
    RegressionTree,
    WidthMismatch,
    fit_tree,
)


@dataclass(frozen=True)
class GBModel:
    init_value: float
    learning_rate: float
    trees: tuple[RegressionTree, ...]
    n_features: int
    config: dict

    def predict(self, X) -> np.ndarray:
        X = np.asarray(X, dtype=np.float64)
        if X.ndim != 2 or X.shape[1] != self.n_features:
            raise WidthMismatch(f"expected {self.n_features} features, got {X.shape}")
        out = np.full(X.shape[0], self.init_value, dtype=np.float64)
        for tree in self.trees:
            out += self.learning_rate * tree.predict(X)
        return out

    def staged_train_mse(self, X, y) -> list[float]:
        """Training MSE after each boosting stage (stage 0 = mean only)."""
        X = np.asarray(X, dtype=np.float64)
        y = np.asarray(y, dtype=np.float64)
        pred = np.full(X.shape[0], self.init_value, dtype=np.float64)
        losses = [float(np.mean((y - pred) ** 2))]
        for tree in self.trees:
            pred += self.learning_rate * tree.predict(X)
            losses.append(float(np.mean((y - pred) ** 2)))
        return losses

    def to_dict(self) -> dict:
        return {
            "kind": "gb",
            "init_value": self.init_value,
            "learning_rate": self.learning_rate,
            "n_features": self.n_features,
            "trees": [t.to_dict() for t in self.trees],
            "config": self.config,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "GBModel":
        return cls(
            init_value=float(data["init_value"]),
            learning_rate=float(data["learning_rate"]),
            trees=tuple(RegressionTree.from_dict(t) for t in data["trees"]),
            n_features=int(data["n_features"]),
            config=dict(data["config"]),
        )


def fit_gb(
    X,
    y,
    n_estimators: int = 35,
    max_depth: int = 4,
    learning_rate: float = 0.1,
    min_samples_leaf: int = 1,
    seed: int = 0,
) -> GBModel:
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if X.shape[0] == 0:
        raise EmptyTrainingSet("no training rows")
    if not np.all(np.isfinite(y)):
        raise NonFiniteTarget("target contains non-finite values")

    init = float(y.mean())
    pred = np.full(X.shape[0], init, dtype=np.float64)
    trees = []
    for _ in range(n_estimators):
        residual = y - pred
        tree = fit_tree(
            X, residual, max_depth=max_depth, min_samples_leaf=min_samples_leaf
        )
        pred += learning_rate * tree.predict(X)
        trees.append(tree)

    config = {
        "kind": "gb",
        "n_estimators": n_estimators,
        "max_depth": max_depth,
        "learning_rate": learning_rate,
        "min_samples_leaf": min_samples_leaf,
        "seed": seed,
    }
    return GBModel(
        init_value=init,
        learning_rate=learning_rate,
        trees=tuple(trees),
        n_features=X.shape[1],
        config=config,
    )
