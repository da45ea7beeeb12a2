"""Greedy CART regression tree.

Split search is exact: every midpoint between consecutive distinct sorted
values of every candidate feature is scored by the weighted sum of squared
errors of the two children, with ties broken toward the smallest feature
index and then the smallest threshold. Randomness enters only through
optional per-node feature subsampling (used by the forest), driven by a
seeded generator.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ..rng import SplitMix64


class ModelError(ValueError):
    pass


class EmptyTrainingSet(ModelError):
    pass


class NonFiniteTarget(ModelError):
    pass


class WidthMismatch(ModelError):
    pass


@dataclass(frozen=True)
class Node:
    feature: int | None = None
    threshold: float | None = None
    left: "Node | None" = None
    right: "Node | None" = None
    value: float | None = None

    @property
    def is_leaf(self) -> bool:
        return self.value is not None

    def to_dict(self) -> dict:
        if self.is_leaf:
            return {"leaf": self.value}
        return {
            "feature": self.feature,
            "threshold": self.threshold,
            "left": self.left.to_dict(),
            "right": self.right.to_dict(),
        }

    @classmethod
    def from_dict(cls, data: dict) -> "Node":
        if "leaf" in data:
            return cls(value=float(data["leaf"]))
        return cls(
            feature=int(data["feature"]),
            threshold=float(data["threshold"]),
            left=cls.from_dict(data["left"]),
            right=cls.from_dict(data["right"]),
        )


@dataclass(frozen=True)
class RegressionTree:
    root: Node
    max_depth: int
    min_samples_leaf: int
    n_features: int

    def predict(self, X: np.ndarray) -> np.ndarray:
        X = np.asarray(X, dtype=np.float64)
        if X.ndim != 2 or X.shape[1] != self.n_features:
            raise WidthMismatch(
                f"expected {self.n_features} features, got {X.shape}"
            )
        out = np.empty(X.shape[0], dtype=np.float64)
        self._fill(self.root, X, np.arange(X.shape[0]), out)
        return out

    def _fill(self, node: Node, X, idx, out) -> None:
        if node.is_leaf:
            out[idx] = node.value
            return
        go_left = X[idx, node.feature] <= node.threshold
        self._fill(node.left, X, idx[go_left], out)
        self._fill(node.right, X, idx[~go_left], out)

    def to_dict(self) -> dict:
        return {
            "root": self.root.to_dict(),
            "max_depth": self.max_depth,
            "min_samples_leaf": self.min_samples_leaf,
            "n_features": self.n_features,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "RegressionTree":
        return cls(
            root=Node.from_dict(data["root"]),
            max_depth=int(data["max_depth"]),
            min_samples_leaf=int(data["min_samples_leaf"]),
            n_features=int(data["n_features"]),
        )


def fit_tree(
    X,
    y,
    max_depth: int,
    min_samples_leaf: int = 1,
    features_per_node: int | None = None,
    seed: int = 0,
) -> RegressionTree:
    """Fit a CART regression tree.

    ``features_per_node`` limits the split search at every node to a seeded
    random draw of that many features (the regression-forest convention);
    ``None`` searches every feature.
    """
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if X.ndim != 2:
        raise ModelError("X must be 2-dimensional")
    if X.shape[0] != y.shape[0]:
        raise ModelError("X and y row counts differ")
    if X.shape[0] == 0:
        raise EmptyTrainingSet("no training rows")
    if not np.all(np.isfinite(y)):
        raise NonFiniteTarget("target contains non-finite values")
    if max_depth < 0:
        raise ModelError("max_depth must be >= 0")

    rng = SplitMix64(seed)
    n_features = X.shape[1]

    def build(idx: np.ndarray, depth: int) -> Node:
        target = y[idx]
        if (
            depth >= max_depth
            or idx.size < 2 * min_samples_leaf
            or idx.size < 2
            or np.all(target == target[0])
        ):
            return Node(value=float(target.mean()))
        if features_per_node is not None and features_per_node < n_features:
            feats = sorted(rng.sample(list(range(n_features)), features_per_node))
        else:
            feats = list(range(n_features))
        found = _best_split(X[np.ix_(idx, feats)], target, min_samples_leaf)
        if found is None:
            return Node(value=float(target.mean()))
        local_feature, threshold = found
        feature = feats[local_feature]
        go_left = X[idx, feature] <= threshold
        left_idx, right_idx = idx[go_left], idx[~go_left]
        if left_idx.size == 0 or right_idx.size == 0:
            return Node(value=float(target.mean()))
        return Node(
            feature=feature,
            threshold=threshold,
            left=build(left_idx, depth + 1),
            right=build(right_idx, depth + 1),
        )

    root = build(np.arange(X.shape[0]), 0)
    return RegressionTree(
        root=root,
        max_depth=max_depth,
        min_samples_leaf=min_samples_leaf,
        n_features=n_features,
    )


def _best_split(X: np.ndarray, y: np.ndarray, min_samples_leaf: int):
    """Best (feature, threshold) by weighted children SSE, or None.

    Vectorized over all features at once: each column is sorted, prefix
    sums give left/right SSE for every cut position, invalid cuts (equal
    adjacent values, leaf-size violations) are masked out and the argmin is
    taken in feature-major order so ties resolve to the smallest feature
    index then the smallest threshold.
    """
    n, p = X.shape
    order = np.argsort(X, axis=0, kind="stable")
    xs = np.take_along_axis(X, order, axis=0)
    ys = y[order]

    s1 = np.cumsum(ys, axis=0)
    s2 = np.cumsum(ys * ys, axis=0)
    total1 = s1[-1, :]
    total2 = s2[-1, :]

    k = np.arange(1, n, dtype=np.float64)[:, None]  # left sizes 1..n-1
    left_sse = s2[:-1, :] - (s1[:-1, :] ** 2) / k
    right_sse = (total2 - s2[:-1, :]) - ((total1 - s1[:-1, :]) ** 2) / (n - k)
    cost = left_sse + right_sse

    valid = xs[:-1, :] < xs[1:, :]
    if min_samples_leaf > 1:
        sizes_ok = (k >= min_samples_leaf) & ((n - k) >= min_samples_leaf)
        valid &= sizes_ok
    cost = np.where(valid, cost, np.inf)

    lowest = float(np.min(cost))
    if not math.isfinite(lowest):
        return None

    # Different features can induce the *same* partition (e.g. both split
    # off one extreme row); their prefix-sum costs then differ only by
    # rounding. Re-evaluate every near-minimal cut with the direct formula,
    # which is bitwise identical for identical partitions, so the
    # smallest-feature-then-smallest-threshold tie-break is exact.
    tolerance = 1e-9 * (1.0 + abs(lowest))
    features, positions = np.nonzero(cost.T <= lowest + tolerance)
    best = None
    for feature, position in zip(features, positions):
        threshold = float((xs[position, feature] + xs[position + 1, feature]) / 2.0)
        left = y[X[:, feature] <= threshold]
        right = y[X[:, feature] > threshold]
        sse = float(((left - left.mean()) ** 2).sum()) + float(
            ((right - right.mean()) ** 2).sum()
        )
        key = (sse, int(feature), threshold)
        if best is None or key < best:
            best = key
    return best[1], best[2]
