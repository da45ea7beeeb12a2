"""Feature-selection cascade: max normalization, variance threshold,
Pearson redundancy pruning.

The cascade is a fit/apply pipeline. Fitting learns per-column maxima and
the surviving column list from training rows only; applying reuses both on
unseen rows without refitting, so normalized values may exceed 1.0 outside
the training set. By default the cascade touches only the descriptor (D)
block; key and latent blocks pass through untouched.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .features import FeatureMatrix

DEFAULT_VARIANCE_THRESHOLD = 0.2
DEFAULT_PCC_THRESHOLD = 0.9
DEFAULT_SCOPE = frozenset({"D"})


class SelectionError(ValueError):
    pass


class EmptyMatrix(SelectionError):
    pass


class TooFewSamples(SelectionError):
    pass


class ConstantVector(SelectionError):
    pass


class LengthMismatch(SelectionError):
    pass


class UnknownColumn(SelectionError):
    pass


def sample_std(values) -> float:
    """Sample standard deviation, sqrt(sum((x - mean)^2) / (n - 1))."""
    arr = np.asarray(values, dtype=np.float64)
    if arr.ndim != 1:
        raise SelectionError("sample_std expects a 1-d vector")
    n = arr.size
    if n < 2:
        raise TooFewSamples(f"need at least 2 samples, got {n}")
    dev = arr - arr.mean()
    return math.sqrt(float(dev @ dev) / (n - 1))


def pearson(x, y) -> float:
    """Pearson correlation coefficient of two equal-length vectors."""
    ax = np.asarray(x, dtype=np.float64)
    ay = np.asarray(y, dtype=np.float64)
    if ax.shape != ay.shape or ax.ndim != 1:
        raise LengthMismatch(f"shape mismatch: {ax.shape} vs {ay.shape}")
    if ax.size < 2:
        raise TooFewSamples("need at least 2 samples")
    dx = ax - ax.mean()
    dy = ay - ay.mean()
    sx = math.sqrt(float(dx @ dx))
    sy = math.sqrt(float(dy @ dy))
    if sx == 0.0 or sy == 0.0:
        raise ConstantVector("pearson is undefined for a constant vector")
    rho = float(dx @ dy) / (sx * sy)
    return max(-1.0, min(1.0, rho))


def max_normalize(
    matrix: FeatureMatrix, scope=DEFAULT_SCOPE
) -> tuple[FeatureMatrix, dict[str, float]]:
    """Scale in-scope columns by their maximum absolute value.

    All-zero in-scope columns cannot be normalized and are removed here
    (recorded as constant by the caller). The absolute-value convention
    keeps negative-valued columns inside [-1, 1]; on the non-negative count
    descriptors it coincides with plain X / X_max.
    """
    if matrix.values.shape[0] == 0:
        raise EmptyMatrix("cannot normalize an empty matrix")
    scope = frozenset(scope)
    keep: list[int] = []
    column_max: dict[str, float] = {}
    values = matrix.values.copy()
    for pos, (block, name) in enumerate(zip(matrix.blocks, matrix.names)):
        if block not in scope:
            keep.append(pos)
            continue
        peak = float(np.max(np.abs(values[:, pos])))
        if peak == 0.0:
            continue  # constant zero column: dropped
        values[:, pos] = values[:, pos] / peak
        column_max[name] = peak
        keep.append(pos)
    out = FeatureMatrix(
        ids=matrix.ids,
        blocks=tuple(matrix.blocks[p] for p in keep),
        names=tuple(matrix.names[p] for p in keep),
        values=values[:, keep],
    )
    return out, column_max


def variance_filter(matrix: FeatureMatrix, threshold: float) -> list[str]:
    """Columns whose sample standard deviation strictly exceeds ``threshold``."""
    kept = []
    for pos, name in enumerate(matrix.names):
        if sample_std(matrix.values[:, pos]) > threshold:
            kept.append(name)
    return kept


def pcc_prune(matrix: FeatureMatrix, threshold: float) -> list[str]:
    """Drop redundant columns by correlation grouping.

    Columns with pairwise |Pearson| strictly above ``threshold`` are joined
    into connected components (union-find); each component keeps only its
    smallest-index column.
    """
    n = len(matrix.names)
    parent = list(range(n))

    def find(i: int) -> int:
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    def union(i: int, j: int) -> None:
        ri, rj = find(i), find(j)
        if ri != rj:
            parent[max(ri, rj)] = min(ri, rj)

    for i in range(n):
        for j in range(i + 1, n):
            if abs(pearson(matrix.values[:, i], matrix.values[:, j])) > threshold:
                union(i, j)

    representatives = sorted({find(i) for i in range(n)})
    return [matrix.names[i] for i in representatives]


@dataclass(frozen=True)
class SelectionPipeline:
    column_max: dict[str, float]
    kept_columns: tuple[str, ...]
    variance_threshold: float
    pcc_threshold: float
    scope: frozenset[str]

    def to_dict(self) -> dict:
        return {
            "column_max": dict(sorted(self.column_max.items())),
            "kept_columns": list(self.kept_columns),
            "thresholds": {
                "variance": self.variance_threshold,
                "pcc": self.pcc_threshold,
            },
            "scope": sorted(self.scope),
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n"

    @classmethod
    def from_dict(cls, data: dict) -> "SelectionPipeline":
        return cls(
            column_max={k: float(v) for k, v in data["column_max"].items()},
            kept_columns=tuple(data["kept_columns"]),
            variance_threshold=float(data["thresholds"]["variance"]),
            pcc_threshold=float(data["thresholds"]["pcc"]),
            scope=frozenset(data["scope"]),
        )

    @classmethod
    def load(cls, path: str | Path) -> "SelectionPipeline":
        with Path(path).open(encoding="utf-8") as handle:
            return cls.from_dict(json.load(handle))


def fit(
    matrix: FeatureMatrix,
    variance_threshold: float = DEFAULT_VARIANCE_THRESHOLD,
    pcc_threshold: float = DEFAULT_PCC_THRESHOLD,
    scope=DEFAULT_SCOPE,
) -> SelectionPipeline:
    """Fit the cascade on training rows.

    In-scope columns run max normalization, the variance threshold and the
    correlation pruning in that order; out-of-scope columns survive
    untouched. Survivors keep their original column order.
    """
    if matrix.values.shape[0] == 0:
        raise EmptyMatrix("cannot fit on an empty matrix")
    scope = frozenset(scope)
    normalized, column_max = max_normalize(matrix, scope)

    in_scope = [
        name
        for block, name in zip(normalized.blocks, normalized.names)
        if block in scope
    ]
    survivors = set(normalized.names) - set(in_scope)
    if in_scope:
        sub = normalized.select_columns(in_scope)
        after_variance = variance_filter(sub, variance_threshold)
        if after_variance:
            pruned = pcc_prune(
                normalized.select_columns(after_variance), pcc_threshold
            )
            survivors |= set(pruned)

    kept = tuple(n for n in matrix.names if n in survivors)
    column_max = {k: v for k, v in column_max.items() if k in survivors}
    return SelectionPipeline(
        column_max=column_max,
        kept_columns=kept,
        variance_threshold=variance_threshold,
        pcc_threshold=pcc_threshold,
        scope=scope,
    )


def apply(pipeline: SelectionPipeline, matrix: FeatureMatrix) -> FeatureMatrix:
    """Project a matrix through a fitted pipeline (pure; never refits)."""
    missing = [n for n in pipeline.kept_columns if n not in matrix.names]
    if missing:
        raise UnknownColumn(f"matrix lacks fitted columns {missing}")
    out = matrix.select_columns(list(pipeline.kept_columns))
    values = out.values.copy()
    for pos, name in enumerate(out.names):
        peak = pipeline.column_max.get(name)
        if peak is not None:
            values[:, pos] = values[:, pos] / peak
    return FeatureMatrix(
        ids=out.ids, blocks=out.blocks, names=out.names, values=values
    )
