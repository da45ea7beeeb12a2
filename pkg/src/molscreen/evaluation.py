"""Dataset splitters, metrics and the repeated evaluation harness.

Three split strategies: scaffold-stratified (one test molecule from every
group of three or fewer, two from larger groups), plain random, and
leave-one-group-out. The harness repeats split/fit/score cycles with
per-repeat seeds derived from a master seed via a splitmix-style hash, so
reports are bit-identical whether repeats run serially or in parallel.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import selection
from .features import FeatureMatrix
from .models import TrainConfig, fit_model
from .rng import SplitMix64, derive_seed
from .selection import ConstantVector, LengthMismatch


class EvaluationError(ValueError):
    pass


class EmptyGroup(EvaluationError):
    pass


class DegenerateSplit(EvaluationError):
    pass


class SingleGroup(EvaluationError):
    pass


class EmptyInput(EvaluationError):
    pass


@dataclass(frozen=True)
class DatasetSplit:
    train: tuple[int, ...]
    test: tuple[int, ...]
    method: str
    seed: int


@dataclass(frozen=True)
class SplitterSpec:
    kind: str  # "msc" | "random" | "logo"
    test_fraction: float = 0.1

    def __post_init__(self):
        if self.kind not in ("msc", "random", "logo"):
            raise EvaluationError(f"unknown splitter {self.kind!r}")


def msc_split(groups: dict[int, list[int]], seed: int) -> DatasetSplit:
    """Scaffold-stratified split.

    Groups are visited in ascending id; a group of three or fewer molecules
    contributes exactly one test molecule, a larger group exactly two, each
    drawn uniformly without replacement.
    """
    rng = SplitMix64(seed)
    test: list[int] = []
    all_indices: list[int] = []
    for gid in sorted(groups):
        members = sorted(groups[gid])
        if not members:
            raise EmptyGroup(f"group {gid} is empty")
        all_indices.extend(members)
        draw = 1 if len(members) <= 3 else 2
        test.extend(rng.sample(members, draw))
    test_set = set(test)
    train = [i for i in sorted(all_indices) if i not in test_set]
    if not train:
        raise DegenerateSplit("every molecule landed in the test set")
    return DatasetSplit(
        train=tuple(train), test=tuple(sorted(test)), method="msc", seed=seed
    )


def random_split(n: int, test_fraction: float = 0.1, seed: int = 0) -> DatasetSplit:
    """Uniform split with ceil(n * fraction) test rows."""
    if n < 2:
        raise EvaluationError("need at least 2 rows to split")
    if not (0.0 < test_fraction <= 1.0):
        raise EvaluationError("test_fraction must be in (0, 1]")
    k = math.ceil(n * test_fraction)
    rng = SplitMix64(seed)
    test = sorted(rng.sample(list(range(n)), k))
    test_set = set(test)
    train = [i for i in range(n) if i not in test_set]
    if not train:
        raise DegenerateSplit("test fraction leaves no training rows")
    return DatasetSplit(
        train=tuple(train), test=tuple(test), method="random", seed=seed
    )


def logo_splits(groups: dict[int, list[int]]) -> list[DatasetSplit]:
    """One deterministic split per group: that group is the test set."""
    if len(groups) < 2:
        raise SingleGroup("leave-one-group-out needs at least 2 groups")
    universe = sorted(i for members in groups.values() for i in members)
    splits = []
    for gid in sorted(groups):
        members = sorted(groups[gid])
        if not members:
            raise EmptyGroup(f"group {gid} is empty")
        member_set = set(members)
        train = tuple(i for i in universe if i not in member_set)
        splits.append(
            DatasetSplit(train=train, test=tuple(members), method="logo", seed=gid)
        )
    return splits


def mae(pred, truth) -> float:
    p = np.asarray(pred, dtype=np.float64)
    t = np.asarray(truth, dtype=np.float64)
    if p.shape != t.shape or p.ndim != 1:
        raise LengthMismatch(f"shape mismatch: {p.shape} vs {t.shape}")
    if p.size == 0:
        raise EmptyInput("mae of empty vectors")
    return float(np.mean(np.abs(p - t)))


def _average_ranks(values: np.ndarray) -> np.ndarray:
    order = np.argsort(values, kind="stable")
    ranks = np.empty(values.size, dtype=np.float64)
    sorted_vals = values[order]
    i = 0
    while i < values.size:
        j = i
        while j + 1 < values.size and sorted_vals[j + 1] == sorted_vals[i]:
            j += 1
        ranks[order[i : j + 1]] = (i + j) / 2.0 + 1.0  # average of 1-based ranks
        i = j + 1
    return ranks


def spearman(pred, truth) -> float:
    """Pearson correlation of average-tied ranks."""
    p = np.asarray(pred, dtype=np.float64)
    t = np.asarray(truth, dtype=np.float64)
    if p.shape != t.shape or p.ndim != 1:
        raise LengthMismatch(f"shape mismatch: {p.shape} vs {t.shape}")
    if p.size < 2:
        raise EvaluationError("spearman needs at least 2 points")
    return selection.pearson(_average_ranks(p), _average_ranks(t))


@dataclass(frozen=True)
class EvalReport:
    method: str
    repeats: int
    master_seed: int
    pairs: tuple[tuple[float, float], ...]  # (mae, spearman) per repeat
    config: dict = field(default_factory=dict)

    @property
    def mae_mean(self) -> float:
        return float(np.mean([m for m, _ in self.pairs]))

    @property
    def mae_std(self) -> float | None:
        return _sample_std_or_none([m for m, _ in self.pairs])

    @property
    def spearman_mean(self) -> float:
        return float(np.mean([s for _, s in self.pairs]))

    @property
    def spearman_std(self) -> float | None:
        return _sample_std_or_none([s for _, s in self.pairs])

    def to_dict(self) -> dict:
        return {
            "method": self.method,
            "repeats": self.repeats,
            "master_seed": self.master_seed,
            "mae": {"mean": self.mae_mean, "std": self.mae_std},
            "spearman": {"mean": self.spearman_mean, "std": self.spearman_std},
            "per_repeat": [
                {"mae": m, "spearman": s} for m, s in self.pairs
            ],
            "config": self.config,
        }


def _sample_std_or_none(values) -> float | None:
    if len(values) < 2:
        return None
    return selection.sample_std(values)


def run_single(
    features: FeatureMatrix,
    targets: np.ndarray,
    split: DatasetSplit,
    model_config: TrainConfig,
    variance_threshold: float = selection.DEFAULT_VARIANCE_THRESHOLD,
    pcc_threshold: float = selection.DEFAULT_PCC_THRESHOLD,
    scope=selection.DEFAULT_SCOPE,
) -> tuple[float, float]:
    """Fit the selection pipeline and model on the training rows, score the
    test rows; returns (mae, spearman)."""
    train_matrix = features.rows(split.train)
    pipeline = selection.fit(
        train_matrix,
        variance_threshold=variance_threshold,
        pcc_threshold=pcc_threshold,
        scope=scope,
    )
    X_train = selection.apply(pipeline, train_matrix).values
    X_test = selection.apply(pipeline, features.rows(split.test)).values
    y_train = targets[list(split.train)]
    y_test = targets[list(split.test)]
    model = fit_model(X_train, y_train, model_config)
    pred = model.predict(X_test)
    return mae(pred, y_test), spearman(pred, y_test)


def repeated_eval(
    features: FeatureMatrix,
    targets,
    splitter: SplitterSpec,
    model_config: TrainConfig,
    repeats: int = 200,
    master_seed: int = 0,
    groups: dict[int, list[int]] | None = None,
    variance_threshold: float = selection.DEFAULT_VARIANCE_THRESHOLD,
    pcc_threshold: float = selection.DEFAULT_PCC_THRESHOLD,
    scope=selection.DEFAULT_SCOPE,
    threads: int = 1,
) -> EvalReport:
    """Repeat split / fit / score cycles and aggregate mean and sample std.

    Repeat ``i`` uses seed ``derive_seed(master_seed, i)``; the split and the
    model fit draw their own sub-seeds from it. Leave-one-group-out ignores
    ``repeats`` and runs each deterministic per-group split exactly once.
    """
    targets = np.asarray(targets, dtype=np.float64)
    if features.values.shape[0] != targets.shape[0]:
        raise EvaluationError("feature rows and targets differ in length")
    if splitter.kind in ("msc", "logo") and groups is None:
        raise EvaluationError(f"splitter {splitter.kind!r} needs scaffold groups")

    if splitter.kind == "logo":
        splits = logo_splits(groups)
    else:
        if repeats < 1:
            raise EvaluationError("repeats must be >= 1")
        splits = []
        for i in range(repeats):
            repeat_seed = derive_seed(master_seed, i)
            split_seed = derive_seed(repeat_seed, 0)
            if splitter.kind == "msc":
                splits.append(msc_split(groups, split_seed))
            else:
                splits.append(
                    random_split(
                        targets.shape[0], splitter.test_fraction, split_seed
                    )
                )

    def score(index_split: tuple[int, DatasetSplit]) -> tuple[float, float]:
        i, split = index_split
        repeat_seed = derive_seed(master_seed, i)
        config = model_config.with_seed(derive_seed(repeat_seed, 1))
        return run_single(
            features,
            targets,
            split,
            config,
            variance_threshold=variance_threshold,
            pcc_threshold=pcc_threshold,
            scope=scope,
        )

    tasks = list(enumerate(splits))
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            pairs = list(pool.map(score, tasks))
    else:
        pairs = [score(t) for t in tasks]

    return EvalReport(
        method=splitter.kind,
        repeats=len(splits),
        master_seed=master_seed,
        pairs=tuple(pairs),
        config={
            "splitter": splitter.kind,
            "test_fraction": splitter.test_fraction,
            "model": model_config.kind,
            "variance_threshold": variance_threshold,
            "pcc_threshold": pcc_threshold,
            "scope": sorted(scope),
            "threads_independent": True,
        },
    )


def render_report_text(reports: list[EvalReport]) -> str:
    """Plain-text table: one row per method, cells as ``mean ± std``."""
    header = f"{'Method':<10} {'MAE':>20} {'Spearman':>20}"
    lines = [header, "-" * len(header)]
    for report in reports:
        mae_std = report.mae_std
        sp_std = report.spearman_std
        mae_cell = f"{report.mae_mean:.4f} ± {mae_std:.4f}" if mae_std is not None else f"{report.mae_mean:.4f}"
        sp_cell = f"{report.spearman_mean:.4f} ± {sp_std:.4f}" if sp_std is not None else f"{report.spearman_mean:.4f}"
        lines.append(f"{report.method:<10} {mae_cell:>20} {sp_cell:>20}")
    return "\n".join(lines) + "\n"
