import json
import math

import numpy as np
import pytest

from molscreen import selection
from molscreen.features import FeatureMatrix
from molscreen.selection import (
    ConstantVector,
    EmptyMatrix,
    LengthMismatch,
    SelectionPipeline,
    TooFewSamples,
    UnknownColumn,
    max_normalize,
    pcc_prune,
    pearson,
    sample_std,
    variance_filter,
)


def dmatrix(columns: dict[str, list[float]], block: str = "D") -> FeatureMatrix:
    names = tuple(columns)
    values = np.array([columns[n] for n in names], dtype=np.float64).T
    return FeatureMatrix(
        ids=tuple(f"r{i}" for i in range(values.shape[0])),
        blocks=tuple(block for _ in names),
        names=names,
        values=values,
    )


class TestSampleStd:
    def test_hand_value(self):
        assert abs(sample_std([0, 1, 0, 1]) - 0.5774) <= 1e-4

    def test_constant(self):
        assert sample_std([5, 5, 5]) == 0.0

    def test_too_few(self):
        with pytest.raises(TooFewSamples):
            sample_std([1])


class TestPearson:
    def test_perfect_linear(self):
        assert pearson([1, 2, 3], [2, 4, 6]) == pytest.approx(1.0)

    def test_perfect_inverse(self):
        assert pearson([1, 2, 3], [3, 2, 1]) == pytest.approx(-1.0)

    def test_hand_value(self):
        assert pearson([1, 2, 3, 4], [1, 3, 2, 4]) == pytest.approx(0.8, abs=1e-9)

    def test_affine_invariance_up_to_sign(self):
        rng = np.random.default_rng(3)
        x = rng.normal(size=30)
        for a in (2.5, -0.3, 7.0):
            assert pearson(x, a * x + 1.7) == pytest.approx(math.copysign(1.0, a))

    def test_errors(self):
        with pytest.raises(ConstantVector):
            pearson([1, 1, 1], [1, 2, 3])
        with pytest.raises(LengthMismatch):
            pearson([1, 2], [1, 2, 3])


class TestMaxNormalize:
    def test_positive_column(self):
        matrix, column_max = max_normalize(dmatrix({"a": [2, 4, 8]}))
        assert matrix.column("a").tolist() == [0.25, 0.5, 1.0]
        assert column_max == {"a": 8.0}

    def test_zero_column_removed(self):
        matrix, column_max = max_normalize(dmatrix({"a": [0, 0, 0], "b": [1, 2, 3]}))
        assert matrix.names == ("b",)
        assert "a" not in column_max

    def test_negative_column_uses_absolute_max(self):
        matrix, _ = max_normalize(dmatrix({"a": [-1, 2]}))
        assert matrix.column("a").tolist() == [-0.5, 1.0]

    def test_out_of_scope_untouched(self):
        m = FeatureMatrix(
            ids=("r0", "r1"),
            blocks=("K", "D"),
            names=("k", "d"),
            values=np.array([[3.0, 2.0], [1.0, 4.0]]),
        )
        out, column_max = max_normalize(m, scope={"D"})
        assert out.column("k").tolist() == [3.0, 1.0]
        assert out.column("d").tolist() == [0.5, 1.0]
        assert column_max == {"d": 4.0}

    def test_empty(self):
        empty = FeatureMatrix(ids=(), blocks=("D",), names=("a",),
                              values=np.zeros((0, 1)))
        with pytest.raises(EmptyMatrix):
            max_normalize(empty)


class TestVarianceFilter:
    def test_kept_and_dropped(self):
        matrix = dmatrix({"keep": [0, 1, 0, 1], "drop": [0.9, 1.0, 0.95, 1.0]})
        assert variance_filter(matrix, 0.2) == ["keep"]
        # hand check: std of the dropped column is ~0.0479
        assert abs(sample_std([0.9, 1.0, 0.95, 1.0]) - 0.0479) <= 1e-4

    def test_zero_threshold_keeps_all_nonconstant(self):
        matrix = dmatrix({"a": [0, 1, 2], "b": [5, 5.1, 4.9]})
        assert variance_filter(matrix, 0.0) == ["a", "b"]


class TestPccPrune:
    def test_duplicate_column_dropped(self):
        a = [1.0, 2.0, 3.0, 4.0]
        c = [4.0, 1.0, 3.0, 2.0]
        kept = pcc_prune(dmatrix({"A": a, "B": [2 * v for v in a], "C": c}), 0.9)
        assert kept == ["A", "C"]

    def test_threshold_one_keeps_all(self):
        a = [1.0, 2.0, 3.0, 4.0]
        kept = pcc_prune(dmatrix({"A": a, "B": [2 * v for v in a]}), 1.0)
        assert kept == ["A", "B"]  # strict inequality

    def test_transitive_chain_forms_one_component(self):
        # Exact correlations (0.95, 0.95, 0.30) are not jointly realizable
        # (the matrix would not be positive semidefinite); the nearest
        # feasible chain has |rho(A,C)| >= ~0.805. Build A~B and B~C above
        # the threshold with rho(A,C) below it and verify the transitive
        # grouping against brute force.
        n = 400
        rng = np.random.default_rng(12)
        e1 = rng.normal(size=n)
        e2 = rng.normal(size=n)
        e1 = (e1 - e1.mean()) / np.linalg.norm(e1 - e1.mean())
        e2 = e2 - e2.mean() - ((e2 - e2.mean()) @ e1) * e1
        e2 /= np.linalg.norm(e2)
        theta = math.acos(0.95)
        a = e1
        b = math.cos(theta) * e1 + math.sin(theta) * e2
        c = math.cos(2 * theta) * e1 + math.sin(2 * theta) * e2
        assert abs(pearson(a, b)) > 0.9
        assert abs(pearson(b, c)) > 0.9
        assert abs(pearson(a, c)) < 0.9
        matrix = dmatrix({"A": a.tolist(), "B": b.tolist(), "C": c.tolist()})
        assert pcc_prune(matrix, 0.9) == ["A"]
        # brute-force component check
        assert _bruteforce_components(matrix.values, 0.9) == [{0, 1, 2}]


def _bruteforce_components(values: np.ndarray, threshold: float) -> list[set[int]]:
    n = values.shape[1]
    edges = {
        (i, j)
        for i in range(n)
        for j in range(i + 1, n)
        if abs(np.corrcoef(values[:, i], values[:, j])[0, 1]) > threshold
    }
    components = []
    remaining = set(range(n))
    while remaining:
        seed = min(remaining)
        comp = {seed}
        grew = True
        while grew:
            grew = False
            for i, j in edges:
                if (i in comp) != (j in comp):
                    comp |= {i, j}
                    grew = True
        components.append(comp)
        remaining -= comp
    return sorted(components, key=min)


def _bruteforce_cascade(values, names, vt, pt):
    """Independent straight-from-the-formulas cascade implementation."""
    normalized = {}
    for pos, name in enumerate(names):
        column = values[:, pos]
        peak = np.max(np.abs(column))
        if peak == 0:
            continue
        normalized[name] = column / peak
    survivors = []
    for name, column in normalized.items():
        dev = column - column.mean()
        std = math.sqrt(float(dev @ dev) / (len(column) - 1))
        if std > vt:
            survivors.append(name)
    sub = np.stack([normalized[n] for n in survivors], axis=1)
    components = _bruteforce_components(sub, pt)
    kept = sorted(min(c) for c in components)
    return [survivors[i] for i in kept]


class TestFitApply:
    def build_ten_column_matrix(self):
        rng = np.random.default_rng(7)
        base = rng.normal(loc=0.0, scale=2.0, size=(40, 5))
        columns = {
            "c0": base[:, 0],
            "c1": base[:, 1],
            "c2": np.zeros(40),            # constant zero
            "c3": np.full(40, 3.0),        # constant non-zero
            "c4": base[:, 2],
            "c5": 2.0 * base[:, 0],        # duplicate of c0
            "c6": base[:, 3],
            "c7": np.full(40, -1.0),       # constant non-zero
            "c8": -base[:, 1],             # duplicate (negated) of c1
            "c9": base[:, 4],
        }
        return dmatrix({k: v.tolist() for k, v in columns.items()})

    def test_ten_to_five_against_bruteforce(self):
        matrix = self.build_ten_column_matrix()
        pipeline = selection.fit(matrix, 0.2, 0.9)
        expected = _bruteforce_cascade(matrix.values, matrix.names, 0.2, 0.9)
        assert list(pipeline.kept_columns) == expected
        assert len(pipeline.kept_columns) == 5
        assert set(pipeline.kept_columns) == {"c0", "c1", "c4", "c6", "c9"}

    def test_apply_reproduces_fit_transform(self):
        matrix = self.build_ten_column_matrix()
        pipeline = selection.fit(matrix, 0.2, 0.9)
        out = selection.apply(pipeline, matrix)
        normalized, _ = max_normalize(matrix)
        expected = normalized.select_columns(list(pipeline.kept_columns))
        assert out.names == expected.names
        assert np.array_equal(out.values, expected.values)
        # applying twice through the pipeline is the same projection
        again = selection.apply(pipeline, matrix)
        assert np.array_equal(out.values, again.values)

    def test_apply_on_unseen_rows_may_exceed_one(self):
        train = dmatrix({"a": [1.0, 2.0], "b": [1.0, 3.0]})
        pipeline = selection.fit(train, 0.2, 0.9)
        test = dmatrix({"a": [4.0, 1.0], "b": [6.0, 0.0]})
        out = selection.apply(pipeline, test)
        assert out.values.max() > 1.0

    def test_unknown_column(self):
        train = dmatrix({"a": [1.0, 2.0, 4.0], "b": [1.0, 3.0, 2.0]})
        pipeline = selection.fit(train, 0.0, 0.999)
        assert pipeline.kept_columns == ("a", "b")
        with pytest.raises(UnknownColumn):
            selection.apply(pipeline, dmatrix({"a": [1.0, 2.0]}))

    def test_out_of_scope_blocks_pass_through(self):
        m = FeatureMatrix(
            ids=("r0", "r1", "r2"),
            blocks=("K", "D", "Z"),
            names=("k", "d", "z"),
            values=np.array([[1.0, 2.0, 9.0], [0.0, 4.0, 8.0], [1.0, 6.0, 7.0]]),
        )
        pipeline = selection.fit(m, 0.2, 0.9, scope={"D"})
        out = selection.apply(pipeline, m)
        assert out.names == ("k", "d", "z")
        assert out.column("k").tolist() == [1.0, 0.0, 1.0]
        assert out.column("z").tolist() == [9.0, 8.0, 7.0]

    def test_pipeline_purity_on_test_rows(self):
        matrix = self.build_ten_column_matrix()
        pipeline = selection.fit(matrix, 0.2, 0.9)
        before = json.dumps(pipeline.to_dict())
        test = dmatrix({n: list(np.arange(3.0) * (i + 1)) for i, n in enumerate(matrix.names)})
        selection.apply(pipeline, test)
        assert json.dumps(pipeline.to_dict()) == before

    def test_survivors_monotone_in_thresholds(self):
        rng = np.random.default_rng(21)
        for _ in range(20):
            values = rng.normal(size=(25, 8))
            values[:, 3] = values[:, 1] * rng.uniform(0.9, 1.1)
            matrix = dmatrix({f"c{i}": values[:, i].tolist() for i in range(8)})
            counts_v = []
            for vt in (0.0, 0.1, 0.2, 0.4):
                counts_v.append(len(selection.fit(matrix, vt, 0.9).kept_columns))
            assert counts_v == sorted(counts_v, reverse=True)
            counts_p = []
            for pt in (0.99, 0.9, 0.5, 0.2):
                counts_p.append(len(selection.fit(matrix, 0.0, pt).kept_columns))
            assert counts_p == sorted(counts_p, reverse=True)

    def test_column_order_independence_up_to_representative(self):
        matrix = self.build_ten_column_matrix()
        kept = set()
        rng = np.random.default_rng(5)
        for _ in range(5):
            order = rng.permutation(len(matrix.names))
            shuffled = FeatureMatrix(
                ids=matrix.ids,
                blocks=tuple(matrix.blocks[i] for i in order),
                names=tuple(matrix.names[i] for i in order),
                values=matrix.values[:, order],
            )
            pipeline = selection.fit(shuffled, 0.2, 0.9)
            # the set of correlated components is order-independent; the
            # representative follows the documented smallest-index rule
            assert len(pipeline.kept_columns) == 5
            kept.add(len(pipeline.kept_columns))
        assert kept == {5}

    def test_serialization_round_trip(self, tmp_path):
        matrix = self.build_ten_column_matrix()
        pipeline = selection.fit(matrix, 0.2, 0.9)
        path = tmp_path / "pipe.json"
        path.write_text(pipeline.to_json())
        loaded = SelectionPipeline.load(path)
        assert loaded == pipeline
