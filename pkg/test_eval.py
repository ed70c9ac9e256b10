#!/usr/bin/env python3
"""
Tests for the ranking metrics and the external clustering-validity metrics.
"""

import math
import os
import sys
from collections import Counter

sys.path.insert(0, os.path.dirname(os.path.abspath(__file__)))

import numpy as np
import pytest

from src.errors import InputError
from src.evaluation.metrics import LabeledScores, auprc, auroc, pr_points, roc_points
from src.evaluation.validity import (
    PartitionPair, all_validity, entropy, extract_outlier_partition, f_measure, mirkin, purity,
    truth_partition_from_labels, vi,
)
from src.storage.scores import ScoreTable


def pair_count_auroc(scores, labels):
    pos = scores[labels == 1]
    neg = scores[labels == 0]
    wins = sum((a > b) + 0.5 * (a == b) for a in pos for b in neg)
    return wins / (len(pos) * len(neg))


def step_average_precision(scores, labels):
    total = labels.sum()
    area, last_recall = 0.0, 0.0
    for t in sorted(set(scores.tolist()), reverse=True):
        hit = scores >= t
        tp = labels[hit].sum()
        recall = tp / total
        area += (recall - last_recall) * tp / hit.sum()
        last_recall = recall
    return area


def random_scored(rng, n):
    labels = np.zeros(n, dtype=int)
    labels[rng.choice(n, size=int(rng.integers(1, n)), replace=False)] = 1
    scores = np.round(rng.standard_normal(n) + labels, 1)  # rounding forces ties
    return scores, labels


def validity_oracle(predicted, truth):
    """Dictionary-based metrics straight from their definitions."""
    n = len(predicted)
    cells = Counter(zip(predicted, truth))
    cs = Counter(predicted)
    ds = Counter(truth)
    l = len(ds)
    pur = sum(max(cells[(c, d)] for d in ds) for c in cs) / n
    mk = (sum(v * v for v in cs.values()) + sum(v * v for v in ds.values())
          - 2 * sum(v * v for v in cells.values())) / n ** 2
    fm = 0.0
    for c in cs:
        best = 0.0
        for d in ds:
            m = cells[(c, d)]
            if m:
                prec, rec = m / cs[c], m / ds[d]
                best = max(best, 2 * prec * rec / (prec + rec))
        fm += cs[c] / n * best
    ent = 0.0
    if l > 1:
        for c in cs:
            h = -sum(cells[(c, d)] / cs[c] * math.log(cells[(c, d)] / cs[c]) for d in ds if cells[(c, d)])
            ent += cs[c] / n * h / math.log(l)
    v = 0.0
    if n > 1:
        v = sum(m * math.log(cs[c] * ds[d] / m ** 2) for (c, d), m in cells.items()) / (n * math.log(n))
    return {"purity": pur, "mirkin": mk, "f_measure": fm, "entropy": ent, "vi": v}


class TestRanking:
    def test_known_values(self):
        assert auroc(LabeledScores([0.9, 0.8, 0.7, 0.1], [1, 1, 0, 0])) == pytest.approx(1.0)
        assert auroc(LabeledScores([0.9, 0.1, 0.8, 0.2], [1, 0, 0, 1])) == pytest.approx(0.75)
        assert auroc(LabeledScores([0.5] * 4, [1, 0, 1, 0])) == pytest.approx(0.5)
        assert auprc(LabeledScores([0.9, 0.8, 0.7, 0.1], [1, 1, 0, 0])) == pytest.approx(1.0)

    def test_matches_pair_counting(self):
        rng = np.random.default_rng(50)
        for _ in range(100):
            scores, labels = random_scored(rng, int(rng.integers(2, 200)))
            assert auroc(LabeledScores(scores, labels)) == pytest.approx(pair_count_auroc(scores, labels), abs=1e-12)

    def test_matches_step_average_precision(self):
        rng = np.random.default_rng(51)
        for _ in range(100):
            scores, labels = random_scored(rng, int(rng.integers(2, 200)))
            expected = step_average_precision(scores, labels)
            assert auprc(LabeledScores(scores, labels)) == pytest.approx(expected, abs=1e-12)

    def test_invariant_under_monotone_transform(self):
        rng = np.random.default_rng(52)
        scores, labels = random_scored(rng, 150)
        before = LabeledScores(scores, labels)
        after = LabeledScores(np.exp(scores) * 3.0 + 1.0, labels)
        assert auroc(after) == pytest.approx(auroc(before), abs=1e-12)
        assert auprc(after) == pytest.approx(auprc(before), abs=1e-12)

    def test_single_class_is_rejected(self):
        with pytest.raises(InputError):
            LabeledScores([0.1, 0.2], [0, 0])
        with pytest.raises(InputError):
            LabeledScores([0.1, 0.2], [1, 1])
        with pytest.raises(InputError):
            LabeledScores([0.1, 0.2], [0, 2])
        with pytest.raises(InputError):
            LabeledScores([0.1, 0.2, 0.3], [0, 1])

    def test_curve_points(self):
        ls = LabeledScores([0.9, 0.1, 0.8, 0.2], [1, 0, 0, 1])
        roc = roc_points(ls)
        assert roc[0] == (0.0, 0.0) and roc[-1] == (1.0, 1.0)
        pr = pr_points(ls)
        recalls = [r for r, _ in pr]
        assert recalls == sorted(recalls)
        assert recalls[-1] == 1.0


class TestValidity:
    def test_identity(self):
        labels = np.array([1, 1, 2, 2, 3, 3, 3])
        values = all_validity(PartitionPair(labels, labels))
        assert values == pytest.approx({"purity": 1.0, "mirkin": 0.0, "f_measure": 1.0, "entropy": 0.0, "vi": 0.0})

    def test_small_example(self):
        pp = PartitionPair([1, 1, 1, 2, 2], [1, 1, 2, 2, 2])
        assert purity(pp) == pytest.approx(0.8)
        assert mirkin(pp) == pytest.approx(8 / 25)
        assert f_measure(pp) == pytest.approx(0.8)
        h = -(2 / 3 * math.log(2 / 3) + 1 / 3 * math.log(1 / 3)) / math.log(2)
        assert entropy(pp) == pytest.approx(0.6 * h)

    def test_matches_definitions(self):
        rng = np.random.default_rng(53)
        for _ in range(100):
            n = int(rng.integers(1, 120))
            predicted = rng.integers(1, int(rng.integers(2, 7)), size=n)
            truth = rng.integers(1, int(rng.integers(2, 5)), size=n)
            got = all_validity(PartitionPair(predicted, truth))
            expected = validity_oracle(predicted.tolist(), truth.tolist())
            for key, value in expected.items():
                assert got[key] == pytest.approx(value, abs=1e-12), key

    def test_symmetric_metrics_and_bounds(self):
        rng = np.random.default_rng(54)
        for _ in range(50):
            a = rng.integers(1, 5, size=60)
            b = rng.integers(1, 4, size=60)
            ab, ba = PartitionPair(a, b), PartitionPair(b, a)
            assert mirkin(ab) == pytest.approx(mirkin(ba), abs=1e-12)
            assert vi(ab) == pytest.approx(vi(ba), abs=1e-12)
            values = all_validity(ab)
            assert 0 < values["purity"] <= 1
            assert 0 <= values["f_measure"] <= 1
            assert 0 <= values["entropy"] <= 1 + 1e-12
            assert values["mirkin"] >= 0 and values["vi"] >= 0

    def test_unassigned_elements_rejected(self):
        with pytest.raises(InputError):
            PartitionPair([0, 1], [1, 1])
        with pytest.raises(InputError):
            PartitionPair([1, 1], [1])

    def test_truth_from_labels(self):
        assert truth_partition_from_labels(np.array([0, 1, 1, 0])).tolist() == [1, 2, 2, 1]


class TestOutlierPartition:
    def test_top_scores_form_the_anomaly_cluster(self):
        table = ScoreTable(index=[3, 1, 0, 2], score=[0.5, 9.0, 1.0, 7.0], cluster=[2, 4, 2, 4])
        partition = extract_outlier_partition(table, 2)
        # rows 1 and 2 hold the top scores; rows 0 and 3 both sit in cluster 2
        assert partition.tolist() == [1, 2, 2, 1]

    def test_ties_at_the_cut_go_to_the_lowest_index(self):
        table = ScoreTable(index=[0, 1, 2, 3], score=[5.0, 3.0, 3.0, 1.0], cluster=[1, 3, 3, 1])
        assert extract_outlier_partition(table, 2).tolist() == [3, 3, 2, 1]

    def test_all_but_one(self):
        table = ScoreTable(index=[0, 1, 2], score=[3.0, 2.0, 1.0], cluster=[1, 1, 2])
        assert extract_outlier_partition(table, 2).tolist() == [2, 2, 1]

    def test_o_out_of_range(self):
        table = ScoreTable(index=[0, 1], score=[1.0, 2.0], cluster=[1, 1])
        with pytest.raises(InputError):
            extract_outlier_partition(table, 0)
        with pytest.raises(InputError):
            extract_outlier_partition(table, 2)


if __name__ == "__main__":
    sys.exit(pytest.main([__file__, "-v"]))
