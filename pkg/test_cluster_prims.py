#!/usr/bin/env python3
"""
Tests for DBSCAN, the coherence check and K-means.
"""

import os
import sys

sys.path.insert(0, os.path.dirname(os.path.abspath(__file__)))

import numpy as np
import pytest

from src.clustering.dbscan import NOISE, coherence_check, dbscan
from src.clustering.kmeans import kmeans
from src.errors import InputError
from src.models.params import DbscanParams


def reference_dbscan(X, eps, min_pts):
    """
    Quadratic DBSCAN: core points from the full distance matrix, clusters as
    connected components of cores in order of their lowest-index core, and
    each border point given to the first cluster that reaches it.
    """
    s = X.shape[0]
    d2 = ((X[:, None, :] - X[None, :, :]) ** 2).sum(axis=2)
    adj = d2 <= eps * eps
    core = adj.sum(axis=1) >= min_pts
    labels = np.zeros(s, dtype=np.int64)
    cluster = 0
    for i in range(s):
        if not core[i] or labels[i] != 0:
            continue
        cluster += 1
        stack = [i]
        component = set()
        while stack:
            j = stack.pop()
            if j in component:
                continue
            component.add(j)
            stack.extend(int(k) for k in np.flatnonzero(adj[j] & core) if k not in component)
        for j in component:
            labels[j] = cluster
        for j in component:
            for k in np.flatnonzero(adj[j]):
                if not core[k] and labels[k] == 0:
                    labels[k] = cluster
    return labels, cluster


class TestDbscan:
    def test_matches_quadratic_reference(self):
        rng = np.random.default_rng(10)
        for _ in range(200):
            s = int(rng.integers(1, 150))
            p = int(rng.integers(1, 6))
            centers = rng.uniform(-5, 5, size=(int(rng.integers(1, 4)), p))
            X = centers[rng.integers(len(centers), size=s)] + rng.standard_normal((s, p))
            params = DbscanParams(eps=float(rng.uniform(0.3, 2.5)), min_pts=int(rng.integers(1, 8)))
            expected, k = reference_dbscan(X, params.eps, params.min_pts)
            for index in ("brute", "kdtree"):
                part = dbscan(X, params, index=index)
                assert part.k == k
                np.testing.assert_array_equal(part.assignments, expected)

    def test_translation_invariant(self):
        rng = np.random.default_rng(12)
        for _ in range(20):
            X = rng.uniform(-4, 4, size=(3, 3))[rng.integers(3, size=120)] + rng.standard_normal((120, 3))
            params = DbscanParams(eps=float(rng.uniform(0.4, 1.5)), min_pts=int(rng.integers(2, 7)))
            shift = np.array([7.25, -3.5, 12.0])
            np.testing.assert_array_equal(dbscan(X + shift, params).assignments, dbscan(X, params).assignments)

    def test_core_and_clustered_sets_grow_with_eps(self):
        rng = np.random.default_rng(13)
        X = np.vstack([rng.standard_normal((80, 2)), rng.uniform(-6, 6, size=(40, 2))])
        d2 = ((X[:, None, :] - X[None, :, :]) ** 2).sum(axis=2)
        previous_core = previous_clustered = None
        for eps in (0.2, 0.35, 0.5, 0.8, 1.2):
            core = (d2 <= eps * eps).sum(axis=1) >= 5
            clustered = dbscan(X, DbscanParams(eps=eps, min_pts=5)).assignments != NOISE
            assert np.all(clustered[core])
            if previous_core is not None:
                assert np.all(core[previous_core])
                assert np.all(clustered[previous_clustered])
            previous_core, previous_clustered = core, clustered

    def test_border_point_goes_to_first_cluster(self):
        # two cores on either side of a shared border point at x=1
        X = np.array([[0.0], [-0.5], [-0.9], [1.0], [2.0], [2.5], [2.9]])
        part = dbscan(X, DbscanParams(eps=1.0, min_pts=4))
        assert part.k == 2
        assert part.assignments[3] == 1

    def test_noise_and_ids(self):
        X = np.array([[0.0, 0.0], [0.1, 0.0], [0.0, 0.1], [10.0, 10.0]])
        part = dbscan(X, DbscanParams(eps=0.5, min_pts=3))
        assert part.k == 1
        assert part.assignments.tolist() == [1, 1, 1, NOISE]
        assert part.noise_count == 1
        assert [g.tolist() for g in part.groups()] == [[0, 1, 2]]

    def test_min_pts_one_puts_every_point_in_a_cluster(self):
        X = np.array([[0.0], [5.0], [10.0]])
        part = dbscan(X, DbscanParams(eps=1.0, min_pts=1))
        assert part.k == 3
        assert part.noise_count == 0

    def test_empty_input(self):
        with pytest.raises(InputError):
            dbscan(np.empty((0, 2)), DbscanParams(eps=1.0, min_pts=2))

    def test_invalid_params(self):
        with pytest.raises(ValueError):
            DbscanParams(eps=0.0, min_pts=2)
        with pytest.raises(ValueError):
            DbscanParams(eps=1.0, min_pts=0)

    def test_coherence(self):
        rng = np.random.default_rng(11)
        blob = rng.standard_normal((80, 2)) * 0.3
        params = DbscanParams(eps=0.5, min_pts=4)
        assert coherence_check(blob, params)
        assert not coherence_check(np.vstack([blob, blob + 20.0]), params)


class TestKMeans:
    def test_recovers_separated_blobs(self):
        rng = np.random.default_rng(12)
        centers = np.array([[0.0, 0.0], [50.0, 0.0], [0.0, 50.0]])
        X = np.vstack([c + rng.standard_normal((40, 2)) for c in centers])
        result = kmeans(X, 3, seed=0)
        assert result.partition.k == 3
        assert result.partition.noise_count == 0
        for block in range(3):
            ids = result.partition.assignments[block * 40:(block + 1) * 40]
            assert len(set(ids.tolist())) == 1
        assert result.partition.assignments[0] == 1  # ids in order of first appearance

    def test_deterministic_for_seed(self):
        rng = np.random.default_rng(13)
        X = rng.standard_normal((100, 3))
        a = kmeans(X, 4, seed=7)
        b = kmeans(X, 4, seed=7)
        np.testing.assert_array_equal(a.partition.assignments, b.partition.assignments)
        assert a.sse == b.sse

    def test_single_cluster_and_bounds(self):
        X = np.arange(10.0).reshape(5, 2)
        result = kmeans(X, 1, seed=0)
        assert result.partition.assignments.tolist() == [1] * 5
        np.testing.assert_allclose(result.centers[0], X.mean(axis=0))
        with pytest.raises(InputError):
            kmeans(X, 6, seed=0)
        with pytest.raises(InputError):
            kmeans(X, 0, seed=0)

    def test_duplicate_points(self):
        X = np.vstack([np.zeros((5, 2)), np.ones((5, 2))])
        result = kmeans(X, 2, seed=1)
        assert result.sse == pytest.approx(0.0)


if __name__ == "__main__":
    sys.exit(pytest.main([__file__, "-v"]))
