#!/usr/bin/env python3
"""
Tests for the minicluster model, retained-set handling, the final model,
scoring and the detector service.
"""

import math
import os
import sys

sys.path.insert(0, os.path.dirname(os.path.abspath(__file__)))

import numpy as np
import pytest

from conftest import BLOB_EPS, BLOB_MIN_PTS
from src.core.linalg import derive_basis, log_cov_determinant
from src.core.stats import SuffStats
from src.errors import InfeasibleError, InputError, InvariantError
from src.evaluation.metrics import LabeledScores, auprc, auroc
from src.models.config import RunConfig
from src.models.params import DbscanParams, TunedParams
from src.pipeline.final_model import (
    FinalCluster, FinalModel, build_final_model, merge_group, regeneration_count,
)
from src.pipeline.minicluster import GuardAudit, TemporaryModel, minicluster_make, minicluster_update
from src.pipeline.retained import retset_clust, retset_memb, split_irregular
from src.pipeline.scoring import score_dataset, score_points
from src.pipeline.sdcor import SDCORDetector, build_initial_model, process_chunk
from src.storage.dataset import SampleSet, open_dataset, write_dataset
from src.storage.scores import read_scores
from src.synth.generator import NOISE_RAMP_ETA, NOISE_RAMP_K, generate_noise_ramp, write_generated


def gaussian(center, n, seed, scale=1.0):
    rng = np.random.default_rng(seed)
    return np.asarray(center, dtype=float) + rng.standard_normal((n, len(center))) * scale


def two_cluster_model(alpha=2.0):
    model = TemporaryModel(energy=1.0, alpha=alpha, p=2)
    minicluster_make(model, [gaussian([0, 0], 200, 1), gaussian([20, 0], 200, 2)])
    model.t_initial = 2
    model.log_det_thresholds = np.array([log_cov_determinant(mc.stats) for mc in model.miniclusters])
    model.initial_size = model.absorbed
    return model


def blob_config(**kwargs):
    values = dict(eta=0.2, eps=BLOB_EPS, min_pts=BLOB_MIN_PTS, chunks=5, seed=0, label_column=True)
    values.update(kwargs)
    return RunConfig(**values)


class TestMiniclusters:
    def test_sampling_stage_numbering(self):
        model = two_cluster_model()
        assert [mc.nearest_initial for mc in model.miniclusters] == [0, 1]
        with pytest.raises(InputError):
            minicluster_make(model, [gaussian([5, 5], 10, 3)])

    def test_singular_group_rejected(self):
        model = TemporaryModel(energy=1.0, alpha=2.0, p=2)
        with pytest.raises(InputError):
            minicluster_make(model, [np.array([[0.0, 0.0], [1.0, 1.0], [2.0, 2.0]])])

    def test_update_absorbs_within_radius_only(self):
        model = two_cluster_model()
        before = model.absorbed
        points = np.array([[0.1, 0.0], [20.2, 0.1], [10.0, 10.0]])
        audit = GuardAudit()
        updated, leftover = minicluster_update(model, points, [0, 1], audit)
        assert updated == [0, 1]
        np.testing.assert_array_equal(leftover, [[10.0, 10.0]])
        assert model.absorbed == before + 2
        assert audit.absorptions == 2
        assert audit.max_absorb_ratio <= 1.0

    def test_update_matches_batch_statistics(self):
        model = two_cluster_model()
        base = gaussian([0, 0], 200, 1)
        extra = gaussian([0, 0], 50, 21, 0.5)
        updated, leftover = minicluster_update(model, extra, [0, 1])
        assert updated == [0] and leftover.shape == (0, 2)
        union = np.vstack([base, extra])
        mc = model.miniclusters[0]
        np.testing.assert_allclose(mc.stats.mean, union.mean(axis=0), rtol=0, atol=1e-9)
        np.testing.assert_allclose(mc.stats.covariance, np.cov(union, rowvar=False), rtol=0, atol=1e-9)
        batch = derive_basis(SuffStats.from_points(union), 1.0)
        np.testing.assert_allclose(mc.basis.sqrt_vars, batch.sqrt_vars, rtol=1e-9)

    def test_update_ignores_non_candidates(self):
        model = two_cluster_model()
        updated, leftover = minicluster_update(model, np.array([[20.0, 0.0]]), [0])
        assert updated == []
        assert leftover.shape == (1, 2)

    def test_nearest_initial(self):
        model = two_cluster_model()
        assert model.nearest_initial(np.array([18.0, 1.0])) == 1

    def test_guard_audit_raises_on_violation(self):
        audit = GuardAudit()
        with pytest.raises(InvariantError):
            audit.record_absorptions(np.array([3.0]), np.array([2.0]))
        with pytest.raises(InvariantError):
            audit.record_creation(log_det=1.0, log_threshold=0.0)


class TestRetainedSet:
    def test_membership_sweep_terminates(self):
        model = two_cluster_model()
        retained = np.vstack([gaussian([0, 0], 20, 4, 0.5), [[50.0, 50.0]]])
        left = retset_memb(model, retained, [0, 1])
        np.testing.assert_array_equal(left, [[50.0, 50.0]])

    def test_second_round_absorption(self):
        # cross of four points: mean 0, covariance diag(2/3, 2/3), radius 2 * sqrt(2)
        cross = np.array([[1.0, 0.0], [-1.0, 0.0], [0.0, 1.0], [0.0, -1.0]])
        near, far = [2.0, 0.0], [2.5, 0.0]

        single = TemporaryModel(energy=1.0, alpha=2.0, p=2)
        minicluster_make(single, [cross])
        updated, leftover = minicluster_update(single, np.array([near, far]), [0])
        assert updated == [0]
        np.testing.assert_array_equal(leftover, [far])

        # after absorbing `near` the covariance is diag(1.3, 0.5) around (0.4, 0)
        swept = TemporaryModel(energy=1.0, alpha=2.0, p=2)
        minicluster_make(swept, [cross])
        left = retset_memb(swept, np.array([near, far]), [0])
        assert left.shape == (0, 2)
        assert swept.miniclusters[0].size == 6

    def test_retained_cluster_becomes_minicluster(self):
        model = two_cluster_model()
        new_blob = gaussian([0, 40], 60, 5, 0.3)
        retained = np.vstack([new_blob, [[100.0, 100.0]]])
        audit = GuardAudit()
        left, created, counts = retset_clust(model, retained, DbscanParams(eps=0.5, min_pts=4), audit=audit)
        assert counts.regular >= 1
        assert len(created) == counts.regular
        assert all(model.miniclusters[c].nearest_initial == 0 for c in created)
        assert audit.creations == len(created)
        assert any(np.array_equal(row, [100.0, 100.0]) for row in left)

    def test_irregular_cluster_is_split(self):
        rng = np.random.default_rng(6)
        # two tight blobs joined by a dense bridge: one DBSCAN cluster, determinant too large
        left_blob = gaussian([0, 0], 80, 7, 0.2)
        right_blob = gaussian([6, 0], 80, 8, 0.2)
        bridge = np.column_stack([np.linspace(0, 6, 120), rng.normal(0, 0.02, 120)])
        points = np.vstack([left_blob, right_blob, bridge])
        threshold = log_cov_determinant(SuffStats.from_points(left_blob)) + math.log(4.0)
        pieces = split_irregular(points, threshold, DbscanParams(eps=0.3, min_pts=4), seed=0)
        assert pieces is not None and len(pieces) >= 2
        assert sum(len(p) for p in pieces) == len(points)
        for piece in pieces:
            assert log_cov_determinant(SuffStats.from_points(piece)) <= threshold

    def test_no_acceptable_split(self):
        points = gaussian([0, 0], 12, 9)
        assert split_irregular(points, -50.0, DbscanParams(eps=1.0, min_pts=2), seed=0) is None


class TestFinalModel:
    def test_regeneration_count(self):
        assert regeneration_count(1000, 0.01, 2) == 10
        assert regeneration_count(100, 0.01, 2) == 3

    def test_single_minicluster_kept_as_is(self):
        model = two_cluster_model()
        cluster = merge_group([model.miniclusters[0]], 0.01, 2.0, np.random.default_rng(0))
        np.testing.assert_array_equal(cluster.mu, model.miniclusters[0].stats.mean)
        np.testing.assert_array_equal(cluster.sigma, model.miniclusters[0].stats.covariance)

    def test_merged_mean_is_size_weighted(self):
        model = two_cluster_model()
        minicluster_make(model, [gaussian([1, 1], 100, 10)], nu=0)
        group = [model.miniclusters[0], model.miniclusters[2]]
        cluster = merge_group(group, 0.5, 2.0, np.random.default_rng(1))
        expected = (200 * group[0].stats.mean + 100 * group[1].stats.mean) / 300
        np.testing.assert_allclose(cluster.mu, expected)
        assert cluster.size == 300

    def test_build_is_deterministic(self):
        model = two_cluster_model()
        minicluster_make(model, [gaussian([1, 1], 100, 10)], nu=0)
        a = build_final_model(model, 0.5, 2.0, seed=3)
        b = build_final_model(model, 0.5, 2.0, seed=3)
        assert a.t == 2
        np.testing.assert_array_equal(a.clusters[0].sigma, b.clusters[0].sigma)

    def test_tiles_of_one_gaussian_recover_its_covariance(self):
        sigma = np.array([[4.0, 1.2], [1.2, 1.0]])
        errors = []
        for seed in range(20):
            rng = np.random.default_rng(100 + seed)
            points = rng.multivariate_normal([3.0, -1.0], sigma, size=3000)
            tiles = np.array_split(points[np.argsort(points[:, 0])], 3)
            model = TemporaryModel(energy=1.0, alpha=2.0, p=2)
            minicluster_make(model, tiles[:1])
            model.t_initial = 1
            model.log_det_thresholds = np.array([log_cov_determinant(model.miniclusters[0].stats)])
            minicluster_make(model, tiles[1:], nu=0)
            fm = build_final_model(model, 0.5, 2.0, seed=seed)
            assert fm.t == 1 and fm.clusters[0].size == 3000
            errors.append(np.linalg.norm(fm.clusters[0].sigma - sigma) / np.linalg.norm(sigma))
        assert max(errors) < 0.25

    def test_pruning_too_tight(self):
        model = two_cluster_model()
        minicluster_make(model, [gaussian([1, 1], 100, 10)], nu=0)
        with pytest.raises(InfeasibleError):
            build_final_model(model, 0.01, 0.01, seed=0)

    def test_scoring_picks_nearest_cluster(self):
        fm = FinalModel(
            clusters=[FinalCluster.from_moments(np.zeros(2), np.eye(2), 10),
                      FinalCluster.from_moments(np.array([10.0, 0.0]), np.eye(2), 10)],
            energy=1.0, alpha=2.0, beta=2.0, eta=0.1,
        )
        scores, ids = score_points(np.array([[1.0, 0.0], [9.0, 0.0], [5.0, 0.0]]), fm)
        np.testing.assert_allclose(scores, [1.0, 1.0, 5.0])
        assert ids.tolist() == [1, 2, 1]
        with pytest.raises(InputError):
            score_points(np.zeros((1, 3)), fm)

    def test_score_dataset_matches_explicit_inverse(self, tmp_path):
        rng = np.random.default_rng(17)
        clusters = []
        for center in ([0.0, 0.0, 0.0], [8.0, -3.0, 5.0]):
            A = rng.normal(size=(3, 3))
            clusters.append(FinalCluster.from_moments(np.array(center), A @ A.T + 0.5 * np.eye(3), 100))
        fm = FinalModel(clusters=clusters, energy=1.0, alpha=2.0, beta=2.0, eta=0.1)

        X = rng.normal(loc=2.0, scale=4.0, size=(1000, 3))
        path = str(tmp_path / "points.csv")
        write_dataset(X, None, path)
        table = score_dataset(open_dataset(path, chunks=7), fm)

        distances = np.column_stack([
            np.sqrt(np.einsum("ij,jk,ik->i", X - c.mu, np.linalg.inv(c.sigma), X - c.mu))
            for c in clusters
        ])
        np.testing.assert_allclose(table.score, distances.min(axis=1), rtol=1e-8, atol=1e-8)
        np.testing.assert_array_equal(table.cluster, distances.argmin(axis=1) + 1)
        np.testing.assert_array_equal(table.index, np.arange(1000))


class TestDetector:
    def test_all_noise_sample_is_infeasible(self):
        X = gaussian([0, 0], 30, 11)
        sample = SampleSet(rows=X, source_indices=np.arange(30), rate=1.0, n_total=30)
        params = TunedParams.from_sample_params(DbscanParams(eps=1e-6, min_pts=4))
        with pytest.raises(InfeasibleError):
            build_initial_model(sample, params, 1.0, 2.0)

    def test_process_chunk_conserves_points(self):
        model = two_cluster_model()
        start = model.absorbed
        chunk = np.vstack([gaussian([0, 0], 50, 12), gaussian([0, 40], 40, 13, 0.3), [[99.0, 99.0]]])
        retained, counts = process_chunk(model, chunk, np.empty((0, 2)), DbscanParams(eps=0.5, min_pts=4))
        assert model.absorbed - start + len(retained) == len(chunk)
        assert counts.created >= 1

    def test_new_region_attaches_to_nearest_initial(self):
        model = two_cluster_model()
        before = model.size
        chunk = gaussian([20, 8], 60, 14, 0.3)
        retained, counts = process_chunk(model, chunk, np.empty((0, 2)), DbscanParams(eps=0.5, min_pts=4))
        assert counts.created >= 1
        assert model.size == before + counts.created
        assert all(mc.nearest_initial == 1 for mc in model.miniclusters[before:])
        assert model.absorbed - 400 + len(retained) == len(chunk)

    def test_requires_params_or_auto_tune(self, blob_csv):
        ds = open_dataset(blob_csv, chunks=5, label_column=True)
        with pytest.raises(InfeasibleError):
            SDCORDetector(RunConfig(eta=0.2, label_column=True)).fit(ds)

    def test_run_on_blobs(self, blob_csv, tmp_path):
        cfg = blob_config(model=str(tmp_path / "m.json"), scores=str(tmp_path / "s.csv"),
                          log=str(tmp_path / "log.csv"), sample_indices=str(tmp_path / "idx.txt"))
        ds = open_dataset(blob_csv, chunks=cfg.chunks, label_column=True)
        result = SDCORDetector(cfg).run(ds)

        table = result.scores
        assert table.n == ds.n
        assert result.model.t >= 3
        assert auroc(LabeledScores(table.score, table.label)) >= 0.99

        log = result.run_log
        assert len(log.records) == 5
        assert log.rows_seen == ds.n
        assert log.peak_cells <= (ds.chunk_rows + log.max_retained) * ds.p
        assert result.audit.max_absorb_ratio <= 1.0 + 1e-9
        assert result.temporary_outliers == log.records[-1].retained
        for path in (cfg.model, cfg.scores, cfg.log, cfg.sample_indices):
            assert os.path.isfile(path)
        assert read_scores(cfg.scores).n == ds.n

    def test_score_only_reproduces_scores(self, blob_csv, tmp_path):
        model_path = str(tmp_path / "m.json")
        ds = open_dataset(blob_csv, chunks=5, label_column=True)
        full = SDCORDetector(blob_config(model=model_path)).run(ds)
        again = SDCORDetector(RunConfig(model=model_path, score_only=True, label_column=True)).run(ds)
        assert again.run_log is None
        np.testing.assert_allclose(again.scores.score, full.scores.score, rtol=1e-12)
        np.testing.assert_array_equal(again.scores.cluster, full.scores.cluster)

    def test_chunking_does_not_change_accuracy(self, blob_csv):
        aucs = []
        for chunks, order in ((1, "natural"), (10, "natural"), (10, "reversed")):
            cfg = blob_config(chunks=chunks, chunk_order=order)
            ds = open_dataset(blob_csv, chunks=chunks, label_column=True)
            table = SDCORDetector(cfg).run(ds).scores
            aucs.append(auroc(LabeledScores(table.score, table.label)))
        assert max(aucs) - min(aucs) < 0.01

    def test_same_seed_same_scores(self, blob_csv):
        ds = open_dataset(blob_csv, chunks=5, label_column=True)
        a = SDCORDetector(blob_config()).run(ds).scores
        b = SDCORDetector(blob_config()).run(ds).scores
        np.testing.assert_array_equal(a.score, b.score)

    def test_noise_ramp_first_level(self, tmp_path):
        data = generate_noise_ramp(0, levels=[0])[0]
        path = str(tmp_path / "ramp.csv")
        write_generated(data, path)
        cfg = RunConfig(eta=NOISE_RAMP_ETA, chunks=10, seed=0, auto_tune=True, k=NOISE_RAMP_K, label_column=True)
        result = SDCORDetector(cfg).run(open_dataset(path, chunks=cfg.chunks, label_column=True))
        ls = LabeledScores(result.scores.score, result.scores.label)
        assert result.model.t == 4
        assert auroc(ls) >= 0.99
        assert auprc(ls) >= 0.99


if __name__ == "__main__":
    sys.exit(pytest.main([__file__, "-v"]))
