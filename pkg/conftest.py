"""
Shared fixtures: a small labeled 2-D dataset of three well-separated
isotropic blobs with a ring of outliers around each.
"""

import os
import sys

sys.path.insert(0, os.path.dirname(os.path.abspath(__file__)))

import numpy as np
import pytest

from src.storage.dataset import write_dataset

BLOB_CENTERS = np.array([[0.0, 0.0], [30.0, 0.0], [0.0, 30.0]])
# Known-good DBSCAN settings for the sampled blobs (eta=0.2).
BLOB_EPS = 1.0
BLOB_MIN_PTS = 4


def make_blobs(seed: int = 0, per_cluster: int = 600, outliers_per_cluster: int = 7):
    """Unit-variance blobs plus outliers 8 to 10 units from their blob center, rows shuffled."""
    rng = np.random.default_rng(seed)
    inliers = [rng.standard_normal((per_cluster, 2)) + c for c in BLOB_CENTERS]
    outliers = []
    for c in BLOB_CENTERS:
        angles = 2 * np.pi * np.arange(outliers_per_cluster) / outliers_per_cluster + rng.uniform(0, 0.5)
        radii = rng.uniform(8.0, 10.0, size=outliers_per_cluster)
        outliers.append(c + np.column_stack([radii * np.cos(angles), radii * np.sin(angles)]))
    X = np.vstack(inliers + outliers)
    labels = np.concatenate([np.zeros(3 * per_cluster, dtype=np.int64),
                             np.ones(3 * outliers_per_cluster, dtype=np.int64)])
    order = rng.permutation(X.shape[0])
    return X[order], labels[order]


@pytest.fixture
def blob_data():
    return make_blobs()


@pytest.fixture
def blob_csv(tmp_path, blob_data):
    X, labels = blob_data
    path = str(tmp_path / "blobs.csv")
    write_dataset(X, labels, path)
    return path
