"""
Outlier scoring: each object's smallest full-rank Mahalanobis distance to
the final clusters.
"""

from typing import Tuple

import numpy as np

from src.core.linalg import mahalanobis_many
from src.errors import InputError
from src.pipeline.final_model import FinalModel
from src.storage.dataset import ChunkedDataset
from src.storage.scores import ScoreTable


def score_points(points: np.ndarray, fm: FinalModel) -> Tuple[np.ndarray, np.ndarray]:
    """Scores and 1-based nearest final cluster ids (ties go to the lowest id)."""
    X = np.asarray(points, dtype=np.float64)
    if X.ndim != 2 or X.shape[1] != fm.p:
        raise InputError(f"points have shape {X.shape}, the model has p={fm.p}")
    distances = np.column_stack([mahalanobis_many(X, c.basis) for c in fm.clusters])
    nearest = np.argmin(distances, axis=1)
    return distances[np.arange(X.shape[0]), nearest], nearest + 1


def score_dataset(ds: ChunkedDataset, fm: FinalModel) -> ScoreTable:
    """Score every object in one chunked pass; rows keep file order."""
    if ds.p != fm.p:
        raise InputError(f"dataset has p={ds.p}, the model was built for p={fm.p}")
    scores = np.empty(ds.n)
    clusters = np.empty(ds.n, dtype=np.int64)
    labels = np.empty(ds.n, dtype=np.int64) if ds.label_column else None
    for chunk in ds.chunks():
        end = chunk.start + len(chunk)
        scores[chunk.start:end], clusters[chunk.start:end] = score_points(chunk.rows, fm)
        if labels is not None:
            labels[chunk.start:end] = chunk.labels
    return ScoreTable(index=np.arange(ds.n), score=scores, cluster=clusters, label=labels)
