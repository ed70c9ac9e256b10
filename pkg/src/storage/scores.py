"""
Score table storage: per-object outlier score, assigned final cluster and
optional ground-truth label, persisted as CSV with header
`index,score,cluster,label`.
"""

import os
from dataclasses import dataclass
from typing import Optional

import numpy as np
import pandas as pd

from src.errors import InputError

HEADER = ["index", "score", "cluster", "label"]


@dataclass
class ScoreTable:
    index: np.ndarray
    score: np.ndarray
    cluster: np.ndarray  # 1-based final cluster ids
    label: Optional[np.ndarray] = None

    def __post_init__(self):
        self.index = np.asarray(self.index, dtype=np.int64)
        self.score = np.asarray(self.score, dtype=np.float64)
        self.cluster = np.asarray(self.cluster, dtype=np.int64)
        if self.label is not None:
            self.label = np.asarray(self.label, dtype=np.int64)
        n = self.index.size
        if self.score.shape != (n,) or self.cluster.shape != (n,):
            raise InputError("score table columns have different lengths")
        if self.label is not None and self.label.shape != (n,):
            raise InputError("score table label column has the wrong length")
        if n and not np.array_equal(np.sort(self.index), np.arange(n)):
            raise InputError(f"score table indices are not a permutation of 0..{n - 1}")

    @property
    def n(self) -> int:
        return int(self.index.size)

    @property
    def has_labels(self) -> bool:
        return self.label is not None

    def in_row_order(self) -> "ScoreTable":
        order = np.argsort(self.index, kind="stable")
        return ScoreTable(
            index=self.index[order],
            score=self.score[order],
            cluster=self.cluster[order],
            label=None if self.label is None else self.label[order],
        )


def write_scores(table: ScoreTable, path: str) -> str:
    """Write entries in their given order; scores keep every binary digit."""
    frame = pd.DataFrame({
        "index": table.index,
        "score": table.score,
        "cluster": table.cluster,
        "label": pd.array(table.label, dtype="Int64") if table.has_labels else pd.array([pd.NA] * table.n, dtype="Int64"),
    })
    frame.to_csv(path, index=False, float_format="%.17g")
    return path


def read_scores(path: str) -> ScoreTable:
    if not os.path.isfile(path):
        raise InputError(f"score file not found: {path}")
    try:
        frame = pd.read_csv(path, float_precision="round_trip")
    except pd.errors.EmptyDataError:
        raise InputError(f"score file is empty: {path}") from None
    if list(frame.columns) != HEADER:
        raise InputError(f"score file {path} must have header {','.join(HEADER)}, found {','.join(map(str, frame.columns))}")

    labels = frame["label"]
    if labels.isna().all():
        label = None
    elif labels.isna().any():
        raise InputError(f"score file {path} has labels on some rows only")
    else:
        label = labels.to_numpy().astype(np.int64)

    return ScoreTable(
        index=frame["index"].to_numpy(),
        score=frame["score"].to_numpy(dtype=np.float64),
        cluster=frame["cluster"].to_numpy(),
        label=label,
    )
