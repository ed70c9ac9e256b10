"""
Ranking metrics for outlier scores: area under the ROC curve and area
under the precision-recall curve, with outliers as the positive class.
"""

from dataclasses import dataclass
from typing import List, Tuple

import numpy as np
from sklearn.metrics import average_precision_score, precision_recall_curve, roc_auc_score, roc_curve

from src.errors import InputError

# PR integration rule, written to every eval report.
AUPRC_RULE = "step"


@dataclass
class LabeledScores:
    scores: np.ndarray
    labels: np.ndarray  # 1 = outlier

    def __post_init__(self):
        self.scores = np.asarray(self.scores, dtype=np.float64)
        self.labels = np.asarray(self.labels, dtype=np.int64)
        if self.scores.shape != self.labels.shape or self.scores.ndim != 1:
            raise InputError("scores and labels must be vectors of the same length")
        if not np.all(np.isin(self.labels, (0, 1))):
            raise InputError("labels must be 0 or 1")
        positives = int(self.labels.sum())
        if positives == 0 or positives == self.labels.size:
            raise InputError("ranking metrics need at least one outlier and one inlier label")


def auroc(ls: LabeledScores) -> float:
    """
    Trapezoidal area under (FPR, TPR) over descending score thresholds with
    ties grouped; equals the share of correctly ordered (outlier, inlier)
    pairs, ties counting one half.
    """
    return float(roc_auc_score(ls.labels, ls.scores))


def auprc(ls: LabeledScores) -> float:
    """Step-wise area under (recall, precision): sum of (R_i - R_{i-1}) * P_i over grouped thresholds."""
    return float(average_precision_score(ls.labels, ls.scores))


def roc_points(ls: LabeledScores) -> List[Tuple[float, float]]:
    fpr, tpr, _ = roc_curve(ls.labels, ls.scores, drop_intermediate=False)
    return list(zip(fpr.tolist(), tpr.tolist()))


def pr_points(ls: LabeledScores) -> List[Tuple[float, float]]:
    """(recall, precision) pairs in increasing recall order."""
    precision, recall, _ = precision_recall_curve(ls.labels, ls.scores)
    return list(zip(recall[::-1].tolist(), precision[::-1].tolist()))
