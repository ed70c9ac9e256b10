from src.evaluation.metrics import LabeledScores, auprc, auroc
from src.evaluation.validity import PartitionPair, all_validity, extract_outlier_partition

__all__ = ["LabeledScores", "auroc", "auprc", "PartitionPair", "all_validity", "extract_outlier_partition"]
