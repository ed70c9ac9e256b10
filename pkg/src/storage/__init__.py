from src.storage.dataset import ChunkedDataset, open_dataset, random_sample
from src.storage.scores import ScoreTable, read_scores, write_scores

__all__ = ["ChunkedDataset", "open_dataset", "random_sample", "ScoreTable", "read_scores", "write_scores"]
