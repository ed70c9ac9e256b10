from src.clustering.dbscan import NOISE, Partition, dbscan
from src.clustering.kmeans import KMeansResult, kmeans

__all__ = ["NOISE", "Partition", "dbscan", "KMeansResult", "kmeans"]
