from src.tuning.fitness import fitness
from src.tuning.kdist import detect_knee, kdist_graph, tune_from_kdist
from src.tuning.pso import ParticleSwarm, pso_tune

__all__ = ["fitness", "kdist_graph", "detect_knee", "tune_from_kdist", "ParticleSwarm", "pso_tune"]
