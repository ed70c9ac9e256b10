"""
Seeded synthetic benchmarks: pruned Gaussian clusters with correlated
covariances and local outliers injected into a Mahalanobis shell around
each cluster, plus the noise-ramp and scaling dataset families.
"""

import logging
import math
import os
from dataclasses import dataclass
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from src.core.linalg import full_basis, mahalanobis_many
from src.core.stats import SuffStats
from src.errors import InfeasibleError, InputError
from src.models.synth import GenSpec
from src.storage.dataset import write_dataset
from src.utils.report import write_report

logger = logging.getLogger(__name__)

# Candidate draws allowed per outlier before box rejection gives up.
REJECTION_BUDGET = 10_000
_BATCH = 256

# Highest dimensionality where "auto" still uses box rejection.
HYPERCUBE_MAX_DIM = 3

NOISE_RAMP_INLIERS = 20_000
NOISE_RAMP_OUTLIERS = list(range(10_000, 30_001, 2_000))
# Detector sampling rate and k-dist rank (MinPts = k + 1) for the noise ramp.
NOISE_RAMP_ETA = 0.10
NOISE_RAMP_K = 30
SCALING_BASE = 200_000
SCALING_OUTLIERS = 200
SCALING_RATES = [round(0.1 * i, 1) for i in range(1, 11)]


@dataclass
class Manifold:
    """Cluster means, covariances and pruned inliers shared by every dataset built on it."""
    spec: GenSpec
    means: np.ndarray
    covs: List[np.ndarray]
    inliers: np.ndarray
    cluster_of: np.ndarray  # 0-based cluster per inlier
    spacing: float

    @property
    def p(self) -> int:
        return self.spec.p

    def basis(self, cluster: int):
        return full_basis(self.means[cluster], self.covs[cluster])


@dataclass
class GeneratedData:
    X: np.ndarray
    labels: np.ndarray  # 1 = outlier
    truth: np.ndarray   # 1..c clusters, c + 1 outliers
    manifest: Dict[str, object]


def _streams(seed: int, clusters: int) -> List[np.random.SeedSequence]:
    # one per cluster, then placement, outliers and shuffle
    return np.random.SeedSequence(seed).spawn(clusters + 3)


def random_covariance(p: int, rng: np.random.Generator) -> np.ndarray:
    """A^T A for A with entries uniform in [0, 1] and a random half of them negated."""
    A = rng.uniform(0.0, 1.0, size=(p, p))
    flip = rng.permutation(p * p) < (p * p) // 2
    A.flat[flip] *= -1.0
    return A.T @ A


def _place_means(count: int, p: int, spacing: float, rng: np.random.Generator) -> np.ndarray:
    """Means pairwise at least `spacing` apart, by rejection inside a box."""
    side = spacing * max(2.0, 2.0 * count ** (1.0 / p))
    means: List[np.ndarray] = []
    for _ in range(count * 1000):
        if len(means) == count:
            break
        candidate = rng.uniform(0.0, side, size=p)
        if all(np.linalg.norm(candidate - m) >= spacing for m in means):
            means.append(candidate)
    if len(means) < count:
        # fall back to a line along the first axis
        means = [np.eye(p)[0] * spacing * i for i in range(count)]
    return np.vstack(means)


def _pruned_gaussian(mean: np.ndarray, cov: np.ndarray, count: int, radius: float,
                     rng: np.random.Generator) -> np.ndarray:
    chol = np.linalg.cholesky(cov)
    basis = full_basis(mean, cov)
    kept: List[np.ndarray] = []
    have = 0
    while have < count:
        batch = rng.standard_normal((max(2 * (count - have), 64), mean.size)) @ chol.T + mean
        batch = batch[mahalanobis_many(batch, basis) <= radius]
        kept.append(batch)
        have += batch.shape[0]
    return np.vstack(kept)[:count]


def build_manifold(spec: GenSpec) -> Manifold:
    """Covariances, well-separated means and pruned inliers for every cluster."""
    p = spec.p
    streams = _streams(spec.seed, spec.clusters)
    cluster_rngs = [np.random.default_rng(s) for s in streams[:spec.clusters]]
    covs = [random_covariance(p, rng) for rng in cluster_rngs]

    max_trace = max(float(np.trace(c)) for c in covs)
    max_sd = max(math.sqrt(float(np.linalg.eigvalsh(c)[-1])) for c in covs)
    spacing = max(10.0 * math.sqrt(max_trace),
                  2.0 * (spec.outer_radius_mult + spec.prune_radius_mult) * math.sqrt(p) * max_sd)
    means = _place_means(spec.clusters, p, spacing, np.random.default_rng(streams[spec.clusters]))

    radius = spec.prune_radius_mult * math.sqrt(p)
    parts = [
        _pruned_gaussian(means[i], covs[i], spec.points_per_cluster[i], radius, cluster_rngs[i])
        for i in range(spec.clusters)
    ]
    cluster_of = np.concatenate([np.full(len(part), i) for i, part in enumerate(parts)])
    return Manifold(spec=spec, means=means, covs=covs, inliers=np.vstack(parts),
                    cluster_of=cluster_of, spacing=spacing)


def _resolve_sampler(sampler: str, p: int) -> str:
    if sampler == "auto":
        return "hypercube" if p <= HYPERCUBE_MAX_DIM else "shell"
    return sampler


def _hypercube_outlier(manifold: Manifold, cluster: int, rng: np.random.Generator) -> np.ndarray:
    spec = manifold.spec
    cov = manifold.covs[cluster]
    low_r = spec.inner_radius_mult * math.sqrt(spec.p)
    high_r = spec.outer_radius_mult * math.sqrt(spec.p)
    half = high_r * np.sqrt(np.diag(cov))  # bounding box of the outer ellipsoid
    mean = manifold.means[cluster]
    basis = manifold.basis(cluster)
    drawn = 0
    while drawn < REJECTION_BUDGET:
        batch = min(_BATCH, REJECTION_BUDGET - drawn)
        candidates = rng.uniform(mean - half, mean + half, size=(batch, spec.p))
        d = mahalanobis_many(candidates, basis)
        hits = np.flatnonzero((d >= low_r) & (d <= high_r))
        if hits.size:
            return candidates[hits[0]]
        drawn += batch
    raise InfeasibleError(
        f"no outlier accepted for cluster {cluster + 1} after {REJECTION_BUDGET} draws; "
        "widen the shell (inner/outer radius multipliers) or use the shell sampler"
    )


def _shell_outlier(manifold: Manifold, cluster: int, rng: np.random.Generator) -> np.ndarray:
    spec = manifold.spec
    direction = rng.standard_normal(spec.p)
    direction /= np.linalg.norm(direction)
    radius = rng.uniform(spec.inner_radius_mult, spec.outer_radius_mult) * math.sqrt(spec.p)
    chol = np.linalg.cholesky(manifold.covs[cluster])
    return manifold.means[cluster] + radius * (chol @ direction)


def inject_outliers(manifold: Manifold, count: int, rng: np.random.Generator,
                    sampler: Optional[str] = None) -> Tuple[np.ndarray, np.ndarray]:
    """
    Outliers whose Mahalanobis distance to their source cluster lies in
    [inner * sqrt(p), outer * sqrt(p)]; sources go round-robin over the clusters.

    Returns:
        (outlier rows, 0-based source cluster per outlier)
    """
    spec = manifold.spec
    mode = _resolve_sampler(sampler or spec.sampler, spec.p)
    place = _hypercube_outlier if mode == "hypercube" else _shell_outlier
    sources = np.arange(count) % spec.clusters
    rows = np.empty((count, spec.p))
    for i, cluster in enumerate(sources):
        rows[i] = place(manifold, int(cluster), rng)
    return rows, sources


def assemble(manifold: Manifold, inliers: np.ndarray, inlier_cluster: np.ndarray,
             outliers: np.ndarray, rng: np.random.Generator) -> GeneratedData:
    """Stack inliers and outliers, label them and shuffle the rows."""
    c = manifold.spec.clusters
    X = np.vstack([inliers, outliers]) if outliers.shape[0] else inliers.copy()
    labels = np.concatenate([np.zeros(inliers.shape[0], dtype=np.int64),
                             np.ones(outliers.shape[0], dtype=np.int64)])
    truth = np.concatenate([inlier_cluster + 1, np.full(outliers.shape[0], c + 1)]).astype(np.int64)
    order = rng.permutation(X.shape[0])
    spec = manifold.spec
    manifest = {
        "clusters": c,
        "p": spec.p,
        "n": int(X.shape[0]),
        "inliers": int(inliers.shape[0]),
        "outliers": int(outliers.shape[0]),
        "points_per_cluster": ",".join(str(int(np.count_nonzero(inlier_cluster == i))) for i in range(c)),
        "inner_radius_mult": spec.inner_radius_mult,
        "outer_radius_mult": spec.outer_radius_mult,
        "prune_radius_mult": spec.prune_radius_mult,
        "sampler": _resolve_sampler(spec.sampler, spec.p),
        "spacing": manifold.spacing,
        "seed": spec.seed,
    }
    return GeneratedData(X=X[order], labels=labels[order], truth=truth[order], manifest=manifest)


def generate(spec: GenSpec) -> GeneratedData:
    """
    Build the dataset a spec describes: pruned Gaussian inliers plus
    spec.outliers shell outliers, rows shuffled. Identical specs give
    bit-identical output.
    """
    manifold = build_manifold(spec)
    streams = _streams(spec.seed, spec.clusters)
    outliers, _ = inject_outliers(manifold, spec.outliers, np.random.default_rng(streams[-2]))
    data = assemble(manifold, manifold.inliers, manifold.cluster_of, outliers,
                    np.random.default_rng(streams[-1]))
    logger.info("generated %d rows (%d outliers) in %d dimensions", data.X.shape[0], spec.outliers, spec.p)
    return data


def sidecar_paths(path: str) -> Tuple[str, str]:
    """(manifest, truth) files next to a dataset file."""
    stem = os.path.splitext(path)[0]
    return stem + ".manifest", stem + ".truth"


def write_generated(data: GeneratedData, path: str) -> str:
    """Dataset CSV with a trailing label column, plus the manifest and truth sidecars."""
    write_dataset(data.X, data.labels, path)
    manifest_path, truth_path = sidecar_paths(path)
    write_report(data.manifest, manifest_path)
    np.savetxt(truth_path, data.truth, fmt="%d")
    return path


def read_truth(path: str) -> np.ndarray:
    if not os.path.isfile(path):
        raise InputError(f"truth file not found: {path}")
    return np.loadtxt(path, dtype=np.int64, ndmin=1)


def noise_ramp_spec(base_seed: int) -> GenSpec:
    return GenSpec(clusters=4, points_per_cluster=[NOISE_RAMP_INLIERS // 4], p=2,
                   n_outliers=0, seed=base_seed)


def generate_noise_ramp(base_seed: int, levels: Optional[Sequence[int]] = None) -> List[GeneratedData]:
    """
    Eleven datasets on one fixed 2-D, four-cluster manifold of 20,000
    inliers, with 10,000 to 30,000 outliers in steps of 2,000.

    `levels` picks a subset by 0-based level; each level's outliers depend
    only on (base_seed, level), so a subset matches the full family.
    """
    manifold = build_manifold(noise_ramp_spec(base_seed))
    family = []
    for level in (range(len(NOISE_RAMP_OUTLIERS)) if levels is None else levels):
        count = NOISE_RAMP_OUTLIERS[level]
        outlier_rng, shuffle_rng = [np.random.default_rng(s)
                                    for s in np.random.SeedSequence([base_seed, level]).spawn(2)]
        outliers, _ = inject_outliers(manifold, count, outlier_rng)
        data = assemble(manifold, manifold.inliers, manifold.cluster_of, outliers, shuffle_rng)
        data.manifest["outlier_share_of_inliers"] = count / NOISE_RAMP_INLIERS
        family.append(data)
    return family


def scaling_spec(base_seed: int) -> GenSpec:
    return GenSpec(clusters=4, points_per_cluster=[SCALING_BASE // 4], p=10, n_outliers=0, seed=base_seed)


def generate_scaling_family(base_seed: int) -> List[GeneratedData]:
    """
    Ten random subsets (10% to 100%) of one 200,000-inlier, 10-D,
    four-cluster base set, each with 200 injected outliers.
    """
    manifold = build_manifold(scaling_spec(base_seed))
    family = []
    for level, rate in enumerate(SCALING_RATES):
        pick_rng, outlier_rng, shuffle_rng = [np.random.default_rng(s)
                                              for s in np.random.SeedSequence([base_seed, level]).spawn(3)]
        size = int(round(rate * SCALING_BASE))
        chosen = np.sort(pick_rng.choice(SCALING_BASE, size=size, replace=False))
        outliers, _ = inject_outliers(manifold, SCALING_OUTLIERS, outlier_rng)
        data = assemble(manifold, manifold.inliers[chosen], manifold.cluster_of[chosen], outliers, shuffle_rng)
        data.manifest["subset_rate"] = rate
        family.append(data)
    return family


def sample_determinant_ratio(n: int = 10_000, rate: float = 0.005, seed: int = 0) -> float:
    """
    Covariance determinant of a uniform random sample of one 2-D Gaussian
    cluster, divided by the determinant over the whole cluster.
    """
    spec = GenSpec(clusters=1, points_per_cluster=[n], p=2, n_outliers=0, seed=seed)
    inliers = build_manifold(spec).inliers
    s = int(math.floor(rate * n + 0.5))
    if s < 3:
        raise InputError(f"rate {rate} leaves {s} sampled points; need at least 3")
    rng = np.random.default_rng(np.random.SeedSequence([seed, n]))
    picked = inliers[rng.choice(n, size=s, replace=False)]
    full = np.linalg.det(SuffStats.from_points(inliers).covariance)
    part = np.linalg.det(SuffStats.from_points(picked).covariance)
    return float(part / full)
