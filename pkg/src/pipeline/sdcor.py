"""
Detector service: sampling, initial model, chunked scalable clustering,
final model and scoring.
"""

import logging
from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np

from src.clustering.dbscan import dbscan
from src.core.linalg import is_singular, log_cov_determinant
from src.core.stats import SuffStats
from src.errors import InfeasibleError, InvariantError
from src.models.config import RunConfig
from src.models.params import DbscanParams, TunedParams
from src.pipeline.final_model import FinalModel, build_final_model
from src.pipeline.minicluster import (
    GuardAudit, TemporaryModel, log_initial_model, minicluster_make, minicluster_update,
)
from src.pipeline.retained import ClusterCounts, retset_clust, retset_memb
from src.pipeline.scoring import score_dataset
from src.storage.dataset import ChunkedDataset, SampleSet, dump_sample_indices, random_sample, write_rows
from src.storage.model_store import load_model, save_model
from src.storage.scores import ScoreTable, write_scores
from src.tuning.kdist import tune_from_kdist
from src.tuning.pso import pso_tune
from src.utils.logger import ChunkRecord, RunLog, finish

logger = logging.getLogger(__name__)


def build_initial_model(sample: SampleSet, params: TunedParams, energy: float, alpha: float,
                        index: str = "auto") -> TemporaryModel:
    """
    Cluster the sample with the sampled-data parameters and turn every
    cluster into an initial minicluster; noise is discarded.

    Raises:
        InfeasibleError: no cluster was found, or an initial cluster is singular
    """
    rows = sample.rows
    partition = dbscan(rows, params.sample_params, index=index)
    if partition.k == 0:
        raise InfeasibleError(
            f"DBSCAN found no cluster in the sample of {sample.size} rows "
            f"(eps={params.sample_params.eps:.6g}, min_pts={params.sample_params.min_pts}); "
            "raise the sampling rate or Eps"
        )

    groups = [rows[members] for members in partition.groups()]
    for i, group in enumerate(groups, start=1):
        if is_singular(SuffStats.from_points(group)):
            raise InfeasibleError(
                f"initial cluster {i} of {group.shape[0]} points has a singular covariance "
                f"(p={rows.shape[1]}); raise the sampling rate"
            )

    model = TemporaryModel(energy=energy, alpha=alpha, p=rows.shape[1])
    minicluster_make(model, groups)
    model.t_initial = len(groups)
    model.log_det_thresholds = np.array([log_cov_determinant(mc.stats) for mc in model.miniclusters])
    model.initial_size = model.absorbed
    log_initial_model(model)
    return model


def process_chunk(model: TemporaryModel, chunk: np.ndarray, retained: np.ndarray, params: DbscanParams,
                  seed: int = 0, audit: Optional[GuardAudit] = None, max_split: Optional[int] = None,
                  index: str = "auto") -> Tuple[np.ndarray, ClusterCounts]:
    """
    Fold one chunk into the temporary model.

    Chunk points are offered to every live minicluster; what is left joins
    the retained set, which is swept through the updated miniclusters,
    clustered, and swept through the newly created miniclusters.

    Returns:
        (retained set after the chunk, clustering counts)
    """
    counts = ClusterCounts()
    updated, leftover = minicluster_update(model, chunk, range(model.size), audit)
    rows = np.vstack([retained, leftover]) if retained.shape[0] else leftover
    if rows.shape[0] == 0:
        return rows, counts

    rows = retset_memb(model, rows, updated, audit)
    if rows.shape[0] == 0:
        return rows, counts

    rows, created, counts = retset_clust(model, rows, params, seed, audit, max_split, index)
    if rows.shape[0] and created:
        rows = retset_memb(model, rows, created, audit)
    return rows, counts


@dataclass
class RunResult:
    params: Optional[TunedParams]  # None for score-only runs without eps/min_pts
    model: FinalModel
    scores: ScoreTable
    run_log: Optional[RunLog]
    audit: Optional[GuardAudit]
    temporary_outliers: int


class SDCORDetector:
    """
    Out-of-core local outlier detector.

    Example:
        detector = SDCORDetector(RunConfig(eta=0.01, eps=0.8, min_pts=5))
        result = detector.run(open_dataset("data.csv", chunks=10, label_column=True))
    """

    def __init__(self, config: Optional[RunConfig] = None):
        self.config = config or RunConfig()
        self.run_log: Optional[RunLog] = None
        self.audit: Optional[GuardAudit] = None
        self.temporary_model: Optional[TemporaryModel] = None
        self.temporary_outliers = 0

    def tune(self, sample: SampleSet) -> TunedParams:
        cfg = self.config
        given = cfg.given_params()
        if given is not None:
            return given
        if not cfg.auto_tune:
            raise InfeasibleError("no DBSCAN parameters: pass eps and min_pts or enable auto_tune")
        if cfg.tune == "pso":
            return pso_tune(sample, cfg.pso_config())
        return tune_from_kdist(sample.rows, cfg.k)

    def fit(self, ds: ChunkedDataset) -> Tuple[TunedParams, FinalModel]:
        """Phases 1 and 2: sample, build the initial model, cluster chunk by chunk, merge."""
        cfg = self.config
        if cfg.chunk_rows is not None:
            ds = ds.with_chunk_rows(cfg.chunk_rows)

        logger.info("sampling %.4g of %d rows", cfg.eta, ds.n)
        sample = random_sample(ds, cfg.eta, cfg.seed)
        if cfg.sample_indices:
            dump_sample_indices(sample, cfg.sample_indices)
        params = self.tune(sample)
        logger.info("sample params eps=%.6g min_pts=%d, original eps=%.6g",
                    params.sample_params.eps, params.sample_params.min_pts, params.original_params.eps)
        model = build_initial_model(sample, params, cfg.lam, cfg.alpha, cfg.index)
        logger.info("%d initial clusters from %d sampled rows", model.t_initial, sample.size)
        del sample

        logger.info("clustering %d chunks of up to %d rows", ds.n_chunks, ds.chunk_rows)
        self.audit = GuardAudit()
        self.run_log = RunLog(p=ds.p, chunk_rows=ds.chunk_rows)
        retained = np.empty((0, ds.p))
        for number, chunk in enumerate(ds.chunks(cfg.chunk_order), start=1):
            resident = self.run_log.observe_resident(len(chunk) + retained.shape[0])
            absorbed_before = model.absorbed
            retained, counts = process_chunk(model, chunk.rows, retained, params.original_params,
                                             cfg.seed, self.audit, cfg.max_split, cfg.index)
            self.run_log.add(ChunkRecord(
                chunk=number, start=chunk.start, rows=len(chunk),
                absorbed=model.absorbed - absorbed_before, retained=retained.shape[0],
                created=counts.created, split=counts.split, rejected=counts.rejected,
                singular=counts.singular, miniclusters=model.size, resident_cells=resident,
            ))
            self._check_conservation(model, retained)

        self.run_log.check_memory_bound(self.run_log.max_retained)
        self.temporary_model = model
        self.temporary_outliers = retained.shape[0]
        if cfg.retained and retained.shape[0]:
            write_rows(retained, cfg.retained)
        logger.info("%d miniclusters, %d temporary outliers dropped", model.size, retained.shape[0])

        final = build_final_model(model, cfg.eta, cfg.beta, cfg.seed)
        return params, final

    def _check_conservation(self, model: TemporaryModel, retained: np.ndarray) -> None:
        accounted = model.absorbed - model.initial_size + retained.shape[0]
        if accounted != self.run_log.rows_seen:
            raise InvariantError(
                f"conservation violated: {accounted} rows accounted for, {self.run_log.rows_seen} seen"
            )

    def score(self, ds: ChunkedDataset, final: FinalModel) -> ScoreTable:
        logger.info("scoring %d rows against %d final clusters", ds.n, final.t)
        return score_dataset(ds, final)

    def run(self, ds: ChunkedDataset) -> RunResult:
        """All three phases (or scoring alone with score_only), writing every configured output."""
        cfg = self.config
        self.temporary_outliers = 0
        if cfg.score_only:
            final = load_model(cfg.model)
            params = cfg.given_params()
        else:
            params, final = self.fit(ds)
            if cfg.model:
                save_model(final, cfg.model)

        table = self.score(ds, final)
        if cfg.scores:
            write_scores(table, cfg.scores)
        if cfg.log and self.run_log is not None:
            finish(self.run_log, cfg.log, guard=self.audit.as_dict())
        return RunResult(params=params, model=final, scores=table, run_log=self.run_log,
                         audit=self.audit, temporary_outliers=self.temporary_outliers)
