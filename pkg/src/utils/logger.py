"""
Run logger - per-chunk records of a detector run and finish() to persist them.
"""

import logging
import os
from dataclasses import asdict, dataclass, field
from typing import Dict, List, Optional

import pandas as pd

from src.errors import InvariantError

logger = logging.getLogger(__name__)


def configure_logging(level: Optional[str] = None) -> None:
    """Root logging setup for entry points; level from SDCOR_LOG_LEVEL when not given."""
    level = (level or os.getenv("SDCOR_LOG_LEVEL", "INFO")).upper()
    logging.basicConfig(level=getattr(logging, level, logging.INFO),
                        format="%(asctime)s %(levelname)s %(name)s: %(message)s")


@dataclass
class ChunkRecord:
    chunk: int
    start: int
    rows: int
    absorbed: int
    retained: int
    created: int
    split: int
    rejected: int
    singular: int
    miniclusters: int
    resident_cells: int


@dataclass
class RunLog:
    """
    Counters of one run. resident_cells tracks dataset values held in memory
    at once (chunk plus retained set); peak_cells is its high-water mark.
    """
    p: int
    chunk_rows: int
    records: List[ChunkRecord] = field(default_factory=list)
    peak_cells: int = 0
    rows_seen: int = 0

    def observe_resident(self, rows: int) -> int:
        cells = rows * self.p
        self.peak_cells = max(self.peak_cells, cells)
        return cells

    def add(self, record: ChunkRecord) -> None:
        self.records.append(record)
        self.rows_seen += record.rows

    def check_memory_bound(self, max_retained: int) -> None:
        """Peak resident cells must not exceed (chunk_rows + largest retained set) * p."""
        bound = (self.chunk_rows + max_retained) * self.p
        if self.peak_cells > bound:
            raise InvariantError(f"resident dataset cells peaked at {self.peak_cells}, bound is {bound}")

    @property
    def max_retained(self) -> int:
        return max((r.retained for r in self.records), default=0)

    def summary(self) -> Dict[str, int]:
        return {
            "chunks": len(self.records),
            "rows_seen": self.rows_seen,
            "absorbed": sum(r.absorbed for r in self.records),
            "created": sum(r.created for r in self.records),
            "split": sum(r.split for r in self.records),
            "rejected": sum(r.rejected for r in self.records),
            "final_retained": self.records[-1].retained if self.records else 0,
            "peak_cells": self.peak_cells,
        }


def finish(run_log: RunLog, path: str, guard: Optional[Dict] = None) -> str:
    """
    Persist a run's per-chunk records as CSV (one row per chunk).
    Called when a detector run completes.

    Args:
        run_log: Counters of the completed run
        path: Output CSV
        guard: Guard audit counters, logged alongside the summary (optional)

    Returns:
        The path written

    Example:
        finish(detector.run_log, "run_log.csv", guard=detector.audit.as_dict())
    """
    columns = list(ChunkRecord.__dataclass_fields__)
    frame = pd.DataFrame([asdict(r) for r in run_log.records], columns=columns)
    frame.to_csv(path, index=False)
    logger.info("run finished: %s", run_log.summary())
    if guard:
        logger.info("guard audit: %s", guard)
    return path
