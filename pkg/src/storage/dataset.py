"""
Chunked access to disk-resident datasets, uniform random sampling and
dataset writers.

Dataset format: headerless CSV of decimal floats, one object per line. When
the dataset carries labels, the last column holds the {0,1} ground truth
(1 = outlier) and is not part of the feature matrix.

Opening a dataset parses the CSV once into a temporary float64 file that is
memory-mapped read-only; every later pass slices chunks out of that map
instead of re-parsing text.
"""

import logging
import math
import os
import re
import tempfile
from dataclasses import dataclass
from typing import Iterator, List, NoReturn, Optional, Tuple

import numpy as np
import pandas as pd

from src.errors import DataFormatError, InputError

logger = logging.getLogger(__name__)

# Rows per block for the parsing pass.
SCAN_ROWS = 65536

_LINE_RE = re.compile(r"line (\d+)")


@dataclass
class Chunk:
    start: int  # row index of the first row
    rows: np.ndarray
    labels: Optional[np.ndarray] = None

    def __len__(self) -> int:
        return self.rows.shape[0]


@dataclass
class SampleSet:
    """Uniform random sample of a dataset, rows in source_indices order."""
    rows: np.ndarray
    source_indices: np.ndarray
    rate: float
    n_total: int

    @property
    def size(self) -> int:
        return int(self.rows.shape[0])


class ChunkedDataset:
    """
    Bounded-memory accessor over a parsed dataset.

    `table` is the n x width float64 memory map written by open_dataset
    (width = p, plus one for the label column). Each chunk is copied out of
    the map, so at most one chunk of rows is resident.
    """

    def __init__(self, path: str, table: np.ndarray, p: int, chunk_rows: int, label_column: bool = False):
        if chunk_rows < 1:
            raise InputError(f"chunk_rows must be positive, got {chunk_rows}")
        self.path = path
        self.table = table
        self.n = int(table.shape[0])
        self.p = p
        self.chunk_rows = int(chunk_rows)
        self.label_column = label_column

    @property
    def n_chunks(self) -> int:
        return math.ceil(self.n / self.chunk_rows)

    def with_chunk_rows(self, chunk_rows: int) -> "ChunkedDataset":
        return ChunkedDataset(self.path, self.table, self.p, chunk_rows, self.label_column)

    def _chunk(self, start: int) -> Chunk:
        values = np.array(self.table[start:start + self.chunk_rows])
        if self.label_column:
            return Chunk(start=start, rows=values[:, :self.p].copy(),
                         labels=values[:, self.p].astype(np.int64))
        return Chunk(start=start, rows=values)

    def chunks(self, order: str = "natural") -> Iterator[Chunk]:
        """
        Yield the dataset chunk by chunk.

        Args:
            order: "natural" (file order) or "reversed" (last chunk first; rows
                inside a chunk keep file order)
        """
        starts = range(0, self.n, self.chunk_rows)
        if order == "natural":
            pass
        elif order == "reversed":
            starts = reversed(starts)
        else:
            raise InputError(f"unknown chunk order '{order}' (expected natural or reversed)")
        for start in starts:
            yield self._chunk(start)

    def read_rows(self, indices: np.ndarray) -> np.ndarray:
        """Feature rows at the given indices, in the given order."""
        indices = np.asarray(indices, dtype=np.int64)
        if indices.size and (indices.min() < 0 or indices.max() >= self.n):
            raise InputError(f"row index out of range for a dataset of {self.n} rows")
        return np.array(self.table[indices, :self.p])

    def labels(self) -> Optional[np.ndarray]:
        """Ground-truth column for all n rows, or None for an unlabeled dataset."""
        if not self.label_column:
            return None
        return np.asarray(self.table[:, self.p]).astype(np.int64)

    def __repr__(self) -> str:
        return f"ChunkedDataset(path={self.path!r}, n={self.n}, p={self.p}, chunk_rows={self.chunk_rows})"


class _Unparsed(Exception):
    """The float64 parse hit a cell it could not convert."""


def _validate_block(frame: pd.DataFrame, first_row: int, width: int) -> None:
    """Raise DataFormatError for the first non-numeric or missing cell of a block."""
    if frame.shape[1] != width:
        raise DataFormatError(
            f"row {first_row + 1}: expected {width} fields, found {frame.shape[1]}", row=first_row + 1
        )
    for column in range(frame.shape[1]):
        raw = frame.iloc[:, column]
        numeric = pd.to_numeric(raw, errors="coerce")
        bad = numeric.isna().to_numpy()
        if bad.any():
            offset = int(np.flatnonzero(bad)[0])
            cell = raw.iloc[offset]
            what = "missing value" if pd.isna(cell) else f"non-numeric value {cell!r}"
            row = first_row + offset + 1
            raise DataFormatError(f"row {row}, column {column + 1}: {what}", row=row, column=column + 1)
        if not np.all(np.isfinite(numeric.to_numpy(dtype=np.float64))):
            offset = int(np.flatnonzero(~np.isfinite(numeric.to_numpy(dtype=np.float64)))[0])
            row = first_row + offset + 1
            raise DataFormatError(f"row {row}, column {column + 1}: non-finite value", row=row, column=column + 1)


def _locate_format_error(path: str) -> NoReturn:
    """Text-level scan that raises a DataFormatError positioned by row and column."""
    n = 0
    width = None
    try:
        reader = pd.read_csv(path, header=None, chunksize=SCAN_ROWS, dtype=object,
                             skip_blank_lines=False)
        with reader:
            for frame in reader:
                if width is None:
                    width = frame.shape[1]
                _validate_block(frame, n, width)
                n += len(frame)
    except pd.errors.ParserError as e:
        match = _LINE_RE.search(str(e))
        row = int(match.group(1)) if match else None
        where = f"row {row}" if row is not None else "a row"
        raise DataFormatError(f"{where} has an inconsistent number of fields: {e}", row=row) from None
    raise DataFormatError(f"{path}: content does not parse as decimal floats")


def _parse_to(path: str, out) -> Tuple[int, Optional[int]]:
    """Parse the CSV into raw float64 rows written to `out`; returns (n, width)."""
    n = 0
    width = None
    try:
        reader = pd.read_csv(path, header=None, chunksize=SCAN_ROWS, dtype=np.float64,
                             float_precision="round_trip", skip_blank_lines=False)
        with reader:
            for frame in reader:
                block = frame.to_numpy(dtype=np.float64)
                if width is None:
                    width = block.shape[1]
                if block.shape[1] != width or not np.all(np.isfinite(block)):
                    raise _Unparsed()
                out.write(np.ascontiguousarray(block).tobytes())
                n += block.shape[0]
    except pd.errors.EmptyDataError:
        raise
    except ValueError:
        raise _Unparsed() from None
    return n, width


def open_dataset(path: str, chunk_rows: Optional[int] = None, label_column: bool = False,
                 chunks: Optional[int] = None) -> ChunkedDataset:
    """
    Parse and validate a dataset file in one bounded-memory pass into a
    memory-mapped float64 table and return an accessor over it.

    Args:
        path: CSV file
        chunk_rows: Rows per chunk
        label_column: Whether the last column is a {0,1} label
        chunks: Alternative to chunk_rows: chunk_rows = ceil(n / chunks)

    Returns:
        ChunkedDataset

    Raises:
        InputError: missing or empty file
        DataFormatError: a row or cell that does not parse, positioned by row and column (1-based)
    """
    if not os.path.isfile(path):
        raise InputError(f"dataset file not found: {path}")
    if chunk_rows is None and chunks is None:
        raise InputError("either chunk_rows or chunks must be given")

    scratch = tempfile.TemporaryFile(prefix="sdcor-", suffix=".f64")
    try:
        n, width = _parse_to(path, scratch)
    except pd.errors.EmptyDataError:
        scratch.close()
        raise InputError(f"empty dataset: {path}") from None
    except _Unparsed:
        scratch.close()
        _locate_format_error(path)

    if n == 0 or width is None:
        scratch.close()
        raise InputError(f"empty dataset: {path}")

    p = width - 1 if label_column else width
    if p < 1:
        scratch.close()
        raise InputError(f"dataset has no feature columns: {path}")

    if chunk_rows is None:
        if chunks < 1:
            scratch.close()
            raise InputError(f"chunks must be positive, got {chunks}")
        chunk_rows = max(1, math.ceil(n / chunks))

    scratch.flush()
    table = np.memmap(scratch, dtype=np.float64, mode="r", shape=(n, width))
    ds = ChunkedDataset(path, table, p, chunk_rows, label_column)
    if label_column:
        raw = ds.table[:, p]
        stray = np.flatnonzero((raw != 0.0) & (raw != 1.0))
        if stray.size:
            raise DataFormatError(f"row {stray[0] + 1}: label must be 0 or 1", row=int(stray[0]) + 1,
                                  column=width)
    logger.info("opened %s: n=%d p=%d chunk_rows=%d", path, n, p, ds.chunk_rows)
    return ds


def sample_size(n: int, rate: float) -> int:
    """round(rate * n), halves rounded up."""
    return int(math.floor(rate * n + 0.5))


def random_sample(ds: ChunkedDataset, rate: float, seed: int) -> SampleSet:
    """
    Uniform sample without replacement by partial Fisher-Yates over the row indices.

    Raises:
        InputError: rate outside (0, 1] or a sample of fewer than one row
    """
    if not 0.0 < rate <= 1.0:
        raise InputError(f"sampling rate must lie in (0, 1], got {rate}")
    s = sample_size(ds.n, rate)
    if s < 1:
        raise InputError(f"sampling rate {rate} selects no rows from {ds.n}; raise the rate")

    rng = np.random.default_rng(seed)
    pool = np.arange(ds.n, dtype=np.int64)
    draws = rng.integers(np.arange(s), ds.n)  # j_i uniform in [i, n)
    for i in range(s):
        j = draws[i]
        pool[i], pool[j] = pool[j], pool[i]
    indices = pool[:s].copy()
    return SampleSet(rows=ds.read_rows(indices), source_indices=indices, rate=rate, n_total=ds.n)


def write_dataset(X: np.ndarray, labels: Optional[np.ndarray], path: str) -> str:
    frame = pd.DataFrame(np.asarray(X, dtype=np.float64))
    if labels is not None:
        frame[frame.shape[1]] = np.asarray(labels, dtype=np.int64)
    frame.to_csv(path, header=False, index=False, float_format="%.17g")
    return path


def write_rows(rows: np.ndarray, path: str) -> str:
    """Headerless CSV of feature rows (used for the temporary-outlier sidecar)."""
    return write_dataset(rows, None, path)


def dump_sample_indices(sample: SampleSet, path: str) -> str:
    with open(path, "w") as f:
        for index in sample.source_indices:
            f.write(f"{int(index)}\n")
    return path


def read_sample_indices(path: str) -> List[int]:
    with open(path) as f:
        return [int(line) for line in f if line.strip()]
