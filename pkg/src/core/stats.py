"""
Exact sufficient statistics (count, linear sum, raw second moment) for a
set of p-dimensional points.

Mean, scatter and covariance are always derived from (m, ls, ss), so they
equal their batch definitions over the member set no matter how the points
were inserted or merged.
"""

from typing import Optional

import numpy as np

from src.errors import InputError


class SuffStats:
    """Sufficient statistics of a point set: m, ls = sum(x), ss = sum(x^T x)."""

    __slots__ = ("m", "ls", "ss")

    def __init__(self, m: int, ls: np.ndarray, ss: np.ndarray):
        self.m = int(m)
        self.ls = np.asarray(ls, dtype=np.float64)
        self.ss = np.asarray(ss, dtype=np.float64)
        p = self.ls.shape[0]
        if self.ls.ndim != 1 or self.ss.shape != (p, p):
            raise InputError(
                f"inconsistent statistics shapes: ls {self.ls.shape}, ss {self.ss.shape}"
            )

    @classmethod
    def empty(cls, p: int) -> "SuffStats":
        return cls(0, np.zeros(p), np.zeros((p, p)))

    @classmethod
    def from_points(cls, points: np.ndarray) -> "SuffStats":
        X = _as_matrix(points)
        return cls(X.shape[0], X.sum(axis=0), X.T @ X)

    @classmethod
    def from_moments(cls, m: int, mean: np.ndarray, cov: np.ndarray) -> "SuffStats":
        """
        Build the statistics of m points with the given mean and (unbiased)
        covariance. Used as the statistics view of a final cluster.
        """
        mean = np.asarray(mean, dtype=np.float64)
        cov = np.asarray(cov, dtype=np.float64)
        if m < 2:
            raise InputError("from_moments needs m >= 2")
        ls = m * mean
        ss = (m - 1) * cov + m * np.outer(mean, mean)
        return cls(m, ls, ss)

    @property
    def p(self) -> int:
        return self.ls.shape[0]

    def copy(self) -> "SuffStats":
        return SuffStats(self.m, self.ls.copy(), self.ss.copy())

    def add_point(self, x: np.ndarray) -> None:
        x = np.asarray(x, dtype=np.float64)
        if x.shape != (self.p,):
            raise InputError(f"point has dimension {x.shape}, statistics have p={self.p}")
        self.m += 1
        self.ls += x
        self.ss += np.outer(x, x)

    def add_points(self, points: np.ndarray) -> None:
        X = _as_matrix(points, self.p)
        if X.shape[0] == 0:
            return
        self.m += X.shape[0]
        self.ls += X.sum(axis=0)
        self.ss += X.T @ X

    def merge(self, other: "SuffStats") -> "SuffStats":
        """Statistics of the union of both member sets (neither input is modified)."""
        if other.p != self.p:
            raise InputError(f"cannot merge statistics of dimension {self.p} and {other.p}")
        return SuffStats(self.m + other.m, self.ls + other.ls, self.ss + other.ss)

    @property
    def mean(self) -> np.ndarray:
        if self.m < 1:
            raise InputError("mean of an empty set")
        return self.ls / self.m

    @property
    def scatter(self) -> np.ndarray:
        mu = self.mean
        S = self.ss - self.m * np.outer(mu, mu)
        return (S + S.T) / 2.0

    @property
    def covariance(self) -> np.ndarray:
        if self.m < 2:
            raise InputError(f"covariance needs at least 2 points, have {self.m}")
        return self.scatter / (self.m - 1)

    def __repr__(self) -> str:
        return f"SuffStats(m={self.m}, p={self.p})"


def _as_matrix(points: np.ndarray, p: Optional[int] = None) -> np.ndarray:
    X = np.asarray(points, dtype=np.float64)
    if X.ndim == 1:
        X = X.reshape(1, -1) if X.size else X.reshape(0, p or 0)
    if X.ndim != 2:
        raise InputError(f"expected a 2-D point matrix, got shape {X.shape}")
    if p is not None and X.shape[1] != p:
        raise InputError(f"points have dimension {X.shape[1]}, expected {p}")
    return X
