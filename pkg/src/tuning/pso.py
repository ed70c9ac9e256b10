"""
Inertial particle swarm optimization over a bounded box, and the DBSCAN
parameter search built on it.
"""

import logging
import math
from dataclasses import dataclass, field
from typing import Callable, List, Optional, Sequence

import numpy as np
from joblib import Parallel, delayed

from src.errors import InfeasibleError, InputError, InvariantError
from src.models.params import DbscanParams, PsoConfig, TunedParams
from src.storage.dataset import SampleSet
from src.tuning.fitness import fitness
from src.tuning.kdist import kdist_graph

logger = logging.getLogger(__name__)


@dataclass
class SwarmResult:
    x: np.ndarray
    fun: float
    n_iter: int
    history: List[float] = field(default_factory=list)  # gbest cost after init and after every iteration


class ParticleSwarm:
    """
    Bounded minimizer using the classical inertial velocity update.

    Velocities start at zero, particle positions uniformly inside the box.
    Coordinates that leave the box are clamped to the violated bound.

    Args:
        func: Objective taking a length-d position, returning a real (inf allowed)
        lower: Lower bounds, length d
        upper: Upper bounds, length d
        config: Swarm size, iterations, w, c1, c2, seed, patience and n_jobs
    """

    def __init__(self, func: Callable[[np.ndarray], float], lower: Sequence[float],
                 upper: Sequence[float], config: Optional[PsoConfig] = None):
        if not callable(func):
            raise InputError("objective is not callable")
        self.func = func
        self.lower = np.asarray(lower, dtype=np.float64)
        self.upper = np.asarray(upper, dtype=np.float64)
        if self.lower.shape != self.upper.shape or self.lower.ndim != 1:
            raise InputError("lower and upper bounds must be vectors of the same length")
        if np.any(self.lower >= self.upper):
            raise InputError(f"bounds must satisfy lower < upper, got {self.lower} / {self.upper}")
        self.config = config or PsoConfig()

    def _evaluate(self, positions: np.ndarray) -> np.ndarray:
        if self.config.n_jobs == 1:
            costs = [self.func(x) for x in positions]
        else:
            # joblib returns results in submission order
            costs = Parallel(n_jobs=self.config.n_jobs)(delayed(self.func)(x) for x in positions)
        costs = np.asarray(costs, dtype=np.float64)
        costs[np.isnan(costs)] = np.inf
        return costs

    def minimize(self) -> SwarmResult:
        cfg = self.config
        rng = np.random.default_rng(cfg.seed)
        d = self.lower.size
        span = self.upper - self.lower

        X = self.lower + rng.random((cfg.swarm, d)) * span
        V = np.zeros_like(X)
        costs = self._evaluate(X)

        pbest = X.copy()
        pbest_cost = costs.copy()
        g = int(np.argmin(pbest_cost))  # first minimum: lowest particle index
        gbest = pbest[g].copy()
        gbest_cost = float(pbest_cost[g])
        history = [gbest_cost]

        stagnant = 0
        n_iter = 0
        for it in range(1, cfg.iters + 1):
            n_iter = it
            r1 = rng.random((cfg.swarm, d))
            r2 = rng.random((cfg.swarm, d))
            V = cfg.w * V + cfg.c1 * r1 * (pbest - X) + cfg.c2 * r2 * (gbest - X)
            X = np.clip(X + V, self.lower, self.upper)
            costs = self._evaluate(X)

            improved = costs < pbest_cost
            pbest[improved] = X[improved]
            pbest_cost[improved] = costs[improved]

            g = int(np.argmin(pbest_cost))
            new_cost = float(pbest_cost[g])
            if new_cost > gbest_cost:
                raise InvariantError(f"gbest cost increased from {gbest_cost} to {new_cost}")
            if new_cost < gbest_cost:
                gbest = pbest[g].copy()
                gbest_cost = new_cost
                stagnant = 0
            else:
                stagnant += 1
            history.append(gbest_cost)
            logger.debug("pso iteration %d: gbest %.6g", it, gbest_cost)

            if cfg.patience is not None and stagnant >= cfg.patience:
                logger.info("pso stopped after %d stagnant iterations", stagnant)
                break

        return SwarmResult(x=gbest, fun=gbest_cost, n_iter=n_iter, history=history)


def search_bounds(sample: SampleSet, cfg: PsoConfig):
    """
    Eps and MinPts search intervals: MinPts from floor(ln n) to the
    configured maximum, Eps from the extremes of the sample's k-dist graph
    with k = MinPts lower bound - 1.
    """
    if cfg.minpts_bounds is not None:
        mp_low, mp_high = cfg.minpts_bounds
    else:
        mp_low = max(1, int(math.floor(math.log(max(sample.n_total, 1)))))
        mp_high = cfg.minpts_max
        if mp_low >= mp_high:
            raise InputError(
                f"MinPts lower bound floor(ln n) = {mp_low} is not below minpts_max = {mp_high}"
            )

    if cfg.eps_bounds is not None:
        eps_low, eps_high = cfg.eps_bounds
    else:
        k = max(1, mp_low - 1)
        if k >= sample.size:
            raise InfeasibleError(
                f"sample of {sample.size} rows is too small for a k-dist graph with k={k}; raise the sampling rate"
            )
        values = kdist_graph(sample.rows, k).values
        positive = values[values > 0.0]
        if positive.size == 0:
            raise InfeasibleError("every k-dist value is 0; the sample has no spread")
        eps_low, eps_high = float(positive.min()), float(positive.max())
        if not eps_low < eps_high:
            raise InfeasibleError(f"k-dist graph is flat at {eps_low}; pass explicit eps bounds")
    return (float(eps_low), float(eps_high)), (int(mp_low), int(mp_high))


def pso_tune(sample: SampleSet, cfg: Optional[PsoConfig] = None) -> TunedParams:
    """
    Search (Eps, MinPts) for the sampled data by minimizing `fitness`.

    Args:
        sample: Random sample of the dataset (n_total gives the MinPts floor)
        cfg: Swarm settings and optional explicit bounds

    Returns:
        TunedParams with gbest as the sample params and half of its Eps for the original data

    Raises:
        InfeasibleError: every evaluated position had infinite cost
    """
    cfg = cfg or PsoConfig()
    (eps_low, eps_high), (mp_low, mp_high) = search_bounds(sample, cfg)
    logger.info("pso bounds: eps [%.6g, %.6g], min_pts [%d, %d]", eps_low, eps_high, mp_low, mp_high)
    rows = sample.rows

    def cost(position: np.ndarray) -> float:
        params = DbscanParams(eps=float(position[0]), min_pts=int(round(position[1])))
        return fitness(rows, params)

    swarm = ParticleSwarm(cost, [eps_low, mp_low], [eps_high, mp_high], cfg)
    result = swarm.minimize()
    if not math.isfinite(result.fun):
        raise InfeasibleError(
            "no feasible DBSCAN parameters found: every evaluated position was all-noise, "
            "noise-free or produced a singular cluster; widen the bounds or raise the sampling rate"
        )

    best = DbscanParams(eps=float(result.x[0]), min_pts=int(round(result.x[1])))
    logger.info("pso tuned eps=%.6g min_pts=%d fitness=%.6g after %d iterations",
                best.eps, best.min_pts, result.fun, result.n_iter)
    return TunedParams.from_sample_params(best, fitness=result.fun, method="pso")
