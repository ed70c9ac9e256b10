#!/usr/bin/env python3
"""
Scalability: run time over the ten-member scaling family (20,200 to
200,200 rows), with the growth factor from the smallest to the largest
member and the R^2 of a least-squares line through time vs n.
"""

import os
import sys
import tempfile
import time

project_root = os.path.dirname(os.path.dirname(os.path.abspath(__file__)))
sys.path.insert(0, project_root)

from dotenv import load_dotenv

load_dotenv()

import numpy as np
from scipy import stats

from src.evaluation.metrics import LabeledScores, auroc
from src.models.config import RunConfig, default_seed
from src.pipeline.sdcor import SDCORDetector
from src.storage.dataset import open_dataset
from src.synth.generator import generate_scaling_family, write_generated
from src.utils.logger import configure_logging

MAX_GROWTH = 4.0
MIN_R2 = 0.95


def main():
    configure_logging("WARNING")
    seed = default_seed()
    print("=" * 60)
    print(f"Scaling family (seed={seed})")
    print("=" * 60)

    family = generate_scaling_family(seed)
    sizes, seconds, aucs = [], [], []
    with tempfile.TemporaryDirectory() as folder:
        for i, data in enumerate(family, start=1):
            path = os.path.join(folder, f"scaling_{i:02d}.csv")
            write_generated(data, path)
            cfg = RunConfig(eta=0.01, chunks=10, seed=seed, auto_tune=True, label_column=True)
            ds = open_dataset(path, label_column=True, chunks=cfg.chunks)
            started = time.perf_counter()
            result = SDCORDetector(cfg).run(ds)
            elapsed = time.perf_counter() - started
            a = auroc(LabeledScores(result.scores.score, result.scores.label))
            sizes.append(ds.n)
            seconds.append(elapsed)
            aucs.append(a)
            print(f"[{i}/{len(family)}] n={ds.n}: {elapsed:.2f}s AUROC={a:.4f}")

    growth = seconds[-1] / seconds[0]
    fit = stats.linregress(np.array(sizes, dtype=float), np.array(seconds))
    r2 = fit.rvalue ** 2
    ok = growth <= MAX_GROWTH and r2 >= MIN_R2 and min(aucs) >= 0.99

    print("\n" + "=" * 60)
    print(f"time growth smallest -> largest: {growth:.2f}x (limit {MAX_GROWTH}x)")
    print(f"linear fit R^2: {r2:.4f} (minimum {MIN_R2})")
    print(f"{'✓' if ok else '✗'} lowest AUROC: {min(aucs):.4f}")
    print("=" * 60)
    return 0 if ok else 1


if __name__ == "__main__":
    sys.exit(main())
