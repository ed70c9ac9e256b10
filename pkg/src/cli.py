"""
Command-line interface: gen | tune | run | eval | kdist.

Exit codes: 0 success, 2 input error, 3 infeasible (tuning or sampling),
4 internal invariant violation.
"""

import argparse
import logging
import os
import sys
from typing import Any, Dict, List, Optional

import pandas as pd
from dotenv import load_dotenv
from pydantic import ValidationError

from src.errors import InfeasibleError, InputError, SDCORError
from src.evaluation.metrics import AUPRC_RULE, LabeledScores, auprc, auroc, pr_points, roc_points
from src.evaluation.validity import (
    PartitionPair, all_validity, extract_outlier_partition, truth_partition_from_labels,
)
from src.models.config import RunConfig, default_chunks, default_seed
from src.models.params import PsoConfig
from src.models.synth import GenSpec
from src.pipeline.sdcor import SDCORDetector
from src.storage.dataset import open_dataset, random_sample
from src.storage.scores import read_scores
from src.synth.generator import (
    generate, generate_noise_ramp, generate_scaling_family, read_truth, write_generated,
)
from src.tuning.fitness import FITNESS_RULE, fitness
from src.tuning.kdist import detect_knee, kdist_graph, tune_from_kdist
from src.tuning.pso import pso_tune
from src.utils.logger import configure_logging
from src.utils.report import read_config, write_report

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_INPUT = 2
EXIT_INFEASIBLE = 3
EXIT_INTERNAL = 4


def exit_code_for(error: BaseException) -> int:
    if isinstance(error, (InputError, ValidationError)):
        return EXIT_INPUT
    if isinstance(error, InfeasibleError):
        return EXIT_INFEASIBLE
    return EXIT_INTERNAL


def _banner(title: str) -> None:
    print("=" * 60)
    print(title)
    print("=" * 60)


def write_series(rows: List[tuple], columns: List[str], path: str) -> str:
    """Plot data as a CSV with a header row."""
    pd.DataFrame(rows, columns=columns).to_csv(path, index=False, float_format="%.17g")
    return path


# ---------------------------------------------------------------- gen

def cmd_gen(args: argparse.Namespace) -> int:
    seed = default_seed() if args.seed is None else args.seed
    if args.noise_ramp or args.scaling:
        os.makedirs(args.out_dir, exist_ok=True)
        if args.noise_ramp:
            _banner(f"Noise-ramp family (seed={seed})")
            family, stem = generate_noise_ramp(seed), "noise_ramp"
        else:
            _banner(f"Scaling family (seed={seed})")
            family, stem = generate_scaling_family(seed), "scaling"
        for i, data in enumerate(family, start=1):
            path = os.path.join(args.out_dir, f"{stem}_{i:02d}.csv")
            write_generated(data, path)
            print(f"[{i}/{len(family)}] ✓ {path}: {data.X.shape[0]} rows, {int(data.labels.sum())} outliers")
        return EXIT_OK

    if args.out is None:
        raise InputError("gen needs --out (or --noise-ramp/--scaling with --out-dir)")
    extra: Dict[str, Any] = {
        "inner_radius_mult": args.inner,
        "outer_radius_mult": args.outer,
        "prune_radius_mult": args.prune,
        "sampler": args.sampler,
    }
    spec = GenSpec.from_total(args.clusters, args.dims, args.n, args.outliers, seed=seed,
                              **{k: v for k, v in extra.items() if v is not None})
    _banner(f"Generating {args.n} rows, {args.clusters} clusters, p={args.dims}")
    data = generate(spec)
    write_generated(data, args.out)
    print(f"✓ {args.out}: {data.X.shape[0]} rows, {int(data.labels.sum())} outliers")
    return EXIT_OK


# ---------------------------------------------------------------- tune / kdist

def _sample(args: argparse.Namespace, seed: int):
    ds = open_dataset(args.data, label_column=args.label_column, chunks=default_chunks())
    return random_sample(ds, args.eta, seed)


def kdist_path_for(report: Optional[str]) -> Optional[str]:
    """Sorted k-dist CSV next to the tuning report: tune.txt -> tune_kdist.csv."""
    if not report:
        return None
    return os.path.splitext(report)[0] + "_kdist.csv"


def cmd_tune(args: argparse.Namespace) -> int:
    seed = default_seed() if args.seed is None else args.seed
    _banner(f"Tuning DBSCAN parameters ({args.mode})")
    print("[1/3] Sampling...")
    sample = _sample(args, seed)
    print(f"  ✓ {sample.size} of {sample.n_total} rows")

    print("[2/3] Searching...")
    if args.mode == "pso":
        cfg = PsoConfig(swarm=args.swarm, iters=args.iters, seed=seed, minpts_max=args.minpts_max,
                        n_jobs=args.n_jobs)
        tuned = pso_tune(sample, cfg)
    else:
        tuned = tune_from_kdist(sample.rows, args.k, eps_override=args.eps)
        tuned = tuned.model_copy(update={"fitness": fitness(sample.rows, tuned.sample_params)})
    print(f"  ✓ eps={tuned.sample_params.eps:.6g} min_pts={tuned.sample_params.min_pts}")

    print("[3/3] Writing...")
    k = args.k if args.mode == "kdist" else max(1, tuned.sample_params.min_pts - 1)
    kdist_path = args.kdist or kdist_path_for(args.report)
    if kdist_path and k < sample.size:
        write_series(kdist_graph(sample.rows, k).rows(), ["rank", "distance"], kdist_path)
        print(f"  ✓ {kdist_path}")
    report = {
        "method": tuned.method,
        "eps_sample": tuned.sample_params.eps,
        "eps_original": tuned.original_params.eps,
        "min_pts": tuned.sample_params.min_pts,
        "fitness": tuned.fitness,
        "fitness_rule": FITNESS_RULE,
        "seed": seed,
        "sample_size": sample.size,
        "kdist": kdist_path or "",
    }
    if args.report:
        write_report(report, args.report)
        print(f"  ✓ {args.report}")
    else:
        for key, value in report.items():
            print(f"  {key}={value}")
    return EXIT_OK


def cmd_kdist(args: argparse.Namespace) -> int:
    seed = default_seed() if args.seed is None else args.seed
    sample = _sample(args, seed)
    graph = kdist_graph(sample.rows, args.k)
    write_series(graph.rows(), ["rank", "distance"], args.out)
    knee = detect_knee(graph)
    flag = " (low confidence)" if knee.low_confidence else ""
    print(f"✓ {args.out}: {len(graph.values)} values, knee at rank {knee.index + 1} "
          f"eps={knee.eps:.6g}{flag}, min_pts={args.k + 1}")
    return EXIT_OK


# ---------------------------------------------------------------- run

RUN_FLAGS = [
    "eta", "lam", "alpha", "beta", "chunks", "chunk_rows", "seed", "eps", "min_pts", "auto_tune",
    "tune", "k", "swarm", "iters", "minpts_max", "n_jobs", "max_split", "chunk_order", "index",
    "label_column", "data", "model", "scores", "report", "log", "retained", "sample_indices", "score_only",
]


def run_config_from_args(args: argparse.Namespace) -> RunConfig:
    file_values = read_config(args.config) if args.config else {}
    overrides = {name: getattr(args, name, None) for name in RUN_FLAGS}
    return RunConfig.resolve(file_values, overrides)


def cmd_run(args: argparse.Namespace) -> int:
    cfg = run_config_from_args(args)
    if cfg.data is None:
        raise InputError("run needs --data (or data= in the config file)")
    cfg.check_paths()

    mode = "scoring only" if cfg.score_only else "full run"
    _banner(f"SDCOR {mode}: {cfg.data}")
    ds = open_dataset(cfg.data, chunk_rows=cfg.chunk_rows, label_column=cfg.label_column, chunks=cfg.chunks)
    print(f"  n={ds.n} p={ds.p} chunk_rows={ds.chunk_rows} ({ds.n_chunks} chunks)")

    detector = SDCORDetector(cfg)
    result = detector.run(ds)
    table = result.scores

    report: Dict[str, Any] = {"n": ds.n, "p": ds.p, "final_clusters": result.model.t, "seed": cfg.seed}
    if result.params is not None:
        report.update({
            "tuning": result.params.method,
            "eps_sample": result.params.sample_params.eps,
            "eps_original": result.params.original_params.eps,
            "min_pts": result.params.sample_params.min_pts,
        })
    if result.run_log is not None:
        report.update({
            "chunks": len(result.run_log.records),
            "temporary_outliers": result.temporary_outliers,
            "peak_cells": result.run_log.peak_cells,
        })
    if table.has_labels and 0 < int(table.label.sum()) < table.n:
        ls = LabeledScores(table.score, table.label)
        report["auroc"] = auroc(ls)
        report["auprc"] = auprc(ls)
        print(f"  ✓ AUROC={report['auroc']:.4f} AUPRC={report['auprc']:.4f}")
    if cfg.report:
        write_report(report, cfg.report)

    print(f"✓ {result.model.t} final clusters, {table.n} rows scored")
    for path in (cfg.model if not cfg.score_only else None, cfg.scores, cfg.log, cfg.report):
        if path:
            print(f"  ✓ {path}")
    return EXIT_OK


# ---------------------------------------------------------------- eval

def cmd_eval(args: argparse.Namespace) -> int:
    table = read_scores(args.scores)
    if not table.has_labels:
        raise InputError(f"{args.scores} has no label column; eval needs ground-truth labels")
    rows = table.in_row_order()

    ls = LabeledScores(rows.score, rows.label)
    o = args.top_o if args.top_o is not None else int(rows.label.sum())
    if args.truth:
        truth = read_truth(args.truth)
        if truth.size != rows.n:
            raise InputError(f"truth file has {truth.size} ids for {rows.n} scored rows")
    else:
        truth = truth_partition_from_labels(rows.label)
    predicted = extract_outlier_partition(rows, o)
    validity = all_validity(PartitionPair(predicted, truth))

    report: Dict[str, Any] = {"auroc": auroc(ls), "auprc": auprc(ls)}
    report.update(validity)
    report.update({"o": o, "n": rows.n, "auprc_rule": AUPRC_RULE})

    _banner(f"Evaluation: {args.scores}")
    for key, value in report.items():
        print(f"  {key}={value}")
    if args.report:
        write_report(report, args.report)
    if args.roc:
        write_series(roc_points(ls), ["fpr", "tpr"], args.roc)
    if args.pr:
        write_series(pr_points(ls), ["recall", "precision"], args.pr)
    return EXIT_OK


# ---------------------------------------------------------------- parser

def _bool_flag(parser: argparse.ArgumentParser, name: str, help_text: str) -> None:
    parser.add_argument(name, action="store_true", default=None, help=help_text)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="sdcor", description="Out-of-core local outlier detection")
    parser.add_argument("--log-level", default=None, help="Overrides SDCOR_LOG_LEVEL")
    sub = parser.add_subparsers(dest="command", required=True)

    gen = sub.add_parser("gen", help="Generate synthetic benchmark datasets")
    gen.add_argument("--clusters", type=int, default=6)
    gen.add_argument("--dims", type=int, default=30)
    gen.add_argument("--n", type=int, default=50_000, help="Total rows, outliers included")
    gen.add_argument("--outliers", type=float, default=0.01, help="Outlier share of all rows")
    gen.add_argument("--inner", type=float, default=None, help="Shell inner radius multiplier")
    gen.add_argument("--outer", type=float, default=None, help="Shell outer radius multiplier")
    gen.add_argument("--prune", type=float, default=None, help="Inlier pruning radius multiplier")
    gen.add_argument("--sampler", choices=["auto", "hypercube", "shell"], default=None)
    gen.add_argument("--seed", type=int, default=None)
    gen.add_argument("--out", default=None, help="Dataset CSV")
    gen.add_argument("--noise-ramp", action="store_true", help="Write the 11-level noise-ramp family")
    gen.add_argument("--scaling", action="store_true", help="Write the 10-member scaling family")
    gen.add_argument("--out-dir", default=".", help="Folder for dataset families")
    gen.set_defaults(func=cmd_gen)

    def sample_flags(p: argparse.ArgumentParser) -> None:
        p.add_argument("--data", required=True)
        p.add_argument("--label-column", action="store_true")
        p.add_argument("--eta", type=float, default=0.01, help="Sampling rate")
        p.add_argument("--seed", type=int, default=None)
        p.add_argument("--k", type=int, default=3, help="Neighbor rank (MinPts = k + 1)")

    tune = sub.add_parser("tune", help="Tune Eps/MinPts on a random sample")
    sample_flags(tune)
    tune.add_argument("--mode", choices=["kdist", "pso"], default="kdist")
    tune.add_argument("--eps", type=float, default=None, help="Eps override for kdist mode")
    tune.add_argument("--swarm", type=int, default=30)
    tune.add_argument("--iters", type=int, default=50)
    tune.add_argument("--minpts-max", type=int, default=50)
    tune.add_argument("--n-jobs", type=int, default=1)
    tune.add_argument("--report", default=None)
    tune.add_argument("--kdist", default=None, help="Sorted k-dist graph CSV (default: next to --report)")
    tune.set_defaults(func=cmd_tune)

    kdist = sub.add_parser("kdist", help="Write the sorted k-dist graph of a sample")
    sample_flags(kdist)
    kdist.add_argument("--out", required=True)
    kdist.set_defaults(func=cmd_kdist)

    run = sub.add_parser("run", help="Sample, cluster chunk by chunk and score")
    run.add_argument("--config", default=None, help="key=value config file")
    run.add_argument("--data", default=None)
    run.add_argument("--eta", type=float, default=None)
    run.add_argument("--lambda", dest="lam", type=float, default=None)
    run.add_argument("--alpha", type=float, default=None)
    run.add_argument("--beta", type=float, default=None)
    run.add_argument("--chunks", type=int, default=None)
    run.add_argument("--chunk-rows", type=int, default=None)
    run.add_argument("--seed", type=int, default=None)
    run.add_argument("--eps", type=float, default=None)
    run.add_argument("--min-pts", type=int, default=None)
    _bool_flag(run, "--auto-tune", "Tune Eps/MinPts on the sample")
    run.add_argument("--tune", choices=["kdist", "pso"], default=None)
    run.add_argument("--k", type=int, default=None)
    run.add_argument("--swarm", type=int, default=None)
    run.add_argument("--iters", type=int, default=None)
    run.add_argument("--minpts-max", type=int, default=None)
    run.add_argument("--n-jobs", type=int, default=None)
    run.add_argument("--max-split", type=int, default=None)
    run.add_argument("--chunk-order", choices=["natural", "reversed"], default=None)
    run.add_argument("--index", choices=["auto", "brute", "kdtree"], default=None)
    _bool_flag(run, "--label-column", "Last column holds 0/1 labels")
    run.add_argument("--model", default=None)
    run.add_argument("--scores", default=None)
    run.add_argument("--report", default=None)
    run.add_argument("--log", default=None, help="Per-chunk run log CSV")
    run.add_argument("--retained", default=None, help="Temporary-outlier rows CSV")
    run.add_argument("--sample-indices", default=None)
    _bool_flag(run, "--score-only", "Score with a saved model")
    run.set_defaults(func=cmd_run)

    ev = sub.add_parser("eval", help="Ranking and clustering-validity metrics for a score table")
    ev.add_argument("--scores", required=True)
    ev.add_argument("--truth", default=None, help="Truth sidecar (one class id per row)")
    ev.add_argument("--top-o", type=int, default=None, help="Rows in the anomaly cluster")
    ev.add_argument("--report", default=None)
    ev.add_argument("--roc", default=None, help="ROC points CSV")
    ev.add_argument("--pr", default=None, help="PR points CSV")
    ev.set_defaults(func=cmd_eval)
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    load_dotenv()
    args = build_parser().parse_args(argv)
    configure_logging(args.log_level)
    try:
        return args.func(args)
    except (SDCORError, ValidationError) as e:
        code = exit_code_for(e)
        print(f"✗ {type(e).__name__}: {e}", file=sys.stderr)
        return code


if __name__ == "__main__":
    sys.exit(main())
