"""Command-line entry point: ``robustpca2d {bench,trace,sweep,synth,oracle}``.

Exit codes: 0 success, 2 config error, 3 dataset error, 4 numeric failure.
"""
import argparse
import json
import logging
import sys
from dataclasses import replace
from pathlib import Path

import numpy as np

from . import bench
from .datasets import VectorDataset, save_matrix_text, save_pgm_directory, synth_face_stack, synth_line_with_outliers
from .errors import ConfigError, DatasetError, RobustPCAError
from .l1 import DEFAULT_RESTARTS, brute_force_l1_oracle, fit_l1_pca, l1_component_1d, l1_objective

EXIT_OK, EXIT_CONFIG, EXIT_DATASET, EXIT_NUMERIC = 0, 2, 3, 4

log = logging.getLogger("robustpca2d")


def _common(p):
    p.add_argument("--config", type=Path, help="INI config file")
    p.add_argument("--dataset", help="dataset root directory (PGM images)")
    p.add_argument("--synthetic", action="store_true", help="use a generated face-like dataset")
    p.add_argument("--layout", help="directory layout: orl, yale, xm2vts, subdirs, flat")
    p.add_argument("--method", help="comma-separated methods")
    p.add_argument("--k", type=int, help="subspace dimension for every method")
    p.add_argument("--train-per-subject", type=int)
    p.add_argument("--split", choices=("first", "random"))
    p.add_argument("--seed", type=int, help="split and L1 restart seed")
    p.add_argument("--max-iters", type=int, help="R1 iteration cap")
    p.add_argument("--tol", type=float, help="R1 convergence tolerance")
    p.add_argument("--out", help="output directory")
    p.add_argument("--strict", action="store_true", help="non-convergence is an error (exit 4)")
    p.add_argument("-v", "--verbose", action="store_true", default=argparse.SUPPRESS)


def build_parser():
    parser = argparse.ArgumentParser(prog="robustpca2d", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("bench", help="accuracy/runtime table for the configured methods")
    _common(p)
    p = sub.add_parser("trace", help="per-iteration convergence CSV of an R1 method")
    _common(p)
    p = sub.add_parser("sweep", help="accuracy versus number of features")
    _common(p)
    p.add_argument("--k-values", help="e.g. 1-10 or 1,2,5")

    p = sub.add_parser("synth", help="write a synthetic dataset to disk")
    p.add_argument("--kind", choices=("faces", "line"), default="faces")
    p.add_argument("--out", required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--subjects", type=int, default=10)
    p.add_argument("--per-subject", type=int, default=10)
    p.add_argument("--rows", type=int, default=28)
    p.add_argument("--cols", type=int, default=23)
    p.add_argument("--occluded", type=int, default=0)
    p.add_argument("--dim", type=int, default=3, help="line data: ambient dimension")
    p.add_argument("--inliers", type=int, default=200)
    p.add_argument("--outliers", type=int, default=10)
    p.add_argument("--noise", type=float, default=0.05)
    p.add_argument("--outlier-scale", type=float, default=2.5)

    p = sub.add_parser("oracle", help="check L1 fixed points against exhaustive enumeration")
    p.add_argument("--instances", type=int, default=100)
    p.add_argument("--n", type=int, default=8)
    p.add_argument("--d", type=int, default=3)
    p.add_argument("--restarts", type=int, default=DEFAULT_RESTARTS)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", help="write a JSON summary here")
    return parser


def config_from_args(args) -> bench.BenchConfig:
    cfg = bench.load_config(args.config) if args.config else None
    if cfg is None:
        if not args.dataset and not args.synthetic:
            raise ConfigError("either --config, --dataset or --synthetic is required")
        cfg = bench.BenchConfig(synthetic=args.synthetic)
    if args.dataset:
        cfg.dataset_path, cfg.synthetic = args.dataset, False
    if args.synthetic:
        cfg.synthetic = True
    if args.layout:
        cfg.layout = args.layout
    if args.method:
        cfg.methods = tuple(m.strip() for m in args.method.split(",") if m.strip())
        if args.command == "trace":
            cfg.trace_method = cfg.methods[0]
    if args.k is not None:
        cfg.k, cfg.method_k = args.k, {}
    if args.train_per_subject is not None:
        cfg.train_per_subject = args.train_per_subject
    if args.split:
        cfg.split = args.split
    if args.seed is not None:
        cfg.split_seed = args.seed
        cfg.l1 = {m: {**o, "seed": args.seed} for m, o in cfg.l1.items()}
    if args.max_iters is not None or args.tol is not None:
        for m in bench.R1_METHODS:
            o = cfg.r1_options(m)
            cfg.r1[m] = replace(
                o,
                max_iters=args.max_iters if args.max_iters is not None else o.max_iters,
                tol=args.tol if args.tol is not None else o.tol,
            )
        if args.max_iters is not None:
            cfg.trace_max_iters = args.max_iters
    if args.out:
        cfg.out = args.out
    if args.strict:
        cfg.strict = True
    if getattr(args, "k_values", None):
        try:
            cfg.sweep_k = bench.parse_int_list(args.k_values.replace(",", " ").split())
        except ValueError:
            raise ConfigError(f"--k-values: cannot parse {args.k_values!r}") from None
    bench.validate_config(cfg)
    return cfg


def cmd_bench(args):
    cfg = config_from_args(args)
    doc = bench.run_benchmark(cfg)
    for method, res in doc["methods"].items():
        t = doc["timing"][method]
        print(f"{method:8s} k={res['k']:<4d} accuracy={res['accuracy']:.4f} "
              f"fit={t['fit_seconds']:.3f}s iterations={res['iterations']}")
    print(f"results written to {Path(cfg.out) / 'results.json'}")


def cmd_trace(args):
    cfg = config_from_args(args)
    path, report = bench.run_convergence_trace(cfg)
    state = "converged" if report.converged else "not converged"
    print(f"{cfg.trace_method}: {report.iterations} iterations ({state}); trace written to {path}")
    if cfg.strict and not report.converged:
        raise bench.NumericFailure(f"{cfg.trace_method} did not converge")


def cmd_sweep(args):
    cfg = config_from_args(args)
    rows = bench.run_feature_sweep(cfg)
    for row in rows:
        print(f"{row['method']:8s} k={row['k']:<4d} accuracy={row['accuracy']:.4f}")
    print(f"sweep written to {Path(cfg.out) / 'sweep.csv'}")


def cmd_synth(args):
    out = Path(args.out)
    if args.kind == "faces":
        ds = synth_face_stack(args.subjects, args.per_subject, (args.rows, args.cols),
                              seed=args.seed, n_occluded=args.occluded)
        save_pgm_directory(ds, out)
        print(f"wrote {ds.n} images ({args.rows}x{args.cols}) for {args.subjects} subjects to {out}")
    else:
        rng = np.random.default_rng(args.seed)
        u = rng.standard_normal(args.dim)
        u /= np.linalg.norm(u)
        ds = synth_line_with_outliers(args.inliers, args.outliers, u, args.noise, args.outlier_scale, args.seed)
        out.mkdir(parents=True, exist_ok=True)
        save_matrix_text(out / "data.txt", ds.data)
        save_matrix_text(out / "labels.txt", np.asarray(ds.labels, dtype=float)[None])
        save_matrix_text(out / "direction.txt", u[None])
        print(f"wrote {ds.n} samples in R^{args.dim} to {out}")


def run_oracle_checks(instances, n, d, restarts, seed):
    """L1 fixed points vs the exhaustive optimum on random centered instances."""
    rng = np.random.default_rng(seed)
    attained = ratio_ok = consistent = 0
    worst = 1.0
    for inst in range(instances):
        D = rng.standard_normal((d, n))
        D -= D.mean(axis=1, keepdims=True)
        _, opt = brute_force_l1_oracle(D)
        basis, report = fit_l1_pca(VectorDataset(D, None, np.zeros(d), True), 1, restarts=restarts, seed=seed + inst, center_data=False)
        best = l1_objective(D, basis.W[:, 0])
        ok = best <= opt * (1 + 1e-12)
        w, rep = l1_component_1d(D, rng.standard_normal(d), seed=inst)
        p = np.where(w @ D < 0, -1, 1)
        reformed = D @ p
        ok &= np.linalg.norm(reformed / np.linalg.norm(reformed) - w) < 1e-10
        consistent += bool(ok)
        ratio = best / opt
        worst = min(worst, ratio)
        attained += ratio >= 1 - 1e-10
        ratio_ok += ratio >= 0.99
    return {"instances": instances, "attained_optimum": attained, "ratio_at_least_0.99": ratio_ok,
            "consistent": consistent, "worst_ratio": worst}


def cmd_oracle(args):
    summary = run_oracle_checks(args.instances, args.n, args.d, args.restarts, args.seed)
    for key, val in summary.items():
        print(f"{key}: {val}")
    if args.out:
        Path(args.out).write_text(json.dumps(summary, indent=2, sort_keys=True) + "\n")
    if summary["consistent"] != summary["instances"]:
        raise bench.NumericFailure("some L1 fixed points failed the oracle checks")


COMMANDS = {"bench": cmd_bench, "trace": cmd_trace, "sweep": cmd_sweep, "synth": cmd_synth, "oracle": cmd_oracle}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        COMMANDS[args.command](args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (DatasetError, OSError) as exc:
        print(f"dataset error: {exc}", file=sys.stderr)
        return EXIT_DATASET
    except (bench.NumericFailure, RobustPCAError) as exc:
        print(f"numeric failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
