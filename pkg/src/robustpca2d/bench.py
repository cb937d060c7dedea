"""Benchmark harness: config parsing, fit/classify runs, traces and sweeps.

Configs are INI files. Every section and key is validated against
``CONFIG_SCHEMA``; errors name the file, line, section and key.
"""
import configparser
import csv
import json
import logging
import re
import time
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Dict, List, Optional, Tuple

import jsonschema
import numpy as np

from .baseline import fit_2dpca, fit_pca
from .datasets import (
    ImageDataset,
    load_pgm_directory,
    split_first_k,
    split_random_k,
    synth_face_stack,
    vectorize,
)
from .errors import ConfigError
from .l1 import DEFAULT_RESTARTS, fit_2dl1_pca, fit_l1_pca
from .linalg import Basis
from .r1 import R1Options, fit_2dr1_pca, fit_r1_pca
from .recognition import accuracy, nn_classify, project

log = logging.getLogger(__name__)

METHODS = ("pca", "2dpca", "r1pca", "2dr1pca", "l1pca", "2dl1pca")
IMAGE_METHODS = frozenset({"2dpca", "2dr1pca", "2dl1pca"})
R1_METHODS = frozenset({"r1pca", "2dr1pca"})
L1_METHODS = frozenset({"l1pca", "2dl1pca"})
# Greedy/eigen bases are nested: the k-basis is the first k columns of any larger one.
NESTED_METHODS = frozenset({"pca", "2dpca", "l1pca", "2dl1pca"})

_R1_KEYS = {"k": int, "max_iters": int, "tol": float, "freeze_weights": bool,
            "force_uniform_weights": bool, "weight": str}
_L1_KEYS = {"k": int, "restarts": int, "seed": int, "center": bool, "max_iters": int}
CONFIG_SCHEMA = {
    "dataset": {"path": str, "layout": str, "synthetic": bool, "subjects": int, "per_subject": int,
                "rows": int, "cols": int, "synth_seed": int, "occluded": int, "noise": float},
    "split": {"rule": str, "train_per_subject": int, "seed": int},
    "run": {"methods": list, "k": int, "out": str, "metric": str, "strict": bool},
    "trace": {"method": str, "max_iters": int},
    "sweep": {"k_values": list, "methods": list},
    "pca": {"k": int},
    "2dpca": {"k": int},
    "r1pca": _R1_KEYS,
    "2dr1pca": _R1_KEYS,
    "l1pca": _L1_KEYS,
    "2dl1pca": _L1_KEYS,
}

RESULTS_SCHEMA = {
    "type": "object",
    "required": ["schema", "dataset", "methods", "timing"],
    "properties": {
        "schema": {"const": "robustpca2d.results/1"},
        "dataset": {
            "type": "object",
            "required": ["source", "n_images", "image_shape", "n_subjects", "n_train", "n_test", "split"],
        },
        "methods": {
            "type": "object",
            "additionalProperties": {
                "type": "object",
                "required": ["k", "accuracy", "iterations", "converged", "feature_shape", "trace_file"],
                "properties": {
                    "k": {"type": "integer", "minimum": 1},
                    "accuracy": {"type": "number", "minimum": 0, "maximum": 1},
                    "iterations": {"type": "integer", "minimum": 0},
                    "converged": {"type": "boolean"},
                    "feature_shape": {"type": "array", "items": {"type": "integer"}},
                    "trace_file": {"type": ["string", "null"]},
                    "final_objective": {"type": ["number", "null"]},
                },
            },
        },
        "timing": {
            "type": "object",
            "additionalProperties": {
                "type": "object",
                "required": ["fit_seconds", "classify_seconds"],
            },
        },
    },
}


class NumericFailure(RuntimeError):
    """A fit did not converge while strict mode was on."""


@dataclass
class BenchConfig:
    dataset_path: Optional[str] = None
    layout: str = "orl"
    synthetic: bool = False
    subjects: int = 10
    per_subject: int = 10
    rows: int = 28
    cols: int = 23
    synth_seed: int = 0
    occluded: int = 0
    noise: float = 12.0
    split: str = "first"
    train_per_subject: int = 5
    split_seed: int = 0
    methods: Tuple[str, ...] = METHODS
    k: int = 10
    out: str = "results"
    metric: str = "frobenius"
    strict: bool = False
    method_k: Dict[str, int] = field(default_factory=dict)
    r1: Dict[str, R1Options] = field(default_factory=dict)
    l1: Dict[str, dict] = field(default_factory=dict)
    trace_method: str = "r1pca"
    trace_max_iters: Optional[int] = None
    sweep_k: Tuple[int, ...] = tuple(range(1, 11))
    sweep_methods: Optional[Tuple[str, ...]] = None

    def k_for(self, method: str) -> int:
        return self.method_k.get(method, self.k)

    def r1_options(self, method: str) -> R1Options:
        return self.r1.get(method, R1Options())

    def l1_options(self, method: str) -> dict:
        opts = {"restarts": DEFAULT_RESTARTS, "seed": self.split_seed, "center_data": True}
        opts.update(self.l1.get(method, {}))
        return opts


# --------------------------------------------------------------------------
# Config parsing


def _line_index(text: str) -> Dict[Tuple[str, str], int]:
    where, section = {}, None
    for lineno, line in enumerate(text.splitlines(), 1):
        m = re.match(r"\s*\[([^\]]+)\]", line)
        if m:
            section = m.group(1).strip()
            where[(section, "")] = lineno
            continue
        m = re.match(r"\s*([^=:#;\s][^=:]*?)\s*[=:]", line)
        if m and section is not None:
            where[(section, m.group(1).strip().lower())] = lineno
    return where


def _coerce(raw: str, kind, where: str):
    raw = raw.strip()
    try:
        if kind is bool:
            low = raw.lower()
            if low in ("1", "true", "yes", "on"):
                return True
            if low in ("0", "false", "no", "off"):
                return False
            raise ValueError(raw)
        if kind is list:
            return tuple(tok for tok in re.split(r"[,\s]+", raw) if tok)
        return kind(raw)
    except ValueError:
        raise ConfigError(f"{where}: expected {kind.__name__}, got {raw!r}") from None


def parse_int_list(values) -> Tuple[int, ...]:
    """'1-5' / '1:5' ranges and plain integers, e.g. ('1-3', '8') -> (1, 2, 3, 8)."""
    out = []
    for tok in values:
        m = re.fullmatch(r"(\d+)[-:](\d+)", tok)
        if m:
            lo, hi = int(m.group(1)), int(m.group(2))
            out.extend(range(lo, hi + 1))
        else:
            out.append(int(tok))
    return tuple(out)


def load_config(path) -> BenchConfig:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError(f"{path}: cannot read config ({exc.strerror})") from None
    return parse_config(text, str(path))


def parse_config(text: str, name: str = "<config>") -> BenchConfig:
    parser = configparser.ConfigParser(interpolation=None)
    try:
        parser.read_string(text, source=name)
    except configparser.Error as exc:
        raise ConfigError(f"{name}: {exc}") from None
    lines = _line_index(text)
    values: Dict[str, Dict[str, object]] = {}
    for section in parser.sections():
        if section not in CONFIG_SCHEMA:
            raise ConfigError(f"{name}:{lines.get((section, ''), '?')}: unknown section [{section}]")
        for key, raw in parser.items(section):
            where = f"{name}:{lines.get((section, key), '?')}: [{section}] {key}"
            kind = CONFIG_SCHEMA[section].get(key)
            if kind is None:
                raise ConfigError(f"{where}: unknown key")
            values.setdefault(section, {})[key] = (_coerce(raw, kind, where), where)
    return _build_config(values)


def _build_config(values) -> BenchConfig:
    cfg = BenchConfig()

    def get(section, key, default=None):
        return values.get(section, {}).get(key, (default, None))

    for key in ("path", "layout", "synthetic", "subjects", "per_subject", "rows", "cols",
                "synth_seed", "occluded", "noise"):
        val, _ = get("dataset", key)
        if val is not None:
            setattr(cfg, "dataset_path" if key == "path" else key, val)
    for key, attr in (("rule", "split"), ("train_per_subject", "train_per_subject"), ("seed", "split_seed")):
        val, _ = get("split", key)
        if val is not None:
            setattr(cfg, attr, val)
    for key in ("methods", "k", "out", "metric", "strict"):
        val, _ = get("run", key)
        if val is not None:
            setattr(cfg, key, val)
    val, _ = get("trace", "method")
    if val is not None:
        cfg.trace_method = val
    cfg.trace_max_iters = get("trace", "max_iters")[0]
    val, where = get("sweep", "k_values")
    if val is not None:
        try:
            cfg.sweep_k = parse_int_list(val)
        except ValueError:
            raise ConfigError(f"{where}: expected integers or ranges like 1-10") from None
    val, _ = get("sweep", "methods")
    if val is not None:
        cfg.sweep_methods = val

    for method in METHODS:
        sec = values.get(method, {})
        if "k" in sec:
            cfg.method_k[method] = sec["k"][0]
        if method in R1_METHODS:
            kw = {key: v for key, (v, _) in sec.items() if key != "k"}
            cfg.r1[method] = R1Options(**kw)
        elif method in L1_METHODS:
            kw = {("center_data" if key == "center" else key): v for key, (v, _) in sec.items() if key != "k"}
            cfg.l1[method] = kw
    validate_config(cfg, values)
    return cfg


def validate_config(cfg: BenchConfig, values=None) -> None:
    values = values or {}

    def where(section, key):
        w = values.get(section, {}).get(key, (None, None))[1]
        return w or f"[{section}] {key}"

    for m in cfg.methods:
        if m not in METHODS:
            raise ConfigError(f"{where('run', 'methods')}: unknown method {m!r} (choose from {', '.join(METHODS)})")
    for m in cfg.sweep_methods or ():
        if m not in METHODS:
            raise ConfigError(f"{where('sweep', 'methods')}: unknown method {m!r}")
    if cfg.split not in ("first", "random"):
        raise ConfigError(f"{where('split', 'rule')}: must be 'first' or 'random', got {cfg.split!r}")
    if cfg.metric not in ("frobenius", "column_sum"):
        raise ConfigError(f"{where('run', 'metric')}: must be 'frobenius' or 'column_sum'")
    if cfg.trace_method not in R1_METHODS:
        raise ConfigError(f"{where('trace', 'method')}: must be r1pca or 2dr1pca")
    if cfg.k < 1:
        raise ConfigError(f"{where('run', 'k')}: must be >= 1")
    for m, k in cfg.method_k.items():
        if k < 1:
            raise ConfigError(f"{where(m, 'k')}: must be >= 1")
    if cfg.train_per_subject < 1:
        raise ConfigError(f"{where('split', 'train_per_subject')}: must be >= 1")
    for m, opts in cfg.r1.items():
        if opts.max_iters < 1:
            raise ConfigError(f"{where(m, 'max_iters')}: must be >= 1")
        if opts.tol < 0:
            raise ConfigError(f"{where(m, 'tol')}: must be >= 0")
        if opts.weight not in ("cauchy", "l1"):
            raise ConfigError(f"{where(m, 'weight')}: must be 'cauchy' or 'l1'")
    for m, opts in cfg.l1.items():
        if opts.get("restarts", DEFAULT_RESTARTS) < 1:
            raise ConfigError(f"{where(m, 'restarts')}: must be >= 1")
    if not cfg.synthetic and not cfg.dataset_path:
        raise ConfigError("[dataset] path: required unless synthetic = true")
    if any(k < 1 for k in cfg.sweep_k):
        raise ConfigError(f"{where('sweep', 'k_values')}: values must be >= 1")


# --------------------------------------------------------------------------
# Running


def load_dataset(cfg: BenchConfig) -> ImageDataset:
    if cfg.synthetic:
        return synth_face_stack(cfg.subjects, cfg.per_subject, (cfg.rows, cfg.cols),
                                seed=cfg.synth_seed, noise=cfg.noise, n_occluded=cfg.occluded)
    return load_pgm_directory(cfg.dataset_path, cfg.layout)


def make_split(cfg: BenchConfig, ds: ImageDataset):
    if cfg.split == "first":
        return split_first_k(ds, cfg.train_per_subject)
    return split_random_k(ds, cfg.train_per_subject, cfg.split_seed)


@dataclass
class MethodRun:
    method: str
    k: int
    basis: Basis
    report: object  # FitReport or None
    fit_seconds: float


def fit_method(method: str, train: ImageDataset, k: int, cfg: BenchConfig) -> MethodRun:
    """Fit one method on the training images; the wall time covers the fit only."""
    vec = None if method in IMAGE_METHODS else vectorize(train)
    report = None
    t0 = time.perf_counter()
    if method == "pca":
        basis = fit_pca(vec, k)
    elif method == "2dpca":
        basis = fit_2dpca(train, k)
    elif method == "r1pca":
        basis, report = fit_r1_pca(vec, k, cfg.r1_options(method))
    elif method == "2dr1pca":
        basis, report = fit_2dr1_pca(train, k, cfg.r1_options(method))
    elif method == "l1pca":
        basis, report = fit_l1_pca(vec, k, **cfg.l1_options(method))
    elif method == "2dl1pca":
        basis, report = fit_2dl1_pca(train, k, **cfg.l1_options(method))
    else:
        raise ConfigError(f"unknown method {method!r}")
    elapsed = time.perf_counter() - t0
    if cfg.strict and report is not None and not report.converged:
        raise NumericFailure(f"{method} did not converge within {report.iterations} iterations")
    return MethodRun(method, k, basis, report, elapsed)


def classify(run: MethodRun, train: ImageDataset, test: ImageDataset, metric: str, k: Optional[int] = None):
    basis = run.basis
    if k is not None and k != basis.k:
        basis = Basis(basis.W[:, :k], basis.mean)
    if run.method in IMAGE_METHODS:
        tr, te = project(basis, train), project(basis, test)
    else:
        tr, te = project(basis, vectorize(train)), project(basis, vectorize(test))
        metric = "frobenius"
    pred = nn_classify(tr, te, metric)
    return accuracy(pred, test.labels), te.features.shape[1:]


def _finite(x):
    return None if x is None or not np.isfinite(x) else float(x)


def run_benchmark(cfg: BenchConfig, write: bool = True) -> dict:
    """Fit, time, project and score every configured method; write results.json."""
    ds = load_dataset(cfg)
    split = make_split(cfg, ds)
    train, test = split.apply(ds)
    out = Path(cfg.out)
    if write:
        (out / "traces").mkdir(parents=True, exist_ok=True)
    doc = {
        "schema": "robustpca2d.results/1",
        "dataset": {
            "source": "synthetic" if cfg.synthetic else str(cfg.dataset_path),
            "layout": None if cfg.synthetic else cfg.layout,
            "n_images": ds.n,
            "image_shape": list(ds.shape),
            "n_subjects": len(set(ds.labels)),
            "n_train": len(split.train_indices),
            "n_test": len(split.test_indices),
            "split": cfg.split,
            "train_per_subject": cfg.train_per_subject,
            "split_seed": cfg.split_seed,
        },
        "methods": {},
        "timing": {},
    }
    for method in cfg.methods:
        k = cfg.k_for(method)
        run = fit_method(method, train, k, cfg)
        t0 = time.perf_counter()
        acc, fshape = classify(run, train, test, cfg.metric)
        classify_seconds = time.perf_counter() - t0
        trace_file = None
        if run.report is not None and write:
            trace_file = f"traces/{method}.csv"
            run.report.to_csv(out / trace_file)
        rep = run.report
        doc["methods"][method] = {
            "k": k,
            "accuracy": acc,
            "iterations": rep.iterations if rep is not None else 0,
            "converged": bool(rep.converged) if rep is not None else True,
            "feature_shape": [int(s) for s in fshape],
            "trace_file": trace_file,
            "final_objective": _finite(rep.final_objective) if rep is not None else None,
        }
        doc["timing"][method] = {"fit_seconds": run.fit_seconds, "classify_seconds": classify_seconds}
        log.info("%s: k=%d accuracy=%.4f fit=%.3fs", method, k, acc, run.fit_seconds)
    jsonschema.validate(doc, RESULTS_SCHEMA)
    if write:
        (out / "results.json").write_text(json.dumps(doc, indent=2, sort_keys=True) + "\n")
    return doc


def numeric_view(doc: dict) -> dict:
    """The results document without the observational timing section."""
    return {k: v for k, v in doc.items() if k != "timing"}


def run_convergence_trace(cfg: BenchConfig, method: Optional[str] = None, write: bool = True):
    """Fit an R1 method on the training split and emit its per-iteration CSV."""
    method = method or cfg.trace_method
    if method not in R1_METHODS:
        raise ConfigError(f"trace method must be r1pca or 2dr1pca, got {method!r}")
    if cfg.trace_max_iters is not None:
        cfg = replace(cfg, r1={**cfg.r1, method: replace(cfg.r1_options(method), max_iters=cfg.trace_max_iters)})
    ds = load_dataset(cfg)
    train, _ = make_split(cfg, ds).apply(ds)
    run = fit_method(method, train, cfg.k_for(method), cfg)
    path = None
    if write:
        out = Path(cfg.out)
        out.mkdir(parents=True, exist_ok=True)
        path = out / f"trace_{method}.csv"
        run.report.to_csv(path)
    return path, run.report


def run_feature_sweep(cfg: BenchConfig, write: bool = True) -> List[dict]:
    """Accuracy for each (method, k); rows are written to sweep.csv."""
    ds = load_dataset(cfg)
    train, test = make_split(cfg, ds).apply(ds)
    methods = cfg.sweep_methods or cfg.methods
    rows = []
    for method in methods:
        limit = train.r if method in IMAGE_METHODS else min(train.r * train.n_prime, train.n - 1)
        ks = [k for k in cfg.sweep_k if k <= limit]
        for k in cfg.sweep_k:
            if k > limit:
                log.warning("%s: skipping k=%d (exceeds the maximum %d)", method, k, limit)
        if not ks:
            continue
        if method in NESTED_METHODS:
            run = fit_method(method, train, max(ks), cfg)
            for k in ks:
                acc, _ = classify(run, train, test, cfg.metric, k)
                rows.append({"method": method, "k": k, "accuracy": acc})
        else:
            for k in ks:
                acc, _ = classify(fit_method(method, train, k, cfg), train, test, cfg.metric)
                rows.append({"method": method, "k": k, "accuracy": acc})
    if write:
        out = Path(cfg.out)
        out.mkdir(parents=True, exist_ok=True)
        with open(out / "sweep.csv", "w", newline="") as fh:
            writer = csv.DictWriter(fh, fieldnames=["method", "k", "accuracy"], lineterminator="\n")
            writer.writeheader()
            for row in rows:
                writer.writerow({**row, "accuracy": repr(row["accuracy"])})
    return rows
