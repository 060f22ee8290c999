"""Experiment pipeline: split, corrupt, fit, score, and report.

An experiment fixes a dataset source (a synthetic spec or an on-disk
directory), a corruption recipe, a solver configuration, and a split
policy. Each repeat derives its own sub-seeds, splits the aligned
source into train and test, corrupts only the training split, fits,
predicts on the untouched test split, and scores the four headline
metrics. Reports serialize to JSON (source of truth) and CSV; repeated
runs of the same configuration produce byte-identical JSON once the
timing fields are stripped.
"""

from __future__ import annotations

import csv
import hashlib
import json
import os
import tempfile
import time
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from .data import MultiViewDataset, ViewData
from .dataset_io import load_dataset
from .errors import InvalidInput, IoError, MvmlError
from .linalg import trace_norm_subgradient
from .masking import CorruptionSpec, SyntheticSpec, corrupt, generate_synthetic
from .metrics import evaluate_predictions
from .solver import SolverConfig, SolverTrace, Variant, fit, predict

METRIC_NAMES = ("one_minus_hamming", "one_minus_ranking", "average_precision", "auc")

# Keys treated as wall-clock noise and ignored by report comparisons.
TIMING_KEYS = ("timing",)

DEFAULT_LAMBDA_GRID = (1e-3, 1e-2, 0.1, 1.0, 10.0, 100.0)
DEFAULT_MU_GRID = (1.0, 5.0, 10.0)

# Sub-seed stream tags for per-repeat derivation.
_STREAM_SPLIT = 0
_STREAM_CORRUPT = 1
_STREAM_INIT = 2


def derive_seed(base, *key):
    """Fold ``(base, *key)`` into a fresh uint64 seed, deterministically."""
    seq = np.random.SeedSequence([int(base), *[int(k) for k in key]])
    return int(seq.generate_state(1, np.uint64)[0])


@dataclass(frozen=True)
class SplitSpec:
    """Train fraction and the seed of the per-repeat permutations."""

    train_fraction: float = 0.7
    seed: int = 0

    def __post_init__(self):
        if not (np.isfinite(self.train_fraction) and 0 < self.train_fraction < 1):
            raise InvalidInput(
                f"train_fraction must lie in (0, 1), got {self.train_fraction!r}"
            )


@dataclass(frozen=True)
class ExperimentConfig:
    source: SyntheticSpec | str
    corruption: CorruptionSpec = CorruptionSpec()
    solver: SolverConfig = SolverConfig(lam=0.5)
    split: SplitSpec = SplitSpec()
    repeats: int = 10
    outputs: str | None = None

    def __post_init__(self):
        if not isinstance(self.source, (SyntheticSpec, str)):
            raise InvalidInput("source must be a SyntheticSpec or a dataset directory path")
        if self.repeats < 1:
            raise InvalidInput(f"repeats must be at least 1, got {self.repeats}")

    def to_dict(self):
        if isinstance(self.source, SyntheticSpec):
            source = {
                "synthetic": {
                    "n": self.source.n,
                    "c": self.source.c,
                    "views": self.source.n_views,
                    "dims": list(self.source.dims),
                    "positives_per_sample": self.source.positives_per_sample,
                    "noise_sigma": self.source.noise_sigma,
                    "seed": self.source.seed,
                }
            }
        else:
            source = {"path": self.source}
        return {
            "dataset": source,
            "corruption": {
                "alpha": self.corruption.alpha,
                "beta": self.corruption.beta,
                "dealign": self.corruption.dealign,
                "seed": self.corruption.seed,
            },
            "solver": {
                "lam": self.solver.lam,
                "mu": self.solver.mu,
                "max_iters": self.solver.max_iters,
                "rel_tol": self.solver.rel_tol,
                "variant": self.solver.variant.value,
                "init_seed": self.solver.init_seed,
            },
            "split": {
                "train_fraction": self.split.train_fraction,
                "seed": self.split.seed,
            },
            "repeats": self.repeats,
            "outputs": self.outputs,
        }

    @staticmethod
    def from_dict(raw):
        if not isinstance(raw, dict):
            raise InvalidInput("experiment config must be a JSON object")
        known = {"dataset", "corruption", "solver", "split", "repeats", "outputs"}
        unknown = set(raw) - known
        if unknown:
            raise InvalidInput(f"unknown config keys: {sorted(unknown)}")

        dataset = raw.get("dataset")
        if not isinstance(dataset, dict) or not ({"synthetic", "path"} & set(dataset)):
            raise InvalidInput("config needs dataset.synthetic or dataset.path")
        if "path" in dataset:
            source = dataset["path"]
            if not isinstance(source, str):
                raise InvalidInput("dataset.path must be a string")
        else:
            syn = dict(dataset["synthetic"])
            mapped = {
                "n": syn.pop("n", 2000),
                "c": syn.pop("c", 30),
                "n_views": syn.pop("views", syn.pop("n_views", 3)),
                "positives_per_sample": syn.pop("positives_per_sample", 3),
                "noise_sigma": syn.pop("noise_sigma", 0.6),
                "seed": syn.pop("seed", 0),
            }
            if "dims" in syn:
                mapped["dims"] = tuple(syn.pop("dims"))
            else:
                mapped["dims"] = SyntheticSpec(
                    n=mapped["n"], c=mapped["c"], n_views=mapped["n_views"],
                    dims=tuple([40] * mapped["n_views"]),
                ).dims
            if syn:
                raise InvalidInput(f"unknown dataset.synthetic keys: {sorted(syn)}")
            source = SyntheticSpec(**mapped)

        def section(name, cls, defaults):
            body = raw.get(name, {})
            if not isinstance(body, dict):
                raise InvalidInput(f"config section '{name}' must be an object")
            merged = {**defaults, **body}
            extra = set(merged) - set(defaults)
            if extra:
                raise InvalidInput(f"unknown {name} keys: {sorted(extra)}")
            try:
                return cls(**merged)
            except TypeError as exc:
                raise InvalidInput(f"bad {name} section: {exc}")

        corruption = section(
            "corruption",
            CorruptionSpec,
            {"alpha": 0.0, "beta": 0.0, "dealign": False, "seed": 0},
        )
        solver = section(
            "solver",
            SolverConfig,
            {
                "lam": 0.5,
                "mu": 5.0,
                "max_iters": 200,
                "rel_tol": 1e-6,
                "variant": "full",
                "init_seed": 0,
            },
        )
        split = section("split", SplitSpec, {"train_fraction": 0.7, "seed": 0})
        repeats = raw.get("repeats", 10)
        if not isinstance(repeats, int):
            raise InvalidInput("repeats must be an integer")
        outputs = raw.get("outputs")
        if outputs is not None and not isinstance(outputs, str):
            raise InvalidInput("outputs must be a string path")
        return ExperimentConfig(
            source=source,
            corruption=corruption,
            solver=solver,
            split=split,
            repeats=repeats,
            outputs=outputs,
        )

    @property
    def config_hash(self):
        body = self.to_dict()
        body.pop("outputs")  # where a run writes does not change what it computes
        canon = json.dumps(body, sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(canon.encode("utf-8")).hexdigest()


@dataclass
class RepeatResult:
    metrics: dict
    n_test: int
    iterations: int
    converged: bool
    final_objective: float
    final_surrogate: float
    final_residual: float
    trace: SolverTrace
    fit_seconds: float

    def to_dict(self):
        return {
            "metrics": dict(self.metrics),
            "n_test": self.n_test,
            "solver": {
                "iterations": self.iterations,
                "converged": self.converged,
                "final_objective": self.final_objective,
                "final_surrogate": self.final_surrogate,
                "final_residual": self.final_residual,
            },
            "convergence": {
                "objective": list(self.trace.objective),
                "surrogate": list(self.trace.surrogate),
                "residual": list(self.trace.residual),
            },
            "timing": {
                "fit_seconds": self.fit_seconds,
                "iteration_seconds": list(self.trace.seconds),
            },
        }


@dataclass
class RunRecord:
    config_hash: str
    config: dict
    repeats: list[RepeatResult]
    summary: dict

    def to_dict(self):
        return {
            "config_hash": self.config_hash,
            "config": self.config,
            "repeats": [r.to_dict() for r in self.repeats],
            "summary": self.summary,
        }


def strip_timing(obj):
    """Copy of a report structure with every timing subtree removed."""
    if isinstance(obj, dict):
        return {k: strip_timing(v) for k, v in obj.items() if k not in TIMING_KEYS}
    if isinstance(obj, list):
        return [strip_timing(v) for v in obj]
    return obj


def split_indices(n, split, repeat):
    """Disjoint (train, test) index arrays for one repeat, ascending order."""
    rng = np.random.default_rng(np.random.SeedSequence([split.seed, _STREAM_SPLIT, repeat]))
    perm = rng.permutation(n)
    n_train = int(split.train_fraction * n)
    if n_train < 1 or n_train >= n:
        raise InvalidInput(
            f"train_fraction {split.train_fraction} leaves an empty split for n={n}"
        )
    return np.sort(perm[:n_train]), np.sort(perm[n_train:])


def subset_dataset(ds, rows):
    """Row subset of an aligned dataset, one shared selection for all views."""
    if not ds.aligned:
        raise InvalidInput("row subsetting requires an aligned dataset")
    rows = np.asarray(rows, dtype=int)
    views = [
        ViewData(
            features=view.features[rows],
            labels=view.labels[rows],
            missing_rows=view.missing_rows[rows],
        )
        for view in ds.views
    ]
    return MultiViewDataset(views=views, aligned=True)


def load_source(config):
    """Materialize the experiment's dataset source."""
    if isinstance(config.source, SyntheticSpec):
        return generate_synthetic(config.source)
    return load_dataset(config.source)


def _clean_truth(test):
    truth = test.views[0].labels
    if not np.isin(truth, (-1.0, 1.0)).all():
        raise InvalidInput("test split labels must be fully observed (+/-1)")
    return truth


def run_repeat(ds, config, repeat):
    """Split, corrupt the training half, fit, and score one repeat."""
    train_idx, test_idx = split_indices(ds.n_samples, config.split, repeat)
    train = subset_dataset(ds, train_idx)
    test = subset_dataset(ds, test_idx)

    cspec = replace(config.corruption, seed=derive_seed(config.corruption.seed, _STREAM_CORRUPT, repeat))
    train = corrupt(train, cspec)

    scfg = replace(config.solver, init_seed=derive_seed(config.solver.init_seed, _STREAM_INIT, repeat))
    t0 = time.perf_counter()
    w, trace = fit(train, scfg)
    fit_seconds = time.perf_counter() - t0

    scores = predict(w, test)
    report = evaluate_predictions(scores, _clean_truth(test))
    metrics = {
        "one_minus_hamming": report.one_minus_hamming,
        "one_minus_ranking": report.one_minus_ranking,
        "average_precision": report.average_precision,
        "auc": report.auc,
    }
    return RepeatResult(
        metrics=metrics,
        n_test=test.n_samples,
        iterations=trace.iterations,
        converged=trace.converged,
        final_objective=trace.objective[-1],
        final_surrogate=trace.surrogate[-1],
        final_residual=trace.residual[-1],
        trace=trace,
        fit_seconds=fit_seconds,
    )


def summarize(repeats):
    """Mean and sample standard deviation per metric, in metric order."""
    summary = {}
    for name in METRIC_NAMES:
        values = np.array([r.metrics[name] for r in repeats])
        std = float(np.std(values, ddof=1)) if values.size > 1 else 0.0
        summary[name] = {"mean": float(np.mean(values)), "std": std}
    return summary


def run_experiment(config, fmt="json"):
    """Run all repeats of one configuration and optionally write reports.

    Returns the :class:`RunRecord`; reports land under ``config.outputs``
    when that is set.
    """
    ds = load_source(config)
    repeats = []
    for r in range(config.repeats):
        try:
            repeats.append(run_repeat(ds, config, r))
        except MvmlError as exc:
            exc.args = (f"repeat {r}: {exc}",)
            raise
    record = RunRecord(
        config_hash=config.config_hash,
        config=config.to_dict(),
        repeats=repeats,
        summary=summarize(repeats),
    )
    if config.outputs is not None:
        export_report(record, fmt, config.outputs)
    return record


def _atomic_write(path, text):
    path = Path(path)
    os.makedirs(path.parent, exist_ok=True)
    try:
        fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=path.name, suffix=".tmp")
        with os.fdopen(fd, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except OSError as exc:
        raise IoError(f"writing {path} failed: {exc}")
    return path


def export_report(record, fmt, out_dir):
    """Write a run record under ``out_dir``; returns the written paths.

    ``json`` writes ``report.json`` (sorted keys, convergence series
    embedded). ``csv`` writes ``metrics.csv`` with one row per metric
    (mean, std, then the per-repeat values) plus one
    ``convergence_XX.csv`` per repeat with columns iteration,
    objective, surrogate, residual.
    """
    if fmt not in ("json", "csv"):
        raise InvalidInput(f"format must be 'json' or 'csv', got {fmt!r}")
    out = Path(out_dir)
    written = []
    if fmt == "json":
        text = json.dumps(record.to_dict(), indent=2, sort_keys=True) + "\n"
        written.append(_atomic_write(out / "report.json", text))
        return written

    rows = [["metric", "mean", "std"] + [f"rep{r:02d}" for r in range(len(record.repeats))]]
    for name in METRIC_NAMES:
        rows.append(
            [name, repr(record.summary[name]["mean"]), repr(record.summary[name]["std"])]
            + [repr(r.metrics[name]) for r in record.repeats]
        )
    written.append(_atomic_write(out / "metrics.csv", _csv_text(rows)))
    for r, repeat in enumerate(record.repeats):
        rows = [["iteration", "objective", "surrogate", "residual"]]
        trace = repeat.trace
        for t in range(trace.iterations):
            rows.append(
                [
                    str(t + 1),
                    repr(trace.objective[t]),
                    repr(trace.surrogate[t]),
                    repr(trace.residual[t]),
                ]
            )
        written.append(_atomic_write(out / f"convergence_{r:02d}.csv", _csv_text(rows)))
    return written


def _csv_text(rows):
    lines = []
    for row in rows:
        lines.append(",".join(row))
    return "\n".join(lines) + "\n"


def prediction_stack_with_sublabels(ds, w):
    """Present-row prediction stack plus per-label row selections into it.

    Returns ``(stack, rows_per_label)`` where ``stack`` vertically
    concatenates each view's predictions on its present rows and
    ``rows_per_label[k]`` indexes the stack rows whose sample is tagged
    positive for label ``k`` in its view.
    """
    from .data import present_rows, sublabel_rows

    blocks = []
    rows_per_label = [[] for _ in range(ds.n_labels)]
    offset = 0
    for view, wi in zip(ds.views, w.weights):
        present = present_rows(view)
        blocks.append(view.features[present] @ wi)
        for k in range(ds.n_labels):
            sub = sublabel_rows(view, k)
            if sub.size:
                rows_per_label[k].append(offset + np.searchsorted(present, sub))
        offset += present.size
    stack = np.vstack(blocks)
    rows_per_label = [
        np.concatenate(parts) if parts else np.zeros(0, dtype=int) for parts in rows_per_label
    ]
    return stack, rows_per_label


def bench_subgradient(
    sizes=((10000, 100), (10000, 200), (20000, 100), (20000, 200), (40000, 100), (40000, 200)),
    repeats=10,
    seed=0,
    oracle_memory_limit=2e9,
):
    """Time the Gram-route subgradient against a full-SVD oracle.

    The oracle computes ``numpy.linalg.svd(a, full_matrices=True)`` and
    forms ``U[:, :r] @ Vt[:r]``; sizes whose full ``U`` would exceed
    ``oracle_memory_limit`` bytes skip the oracle (reported as None).
    Returns one row per size with mean seconds per method.
    """
    results = []
    for n, c in sizes:
        if n < 1 or c < 1:
            raise InvalidInput(f"sizes must be positive, got ({n}, {c})")
        rng = np.random.default_rng(np.random.SeedSequence([seed, n, c]))
        a = rng.standard_normal((n, c))

        trace_norm_subgradient(a)  # warm-up
        kernel_times = []
        for _ in range(repeats):
            t0 = time.perf_counter()
            trace_norm_subgradient(a)
            kernel_times.append(time.perf_counter() - t0)

        oracle_bytes = 8 * (n * n + n * c + c * c)
        oracle_seconds = None
        if oracle_bytes <= oracle_memory_limit:
            oracle_times = []
            for _ in range(repeats):
                t0 = time.perf_counter()
                u, sigma, vt = np.linalg.svd(a, full_matrices=True)
                r = int(np.count_nonzero(sigma > 1e-10 * max(sigma[0], 1.0)))
                u[:, :r] @ vt[:r]
                oracle_times.append(time.perf_counter() - t0)
            oracle_seconds = float(np.mean(oracle_times))

        results.append(
            {
                "n": n,
                "c": c,
                "kernel_seconds": float(np.mean(kernel_times)),
                "oracle_seconds": oracle_seconds,
            }
        )
    return results
