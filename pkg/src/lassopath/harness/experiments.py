"""End-to-end experiments: worst-case smoothing table, MNIST patch regression,
and the homotopy-versus-oracle batch check.

Trials are independent tasks keyed by ``(seed, parameters, trial index)``;
results are always merged in trial order, so serial and parallel runs agree.
"""

from __future__ import annotations

import io
import csv
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from ..homotopy import solve_path
from ..instances import (ADVERSARIAL_SHRINK, SmoothingSpec, VarianceMode, gen_adversarial,
                         gen_gaussian, normalize, philox_key, smooth, uniforms)
from ..oracle import enumerate_sign_patterns
from ..precision import Precision, extremal_singular_values
from ..problem import ProblemInstance
from .records import RunRecord

_STREAM_MNIST = 21
INF_ROW = math.inf


class RankDeficient(ArithmeticError):
    pass


def _map(func, tasks, workers, initializer=None, initargs=()):
    if workers and workers > 1:
        with ProcessPoolExecutor(max_workers=workers, initializer=initializer, initargs=initargs) as pool:
            return list(pool.map(func, tasks, chunksize=max(1, len(tasks) // (4 * workers))))
    if initializer is not None:
        initializer(*initargs)
    return [func(t) for t in tasks]


def _format_count(x):
    if x is None:
        return "failed"
    if float(x).is_integer():
        return str(int(x))
    return f"{x:.2f}"


def _format_k(k):
    return "inf" if math.isinf(k) else str(int(k)) if float(k).is_integer() else repr(k)


@dataclass
class CellStats:
    counts: list
    failures: int

    @property
    def ok(self):
        return self.failures == 0 and bool(self.counts)

    @property
    def mean(self):
        return float(np.mean(self.counts)) if self.counts else None

    def summary(self):
        c = np.asarray(self.counts, dtype=float)
        return {
            "mean": self.mean,
            "std": float(c.std()) if c.size else None,
            "min": int(c.min()) if c.size else None,
            "max": int(c.max()) if c.size else None,
            "trials_ok": len(self.counts),
            "trials_failed": self.failures,
        }


def _run_record(experiment, inst, prec, fn):
    start = time.perf_counter()
    meta = dict(inst.meta) if inst is not None else {}
    try:
        path = fn()
    except Exception as exc:  # a failed trial is data, not a crash
        return RunRecord(experiment, meta, None, None, time.perf_counter() - start, prec.value, None,
                         error=f"{type(exc).__name__}: {exc}")
    diag = path.diagnostics
    error = None
    if not diag.get("kkt_passed", True):
        error = f"KktViolation: {diag['max_kkt_violation']:.3e} > {diag['kkt_tol']:.1e}"
    return RunRecord(experiment, meta, path.count, len(path.breakpoints), time.perf_counter() - start,
                     prec.value, diag.get("max_kkt_violation"), error=error)


# ---------------------------------------------------------------- smoothing table


def _table1_task(task):
    d, k, trial, seed, prec, shrink, renormalize = task
    prec = Precision.parse(prec)
    try:
        base = gen_adversarial(d, precision=prec, shrink=shrink, verify=False)
    except Exception as exc:
        return RunRecord("table1", {"d": d, "k": k, "trial": trial}, None, None, 0.0, prec.value, None,
                         error=f"{type(exc).__name__}: {exc}")
    if math.isinf(k):
        inst = base.with_meta(trial=trial, k=k)
    else:
        spec = SmoothingSpec(10.0 ** (-k), VarianceMode.PER_ENTRY, seed, stream=(d, int(round(k * 1000)), trial))
        inst = smooth(base, spec).with_meta(trial=trial, k=k)
        if renormalize:
            inst = normalize(inst)
    return _run_record("table1", inst, prec, lambda: solve_path(inst, prec))


@dataclass
class Table1Result:
    dims: list
    ks: list
    cells: dict
    records: list
    params: dict = field(default_factory=dict)

    def cell(self, k, d):
        return self.cells[(k, d)]

    def to_csv(self):
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["neg_log10_sigma"] + [f"d={d}" for d in self.dims])
        for k in self.ks:
            w.writerow([_format_k(k)] + [_format_count(self.cells[(k, d)].mean if self.cells[(k, d)].ok else None)
                                         for d in self.dims])
        return buf.getvalue()

    def to_json(self):
        return {
            "experiment": "table1",
            "params": self.params,
            "cells": [{"neg_log10_sigma": _format_k(k), "d": d, **self.cells[(k, d)].summary()}
                      for k in self.ks for d in self.dims],
            "records": [r.to_dict() for r in self.records],
        }


def run_table1(dims, neg_log10_sigmas, trials=100, seed=0, precision=Precision.EXTENDED, workers=1,
               shrink=ADVERSARIAL_SHRINK, renormalize=False):
    """Path counts of smoothed worst-case instances on a ``sigma x d`` grid.

    Each cell smooths the ``d``-dimensional worst-case design with per-entry
    noise of standard deviation ``10^-k`` in ``trials`` independent draws; the
    ``k = inf`` row solves the unsmoothed design once.  Cells with any failed
    trial are reported as failed.  ``y`` keeps its all-ones value after
    smoothing unless ``renormalize`` is set, which rescales it to unit norm.
    """
    prec = Precision.parse(precision)
    dims = [int(d) for d in dims]
    ks = [float(k) for k in neg_log10_sigmas]
    for d in dims:
        if not 1 <= d <= 10:
            raise ValueError(f"dimension {d} outside 1..10")
    if trials < 1:
        raise ValueError("trials must be >= 1")
    tasks, keys = [], []
    for k in ks:
        for d in dims:
            for t in range(1 if math.isinf(k) else trials):
                tasks.append((d, k, t, seed, prec.value, shrink, renormalize))
                keys.append((k, d))
    records = _map(_table1_task, tasks, workers)
    cells = {(k, d): CellStats([], 0) for k in ks for d in dims}
    for key, rec in zip(keys, records):
        if rec.failed:
            cells[key].failures += 1
        else:
            cells[key].counts.append(rec.segment_count)
    params = {"dims": dims, "neg_log10_sigmas": [_format_k(k) for k in ks], "trials": trials, "seed": seed,
              "precision": prec.value, "shrink": shrink, "renormalize": renormalize,
              "variance_mode": VarianceMode.PER_ENTRY.value}
    return Table1Result(dims, ks, cells, records, params)


# ---------------------------------------------------------------- MNIST

_DATASET = None


def _set_dataset(images):
    global _DATASET
    _DATASET = images


def mnist_design(images, n, size, seed, trial, attempt=0):
    """Patch-regression instance: neighbours of a random patch predict its centre.

    One fully interior ``size x size`` patch is drawn from each of ``n``
    distinct random images.  Features are the patch pixels without the
    centre scaled to ``[0, 1]``; the target is the centre pixel, scaled to
    unit norm.  Columns that are zero in every row are dropped.
    """
    if size < 3 or size % 2 == 0:
        raise ValueError(f"patch size must be odd and >= 3, got {size}")
    count, rows, cols = images.shape
    if n > count:
        raise ValueError(f"need {n} images, dataset has {count}")
    if size * size - 1 > n:
        raise ValueError("feature dimension exceeds sample count")
    u = uniforms(count + 2 * n, seed, _STREAM_MNIST, size, trial, attempt)
    chosen = np.argsort(u[:count], kind="stable")[:n]
    r0 = np.minimum((u[count:count + n] * (rows - size + 1)).astype(int), rows - size)
    c0 = np.minimum((u[count + n:] * (cols - size + 1)).astype(int), cols - size)
    patches = np.stack([images[i, r:r + size, c:c + size] for i, r, c in zip(chosen, r0, c0)])
    flat = patches.reshape(n, -1).astype(np.float64) / 255.0
    centre = (size * size) // 2
    y = flat[:, centre].copy()
    X = np.delete(flat, centre, axis=1)
    keep = np.flatnonzero(np.any(X != 0, axis=0))
    meta = {"generator": "mnist-patch", "patch_size": size, "feature_dim": size * size - 1,
            "kept_columns": len(keep), "seed": seed, "trial": trial, "attempt": attempt, "sigma": None}
    inst = ProblemInstance(X[:, keep], y, meta)
    return normalize(inst)


def _mnist_task(task):
    n, size, seed, trial, prec, rank_tol = task
    prec = Precision.parse(prec)
    last = None
    for attempt in (0, 1):
        inst = None
        try:
            inst = mnist_design(_DATASET, n, size, seed, trial, attempt)
            alpha, beta = extremal_singular_values(inst.X)
            if not alpha > rank_tol * beta:
                raise RankDeficient(f"alpha/beta = {alpha / beta:.3e}")
        except Exception as exc:
            last = RunRecord("mnist", inst.meta if inst else {"patch_size": size, "trial": trial}, None, None,
                             0.0, prec.value, None, error=f"{type(exc).__name__}: {exc}")
            if isinstance(exc, RankDeficient):
                continue
            return last
        return _run_record("mnist", inst, prec, lambda: solve_path(inst, prec))
    return last


@dataclass
class MnistResult:
    patch_sizes: list
    cells: dict
    records: list
    params: dict = field(default_factory=dict)

    def feature_dims(self):
        return [s * s - 1 for s in self.patch_sizes]

    def means(self):
        return [self.cells[s].mean for s in self.patch_sizes]

    def slope(self):
        return loglog_slope(self.feature_dims(), self.means())

    def to_csv(self):
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["patch_size", "feature_dim", "mean_count", "std_count", "min_count", "max_count",
                    "trials_ok", "trials_failed"])
        for s in self.patch_sizes:
            sm = self.cells[s].summary()
            w.writerow([s, s * s - 1, _format_count(sm["mean"]),
                        "" if sm["std"] is None else f"{sm['std']:.2f}",
                        sm["min"], sm["max"], sm["trials_ok"], sm["trials_failed"]])
        return buf.getvalue()

    def to_json(self):
        try:
            slope = self.slope()
        except ValueError:
            slope = None
        return {
            "experiment": "mnist",
            "params": self.params,
            "loglog_slope": slope,
            "cells": [{"patch_size": s, "feature_dim": s * s - 1, **self.cells[s].summary()}
                      for s in self.patch_sizes],
            "records": [r.to_dict() for r in self.records],
        }


def loglog_slope(xs, ys):
    """Least-squares slope of ``log y`` against ``log x``."""
    xs = np.asarray(xs, dtype=float)
    ys = np.asarray([np.nan if y is None else y for y in ys], dtype=float)
    if np.any(~np.isfinite(ys)) or np.any(ys <= 0) or len(xs) < 2:
        raise ValueError("slope needs at least two positive means")
    return float(np.polyfit(np.log(xs), np.log(ys), 1)[0])


def run_mnist(dataset, n=1000, patch_sizes=(3, 5, 7, 9), trials=100, seed=0, precision=Precision.STANDARD,
              workers=1, rank_tol=1e-10):
    """Mean path complexity of centre-pixel regression per patch size."""
    prec = Precision.parse(precision)
    images = dataset.images if hasattr(dataset, "images") else np.asarray(dataset)
    patch_sizes = [int(s) for s in patch_sizes]
    tasks = [(n, s, seed, t, prec.value, rank_tol) for s in patch_sizes for t in range(trials)]
    records = _map(_mnist_task, tasks, workers, initializer=_set_dataset, initargs=(images,))
    cells = {s: CellStats([], 0) for s in patch_sizes}
    for (_, s, *_), rec in zip(tasks, records):
        if rec.failed:
            cells[s].failures += 1
        else:
            cells[s].counts.append(rec.segment_count)
    params = {"n": n, "patch_sizes": patch_sizes, "trials": trials, "seed": seed, "precision": prec.value,
              "dataset_digest": getattr(dataset, "digest", None)}
    return MnistResult(patch_sizes, cells, records, params)


# ---------------------------------------------------------------- oracle check


def trial_seed(seed, *stream):
    """Derived 63-bit integer seed for a sub-experiment."""
    return int(philox_key(seed, *stream)[0] >> np.uint64(1))


def _oracle_task(task):
    d, n, seed, trial, prec, rtol = task
    prec = Precision.parse(prec)
    inst = gen_gaussian(n, d, trial_seed(seed, d, trial)).astype(prec)
    rec = {"d": d, "n": n, "trial": trial, "match": False}
    try:
        hp = solve_path(inst, prec)
        op = enumerate_sign_patterns(inst, prec)
    except Exception as exc:
        rec["error"] = f"{type(exc).__name__}: {exc}"
        return rec
    rec["homotopy_count"] = hp.count
    rec["oracle_count"] = op.count
    rec["kkt_max_violation"] = hp.diagnostics["max_kkt_violation"]
    rec["kkt_passed"] = hp.diagnostics["kkt_passed"]
    same_signs = hp.sign_sequence == op.sign_sequence
    rel = max((abs(float(a - b)) / abs(float(b)) for a, b in zip(hp.breakpoints, op.breakpoints)), default=0.0)
    rec["max_breakpoint_rel_diff"] = rel if same_signs else None
    rec["match"] = bool(same_signs and rel <= rtol and hp.diagnostics["kkt_passed"])
    return rec


def oracle_check(dims=(2, 3, 4, 5), trials=100, seed=0, extra_rows=3, precision=Precision.STANDARD,
                 rtol=1e-9, workers=1):
    """Compare homotopy and sign-pattern paths on seeded Gaussian instances.

    Trial ``t`` uses ``d = dims[t % len(dims)]`` and ``n = d + extra_rows``.
    """
    prec = Precision.parse(precision)
    dims = [int(d) for d in dims]
    tasks = [(dims[t % len(dims)], dims[t % len(dims)] + extra_rows, seed, t, prec.value, rtol)
             for t in range(trials)]
    return _map(_oracle_task, tasks, workers)


TABLE1_PLOT_SCRIPT = '''"""Plot path complexity against dimension from table1.csv."""
import csv
import sys

import matplotlib.pyplot as plt

src = sys.argv[1] if len(sys.argv) > 1 else "table1.csv"
with open(src) as fh:
    rows = list(csv.reader(fh))
dims = [int(h.split("=")[1]) for h in rows[0][1:]]
fig, ax = plt.subplots()
for row in rows[1:]:
    vals = [float(v) if v != "failed" else float("nan") for v in row[1:]]
    label = "sigma = 0" if row[0] == "inf" else f"sigma = 1e-{row[0]}"
    ax.semilogy(dims, vals, marker="o", label=label)
ax.set_xlabel("d")
ax.set_ylabel("number of linear segments")
ax.legend(fontsize="small")
fig.savefig(src.rsplit(".", 1)[0] + ".png", dpi=150)
'''

MNIST_PLOT_SCRIPT = '''"""Plot mean path complexity against patch size / feature dimension from mnist.csv."""
import csv
import sys

import matplotlib.pyplot as plt

src = sys.argv[1] if len(sys.argv) > 1 else "mnist.csv"
with open(src) as fh:
    rows = list(csv.DictReader(fh))
dims = [int(r["feature_dim"]) for r in rows]
means = [float(r["mean_count"]) if r["mean_count"] != "failed" else float("nan") for r in rows]
fig, ax = plt.subplots()
ax.loglog(dims, means, marker="o", label="measured")
ax.loglog(dims, [means[0] * d / dims[0] for d in dims], "--", label="linear")
for r, d, m in zip(rows, dims, means):
    ax.annotate(f"{r['patch_size']}x{r['patch_size']}", (d, m))
ax.set_xlabel("feature dimension")
ax.set_ylabel("number of linear segments")
ax.legend()
fig.savefig(src.rsplit(".", 1)[0] + ".png", dpi=150)
'''
