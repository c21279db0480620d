"""Simulation benchmarks and data ingestion."""

from __future__ import annotations

import csv
import io
import logging
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from . import __version__
from .core import RngSeed, read_matrix_csv, sample_covariance, sample_mvn, write_json
from .ecm import EDGE_THRESHOLD, EcmConfig, EcmFit, ecm_fit, select_edges_map
from .global_scale import ScaleSolveSpec, solve_global_scale
from .mcmc import McmcConfig, PosteriorSummary, run_mcmc
from .metrics import ROW_LABELS, TABLE_ROWS, MetricsReport, aggregate, evaluate, sparsity
from .structures import KINDS, make_truth

log = logging.getLogger(__name__)

# stream layout under the master seed: structure k owns streams
# [k * STRIDE, (k + 1) * STRIDE); truth uses the first, data replicates the
# next, fits start at FIT_OFFSET
STRIDE = 1_000_000
FIT_OFFSET = 500_000


@dataclass
class BenchmarkConfig:
    structures: list = field(default_factory=lambda: list(KINDS))
    n: int = 120
    p: int = 100
    reps: int = 50
    methods: list = field(default_factory=lambda: ["ecm", "mcmc"])
    ecm: dict = field(default_factory=lambda: {"n_starts": 10, "start_scheme": "random_pd"})
    mcmc: dict = field(default_factory=lambda: {"burnin": 1000, "nmc": 5000})
    a_mode: object = "auto"  # "auto" or a positive float
    master_seed: int = 0
    outdir: str = "benchmark_out"
    workers: int | None = None
    timing: bool = True  # False writes nan in the time row so tables are byte-stable
    edge_threshold: float = EDGE_THRESHOLD
    random_prob: float | None = None

    def __post_init__(self):
        if self.reps < 1:
            raise ValueError("reps must be >= 1")
        if not self.methods or not set(self.methods) <= {"ecm", "mcmc"}:
            raise ValueError("methods must be a nonempty subset of {'ecm', 'mcmc'}")
        for s in self.structures:
            if s not in KINDS:
                raise ValueError(f"unknown structure {s!r}")

    @classmethod
    def from_dict(cls, d):
        return cls(**d)


def resolve_a(a_mode, n, p) -> float:
    if a_mode == "auto":
        return solve_global_scale(ScaleSolveSpec(n=n, p=p))
    a = float(a_mode)
    if not a > 0:
        raise ValueError("fixed a must be positive")
    return a


def _fit_one(job):
    """Worker entry point; returns a plain dict so it pickles cheaply."""
    (sk, rep, method, X, truth, a, ecm_kw, mcmc_kw, master_seed, threshold) = job
    out = {"structure": truth.kind, "rep": rep, "method": method}
    try:
        stats = sample_covariance(X)
        fit_stream = sk * STRIDE + FIT_OFFSET + rep
        t0 = time.perf_counter()
        if method == "ecm":
            cfg = EcmConfig(a=a, seed=master_seed, **ecm_kw)
            fit = ecm_fit(stats, cfg, rng=RngSeed(master_seed, fit_stream))
            elapsed = time.perf_counter() - t0
            omega, adj = fit.omega_hat, select_edges_map(fit.omega_hat, threshold)
        else:
            cfg = McmcConfig(seed=master_seed, **mcmc_kw)
            res = run_mcmc(stats, cfg, rng=RngSeed(master_seed, fit_stream))
            elapsed = time.perf_counter() - t0
            omega, adj = res.summary.mean_omega, res.summary.adjacency
        out["report"] = evaluate(omega, adj, truth, elapsed).to_dict()
    except Exception as exc:  # one bad replicate must not sink the run
        log.warning("fit failed for %s rep %d (%s): %s", truth.kind, rep, method, exc)
        out["error"] = f"{type(exc).__name__}: {exc}"
    return out


def _worker_count(config):
    if config.workers is not None:
        return max(1, int(config.workers))
    env = os.environ.get("GHSL_THREADS")
    if env:
        return max(1, int(env))
    try:
        return len(os.sched_getaffinity(0))
    except AttributeError:  # not available on every platform
        return os.cpu_count() or 1


def run_benchmark(config: BenchmarkConfig) -> dict:
    """Simulate, fit, score and tabulate; writes outputs under ``config.outdir``."""
    outdir = Path(config.outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    a = resolve_a(config.a_mode, config.n, config.p) if "ecm" in config.methods else None

    jobs, truths, seeds = [], {}, {}
    for sk, kind in enumerate(config.structures):
        kw = {"prob": config.random_prob} if kind == "random" else {}
        truth = make_truth(kind, config.p, rng=RngSeed(config.master_seed, sk * STRIDE), **kw)
        truths[kind] = truth
        data = [
            sample_mvn(config.n, truth.omega0, RngSeed(config.master_seed, sk * STRIDE + 1 + r))
            for r in range(config.reps)
        ]
        seeds[kind] = {
            "truth_stream": sk * STRIDE,
            "data_streams": [sk * STRIDE + 1 + r for r in range(config.reps)],
            "fit_streams": [sk * STRIDE + FIT_OFFSET + r for r in range(config.reps)],
        }
        for r, X in enumerate(data):
            for method in config.methods:
                jobs.append((sk, r, method, X, truth, a, config.ecm, config.mcmc, config.master_seed, config.edge_threshold))

    workers = min(_worker_count(config), len(jobs))
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_fit_one, jobs))
    else:
        results = [_fit_one(j) for j in jobs]
    results.sort(key=lambda r: (config.structures.index(r["structure"]), config.methods.index(r["method"]), r["rep"]))

    if not config.timing:
        for r in results:
            if "report" in r:
                r["report"]["wall_time_s"] = float("nan")

    summary = {}
    for kind in config.structures:
        for method in config.methods:
            ok = [MetricsReport(**r["report"]) for r in results if r["structure"] == kind and r["method"] == method and "report" in r]
            failed = sum(1 for r in results if r["structure"] == kind and r["method"] == method and "error" in r)
            agg = aggregate(ok) if ok else {}
            summary.setdefault(kind, {})[method] = {"metrics": agg, "n_ok": len(ok), "n_failed": failed}

    table = format_table(summary, config)
    (outdir / "table.csv").write_text(table)
    for kind, truth in truths.items():
        write_json(outdir / f"truth_{kind}.json", truth.to_dict())
    manifest = {
        "config": asdict(config),
        "a": a,
        "software_version": __version__,
        "seed_scheme": "numpy SeedSequence(master_seed, spawn_key=(stream,)) -> PCG64",
        "streams": seeds,
        "results": results,
        "summary": summary,
    }
    write_json(outdir / "manifest.json", manifest)
    return manifest


def format_table(summary, config) -> str:
    """Metric rows by (structure, method) columns, each cell ``mean (sd)``."""
    cols = [(k, m) for k in config.structures for m in config.methods]
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["metric"] + [f"{k}:{m}" for k, m in cols])
    for key in TABLE_ROWS:
        row = [ROW_LABELS[key]]
        for k, m in cols:
            cell = summary[k][m]["metrics"].get(key)
            row.append("" if cell is None else f"{cell['mean']:.4f} ({cell['sd']:.4f})")
        w.writerow(row)
    return buf.getvalue()


def ingest_data(path, has_header=False, center=False):
    """Read an n x p CSV; returns ``(SampleStats, X)``."""
    X = read_matrix_csv(path, has_header=has_header)
    if center:
        X = X - X.mean(axis=0)
    return sample_covariance(X), X


def summarize_real_fit(fit, threshold=EDGE_THRESHOLD) -> dict:
    """Percent sparsity and nonzero count over the lower triangle."""
    if isinstance(fit, PosteriorSummary):
        adj = fit.adjacency
    elif isinstance(fit, EcmFit):
        adj = select_edges_map(fit.omega_hat, threshold)
    else:
        adj = np.asarray(fit, dtype=bool)
    nnz, pct = sparsity(adj)
    return {"nnz": nnz, "sparsity_pct": pct}

