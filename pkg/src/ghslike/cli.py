"""Command-line entry point: ``ghslike <subcommand> ...``.

Exit codes: 0 on success, 2 for bad input, 3 for numerical failure.
"""

from __future__ import annotations

import argparse
import csv
import json
import logging
import sys
import time
from pathlib import Path

import numpy as np

from .core import InputError, NumericalError, RngSeed, read_json, sample_mvn, write_json, write_matrix_csv
from .ecm import EDGE_THRESHOLD, EcmConfig, ecm_fit, select_edges_map
from .global_scale import ScaleSolveSpec, solve_global_scale
from .harness import BenchmarkConfig, ingest_data, resolve_a, run_benchmark
from .mcmc import McmcConfig, read_draws, run_mcmc, summarize, write_draws
from .metrics import ROW_LABELS, TABLE_ROWS, MetricsReport, aggregate, evaluate
from .penalty import hs_like_density, penalty
from .structures import KINDS, TruthSpec, make_truth

EXIT_INPUT = 2
EXIT_NUMERICAL = 3


def _a_arg(s):
    if s == "auto":
        return s
    try:
        return float(s)
    except ValueError:
        raise argparse.ArgumentTypeError("expected a positive float or 'auto'") from None


def cmd_simulate(args):
    kw = {"dense_blocks": True} if args.dense_blocks else {}
    if args.prob is not None:
        kw["prob"] = args.prob
    truth = make_truth(args.structure, args.p, rng=RngSeed(args.seed, 0), **kw)
    outdir = Path(args.outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    write_json(outdir / "truth.json", truth.to_dict())
    for k in range(args.reps):
        X = sample_mvn(args.n, truth.omega0, RngSeed(args.seed, k + 1))
        write_matrix_csv(outdir / f"rep_{k}.csv", X)
    print(json.dumps({"structure": truth.kind, "support_size": len(truth.support), "repaired": truth.repaired}))


def cmd_fit_ecm(args):
    stats, _ = ingest_data(args.data, has_header=args.header, center=args.center)
    a = resolve_a(args.a, stats.n, stats.p)
    cfg = EcmConfig(
        a=a,
        tol=args.tol,
        max_iter=args.max_iter,
        n_starts=args.starts,
        start_scheme=args.start_scheme,
        combine=args.combine,
        seed=args.seed,
    )
    fit = ecm_fit(stats, cfg)
    out = fit.to_dict(cfg)
    out["adjacency"] = select_edges_map(fit.omega_hat, args.threshold).astype(int)
    write_json(args.out, out)


def cmd_fit_mcmc(args):
    stats, _ = ingest_data(args.data, has_header=args.header, center=args.center)
    cfg = McmcConfig(burnin=args.burnin, nmc=args.nmc, thin=args.thin, seed=args.seed, ci_level=args.ci, local_shape=args.local_shape)
    res = run_mcmc(stats, cfg)
    out = {"method": "mcmc", **res.summary.to_dict()}
    out["timing"] = {"wall_time_s": res.wall_time_s}
    out["config"] = cfg.__dict__.copy()
    out["max_sigma_error"] = res.max_sigma_error
    write_json(args.out, out)
    if args.save_draws:
        write_draws(args.save_draws, res.draws, res.p)


def _load_estimate(path, ci_level, threshold):
    """``(omega, adjacency, wall_time)`` from a fit JSON or a binary draw file."""
    path = Path(path)
    with open(path, "rb") as fh:
        is_draws = fh.read(4) == b"GHSL"
    if is_draws:
        draws, p = read_draws(path)
        s = summarize(draws, p, ci_level)
        return s.mean_omega, s.adjacency, float("nan")
    d = read_json(path)
    wall = d.get("timing", {}).get("wall_time_s", float("nan"))
    if "omega_hat" in d:
        omega = np.asarray(d["omega_hat"], dtype=float)
        adj = np.asarray(d["adjacency"], dtype=bool) if "adjacency" in d else select_edges_map(omega, threshold)
    elif "mean_omega" in d:
        omega = np.asarray(d["mean_omega"], dtype=float)
        adj = np.asarray(d["adjacency"], dtype=bool)
    else:
        raise InputError(f"{path}: no omega_hat or mean_omega field")
    return omega, adj, wall


def _write_aggregate(agg, out):
    write_json(out, agg)
    csv_path = Path(out).with_suffix(".csv")
    with open(csv_path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["metric", "mean (sd)"])
        for key in TABLE_ROWS:
            w.writerow([ROW_LABELS[key], f"{agg[key]['mean']:.4f} ({agg[key]['sd']:.4f})"])


def cmd_metrics(args):
    if args.aggregate:
        reports = [MetricsReport(**read_json(p)) for p in args.aggregate]
        _write_aggregate(aggregate(reports), args.out)
        return
    if not (args.estimate and args.truth):
        raise InputError("need --estimate and --truth, or --aggregate")
    truth = TruthSpec.from_dict(read_json(args.truth))
    omega, adj, wall = _load_estimate(args.estimate, args.ci, args.threshold)
    report = evaluate(omega, adj, truth, wall)
    write_json(args.out, report.to_dict())


def cmd_benchmark(args):
    cfg = BenchmarkConfig.from_dict(read_json(args.config))
    if args.outdir:
        cfg.outdir = args.outdir
    manifest = run_benchmark(cfg)
    print((Path(cfg.outdir) / "table.csv").read_text(), end="")
    failed = sum(1 for r in manifest["results"] if "error" in r)
    if failed:
        print(f"{failed} fit(s) failed; see manifest.json", file=sys.stderr)


def cmd_global_scale(args):
    spec = ScaleSolveSpec(n=args.n, p=args.p, p0_over_p=args.p0_frac, sigma2=args.sigma2)
    method = "taylor" if args.taylor else "quadrature"
    t0 = time.perf_counter()
    a = solve_global_scale(spec, method=method)
    print(json.dumps({"a": a, "n": args.n, "p": args.p, "target": spec.target, "method": method, "seconds": time.perf_counter() - t0}))


def cmd_density_table(args):
    w = np.linspace(args.lo, args.hi, args.points)
    w = w[w != 0]
    out = open(args.out, "w", newline="") if args.out else sys.stdout
    try:
        wr = csv.writer(out, lineterminator="\n")
        wr.writerow(["omega", "density", "penalty"])
        for x, d, pen in zip(w, hs_like_density(w, args.a), penalty(w, args.a)):
            wr.writerow([repr(float(x)), repr(float(d)), repr(float(pen))])
    finally:
        if out is not sys.stdout:
            out.close()


def _data_flags(sp):
    sp.add_argument("--data", required=True, help="n x p CSV of observations")
    sp.add_argument("--header", action="store_true", help="skip a header row")
    sp.add_argument("--center", action="store_true", help="mean-center columns first")


def build_parser():
    ap = argparse.ArgumentParser(prog="ghslike", description=__doc__.splitlines()[0])
    ap.add_argument("-v", "--verbose", action="store_true")
    sub = ap.add_subparsers(dest="command", required=True)

    sp = sub.add_parser("simulate", help="draw a truth and replicate data sets")
    sp.add_argument("--structure", choices=KINDS, required=True)
    sp.add_argument("--p", type=int, required=True)
    sp.add_argument("--n", type=int, required=True)
    sp.add_argument("--reps", type=int, default=1)
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--outdir", required=True)
    sp.add_argument("--prob", type=float, default=None, help="edge probability for random")
    sp.add_argument("--dense-blocks", action="store_true", help="hubs: link all pairs within a group")
    sp.set_defaults(func=cmd_simulate)

    sp = sub.add_parser("fit-ecm", help="MAP estimate by ECM")
    _data_flags(sp)
    sp.add_argument("--a", type=_a_arg, default="auto")
    sp.add_argument("--tol", type=float, default=1e-3)
    sp.add_argument("--max-iter", type=int, default=500)
    sp.add_argument("--starts", type=int, default=1)
    sp.add_argument("--start-scheme", choices=("random_pd", "identity"), default="random_pd")
    sp.add_argument("--combine", choices=("average", "best_logposterior"), default="average")
    sp.add_argument("--threshold", type=float, default=EDGE_THRESHOLD)
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--out", required=True)
    sp.set_defaults(func=cmd_fit_ecm)

    sp = sub.add_parser("fit-mcmc", help="posterior sampling by Gibbs")
    _data_flags(sp)
    sp.add_argument("--burnin", type=int, default=1000)
    sp.add_argument("--nmc", type=int, default=5000)
    sp.add_argument("--thin", type=int, default=1)
    sp.add_argument("--ci", type=float, default=0.5)
    sp.add_argument("--local-shape", type=float, default=1.0)
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--out", required=True)
    sp.add_argument("--save-draws", default=None)
    sp.set_defaults(func=cmd_fit_mcmc)

    sp = sub.add_parser("metrics", help="score an estimate or aggregate reports")
    sp.add_argument("--estimate", help="fit JSON or binary draw file")
    sp.add_argument("--truth")
    sp.add_argument("--aggregate", nargs="+", metavar="REPORT", help="report JSONs to combine")
    sp.add_argument("--ci", type=float, default=0.5, help="interval level for draw files")
    sp.add_argument("--threshold", type=float, default=EDGE_THRESHOLD)
    sp.add_argument("--out", required=True)
    sp.set_defaults(func=cmd_metrics)

    sp = sub.add_parser("benchmark", help="run a JSON-configured simulation study")
    sp.add_argument("--config", required=True)
    sp.add_argument("--outdir", default=None)
    sp.set_defaults(func=cmd_benchmark)

    sp = sub.add_parser("global-scale", help="solve for the global scale a")
    sp.add_argument("--n", type=int, required=True)
    sp.add_argument("--p", type=int, required=True)
    sp.add_argument("--p0-frac", type=float, default=None)
    sp.add_argument("--sigma2", type=float, default=1.0)
    sp.add_argument("--taylor", action="store_true", help="truncated-series root instead of quadrature")
    sp.set_defaults(func=cmd_global_scale)

    sp = sub.add_parser("density-table", help="CSV of (omega, density, penalty)")
    sp.add_argument("--a", type=float, default=1.0)
    sp.add_argument("--lo", type=float, default=-3.0)
    sp.add_argument("--hi", type=float, default=3.0)
    sp.add_argument("--points", type=int, default=601)
    sp.add_argument("--out", default=None)
    sp.set_defaults(func=cmd_density_table)
    return ap


def main(argv=None):
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(name)s: %(message)s")
    try:
        args.func(args)
    except NumericalError as exc:
        print(f"numerical error: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except (InputError, ValueError, OSError, KeyError, TypeError) as exc:
        print(f"input error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    return 0


if __name__ == "__main__":
    sys.exit(main())
