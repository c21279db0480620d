"""A reduced simulation table across the three graph families."""

import sys
import tempfile

from ghslike.harness import BenchmarkConfig, format_table, run_benchmark

outdir = sys.argv[1] if len(sys.argv) > 1 else tempfile.mkdtemp()
cfg = BenchmarkConfig(
    structures=["random", "hubs", "cliques-pos"],
    n=60,
    p=20,
    reps=3,
    methods=["ecm", "mcmc"],
    ecm={"n_starts": 2},
    mcmc={"burnin": 200, "nmc": 800},
    outdir=outdir,
)
manifest = run_benchmark(cfg)
print(format_table(manifest["summary"], cfg))
print(f"artifacts in {outdir}")
