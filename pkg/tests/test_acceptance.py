"""Acceptance suite: one test per criterion, each at its stated tolerance.

Every test prints a single PASS/FAIL line (collected again in the terminal
summary). Runtime limits are part of each criterion and are checked too.
"""

import math
import time

import numpy as np
from scipy import integrate

from ghslike.core import RngSeed, is_positive_definite, sample_covariance, sample_mvn
from ghslike.ecm import EcmConfig, random_pd_start, run_single_start
from ghslike.global_scale import ScaleSolveSpec, solve_global_scale
from ghslike.harness import BenchmarkConfig, run_benchmark
from ghslike.mcmc import McmcConfig, McmcState, run_mcmc, sample_global_scale
from ghslike.metrics import mcc_from_counts, steins_loss
from ghslike.penalty import expected_nu, hs_like_density, penalty, penalty_grad, penalty_hess, prior_tail_mass
from ghslike.structures import gen_cliques, gen_hubs, gen_random, make_truth

from oracles import expected_nu_quadrature, half_cauchy_quantile, steins_loss_eigen


def _random_points(n, seed):
    rng = np.random.default_rng(seed)
    w = 10.0 ** rng.uniform(-3, 1, n) * rng.choice([-1, 1], n)
    a = 10.0 ** rng.uniform(-4, 0, n)
    return w, a


def test_c1_estep_oracle(criterion):
    t0 = time.perf_counter()
    worst = 0.0
    for w in np.logspace(-3, 1, 7):
        for a in np.logspace(-4, 0, 5):
            worst = max(worst, abs(expected_nu(w, a) / expected_nu_quadrature(w, a) - 1))
    secs = time.perf_counter() - t0
    ok = worst < 1e-6 and secs < 10
    assert criterion(1, "E-step vs quadrature oracle", ok, f"max rel err {worst:.2e} on 35 points, {secs:.1f}s")


def test_c2_penalty_suite(criterion):
    t0 = time.perf_counter()
    w, a = _random_points(10_000, 20)
    hess = penalty_hess(w, a)
    concave = bool(np.all(hess < 0))

    h = 1e-5 * np.abs(w)
    fd = (penalty(w + h, a) - penalty(w - h, a)) / (2 * h)
    fd_err = float(np.max(np.abs(penalty_grad(w, a) / fd - 1)))

    z0 = 1.0356
    k = 1 / (math.exp(z0) - 1)
    c3 = 2 * abs((1 + 3 * k) * math.log(1 + 1 / k) - 2)
    curv = w * w * np.abs(hess)
    c3_ok = bool(np.all(curv <= c3))

    n = 120
    grad_ok = bool(np.all(np.abs(2 / n * penalty_grad(w, a)) < 4 / (n * np.abs(w))))
    secs = time.perf_counter() - t0

    ok = concave and fd_err < 1e-5 and c3_ok and grad_ok and secs < 5
    detail = (
        f"concave={concave}, fd rel err {fd_err:.1e}, "
        f"C3={c3:.4f} bound holds={c3_ok} (max w^2|pen''|={curv.max():.4f}, "
        f"violations {int(np.sum(curv > c3))}/10000), grad bound={grad_ok}, {secs:.1f}s"
    )
    assert criterion(2, "penalty analysis suite", ok, detail)


def test_c3_normalization_and_tail(criterion):
    t0 = time.perf_counter()
    a_grid = np.logspace(-4, 0, 5)
    t_grid = np.logspace(-2, 1, 5)
    worst_norm, bound_ok = 0.0, True
    for a in a_grid:
        val, _ = integrate.quad(
            lambda s: hs_like_density(math.exp(s), a) * math.exp(s),
            -60, 60, points=[0.5 * math.log(a)], limit=400, epsabs=1e-13,
        )
        worst_norm = max(worst_norm, abs(2 * val - 1))
        for t in t_grid:
            bound_ok &= prior_tail_mass(t, a) <= (2 / math.pi) * math.sqrt(a) / t
    secs = time.perf_counter() - t0
    ok = worst_norm < 1e-6 and bound_ok and secs < 10
    assert criterion(3, "prior normalization and tail bound", ok, f"max |mass-1| {worst_norm:.1e}, tail bound on 5x5 grid={bound_ok}, {secs:.1f}s")


def test_c4_global_scale(criterion):
    t0 = time.perf_counter()
    cases = [((120, 100), 0.0143), ((120, 200), 0.0169), ((33, 67), 0.0519)]
    parts, ok = [], True
    for (n, p), ref in cases:
        a = solve_global_scale(ScaleSolveSpec(n=n, p=p))
        a_taylor = solve_global_scale(ScaleSolveSpec(n=n, p=p), method="taylor")
        rel = abs(a / ref - 1)
        ok &= rel <= 0.05
        parts.append(f"({n},{p}): a={a:.3g} vs {ref} (rel {rel:.2f}; taylor mode {a_taylor:.3g})")
    secs = time.perf_counter() - t0
    ok &= secs < 5
    assert criterion(4, "global scale vs reported values", ok, "; ".join(parts) + f", {secs:.1f}s")


def test_c5_ecm_invariants(criterion):
    t0 = time.perf_counter()
    all_pd, worst_step, instances = True, np.inf, 0
    for k in range(20):
        p = 5 if k < 10 else 20
        n = 4 * p
        truth = gen_random(p, prob=0.3 if p == 5 else 0.1, rng=RngSeed(500, k))
        stats = sample_covariance(sample_mvn(n, truth.omega0, RngSeed(501, k)))
        a = solve_global_scale(ScaleSolveSpec(n=n, p=p))
        flags = []
        _, trace, _ = run_single_start(
            stats,
            random_pd_start(p, RngSeed(502, k).generator()),
            EcmConfig(a=a, tol=1e-6, max_iter=2000),
            callback=lambda st: flags.append(is_positive_definite(st.omega)[0]),
        )
        all_pd &= all(flags)
        worst_step = min(worst_step, float(np.min(np.diff(trace))))
        instances += 1
    secs = time.perf_counter() - t0
    ok = all_pd and worst_step >= -1e-8 and secs < 60
    assert criterion(5, "ECM PD and monotone ascent", ok, f"{instances} instances, every sweep PD={all_pd}, min objective step {worst_step:.2e}, {secs:.1f}s")


def _ecm_random_table(a_mode, outdir):
    cfg = BenchmarkConfig(
        structures=["random"], n=120, p=100, reps=10, methods=["ecm"],
        ecm={"n_starts": 10, "start_scheme": "random_pd"}, a_mode=a_mode,
        master_seed=2024, outdir=str(outdir),
    )
    man = run_benchmark(cfg)
    return man["a"], man["summary"]["random"]["ecm"]


def test_c6_ecm_table_one(criterion, tmp_path):
    t0 = time.perf_counter()
    a, cell = _ecm_random_table("auto", tmp_path / "auto")
    secs = time.perf_counter() - t0
    m = cell["metrics"]
    fn, sl = m["fnorm"]["mean"], m["steins_loss"]["mean"]
    ok = cell["n_failed"] == 0 and 1.9 <= fn <= 2.6 and 3.0 <= sl <= 4.6 and secs < 900
    detail = (
        f"a={a:.3g}, F-norm {fn:.3f} ({m['fnorm']['sd']:.3f}) in [1.9,2.6], "
        f"Stein {sl:.3f} ({m['steins_loss']['sd']:.3f}) in [3.0,4.6], {secs:.0f}s"
    )
    passed = criterion(6, "ECM desk-scale Table 1 (Random, a=auto)", ok, detail)

    # not gating: the same run at the reported a for (120, 100)
    _, diag = _ecm_random_table(0.0143, tmp_path / "fixed")
    dm = diag["metrics"]
    print(f"  diagnostic at a=0.0143: F-norm {dm['fnorm']['mean']:.3f}, Stein {dm['steins_loss']['mean']:.3f}")
    assert passed


def test_c7_mcmc(criterion):
    t0 = time.perf_counter()
    all_pd, worst_track = True, 0.0

    def check_draws(res):
        nonlocal all_pd, worst_track
        all_pd &= all(is_positive_definite(res.omega_draw(k))[0] for k in range(res.draws.shape[0]))
        worst_track = max(worst_track, res.max_sigma_error)

    omega0 = np.eye(5)
    omega0[0, 1] = omega0[1, 0] = -0.45
    stats = sample_covariance(sample_mvn(5000, omega0, RngSeed(700)))
    res = run_mcmc(stats, McmcConfig(burnin=1000, nmc=2000), rng=RngSeed(701))
    check_draws(res)
    frob = float(np.linalg.norm(res.summary.mean_omega - omega0))

    good = 0
    fprs = []
    for seed in range(10):
        truth = make_truth("cliques-pos", 30, rng=RngSeed(710, seed))
        stats = sample_covariance(sample_mvn(120, truth.omega0, RngSeed(711, seed)))
        res = run_mcmc(stats, McmcConfig(ci_level=0.5), rng=RngSeed(712, seed))
        check_draws(res)
        iu = np.triu_indices(30, 1)
        sel, tru = res.summary.adjacency[iu], truth.adjacency()[iu]
        tpr = np.sum(sel & tru) / np.sum(tru)
        fpr = np.sum(sel & ~tru) / np.sum(~tru)
        fprs.append(fpr)
        good += tpr == 1 and fpr <= 0.05
    secs = time.perf_counter() - t0
    ok = all_pd and worst_track < 1e-6 and frob < 0.15 and good >= 8 and secs < 1200
    detail = (
        f"draws PD={all_pd}, max tracking err {worst_track:.1e}, p=5 Frobenius {frob:.3f}, "
        f"cliques TPR=1 & FPR<=0.05 on {good}/10 seeds (max FPR {max(fprs):.3f}), {secs:.0f}s"
    )
    assert criterion(7, "MCMC correctness at scale-down", ok, detail)


def test_c8_half_cauchy(criterion):
    t0 = time.perf_counter()
    rng = np.random.default_rng(800)
    state = McmcState.initial(1)  # no pairs: the data term is empty
    tau = np.empty(1_000_000)
    for k in range(tau.size):
        sample_global_scale(state, rng)
        tau[k] = math.sqrt(state.tau2)
    q = np.arange(1, 10) / 10
    err = np.abs(np.quantile(tau, q) - [half_cauchy_quantile(v) for v in q])
    secs = time.perf_counter() - t0
    ok = err.max() < 0.02 and secs < 60
    assert criterion(8, "half-Cauchy marginal of the global scale", ok, f"max quantile err {err.max():.4f}, {secs:.1f}s")


def test_c9_generators(criterion):
    t0 = time.perf_counter()
    got = {
        "hubs100": gen_hubs(100),
        "hubs200": gen_hubs(200),
        "cliques+100": gen_cliques(100, "+", rng=RngSeed(900, 0)),
        "cliques+200": gen_cliques(200, "+", rng=RngSeed(900, 1)),
        "cliques-100": gen_cliques(100, "-", rng=RngSeed(900, 2)),
        "cliques-200": gen_cliques(200, "-", rng=RngSeed(900, 3)),
    }
    want = {"hubs100": 90, "hubs200": 180, "cliques+100": 30, "cliques+200": 60, "cliques-100": 30, "cliques-200": 60}
    counts = {k: len(t.support) for k, t in got.items()}
    pd = all(is_positive_definite(t.omega0)[0] for t in got.values())
    secs = time.perf_counter() - t0
    ok = counts == want and pd and secs < 5
    assert criterion(9, "generator support sizes", ok, f"{counts}, all PD={pd}, {secs:.1f}s")


def test_c10_metrics(criterion, tmp_path):
    t0 = time.perf_counter()
    rng = np.random.default_rng(1000)
    worst = 0.0
    for _ in range(20):
        A, B = rng.standard_normal((2, 6, 6))
        O, S = A @ A.T / 6 + 0.5 * np.eye(6), B @ B.T / 6 + 0.5 * np.eye(6)
        worst = max(worst, abs(steins_loss(O, S) - steins_loss_eigen(O, S)))
    mcc = mcc_from_counts(3, 1, 1, 95)

    def table(name):
        cfg = BenchmarkConfig(
            structures=["random", "hubs"], n=40, p=10, reps=3, methods=["ecm", "mcmc"],
            ecm={"n_starts": 2}, mcmc={"burnin": 50, "nmc": 100}, master_seed=7,
            outdir=str(tmp_path / name), timing=False,
        )
        run_benchmark(cfg)
        return (tmp_path / name / "table.csv").read_bytes()

    identical = table("a") == table("b")
    secs = time.perf_counter() - t0
    ok = worst < 1e-10 and abs(mcc - 284 / 384) < 1e-15 and identical and secs < 10
    assert criterion(10, "metrics oracles and determinism", ok, f"Stein eigen diff {worst:.1e}, MCC {mcc:.6f}, tables identical={identical}, {secs:.1f}s")
