"""Gibbs sampling and credible-interval edge selection."""

from ghslike import (
    McmcConfig,
    RngSeed,
    evaluate,
    gen_hubs,
    run_mcmc,
    sample_covariance,
    sample_mvn,
)

p, n = 20, 100
truth = gen_hubs(p)
stats = sample_covariance(sample_mvn(n, truth.omega0, RngSeed(11, 1)))

res = run_mcmc(stats, McmcConfig(burnin=500, nmc=2000, seed=11))
post = res.summary
r = evaluate(post.mean_omega, post.adjacency, truth, wall_time_s=res.wall_time_s)
print(f"{post.ndraws} draws in {res.wall_time_s:.1f}s, max sigma drift {res.max_sigma_error:.1e}")
print(f"stein={r.steins_loss:.3f} tpr={r.tpr:.2f} fpr={r.fpr:.4f} mcc={r.mcc:.3f}")
print("tau^2 summary:", post.tau2_summary)
