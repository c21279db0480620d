"""Data-augmented Gibbs sampler for the graphical horseshoe-like model.

Off-diagonal prior: ``w_ij | t_ij, tau ~ N(0, tau^2 / t_ij^2)`` with a slash
normal ``t_ij`` written as an exponential mixture over ``m_ij in (0, 1)``, and a
half-Cauchy global scale ``tau`` split into inverse-gamma conditionals through
the auxiliary ``xi``. Columns are updated by the usual block decomposition
(``gamma``, ``beta``), which keeps every draw positive definite, and the
covariance is carried along by rank-one identities.
"""

from __future__ import annotations

import logging
import struct
import time
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

from .core import InputError, NumericalError, RngSeed, SampleStats, as_generator

log = logging.getLogger(__name__)

DRAWS_MAGIC = b"GHSL"
DRAWS_VERSION = 1
SIGMA_TOL = 1e-6
CHECK_EVERY = 100
REFRESH_EVERY = 1000


@dataclass(frozen=True)
class McmcConfig:
    burnin: int = 1000
    nmc: int = 5000
    thin: int = 1
    seed: int = 0
    ci_level: float = 0.5
    # shape of the t^2 full conditional; see README ("sampler details")
    local_shape: float = 1.0

    def __post_init__(self):
        if self.burnin < 0 or self.nmc < 1 or self.thin < 1:
            raise InputError("need burnin >= 0, nmc >= 1, thin >= 1")
        if not 0 < self.ci_level < 1:
            raise InputError("ci_level must lie in (0, 1)")
        if not self.local_shape > 0:
            raise InputError("local_shape must be positive")


@dataclass
class McmcState:
    omega: np.ndarray
    sigma: np.ndarray
    T: np.ndarray  # t_ij^2
    M: np.ndarray  # m_ij in (0, 1)
    tau2: float = 1.0
    xi: float = 1.0

    @classmethod
    def initial(cls, p):
        return cls(np.eye(p), np.eye(p), np.ones((p, p)), np.ones((p, p)))

    def check(self):
        """Raise if any latent leaves its domain."""
        p = self.omega.shape[0]
        off = ~np.eye(p, dtype=bool)
        if not (np.all(self.T[off] > 0) and np.all((self.M[off] > 0) & (self.M[off] < 1))):
            raise NumericalError("latent scales left their domain")
        if not (self.tau2 > 0 and self.xi > 0):
            raise NumericalError("global scale left its domain")


@dataclass
class PosteriorSummary:
    mean_omega: np.ndarray
    ci_lower: np.ndarray
    ci_upper: np.ndarray
    adjacency: np.ndarray
    ci_level: float
    ndraws: int
    tau2_summary: dict = field(default_factory=dict)

    def to_dict(self):
        return {
            "mean_omega": self.mean_omega,
            "ci_lower": self.ci_lower,
            "ci_upper": self.ci_upper,
            "adjacency": self.adjacency.astype(int),
            "ci_level": self.ci_level,
            "ndraws": self.ndraws,
            "tau2_summary": self.tau2_summary,
        }


@dataclass
class McmcResult:
    draws: np.ndarray  # (ndraws, p(p+1)/2), upper triangle incl. diagonal
    tau2: np.ndarray
    summary: PosteriorSummary
    p: int
    max_sigma_error: float
    sigma_refreshes: int
    wall_time_s: float

    def omega_draw(self, k):
        return unpack_upper(self.draws[k], self.p)


def sample_truncated_exponential(rate, rng, size=None):
    """Exponential(rate) restricted to (0, 1), by inversion."""
    rate = np.asarray(rate, dtype=float)
    u = rng.random(size if size is not None else rate.shape)
    x = -np.log1p(u * np.expm1(-rate)) / rate
    # guard the open interval against rounding at the ends
    return np.clip(x, np.finfo(float).tiny, np.nextafter(1.0, 0.0))


def sample_invgamma(shape, scale, rng, size=None):
    """Inverse-gamma with density proportional to ``x^{-shape-1} exp(-scale/x)``."""
    return scale / rng.gamma(shape, 1.0, size=size)


def gibbs_column_pass(state: McmcState, stats: SampleStats, i: int, rng, local_shape=1.0):
    """Update column ``i`` of omega with its local latents; mutates ``state``."""
    p = state.omega.shape[0]
    idx = np.delete(np.arange(p), i)
    nS = stats.scatter
    s_ii = nS[i, i]
    tau2 = state.tau2

    gamma = rng.gamma(stats.n / 2.0 + 1.0, 2.0 / s_ii)

    sig = state.sigma
    s12 = sig[idx, i]
    W = sig[np.ix_(idx, idx)] - np.outer(s12, s12) / sig[i, i]
    W = 0.5 * (W + W.T)

    prec = s_ii * W + np.diag(state.T[idx, i] / tau2)
    try:
        L = scipy.linalg.cholesky(prec, lower=True, check_finite=False)
    except np.linalg.LinAlgError as exc:
        raise NumericalError(f"conditional precision for column {i} is not positive definite") from exc
    mu = -scipy.linalg.cho_solve((L, True), nS[idx, i], check_finite=False)
    beta = mu + scipy.linalg.solve_triangular(L.T, rng.standard_normal(p - 1), lower=False, check_finite=False)

    Wb = W @ beta
    state.omega[idx, i] = beta
    state.omega[i, idx] = beta
    state.omega[i, i] = gamma + beta @ Wb

    rate_t = state.M[idx, i] / 2.0 + beta * beta / (2.0 * tau2)
    t2 = rng.gamma(local_shape, 1.0 / rate_t)
    t2 = np.maximum(t2, np.finfo(float).tiny)
    state.T[idx, i] = t2
    state.T[i, idx] = t2
    m = sample_truncated_exponential(t2 / 2.0, rng)
    state.M[idx, i] = m
    state.M[i, idx] = m

    sig[np.ix_(idx, idx)] = W + np.outer(Wb, Wb) / gamma
    sig[idx, i] = -Wb / gamma
    sig[i, idx] = -Wb / gamma
    sig[i, i] = 1.0 / gamma
    return state


def global_scale_shapes(p):
    """Shapes of the (tau^2, xi) inverse-gamma conditionals."""
    return (p * (p - 1) / 2.0 + 1.0) / 2.0, 1.0


def sample_global_scale(state: McmcState, rng):
    """Draw ``tau^2 | xi, ...`` then ``xi | tau^2``; mutates and returns ``(tau2, xi)``."""
    p = state.omega.shape[0]
    iu = np.triu_indices(p, k=1)
    shape_tau, shape_xi = global_scale_shapes(p)
    scale = 1.0 / state.xi + np.sum(state.T[iu] * state.omega[iu] ** 2) / 2.0
    state.tau2 = float(sample_invgamma(shape_tau, scale, rng))
    state.xi = float(sample_invgamma(shape_xi, 1.0 + 1.0 / state.tau2, rng))
    return state.tau2, state.xi


def sigma_tracking_error(state: McmcState) -> float:
    """``||Sigma Omega - I||_inf`` (max absolute row sum)."""
    R = state.sigma @ state.omega - np.eye(state.omega.shape[0])
    return float(np.abs(R).sum(axis=1).max())


def _refresh_sigma(state):
    L = np.linalg.cholesky(state.omega)
    state.sigma = scipy.linalg.cho_solve((L, True), np.eye(state.omega.shape[0]))


def pack_upper(omega):
    return omega[np.triu_indices(omega.shape[0])]


def unpack_upper(vec, p):
    out = np.zeros((p, p))
    iu = np.triu_indices(p)
    out[iu] = vec
    return out + np.triu(out, 1).T


def run_mcmc(stats: SampleStats, config: McmcConfig, rng=None, state=None) -> McmcResult:
    """Run ``burnin + nmc`` sweeps and summarize the retained draws."""
    t0 = time.perf_counter()
    gen = as_generator(rng if rng is not None else RngSeed(config.seed))
    p = stats.p
    state = state if state is not None else McmcState.initial(p)
    keep = range(config.burnin, config.burnin + config.nmc, config.thin)
    draws = np.empty((len(keep), p * (p + 1) // 2))
    tau2 = np.empty(len(keep))
    max_err, refreshes, k = 0.0, 0, 0
    for it in range(config.burnin + config.nmc):
        for i in range(p):
            gibbs_column_pass(state, stats, i, gen, config.local_shape)
        sample_global_scale(state, gen)
        done = it + 1
        if done % CHECK_EVERY == 0:
            err = sigma_tracking_error(state)
            max_err = max(max_err, err)
            if err > SIGMA_TOL:
                log.warning("covariance drift %.3g at iteration %d; re-inverting", err, done)
                _refresh_sigma(state)
                refreshes += 1
            elif done % REFRESH_EVERY == 0:
                _refresh_sigma(state)
            state.check()
        if it >= config.burnin and (it - config.burnin) % config.thin == 0:
            draws[k] = pack_upper(state.omega)
            tau2[k] = state.tau2
            k += 1
    summary = summarize(draws, p, config.ci_level, tau2)
    return McmcResult(draws, tau2, summary, p, max_err, refreshes, time.perf_counter() - t0)


def summarize(draws, p, ci_level=0.5, tau2=None) -> PosteriorSummary:
    """Entrywise means and central credible intervals (linear-interpolation quantiles)."""
    draws = np.asarray(draws, dtype=float)
    lo_q, hi_q = (1.0 - ci_level) / 2.0, (1.0 + ci_level) / 2.0
    q = np.quantile(draws, [lo_q, hi_q], axis=0, method="linear")
    lower, upper = unpack_upper(q[0], p), unpack_upper(q[1], p)
    summary = PosteriorSummary(
        mean_omega=unpack_upper(draws.mean(axis=0), p),
        ci_lower=lower,
        ci_upper=upper,
        adjacency=np.zeros((p, p), dtype=bool),
        ci_level=ci_level,
        ndraws=draws.shape[0],
    )
    summary.adjacency = select_edges(summary)
    if tau2 is not None and len(tau2):
        qs = np.quantile(tau2, [0.025, 0.25, 0.5, 0.75, 0.975], method="linear")
        summary.tau2_summary = {"mean": float(np.mean(tau2)), "quantiles": dict(zip(["2.5%", "25%", "50%", "75%", "97.5%"], qs.tolist()))}
    return summary


def select_edges(summary: PosteriorSummary) -> np.ndarray:
    """Edge ``(i, j)`` is selected when its credible interval excludes zero."""
    A = (summary.ci_lower > 0) | (summary.ci_upper < 0)
    A = A & A.T
    np.fill_diagonal(A, False)
    return A


def write_draws(path, draws, p):
    """Binary draw file: 16-byte header then little-endian float64 rows."""
    draws = np.ascontiguousarray(draws, dtype="<f8")
    if draws.ndim != 2 or draws.shape[1] != p * (p + 1) // 2:
        raise InputError("draws must have p(p+1)/2 columns")
    with open(path, "wb") as fh:
        fh.write(DRAWS_MAGIC + struct.pack("<III", DRAWS_VERSION, p, draws.shape[0]))
        fh.write(draws.tobytes())


def read_draws(path):
    """Inverse of :func:`write_draws`; returns ``(draws, p)``."""
    with open(path, "rb") as fh:
        head = fh.read(16)
        if len(head) != 16 or head[:4] != DRAWS_MAGIC:
            raise InputError(f"{path}: not a draw file")
        version, p, nd = struct.unpack("<III", head[4:])
        if version != DRAWS_VERSION:
            raise InputError(f"{path}: unsupported version {version}")
        body = np.frombuffer(fh.read(), dtype="<f8")
    width = p * (p + 1) // 2
    if body.size != nd * width:
        raise InputError(f"{path}: expected {nd * width} values, found {body.size}")
    return body.reshape(nd, width).astype(float), p
