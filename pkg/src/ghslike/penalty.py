"""Scalar mathematics of the horseshoe-like prior and its penalty.

All functions broadcast over numpy arrays. The penalty is the negative log
prior density up to the constant ``log(2 pi sqrt(a))``::

    density(w; a) = log(1 + a/w^2) / (2 pi sqrt(a))
    pen(w; a)     = -log log(1 + a/w^2)
"""

from __future__ import annotations

import numpy as np
from scipy import integrate

from .core import DomainError, NumericalError, SampleStats, require_pd

# |w| below this is treated as this value by the E-step and the ECM objective.
ZERO_CLAMP = 1e-12


def _check_scale(a):
    a = np.asarray(a, dtype=float)
    if np.any(~(a > 0)):
        raise DomainError("global scale a must be positive")
    return a


def _log_ratio(w, a):
    """log(1 + a/w^2), accurate when a/w^2 is tiny."""
    with np.errstate(divide="ignore"):
        return np.log1p(a / np.square(w))


def hs_like_density(w, a):
    """Horseshoe-like prior density; ``inf`` at ``w = 0``."""
    a = _check_scale(a)
    w = np.asarray(w, dtype=float)
    out = _log_ratio(w, a) / (2.0 * np.pi * np.sqrt(a))
    return out[()] if out.ndim == 0 else out


def penalty(w, a):
    """``-log log(1 + a/w^2)``; ``-inf`` at ``w = 0``."""
    a = _check_scale(a)
    w = np.asarray(w, dtype=float)
    with np.errstate(divide="ignore"):
        out = -np.log(_log_ratio(w, a))
    return out[()] if out.ndim == 0 else out


def _nonzero(w):
    w = np.asarray(w, dtype=float)
    if np.any(w == 0):
        raise DomainError("penalty derivatives are undefined at w = 0")
    return w


def penalty_grad(w, a):
    """First derivative of :func:`penalty`, ``2a / (w (w^2 + a) log(1 + a/w^2))``."""
    a = _check_scale(a)
    w = _nonzero(w)
    out = 2.0 * a / (w * (w * w + a) * _log_ratio(w, a))
    return out[()] if out.ndim == 0 else out


def penalty_hess(w, a):
    """Second derivative of :func:`penalty`; strictly negative for ``w != 0``."""
    a = _check_scale(a)
    w = _nonzero(w)
    w2 = w * w
    L = _log_ratio(w, a)
    num = (a + 3.0 * w2) * L - 2.0 * a
    out = -2.0 * a * num / (w2 * (a + w2) ** 2 * L * L)
    return out[()] if out.ndim == 0 else out


def expected_nu(w, a):
    """Posterior mean of the latent local scale given ``w``.

    ``E(nu | w, a) = a^2 / ((w^2 + a) w^2 log(1 + a/w^2))``; callers clamp
    ``|w| >= ZERO_CLAMP`` first, exact zeros raise.
    """
    a = _check_scale(a)
    w = _nonzero(w)
    w2 = w * w
    out = a * a / ((w2 + a) * w2 * _log_ratio(w, a))
    return out[()] if out.ndim == 0 else out


def prior_tail_mass(t, a, epsabs=1e-12):
    """``P(|w| > t)`` under the prior, by adaptive quadrature (validation only)."""
    a = float(_check_scale(a))
    t = float(t)
    if not t > 0:
        raise DomainError("tail threshold must be positive")
    # integrate over s = log w; the integrand peaks near w = sqrt(a) and both
    # flanks are exponentially smooth in s
    norm = np.pi * np.sqrt(a)  # both tails over 2 pi sqrt(a)
    lo, peak = np.log(t), 0.5 * np.log(a)
    hi = max(lo, peak) + 40.0

    def f(s):
        w = np.exp(s)
        return np.log1p(a / (w * w)) * w / norm

    pts = [peak] if lo < peak < hi else None
    val, err = integrate.quad(f, lo, hi, points=pts, epsabs=epsabs, epsrel=1e-12, limit=200)
    # remainder beyond hi is below sqrt(a) e^{-40} / norm
    if not np.isfinite(val) or err > 1e-9:
        raise NumericalError(f"tail quadrature did not converge: value={val}, abserr={err}")
    return min(1.0, val)


def clamp_zero(w, floor=ZERO_CLAMP):
    w = np.asarray(w, dtype=float)
    return np.where(np.abs(w) < floor, np.where(w < 0, -floor, floor), w)


def log_posterior(omega, stats: SampleStats, a, floor=None):
    """``(n/2)(log det O - tr(S O)) - sum_{i<j} pen(o_ij)``, additive constant 0.

    An exact zero off-diagonal gives ``+inf`` (the prior density has a pole at
    the origin). With ``floor`` set, off-diagonals are clamped to
    ``|o_ij| >= floor`` inside the penalty, matching the clamped E-step.
    """
    omega = np.asarray(omega, dtype=float)
    L = require_pd(omega, "omega")
    logdet = 2.0 * np.sum(np.log(np.diag(L)))
    lik = 0.5 * stats.n * (logdet - np.sum(stats.S * omega))
    iu = np.triu_indices(omega.shape[0], k=1)
    off = omega[iu]
    if floor is not None:
        off = clamp_zero(off, floor)
    return float(lik - np.sum(penalty(off, a)))
