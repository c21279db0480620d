"""Independent reference computations used by the tests.

None of these call into ``ghslike``; each evaluates a quantity by a different
route than the library does.
"""

import math

import numpy as np
from scipy import integrate


def _nu_moment(c, k):
    """``int nu^k exp(-c nu) (1 - exp(-nu)) dnu / nu`` over (0, inf), via s = log nu."""

    def f(s):
        nu = math.exp(s)
        return nu**k * math.exp(-c * nu) * -math.expm1(-nu)

    peak = -math.log(c + 1.0)
    lo, hi = min(peak, 0.0) - 45.0, max(peak, 0.0) + math.log(50.0 / min(c, 1.0) + 50.0) + 5.0
    pts = sorted({x for x in (peak, 0.0, -math.log(c)) if lo < x < hi})
    val, _ = integrate.quad(f, lo, hi, points=pts, epsabs=0.0, epsrel=1e-13, limit=500)
    return val


def expected_nu_quadrature(w, a):
    """``E(nu | w)`` from the latent hierarchy ``w | nu ~ N(0, a / (2 nu))``,
    ``pi(nu) ~ (1 - e^{-nu}) nu^{-3/2}``, by numerical integration over nu.
    """
    c = w * w / a
    return _nu_moment(c, 1) / _nu_moment(c, 0)


def mixture_density_quadrature(w, a):
    """Prior density obtained by integrating the Gaussian scale mixture over nu."""
    c = w * w / a
    # N(w; 0, a/2nu) pi(nu) with pi normalized by 2 sqrt(pi)
    return _nu_moment(c, 0) / (2.0 * math.pi * math.sqrt(a))


def tail_mass_closed_form(t, a):
    """``P(|w| > t)`` by integrating the density analytically."""
    r = math.sqrt(a)
    return (2.0 / math.pi) * math.atan(r / t) - t * math.log1p(a / (t * t)) / (math.pi * r)


def sample_prior(size, a, rng):
    """Draws of w from the scale mixture.

    ``(1 - e^{-nu}) / nu = int_0^1 e^{-nu m} dm`` so ``m = U^2`` and
    ``nu | m ~ Gamma(1/2, rate m)``.
    """
    m = rng.random(size) ** 2
    nu = rng.gamma(0.5, 1.0, size) / m
    return rng.standard_normal(size) * np.sqrt(a / (2.0 * nu))


def expected_kappa_riemann(m, n_cells=400_000):
    """``(1/sqrt(pi)) int_0^inf (1 - e^{-v^2}) / (m^2 + v^2) dv`` by the midpoint
    rule after ``v = m tan(eta)``.
    """
    h = (math.pi / 2) / n_cells
    eta = (np.arange(n_cells) + 0.5) * h
    f = -np.expm1(-(m * np.tan(eta)) ** 2) / m
    return float(f.sum() * h / math.sqrt(math.pi))


def steins_loss_eigen(omega_hat, sigma0):
    """``sum(d - log d - 1)`` over eigenvalues of ``Sigma0^{1/2} Omega Sigma0^{1/2}``."""
    vals, vecs = np.linalg.eigh(sigma0)
    root = vecs @ np.diag(np.sqrt(vals)) @ vecs.T
    d = np.linalg.eigvalsh(root @ omega_hat @ root)
    return float(np.sum(d - np.log(d) - 1.0))


def half_cauchy_quantile(q):
    return math.tan(math.pi * q / 2.0)
