"""Global shrinkage scale ``a`` from a target effective model size.

Under an orthogonal design, coefficient ``j`` is shrunk by
``kappa_j = 1 / (1 + n a / (2 sigma^2 u_j))`` with ``u_j`` the horseshoe-like
mixing variable. We pick ``a`` so that the expected number of unshrunk
coefficients ``p (1 - E kappa)`` equals ``p0``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from numpy.polynomial import polynomial as P
from scipy import integrate

from .core import DomainError, InputError, NumericalError

M_BRACKET = (1e-8, 1e3)


@dataclass(frozen=True)
class ScaleSolveSpec:
    n: int
    p: int
    p0_over_p: float | None = None  # default 2/(p-1)
    sigma2: float = 1.0

    def __post_init__(self):
        if self.n < 1 or self.p < 2:
            raise InputError(f"need n >= 1 and p >= 2, got n={self.n}, p={self.p}")
        if not 0 < self.target < 1:
            raise InputError(f"p0/p must lie in (0, 1), got {self.target}")
        if not self.sigma2 > 0:
            raise InputError("sigma2 must be positive")

    @property
    def target(self) -> float:
        return 2.0 / (self.p - 1) if self.p0_over_p is None else float(self.p0_over_p)


def _expected_kappa_m(m):
    """``E(kappa)`` as a function of ``m = sqrt(n a / (2 sigma^2))``.

    With ``v = m tan(eta)`` the integral over ``(0, pi/2)`` becomes
    ``(1/sqrt(pi)) int_0^inf (1 - exp(-v^2)) / (m^2 + v^2) dv``, which stays
    well conditioned as ``m -> 0`` (where the eta form concentrates at pi/2).
    """
    m2 = m * m

    def f(v):
        return -np.expm1(-v * v) / (m2 + v * v)

    cut = 6.0
    pts = [m] if m < cut else None
    head, e1 = integrate.quad(f, 0.0, cut, points=pts, epsabs=1e-14, epsrel=1e-12, limit=400)
    tail, e2 = integrate.quad(f, cut, np.inf, epsabs=1e-14, epsrel=1e-12, limit=400)
    if not np.isfinite(head + tail) or e1 + e2 > 1e-10:
        raise NumericalError(f"shrinkage quadrature failed at m={m}: abserr={e1 + e2}")
    return (head + tail) / math.sqrt(math.pi)


def shrinkage_expectation(a, n, sigma2=1.0):
    """Prior mean shrinkage coefficient ``E(kappa | a)``, in (0, 1)."""
    if not a > 0:
        raise DomainError("a must be positive")
    return _expected_kappa_m(math.sqrt(n * a / (2.0 * sigma2)))


def solve_global_scale(spec: ScaleSolveSpec, method="quadrature") -> float:
    """Solve ``1 - E(kappa | a) = p0/p`` for ``a``.

    ``method="quadrature"`` bisects on ``m`` with the exact integral (E kappa is
    monotone in m). ``method="taylor"`` uses the order-16 Taylor polynomial of
    the integrand about 0 and returns its smallest positive real root.
    """
    target = spec.target
    if method == "taylor":
        m = _taylor_root(target)
    elif method == "quadrature":
        m = _bisect_m(target)
    else:
        raise InputError(f"unknown method {method!r}")
    return 2.0 * m * m * spec.sigma2 / spec.n


def _bisect_m(target):
    lo, hi = M_BRACKET
    g = lambda m: 1.0 - _expected_kappa_m(m) - target
    glo, ghi = g(lo), g(hi)
    if not glo < 0 < ghi:
        raise NumericalError(
            f"no sign change on m in [{lo}, {hi}]: g(lo)={glo:.3g}, g(hi)={ghi:.3g}, target={target}"
        )
    while hi - lo > 1e-10 * hi:
        mid = 0.5 * (lo + hi)
        if g(mid) < 0:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def _tan_sq_series(order):
    """Maclaurin coefficients of tan(x)^2 up to x^order."""
    t = np.zeros(order + 1)
    # tan' = 1 + tan^2, tan(0) = 0
    t[1] = 1.0
    for k in range(1, order):
        sq = np.convolve(t[: k + 1], t[: k + 1])[: k + 1]
        t[k + 1] = ((1.0 if k == 0 else 0.0) + sq[k]) / (k + 1)
    return np.convolve(t, t)[: order + 1]


def taylor_polynomial(target, order=16):
    """Coefficients (ascending in m) of ``m (1 - target) - m E_taylor(kappa)``."""
    T = _tan_sq_series(order)
    # e_k(y): coefficient of eta^k in exp(-y tan^2 eta), each a polynomial in y = m^2;
    # from E' = -y T' E, k e_k = sum_j j c_j e_{k-j} with c_j = -y T_j
    e = [np.array([1.0])]
    for k in range(1, order + 1):
        acc = np.zeros(1)
        for j in range(1, k + 1):
            if T[j] != 0.0:
                acc = P.polyadd(acc, P.polymul([0.0, -j * T[j]], e[k - j]))
        e.append(acc / k)
    # integral of (1 - exp(...)) over [0, pi/2], as a polynomial in y
    integral = np.zeros(1)
    for k in range(1, order + 1):
        integral = P.polyadd(integral, -e[k] * (math.pi / 2) ** (k + 1) / (k + 1))
    # substitute y = m^2 and divide by sqrt(pi)
    in_m = np.zeros(2 * len(integral) - 1)
    in_m[::2] = integral
    coeffs = -in_m / math.sqrt(math.pi)
    coeffs = P.polyadd(coeffs, [0.0, 1.0 - target])
    return coeffs


def _taylor_root(target, order=16):
    roots = np.roots(taylor_polynomial(target, order)[::-1])
    real = roots[(np.abs(roots.imag) < 1e-9 * np.maximum(1.0, np.abs(roots))) & (roots.real > 0)].real
    if real.size == 0:
        raise NumericalError("Taylor polynomial has no positive real root")
    return float(real.min())
