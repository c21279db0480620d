"""Matrix and dataset plumbing shared by the ECM and MCMC estimators."""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass

import numpy as np
import scipy.linalg

log = logging.getLogger(__name__)

SYMMETRY_RTOL = 1e-10


class GhslError(Exception):
    """Base class for errors raised by this package."""


class InputError(GhslError, ValueError):
    """Malformed or out-of-range input."""


class DomainError(GhslError, ValueError):
    """Argument outside the mathematical domain of an operation."""


class NumericalError(GhslError, ArithmeticError):
    """A numerical routine failed (solver, quadrature, factorization)."""


@dataclass(frozen=True)
class RngSeed:
    """A (seed, stream) pair; each pair maps to an independent PCG64 stream.

    Streams are derived with ``SeedSequence(seed, spawn_key=(stream,))``, so
    replicate ``k`` of a run seeded with ``s`` is ``RngSeed(s, k)``.
    """

    seed: int
    stream: int = 0

    def generator(self) -> np.random.Generator:
        ss = np.random.SeedSequence(self.seed, spawn_key=(self.stream,))
        return np.random.Generator(np.random.PCG64(ss))


def as_generator(rng) -> np.random.Generator:
    if isinstance(rng, np.random.Generator):
        return rng
    if isinstance(rng, RngSeed):
        return rng.generator()
    return RngSeed(int(rng)).generator()


@dataclass(frozen=True)
class SampleStats:
    """Sufficient statistics ``S = X^T X / n`` of a zero-mean Gaussian sample."""

    S: np.ndarray
    n: int

    @property
    def p(self) -> int:
        return self.S.shape[0]

    @property
    def scatter(self) -> np.ndarray:
        """The unnormalized scatter matrix ``n S``."""
        return self.n * self.S


@dataclass(frozen=True)
class ColumnBlocks:
    target: int
    index: np.ndarray  # indices of the remaining p-1 coordinates
    omega11_inv: np.ndarray
    s12: np.ndarray
    s22: float


def symmetrize(M, name="matrix") -> np.ndarray:
    """Return ``(M + M^T)/2``, warning when ``M`` is noticeably asymmetric."""
    M = np.asarray(M, dtype=float)
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise InputError(f"{name} must be square, got shape {M.shape}")
    scale = max(np.abs(M).max(initial=0.0), 1.0)
    asym = np.abs(M - M.T).max(initial=0.0)
    if asym > SYMMETRY_RTOL * scale:
        log.warning("%s asymmetric by %.3g; symmetrizing", name, asym)
    return 0.5 * (M + M.T)


def sample_covariance(X) -> SampleStats:
    """``S = X^T X / n`` without centering (the model has mean zero)."""
    X = np.asarray(X, dtype=float)
    if X.ndim != 2:
        raise InputError("data must be a 2-d array")
    n, p = X.shape
    if n < 2 or p < 2:
        raise InputError(f"need n >= 2 and p >= 2, got n={n}, p={p}")
    if not np.all(np.isfinite(X)):
        raise InputError("data contain non-finite entries")
    S = X.T @ X / n
    return SampleStats(S=0.5 * (S + S.T), n=n)


def is_positive_definite(M, check_symmetry=True):
    """Cholesky test. Returns ``(ok, L)`` with ``L`` lower triangular or None."""
    M = np.asarray(M, dtype=float)
    if check_symmetry:
        scale = max(np.abs(M).max(initial=0.0), 1.0)
        if M.shape[0] != M.shape[1] or np.abs(M - M.T).max(initial=0.0) > SYMMETRY_RTOL * scale:
            raise InputError("matrix is not symmetric")
    try:
        L = np.linalg.cholesky(M)
    except np.linalg.LinAlgError:
        return False, None
    if not np.all(np.diag(L) > 0):
        return False, None
    return True, L


def require_pd(M, name="matrix") -> np.ndarray:
    ok, L = is_positive_definite(M)
    if not ok:
        raise DomainError(f"{name} is not positive definite")
    return L


def sample_mvn(n, precision, rng) -> np.ndarray:
    """Draw ``n`` rows from ``N(0, precision^{-1})``.

    With ``precision = L L^T`` the rows are ``z^T L^{-1}`` for standard normal
    ``z``, so the covariance is never formed.
    """
    L = require_pd(precision, "precision")
    gen = as_generator(rng)
    Z = gen.standard_normal((L.shape[0], n))
    return scipy.linalg.solve_triangular(L.T, Z, lower=False).T


def extract_blocks(omega, stats: SampleStats, j: int) -> ColumnBlocks:
    """Partition ``omega`` and ``n S`` around column ``j`` (0-based)."""
    omega = np.asarray(omega, dtype=float)
    p = omega.shape[0]
    if not 0 <= j < p:
        raise InputError(f"column index {j} out of range for p={p}")
    idx = np.delete(np.arange(p), j)
    nS = stats.scatter
    omega11_inv = np.linalg.inv(omega[np.ix_(idx, idx)])
    return ColumnBlocks(
        target=j,
        index=idx,
        omega11_inv=0.5 * (omega11_inv + omega11_inv.T),
        s12=nS[idx, j].copy(),
        s22=float(nS[j, j]),
    )


def assemble_column(omega, j, beta, omega_jj) -> np.ndarray:
    """Return a copy of ``omega`` with column/row ``j`` replaced."""
    out = np.array(omega, dtype=float, copy=True)
    idx = np.delete(np.arange(out.shape[0]), j)
    out[idx, j] = beta
    out[j, idx] = beta
    out[j, j] = omega_jj
    return out


def upper_pairs(p):
    """Row/column indices of the strict upper triangle."""
    return np.triu_indices(p, k=1)


def read_matrix_csv(path, has_header=False) -> np.ndarray:
    """Read a rectangular numeric CSV; errors name the offending line."""
    import csv

    rows = []
    width = None
    with open(path, newline="") as fh:
        for lineno, row in enumerate(csv.reader(fh), start=1):
            if lineno == 1 and has_header:
                continue
            if not row or all(not c.strip() for c in row):
                continue
            if width is None:
                width = len(row)
            elif len(row) != width:
                raise InputError(f"{path}: line {lineno} has {len(row)} fields, expected {width}")
            try:
                rows.append([float(c) for c in row])
            except ValueError:
                col = next(i for i, c in enumerate(row) if not _is_float(c))
                raise InputError(
                    f"{path}: line {lineno}, column {col + 1}: non-numeric value {row[col]!r}"
                ) from None
    if not rows:
        raise InputError(f"{path}: no data rows")
    return np.array(rows, dtype=float)


def _is_float(s):
    try:
        float(s)
    except ValueError:
        return False
    return True


def write_matrix_csv(path, M):
    np.savetxt(path, np.asarray(M, dtype=float), delimiter=",", fmt="%.17g")


def write_json(path, obj):
    with open(path, "w") as fh:
        json.dump(obj, fh, indent=2, sort_keys=True, default=_json_default)
        fh.write("\n")


def read_json(path):
    with open(path) as fh:
        return json.load(fh)


def _json_default(o):
    if isinstance(o, np.ndarray):
        return o.tolist()
    if isinstance(o, np.integer):
        return int(o)
    if isinstance(o, np.floating):
        return float(o)
    if isinstance(o, np.bool_):
        return bool(o)
    raise TypeError(f"not JSON serializable: {type(o).__name__}")
