"""Estimation and structure-recovery metrics."""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass

import numpy as np

from .core import DomainError, InputError, require_pd

TABLE_ROWS = ("steins_loss", "fnorm", "tpr", "fpr", "mcc", "wall_time_s")
ROW_LABELS = {
    "steins_loss": "Stein's loss",
    "fnorm": "F norm",
    "tpr": "TPR",
    "fpr": "FPR",
    "mcc": "MCC",
    "wall_time_s": "Avg CPU time",
}


@dataclass
class MetricsReport:
    steins_loss: float
    fnorm: float
    tpr: float
    fpr: float
    mcc: float
    sparsity_pct: float
    nnz: int
    wall_time_s: float = float("nan")
    tp: int = 0
    fp: int = 0
    fn: int = 0
    tn: int = 0

    def to_dict(self):
        return asdict(self)


def steins_loss(omega_hat, sigma0) -> float:
    """``tr(O S0) - log det(O S0) - p``, via ``S0^{1/2} O S0^{1/2}``'s Cholesky factor."""
    omega_hat = np.asarray(omega_hat, dtype=float)
    sigma0 = np.asarray(sigma0, dtype=float)
    if omega_hat.shape != sigma0.shape:
        raise InputError("dimension mismatch")
    require_pd(omega_hat, "estimate")
    Ls = require_pd(sigma0, "true covariance")
    # Ls' O Ls is similar to O S0 and symmetric
    M = Ls.T @ omega_hat @ Ls
    L = np.linalg.cholesky(0.5 * (M + M.T))
    return float(np.trace(M) - 2.0 * np.sum(np.log(np.diag(L))) - omega_hat.shape[0])


def fnorm_diff(omega_hat, omega0) -> float:
    """Frobenius norm of the full difference, diagonal included."""
    a, b = np.asarray(omega_hat, dtype=float), np.asarray(omega0, dtype=float)
    if a.shape != b.shape:
        raise InputError(f"dimension mismatch: {a.shape} vs {b.shape}")
    return float(np.linalg.norm(a - b))


def confusion(selected, truth_adjacency):
    """Counts ``(tp, fp, fn, tn)`` over the strict upper triangle."""
    selected = np.asarray(selected, dtype=bool)
    truth = np.asarray(truth_adjacency, dtype=bool)
    if selected.shape != truth.shape:
        raise InputError("dimension mismatch")
    iu = np.triu_indices(selected.shape[0], k=1)
    s, t = selected[iu], truth[iu]
    return int(np.sum(s & t)), int(np.sum(s & ~t)), int(np.sum(~s & t)), int(np.sum(~s & ~t))


def mcc_from_counts(tp, fp, fn, tn) -> float:
    # degenerate denominators give 0
    denom = (tp + fp) * (tp + fn) * (tn + fp) * (tn + fn)
    if denom == 0:
        return 0.0
    return (tp * tn - fp * fn) / math.sqrt(denom)


def sparsity(selected):
    """``(nnz, sparsity_pct)`` over the lower triangle of an adjacency matrix."""
    selected = np.asarray(selected, dtype=bool)
    p = selected.shape[0]
    pairs = p * (p - 1) // 2
    nnz = int(np.sum(selected[np.tril_indices(p, k=-1)]))
    return nnz, 100.0 * (pairs - nnz) / pairs


def classification_metrics(selected, truth_adjacency):
    """``(tpr, fpr, mcc, nnz, sparsity_pct)`` for an estimated edge set."""
    tp, fp, fn, tn = confusion(selected, truth_adjacency)
    tpr = tp / (tp + fn) if tp + fn else 0.0
    fpr = fp / (fp + tn) if fp + tn else 0.0
    nnz, pct = sparsity(selected)
    return tpr, fpr, mcc_from_counts(tp, fp, fn, tn), nnz, pct


def evaluate(omega_hat, selected, truth, wall_time_s=float("nan")) -> MetricsReport:
    """Full report against a :class:`~ghslike.structures.TruthSpec`."""
    if omega_hat.shape != truth.omega0.shape:
        raise DomainError("estimate and truth differ in dimension")
    truth_adj = truth.adjacency()
    tp, fp, fn, tn = confusion(selected, truth_adj)
    tpr, fpr, mcc, nnz, pct = classification_metrics(selected, truth_adj)
    return MetricsReport(
        steins_loss=steins_loss(omega_hat, truth.sigma0),
        fnorm=fnorm_diff(omega_hat, truth.omega0),
        tpr=tpr,
        fpr=fpr,
        mcc=mcc,
        sparsity_pct=pct,
        nnz=nnz,
        wall_time_s=wall_time_s,
        tp=tp,
        fp=fp,
        fn=fn,
        tn=tn,
    )


def aggregate(reports):
    """Mean and sample sd of every table row across replicate reports."""
    out = {}
    for key in TABLE_ROWS:
        vals = np.array([getattr(r, key) for r in reports], dtype=float)
        sd = float(np.std(vals, ddof=1)) if vals.size > 1 else 0.0
        out[key] = {"mean": float(np.mean(vals)), "sd": sd, "count": int(vals.size)}
    return out
