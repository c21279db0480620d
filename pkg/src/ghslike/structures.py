"""Ground-truth precision structures for simulation studies.

Four structures: random sparse negatives, hubs (stars within groups of 10),
and positive/negative cliques (one triangle per group of 10). Diagonals are 1;
if the result is not positive definite it is shifted by ``|lambda_min| + 0.05``
and rescaled back to unit diagonal.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .core import InputError, RngSeed, as_generator, is_positive_definite, require_pd, sample_mvn

KINDS = ("random", "hubs", "cliques-pos", "cliques-neg")


@dataclass(frozen=True)
class TruthSpec:
    kind: str
    p: int
    omega0: np.ndarray
    support: frozenset  # {(i, j)} with i < j
    params: dict = field(default_factory=dict)
    repaired: bool = False

    @property
    def sigma0(self):
        return np.linalg.inv(self.omega0)

    def adjacency(self):
        A = np.zeros((self.p, self.p), dtype=bool)
        for i, j in self.support:
            A[i, j] = A[j, i] = True
        return A

    def to_dict(self):
        return {
            "kind": self.kind,
            "p": self.p,
            "omega0": self.omega0,
            "support": sorted([list(e) for e in self.support]),
            "params": self.params,
            "repaired": self.repaired,
        }

    @classmethod
    def from_dict(cls, d):
        return cls(
            kind=d["kind"],
            p=int(d["p"]),
            omega0=np.asarray(d["omega0"], dtype=float),
            support=frozenset(tuple(e) for e in d["support"]),
            params=d.get("params", {}),
            repaired=d.get("repaired", False),
        )


def _finish(kind, omega, params):
    repaired = False
    if not is_positive_definite(omega)[0]:
        lam = np.linalg.eigvalsh(omega)[0]
        omega = omega + (abs(lam) + 0.05) * np.eye(omega.shape[0])
        d = 1.0 / np.sqrt(np.diag(omega))
        omega = omega * np.outer(d, d)
        repaired = True
    require_pd(omega, f"{kind} truth")
    iu = np.triu_indices(omega.shape[0], k=1)
    nz = omega[iu] != 0
    support = frozenset(zip(iu[0][nz].tolist(), iu[1][nz].tolist()))
    return TruthSpec(kind, omega.shape[0], omega, support, params, repaired)


def gen_random(p, prob=None, rng=0) -> TruthSpec:
    """Each pair nonzero with probability ``prob`` (default ``1/p``), value ~ U(-1, -0.2)."""
    if prob is None:
        prob = 1.0 / p
    if not 0 <= prob < 1:
        raise InputError("prob must lie in [0, 1)")
    gen = as_generator(rng)
    omega = np.eye(p)
    iu = np.triu_indices(p, k=1)
    on = gen.random(iu[0].size) < prob
    vals = gen.uniform(-1.0, -0.2, size=iu[0].size)
    omega[iu] = np.where(on, vals, 0.0)
    omega = np.triu(omega) + np.triu(omega, 1).T
    return _finish("random", omega, {"prob": prob})


def _groups(p, group_size):
    if group_size < 2 or p % group_size:
        raise InputError(f"p={p} is not divisible into groups of {group_size}")
    return np.arange(p).reshape(-1, group_size)


def gen_hubs(p, group_size=10, value=0.25, dense_blocks=False, rng=0) -> TruthSpec:
    """Star per group: the first member is linked to every other member.

    ``dense_blocks=True`` links every pair within a group instead.
    """
    omega = np.eye(p)
    for g in _groups(p, group_size):
        if dense_blocks:
            block = np.full((group_size, group_size), value)
            np.fill_diagonal(block, 1.0)
            omega[np.ix_(g, g)] = block
        else:
            hub, rest = g[0], g[1:]
            omega[hub, rest] = value
            omega[rest, hub] = value
    params = {"group_size": group_size, "value": value, "dense_blocks": dense_blocks}
    return _finish("hubs", omega, params)


def gen_cliques(p, sign="+", group_size=10, rng=0) -> TruthSpec:
    """One random triangle per group, valued 0.75 (``+``) or -0.45 (``-``)."""
    if sign not in ("+", "-"):
        raise InputError("sign must be '+' or '-'")
    value = 0.75 if sign == "+" else -0.45
    gen = as_generator(rng)
    omega = np.eye(p)
    for g in _groups(p, group_size):
        tri = np.sort(gen.choice(g, size=3, replace=False))
        for a in range(3):
            for b in range(a + 1, 3):
                omega[tri[a], tri[b]] = omega[tri[b], tri[a]] = value
    kind = "cliques-pos" if sign == "+" else "cliques-neg"
    return _finish(kind, omega, {"group_size": group_size, "value": value})


def make_truth(kind, p, rng=0, **kw) -> TruthSpec:
    if kind == "random":
        return gen_random(p, kw.get("prob"), rng=rng)
    if kind == "hubs":
        return gen_hubs(p, kw.get("group_size", 10), dense_blocks=kw.get("dense_blocks", False))
    if kind == "cliques-pos":
        return gen_cliques(p, "+", rng=rng)
    if kind == "cliques-neg":
        return gen_cliques(p, "-", rng=rng)
    raise InputError(f"unknown structure {kind!r}; choose from {KINDS}")


def generate_replicates(truth: TruthSpec, n, n_reps, seed) -> list:
    """``n_reps`` data sets; replicate ``k`` uses stream ``RngSeed(seed, k + 1)``.

    Stream 0 of the seed is left for the truth generator.
    """
    return [sample_mvn(n, truth.omega0, RngSeed(seed, k + 1)) for k in range(n_reps)]
