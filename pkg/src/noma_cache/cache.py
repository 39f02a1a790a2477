"""Zipf content popularity, cache placement and backhaul accounting."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError


@dataclass(frozen=True)
class Catalog:
    F: int
    zeta: float
    q: np.ndarray


def zipf_popularity(F: int, zeta: float) -> Catalog:
    if F < 1:
        raise DomainError(f"F must be >= 1, got {F}")
    if zeta < 0:
        raise DomainError(f"zeta must be non-negative, got {zeta}")
    weights = np.arange(1, F + 1, dtype=float) ** (-zeta)
    return Catalog(F=int(F), zeta=float(zeta), q=weights / weights.sum())


@dataclass(frozen=True)
class CachePolicy:
    """Per-file caching probabilities with the capacity they were chosen under.

    ``miss_mass`` is the request probability that falls through to the backhaul.
    """

    c: np.ndarray
    capacity: float
    miss_mass: float

    @classmethod
    def from_vector(cls, c, catalog: Catalog, capacity: float) -> "CachePolicy":
        c = np.asarray(c, dtype=float)
        if c.shape != (catalog.F,):
            raise DomainError(f"cache vector needs {catalog.F} entries, got shape {c.shape}")
        if np.any(c < 0) or np.any(c > 1):
            raise DomainError("caching probabilities must lie in [0, 1]")
        if c.sum() > capacity + 1e-12:
            raise DomainError(f"cache holds {c.sum():.6g} files but capacity is {capacity}")
        miss = float(np.clip(math.fsum(catalog.q * (1.0 - c)), 0.0, 1.0))
        return cls(c=c, capacity=float(capacity), miss_mass=miss)

    @classmethod
    def empty(cls, catalog: Catalog, capacity: float = 0.0) -> "CachePolicy":
        return cls.from_vector(np.zeros(catalog.F), catalog, capacity)

    def effective_backhaul(self, R: float) -> float:
        """Ceiling on the unicast sum rate implied by backhaul capacity ``R``."""
        return math.inf if self.miss_mass == 0 else R / self.miss_mass


def backhaul_load(policy: CachePolicy, catalog: Catalog, sum_rate: float) -> float:
    """Backhaul traffic ``sum_f q_f (1 - c_f) * sum_rate``."""
    return float(math.fsum(catalog.q * (1.0 - policy.c)) * sum_rate)


def prefix_policy(catalog: Catalog, n_cached: float) -> CachePolicy:
    """Cache the ``floor(n)`` most popular files, plus a fraction of the next one."""
    n = min(max(float(n_cached), 0.0), float(catalog.F))
    c = np.zeros(catalog.F)
    whole = int(math.floor(n))
    c[:whole] = 1.0
    if whole < catalog.F:
        c[whole] = n - whole
    return CachePolicy.from_vector(c, catalog, max(float(n_cached), 0.0))


def solve_p5(catalog: Catalog, N: float, rho_u=None) -> CachePolicy:
    """Placement minimizing the backhaul miss mass under capacity ``N``.

    The objective is linear in ``c`` with a single capacity constraint, so the
    optimum fills the most popular files first. ``q`` is non-increasing and a
    stable ordering breaks popularity ties by file index. ``rho_u`` is
    accepted for symmetry with the power step; the placement does not depend
    on it.
    """
    if N < 0:
        raise DomainError(f"cache size must be non-negative, got {N}")
    order = np.argsort(-catalog.q, kind="stable")
    if np.array_equal(order, np.arange(catalog.F)):
        return prefix_policy(catalog, N)
    ranked = Catalog(F=catalog.F, zeta=catalog.zeta, q=catalog.q[order])
    c = np.empty(catalog.F)
    c[order] = prefix_policy(ranked, N).c
    return CachePolicy.from_vector(c, catalog, N)
