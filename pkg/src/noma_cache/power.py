"""Minimum-rate and excess-power machinery for the unicast layer.

Everything here works with the relaxed unicast rate, where the CSI-error term
is replaced by ``psi``. Users are 0-indexed, strongest first.

Two facts shape the API:

* The total minimum SNR is ``psi * (2^r - 1) * sum_i 2^(i r) / lambda_(K-1-i)``.
  The commonly quoted form of this sum carries no ``psi`` factor; it equals
  the true value only when ``psi == 1``. :func:`rho_sum_min_unscaled` keeps
  that form for comparison.
* Giving extra SNR to the strongest user raises interference at every weaker
  user. The optimum therefore puts all *transformed* excess ``rho_e`` on user
  0, which in raw terms means each weaker user also receives just enough
  extra to stay at ``r_min`` (:func:`corner_excess_split`).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError, RateInfeasible


@dataclass(frozen=True)
class MinPowerProfile:
    r_min: float
    rho_i_min: np.ndarray
    rho_sum_min: float

    @property
    def K(self) -> int:
        return len(self.rho_i_min)


@dataclass(frozen=True)
class ExcessProfile:
    """Raw excess ``delta_rho``, its transformed form and per-user rate gains."""

    delta_rho: np.ndarray
    rho_e: np.ndarray
    n_e: np.ndarray
    delta_r: np.ndarray

    @property
    def total_gain(self) -> float:
        return float(np.sum(self.delta_r))


def _validate(r_min, lam):
    lam = np.asarray(lam, dtype=float)
    if r_min < 0:
        raise DomainError(f"r_min must be non-negative, got {r_min}")
    if lam.ndim != 1 or lam.size == 0 or np.any(lam <= 0):
        raise DomainError("gains must be a non-empty vector of positive values")
    return lam


def min_power_recurrence_oracle(r_min: float, lam, psi: float) -> MinPowerProfile:
    """Forward recurrence ``rho_i = (2^r - 1) (sum_{j<i} rho_j + psi / lambda_i)``."""
    lam = _validate(r_min, lam)
    theta = 2.0 ** r_min - 1.0
    out = []
    running = 0.0
    for l in lam:
        rho_i = theta * (running + psi / l)
        out.append(rho_i)
        running += rho_i
    return MinPowerProfile(r_min=r_min, rho_i_min=np.array(out), rho_sum_min=math.fsum(out))


def min_power_closed_form(r_min: float, lam, psi: float) -> MinPowerProfile:
    """Per-user minimum SNRs from the explicit cumulative sums.

    The cumulative minimum through user ``i`` is
    ``psi * theta * sum_{j<=i} 2^((i-j) r) / lambda_j``.
    """
    lam = _validate(r_min, lam)
    K = lam.size
    theta = 2.0 ** r_min - 1.0
    idx = np.arange(K)
    # weights[i, j] = 2^((i-j) r) for j <= i
    expo = np.subtract.outer(idx, idx)
    weights = np.where(expo >= 0, 2.0 ** (np.maximum(expo, 0) * r_min), 0.0)
    cumulative = psi * theta * (weights @ (1.0 / lam))
    rho_i = np.diff(cumulative, prepend=0.0)
    total = psi * theta * sum(2.0 ** (i * r_min) / lam[K - 1 - i] for i in range(K))
    return MinPowerProfile(r_min=r_min, rho_i_min=rho_i, rho_sum_min=float(total))


def rho_sum_min_unscaled(r_min: float, lam) -> float:
    """Total minimum SNR with the ``psi`` factor dropped; equals the true value when ``psi == 1``."""
    lam = _validate(r_min, lam)
    K = lam.size
    return (2.0 ** r_min - 1.0) * sum(2.0 ** (i * r_min) / lam[K - 1 - i] for i in range(K))


def excess_transform(delta_rho, min_profile: MinPowerProfile, lam, psi: float) -> ExcessProfile:
    delta_rho = np.asarray(delta_rho, dtype=float)
    lam = np.asarray(lam, dtype=float)
    K = min_profile.K
    if delta_rho.shape != (K,) or lam.shape != (K,):
        raise DomainError("delta_rho and lam must have one entry per user")
    if np.any(delta_rho < 0):
        raise DomainError("excess SNRs must be non-negative")
    r = min_profile.r_min
    theta = 2.0 ** r - 1.0
    shift = 2.0 ** ((K - 1 - np.arange(K)) * r)
    before = np.concatenate(([0.0], np.cumsum(delta_rho)[:-1]))
    rho_e = (delta_rho - theta * before) * shift
    n_e = (psi / lam + np.cumsum(min_profile.rho_i_min)) * shift
    stronger_e = np.concatenate(([0.0], np.cumsum(rho_e)[:-1]))
    delta_r = np.log2(1.0 + rho_e / (n_e + stronger_e))
    return ExcessProfile(delta_rho=delta_rho, rho_e=rho_e, n_e=n_e, delta_r=delta_r)


def excess_from_transformed(rho_e, r_min: float) -> np.ndarray:
    """Invert the excess transform: raw ``delta_rho`` from ``rho_e``."""
    rho_e = np.asarray(rho_e, dtype=float)
    K = rho_e.size
    theta = 2.0 ** r_min - 1.0
    shift = 2.0 ** ((K - 1 - np.arange(K)) * r_min)
    out = np.empty(K)
    running = 0.0
    for i in range(K):
        out[i] = rho_e[i] / shift[i] + theta * running
        running += out[i]
    return out


def corner_excess_split(total_excess: float, K: int, r_min: float, lam=None) -> np.ndarray:
    """Raw excess split putting all transformed excess on the strongest user.

    Ties among maximal gains go to the lowest index, which is user 0 for
    sorted gains.
    """
    if total_excess < 0:
        raise DomainError("total excess must be non-negative")
    head = 0
    if lam is not None:
        head = int(np.argmax(np.asarray(lam, dtype=float)))
        if head != 0:
            raise DomainError("gains must be sorted strongest first")
    rho_e = np.zeros(K)
    rho_e[head] = total_excess
    return excess_from_transformed(rho_e, r_min)


def optimal_excess_rate(rho_u: float, min_profile: MinPowerProfile, lambda_1: float,
                        psi: float, K: int, r_min: float) -> float:
    """Largest achievable ``sum_i delta_r_i`` for a unicast budget ``rho_u``.

    Raises:
        RateInfeasible: ``rho_u`` is below the total minimum SNR.
    """
    excess = rho_u - min_profile.rho_sum_min
    if excess < -1e-12 * max(1.0, min_profile.rho_sum_min):
        raise RateInfeasible(
            f"rho_u={rho_u:.6g} < rho_sum_min={min_profile.rho_sum_min:.6g}",
            rho_sum_min=min_profile.rho_sum_min)
    excess = max(excess, 0.0)
    return math.log2(1.0 + excess * lambda_1 / (psi * 2.0 ** (K * r_min)))
