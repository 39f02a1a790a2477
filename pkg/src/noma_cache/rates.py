"""Multicast/unicast rate formulas under NOMA, plus a time-division OMA baseline.

Users are indexed strongest first. User ``i`` cancels the multicast layer and
the unicast layers of all weaker users ``j > i``; the layers of stronger users
``j < i`` remain as interference. All rates are in bit/s/Hz.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .channel import CsiCoefficients
from .errors import BackhaulInfeasible, DomainError, MulticastInfeasible, RateInfeasible


@dataclass(frozen=True)
class PowerSplit:
    """Transmit SNR budget split across layers.

    Attributes:
        rho: Total transmit SNR ``P / Omega_0``.
        rho_m: Multicast-layer SNR.
        rho_u: Total unicast SNR.
        rho_i: Per-user unicast SNRs, summing to ``rho_u``.
    """

    rho: float
    rho_m: float
    rho_u: float
    rho_i: tuple

    def __post_init__(self):
        rho_i = tuple(float(r) for r in np.atleast_1d(self.rho_i))
        object.__setattr__(self, "rho_i", rho_i)
        if min((self.rho, self.rho_m, self.rho_u) + rho_i) < 0:
            raise DomainError("all SNR components must be non-negative")
        scale = max(self.rho, 1.0)
        if abs(self.rho_m + self.rho_u - self.rho) > 1e-9 * scale:
            raise DomainError(f"rho_m + rho_u = {self.rho_m + self.rho_u} != rho = {self.rho}")
        if abs(sum(rho_i) - self.rho_u) > 1e-9 * scale:
            raise DomainError(f"sum(rho_i) = {sum(rho_i)} != rho_u = {self.rho_u}")

    @classmethod
    def from_unicast(cls, rho: float, rho_i) -> "PowerSplit":
        """Multicast takes whatever the unicast layers leave."""
        rho_i = tuple(float(r) for r in np.atleast_1d(rho_i))
        rho_u = math.fsum(rho_i)
        rho_m = rho - rho_u
        if -1e-12 * max(rho, 1.0) < rho_m < 0:
            rho_m = 0.0
        return cls(rho=rho, rho_m=rho_m, rho_u=rho_u, rho_i=rho_i)

    @classmethod
    def from_watts(cls, p_total: float, noise: float, beta_m: float, p_i) -> "PowerSplit":
        """Build from powers: ``beta_U = 1 - beta_M`` scales each ``P_i``.

        ``p_i`` must sum to ``p_total``.
        """
        p_i = np.asarray(p_i, dtype=float)
        if not math.isclose(p_i.sum(), p_total, rel_tol=1e-9):
            raise DomainError("per-user powers must sum to the total power")
        beta_u = 1.0 - beta_m
        rho = p_total / noise
        rho_i = beta_u * p_i / noise
        return cls(rho=rho, rho_m=beta_m * p_total / noise, rho_u=beta_u * rho, rho_i=tuple(rho_i))

    @property
    def K(self) -> int:
        return len(self.rho_i)


@dataclass(frozen=True)
class RateVector:
    r_m: np.ndarray
    r_u: np.ndarray

    @property
    def unicast_sum(self) -> float:
        return float(np.sum(self.r_u))


def multicast_rate(split: PowerSplit, lambda_i: float, coeffs: CsiCoefficients) -> float:
    """Rate of the multicast layer at a user with instantaneous gain ``lambda_i``."""
    sinr = split.rho_m * lambda_i / (split.rho_u * lambda_i + coeffs.psi)
    return math.log2(1.0 + sinr)


def _check_index(split: PowerSplit, i: int):
    if not 0 <= i < split.K:
        raise IndexError(f"user index {i} out of range for K={split.K}")


def unicast_rate_exact(split: PowerSplit, i: int, lambda_i: float, a: float, b: float) -> float:
    """Unicast rate of user ``i`` (0-based) with the exact CSI-error term."""
    _check_index(split, i)
    rho_i = split.rho_i
    stronger = math.fsum(rho_i[:i])
    denom = stronger * lambda_i + math.fsum(rho_i[: i + 1]) * b + a
    return math.log2(1.0 + rho_i[i] * lambda_i / denom)


def unicast_rate_relaxed(split: PowerSplit, i: int, lambda_i: float, psi: float) -> float:
    """Lower bound on :func:`unicast_rate_exact`: the error term is replaced by ``psi``."""
    _check_index(split, i)
    rho_i = split.rho_i
    denom = math.fsum(rho_i[:i]) * lambda_i + psi
    return math.log2(1.0 + rho_i[i] * lambda_i / denom)


def noma_rates(split: PowerSplit, lam, coeffs: CsiCoefficients, relaxed: bool = False) -> RateVector:
    lam = np.asarray(lam, dtype=float)
    r_m = np.array([multicast_rate(split, l, coeffs) for l in lam])
    if relaxed:
        r_u = [unicast_rate_relaxed(split, i, l, coeffs.psi) for i, l in enumerate(lam)]
    else:
        r_u = [unicast_rate_exact(split, i, l, coeffs.a, coeffs.b) for i, l in enumerate(lam)]
    return RateVector(r_m=r_m, r_u=np.array(r_u))


@dataclass(frozen=True)
class OmaSchedule:
    """Time fractions of the OMA baseline and the rates they deliver."""

    alpha_m: float
    alpha_u: np.ndarray
    rates: RateVector

    @property
    def unicast_sum(self) -> float:
        return self.rates.unicast_sum


def oma_rates(rho: float, lam, coeffs: CsiCoefficients, *, omega=None, qos=None,
              r_min: float = 0.0, rate_cap: float = math.inf) -> OmaSchedule:
    """Time-division baseline at full SNR ``rho`` in every slot.

    The multicast slot gets the smallest fraction keeping every user's
    multicast outage at or below ``qos.delta_out`` (Rayleigh gains with means
    ``omega``); each unicast user gets the smallest fraction meeting
    ``r_min``. The leftover time goes to user 0, but only up to the point
    where the unicast sum reaches ``rate_cap`` (a backhaul ceiling).

    Raises:
        MulticastInfeasible: the multicast target needs the whole frame.
        RateInfeasible: the minimal fractions exceed one frame.
    """
    lam = np.asarray(lam, dtype=float)
    psi = coeffs.with_rho(rho).psi
    full = np.log2(1.0 + rho * lam / psi)

    alpha_m = 0.0
    if qos is not None and qos.r_target > 0:
        omega_min = float(np.min(omega if omega is not None else lam))
        # Pr{alpha log2(1 + rho L / psi) < R_M} <= delta, L ~ Exp(omega_min)
        ceiling = math.log2(1.0 - rho * omega_min * math.log1p(-qos.delta_out) / psi)
        alpha_m = qos.r_target / ceiling
        if alpha_m >= 1.0:
            raise MulticastInfeasible(
                f"OMA multicast slot needs fraction {alpha_m:.6g} >= 1", alpha_m=alpha_m)

    alpha_u = r_min / full
    used = alpha_m + alpha_u.sum()
    if used > 1.0 + 1e-12:
        raise RateInfeasible(f"OMA minimal fractions sum to {used:.6g} > 1", used=used)
    if r_min * len(lam) > rate_cap:
        raise BackhaulInfeasible(f"OMA minimum rates exceed the rate cap {rate_cap:.6g}")

    leftover = max(0.0, 1.0 - used)
    headroom = rate_cap - float(np.sum(alpha_u * full))
    alpha_u = alpha_u.copy()
    alpha_u[0] += min(leftover, headroom / full[0])
    rates = RateVector(r_m=alpha_m * full, r_u=alpha_u * full)
    return OmaSchedule(alpha_m=alpha_m, alpha_u=alpha_u, rates=rates)
