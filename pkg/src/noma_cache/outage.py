"""Multicast outage under Rayleigh fading and the unicast-power ceiling it implies."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .channel import CsiCoefficients, UserGains
from .errors import DomainError, MulticastInfeasible
from .rates import PowerSplit


@dataclass(frozen=True)
class MulticastQos:
    """Multicast target rate ``r_target`` and outage threshold ``delta_out``."""

    r_target: float
    delta_out: float
    theta: float = field(init=False)

    def __post_init__(self):
        if self.r_target < 0:
            raise DomainError(f"r_target must be non-negative, got {self.r_target}")
        if not 0 < self.delta_out < 1:
            raise DomainError(f"delta_out must lie in (0, 1), got {self.delta_out}")
        object.__setattr__(self, "theta", 2.0 ** self.r_target - 1.0)


def outage_closed_form(qos: MulticastQos, split: PowerSplit, omega_i: float, psi: float) -> float:
    """Probability that the multicast rate at a user drops below the target.

    Raises:
        MulticastInfeasible: ``rho_m <= theta * rho_u``; the interference floor
            keeps the SINR under ``theta`` for every gain, so the outage is 1.
    """
    if omega_i <= 0:
        raise DomainError(f"omega_i must be positive, got {omega_i}")
    margin = split.rho_m - qos.theta * split.rho_u
    if margin <= 0:
        raise MulticastInfeasible(
            f"rho_m={split.rho_m:.6g} <= theta*rho_u={qos.theta * split.rho_u:.6g}: outage is 1",
            outage=1.0)
    return -math.expm1(-psi * qos.theta / (margin * omega_i))


def outage_monte_carlo(qos: MulticastQos, split: PowerSplit, omega_i: float,
                       coeffs: CsiCoefficients, n_trials: int, seed) -> float:
    """Fraction of exponential gain draws whose multicast rate misses the target."""
    if n_trials < 1:
        raise DomainError(f"n_trials must be >= 1, got {n_trials}")
    rng = np.random.default_rng(seed)
    lam = rng.exponential(omega_i, size=int(n_trials))
    rate = np.log2(1.0 + split.rho_m * lam / (split.rho_u * lam + coeffs.psi))
    return float(np.mean(rate < qos.r_target))


@dataclass(frozen=True)
class OutageBound:
    """Largest unicast SNR meeting the outage target at every user.

    ``per_user[i]`` is the ceiling for user ``i`` alone; ``value`` is their
    minimum, which is always set by the weakest user.
    """

    value: float
    per_user: np.ndarray
    binding_user: int

    @property
    def strongest_user_bound(self) -> float:
        return float(self.per_user[0])


def outage_power_bound(qos: MulticastQos, gains: UserGains, psi: float, rho: float) -> OutageBound:
    if psi <= 0:
        raise DomainError(f"psi must be positive, got {psi}")
    omega = gains.as_array()
    scale = 2.0 ** qos.r_target
    per_user = psi * qos.theta / (scale * omega * math.log1p(-qos.delta_out)) + rho / scale
    k = int(np.argmin(per_user))
    value = float(per_user[k])
    if value <= 0:
        raise MulticastInfeasible(
            f"outage ceiling on rho_u is {value:.6g} <= 0 for user {k}",
            bound=value, per_user=per_user)
    return OutageBound(value=value, per_user=per_user, binding_user=k)
