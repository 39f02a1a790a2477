"""Joint power/cache optimization by alternating between the two sub-problems.

For a fixed cache placement the unicast objective

    obj(rho_u) = K r_min + log2(1 + (rho_u - rho_sum_min) lambda_1 / (psi 2^(K r_min)))

is strictly increasing in ``rho_u``, so the power step reduces to taking the
smallest of three ceilings: the multicast outage ceiling, the backhaul ceiling
and the total SNR. For a fixed ``rho_u`` the placement step fills the cache
with the most popular files, which loosens the backhaul ceiling as much as
possible.
"""

from __future__ import annotations

import dataclasses
import enum
import math
from dataclasses import dataclass, field

import numpy as np

from .cache import Catalog, CachePolicy, solve_p5
from .channel import CsiCoefficients, UserGains
from .errors import (BackhaulInfeasible, DomainError, InfeasibleError, MulticastInfeasible,
                     RateInfeasible)
from .outage import MulticastQos, outage_closed_form, outage_power_bound
from .power import MinPowerProfile, corner_excess_split, min_power_closed_form, optimal_excess_rate
from .rates import OmaSchedule, PowerSplit, oma_rates


@dataclass(frozen=True)
class ProblemInstance:
    """A complete problem: users, channel terms, QoS targets and cache.

    ``lam`` are the gains the optimizer plans against; :meth:`nominal` sets
    them to the average gains. ``coeffs.psi`` must correspond to ``rho``.
    """

    gains: UserGains
    lam: np.ndarray
    coeffs: CsiCoefficients
    qos: MulticastQos
    r_min: float
    rho: float
    catalog: Catalog
    N: float
    R: float

    def __post_init__(self):
        lam = np.asarray(self.lam, dtype=float)
        if lam.shape != (self.gains.K,):
            raise DomainError(f"lam needs {self.gains.K} entries, got shape {lam.shape}")
        if np.any(lam <= 0):
            raise DomainError("planning gains must be positive")
        if np.any(np.diff(lam) > 0):
            raise DomainError("planning gains must follow the strongest-first order")
        if self.r_min < 0 or self.rho <= 0 or self.N < 0 or self.R < 0:
            raise DomainError("r_min, N and R must be non-negative and rho positive")
        object.__setattr__(self, "lam", lam)

    @classmethod
    def nominal(cls, gains: UserGains, **kwargs) -> "ProblemInstance":
        return cls(gains=gains, lam=gains.as_array(), **kwargs)

    @property
    def K(self) -> int:
        return self.gains.K

    @property
    def psi(self) -> float:
        return self.coeffs.psi

    def replace(self, **changes) -> "ProblemInstance":
        return dataclasses.replace(self, **changes)

    def min_profile(self) -> MinPowerProfile:
        return min_power_closed_form(self.r_min, self.lam, self.psi)


def objective(instance: ProblemInstance, rho_u: float) -> float:
    """Unicast sum rate when ``rho_u`` is split optimally."""
    gain = optimal_excess_rate(rho_u, instance.min_profile(), instance.lam[0], instance.psi,
                               instance.K, instance.r_min)
    return instance.K * instance.r_min + gain


def optimal_split(instance: ProblemInstance, rho_u: float) -> PowerSplit:
    """Per-user SNRs that attain :func:`objective` at ``rho_u``."""
    profile = instance.min_profile()
    excess = max(rho_u - profile.rho_sum_min, 0.0)
    rho_i = profile.rho_i_min + corner_excess_split(excess, instance.K, instance.r_min, instance.lam)
    return PowerSplit.from_unicast(instance.rho, rho_i)


def backhaul_power_bound(instance: ProblemInstance, policy: CachePolicy) -> float:
    """Largest ``rho_u`` whose objective fits under the backhaul ceiling.

    Raises:
        BackhaulInfeasible: the ceiling is below ``K * r_min``.
    """
    r_eff = policy.effective_backhaul(instance.R)
    if math.isinf(r_eff):
        return math.inf
    floor = instance.K * instance.r_min
    if r_eff < floor:
        raise BackhaulInfeasible(
            f"backhaul ceiling {r_eff:.6g} < K*r_min = {floor:.6g}", r_eff=r_eff)
    try:
        growth = math.expm1((r_eff - floor) * math.log(2.0))
    except OverflowError:
        return math.inf
    return (instance.min_profile().rho_sum_min
            + instance.psi * 2.0 ** floor * growth / instance.lam[0])


def solve_p4(instance: ProblemInstance, policy: CachePolicy) -> float:
    """Optimal total unicast SNR for a fixed cache placement.

    Raises:
        MulticastInfeasible: no positive unicast SNR meets the outage target.
        BackhaulInfeasible: the cache leaves less than ``K * r_min`` of backhaul.
        RateInfeasible: the ceilings leave less than the minimum-rate SNR.
    """
    outage_cap = outage_power_bound(instance.qos, instance.gains, instance.psi, instance.rho).value
    backhaul_cap = backhaul_power_bound(instance, policy)
    rho_u = min(outage_cap, backhaul_cap, instance.rho)
    need = instance.min_profile().rho_sum_min
    if rho_u < need:
        raise RateInfeasible(
            f"minimum rates need rho_sum_min={need:.6g} but rho_u is capped at {rho_u:.6g}",
            rho_sum_min=need, cap=rho_u)
    return rho_u


def _p4_feasible(instance: ProblemInstance, policy: CachePolicy, rho_u: float) -> bool:
    split = PowerSplit(rho=instance.rho, rho_m=instance.rho - rho_u, rho_u=rho_u, rho_i=(rho_u,))
    for w in instance.gains.omega:
        try:
            p = outage_closed_form(instance.qos, split, w, instance.psi)
        except MulticastInfeasible:
            return False
        if p > instance.qos.delta_out * (1.0 + 1e-13):
            return False
    return objective(instance, rho_u) <= policy.effective_backhaul(instance.R) + 1e-13


def solve_p4_bisection(instance: ProblemInstance, policy: CachePolicy, xtol: float = 1e-13) -> float:
    """Cross-check for :func:`solve_p4` that bisects on direct constraint checks."""
    lo = instance.min_profile().rho_sum_min
    hi = instance.rho
    if lo > hi or not _p4_feasible(instance, policy, lo):
        raise RateInfeasible(f"rho_sum_min={lo:.6g} violates a constraint", rho_sum_min=lo)
    if _p4_feasible(instance, policy, hi):
        return hi
    for _ in range(400):
        if hi - lo <= xtol * max(1.0, hi):
            break
        mid = 0.5 * (lo + hi)
        if _p4_feasible(instance, policy, mid):
            lo = mid
        else:
            hi = mid
    return lo


class Status(str, enum.Enum):
    CONVERGED = "converged"
    INFEASIBLE = "infeasible"
    MAX_ITER = "max_iter"


@dataclass(frozen=True)
class SolveResult:
    objective: float
    rho_u_star: float
    policy: CachePolicy
    trace: tuple
    status: Status
    reason: InfeasibleError | None = None

    @property
    def iterations(self) -> int:
        return len(self.trace)

    @property
    def ok(self) -> bool:
        return self.status is Status.CONVERGED


def solve_alternating(instance: ProblemInstance, tol: float = 1e-6, max_iter: int = 100) -> SolveResult:
    """Alternate the power step and the placement step until the objective settles.

    Starts from ``rho_u = 0`` and an empty cache. A power step that is
    infeasible under the current placement records ``-inf`` and keeps going,
    because the next placement may loosen the backhaul; the run is declared
    infeasible once a placement step stops changing the cache.
    """
    if tol <= 0:
        raise DomainError(f"tol must be positive, got {tol}")
    if max_iter < 1:
        raise DomainError(f"max_iter must be >= 1, got {max_iter}")

    policy = CachePolicy.empty(instance.catalog, instance.N)
    rho_u = 0.0
    trace = []
    best = (-math.inf, rho_u, policy)
    for _ in range(max_iter):
        used = policy
        try:
            rho_u = solve_p4(instance, used)
            obj = objective(instance, rho_u)
            reason = None
        except InfeasibleError as exc:
            obj, reason = -math.inf, exc
        policy = solve_p5(instance.catalog, instance.N, rho_u)
        trace.append(obj)
        if reason is not None:
            if np.array_equal(used.c, policy.c):
                return SolveResult(-math.inf, math.nan, policy, tuple(trace),
                                   Status.INFEASIBLE, reason)
            continue
        if obj >= best[0]:
            best = (obj, rho_u, policy)
        if len(trace) >= 2 and abs(obj - trace[-2]) <= tol:
            return SolveResult(obj, rho_u, policy, tuple(trace), Status.CONVERGED)
    return SolveResult(best[0], best[1], best[2], tuple(trace), Status.MAX_ITER)


def solve_oma(instance: ProblemInstance, policy: CachePolicy | None = None) -> OmaSchedule:
    """OMA baseline under the same QoS targets and backhaul ceiling."""
    if policy is None:
        policy = solve_p5(instance.catalog, instance.N)
    return oma_rates(instance.rho, instance.lam, instance.coeffs, omega=instance.gains.omega,
                     qos=instance.qos, r_min=instance.r_min,
                     rate_cap=policy.effective_backhaul(instance.R))


@dataclass(frozen=True)
class ConstraintCheck:
    name: str
    ok: bool
    value: float
    limit: float
    message: str = ""

    @property
    def slack(self) -> float:
        return self.limit - self.value


@dataclass(frozen=True)
class FeasibilityReport:
    checks: tuple
    binding: str | None = None
    rho_u_cap: float = math.nan
    extras: dict = field(default_factory=dict)

    @property
    def feasible(self) -> bool:
        return all(c.ok for c in self.checks)

    @property
    def failure_code(self) -> str | None:
        codes = {"outage": MulticastInfeasible.code, "min_rate": RateInfeasible.code,
                 "backhaul": BackhaulInfeasible.code}
        for c in self.checks:
            if not c.ok:
                return codes[c.name]
        return None

    def as_dict(self) -> dict:
        return {
            "feasible": self.feasible,
            "failure_code": self.failure_code,
            "binding": self.binding,
            "rho_u_cap": self.rho_u_cap,
            "checks": [dict(dataclasses.asdict(c), slack=c.slack) for c in self.checks],
            **self.extras,
        }


def feasibility_report(instance: ProblemInstance) -> FeasibilityReport:
    """Check each constraint family on its own, with the best cache placement."""
    policy = solve_p5(instance.catalog, instance.N)
    try:
        bound = outage_power_bound(instance.qos, instance.gains, instance.psi, instance.rho)
        outage_cap = bound.value
        per_user = bound.per_user.tolist()
    except MulticastInfeasible as exc:
        outage_cap = exc.details["bound"]
        per_user = exc.details["per_user"].tolist()
    checks = [ConstraintCheck("outage", outage_cap > 0, 0.0, outage_cap,
                              "rho_u ceiling from the multicast outage target")]

    need = instance.min_profile().rho_sum_min
    r_eff = policy.effective_backhaul(instance.R)
    floor = instance.K * instance.r_min
    checks.append(ConstraintCheck("backhaul", r_eff >= floor, floor, r_eff,
                                  "K*r_min against the cache-adjusted backhaul ceiling"))
    caps = {"outage": outage_cap, "power": instance.rho}
    if r_eff >= floor:
        caps["backhaul"] = backhaul_power_bound(instance, policy)
    binding = min(caps, key=caps.get)
    cap = caps[binding]
    checks.insert(1, ConstraintCheck("min_rate", need <= cap, need, cap,
                                     "rho_sum_min against the tightest rho_u ceiling"))
    return FeasibilityReport(checks=tuple(checks), binding=binding, rho_u_cap=cap,
                             extras={"outage_per_user": per_user, "rho_sum_min": need,
                                     "r_eff": r_eff, "miss_mass": policy.miss_mass})
