"""Seeded trial engine: outage validation and parameter sweeps.

Random streams are keyed, not sequential: the stream for a work item is
``SeedSequence([master_seed, *key])`` where ``key`` names the item (a user
index, a grid-point index, a trial index). Work items can therefore run in
any order or in parallel and still reproduce bit for bit.
"""

from __future__ import annotations

import enum
import itertools
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .cache import backhaul_load, solve_p5, zipf_popularity
from .errors import DomainError, InfeasibleError, MulticastInfeasible
from .outage import outage_closed_form, outage_monte_carlo
from .rates import PowerSplit
from .solver import ProblemInstance, solve_alternating, solve_oma

THREADS_ENV = "NOMA_CACHE_OPT_THREADS"


class GainMode(str, enum.Enum):
    NOMINAL = "nominal"
    SAMPLED = "sampled"


@dataclass(frozen=True)
class TrialConfig:
    n_trials: int = 100_000
    master_seed: int = 0
    mode: GainMode = GainMode.NOMINAL
    tol: float = 1e-6
    max_iter: int = 100

    def __post_init__(self):
        if self.n_trials < 1:
            raise DomainError(f"n_trials must be >= 1, got {self.n_trials}")
        object.__setattr__(self, "mode", GainMode(self.mode))


def sub_seed(master_seed: int, *key: int) -> np.random.SeedSequence:
    return np.random.SeedSequence([int(master_seed), *(int(k) for k in key)])


def max_workers() -> int:
    cap = os.environ.get(THREADS_ENV)
    default = os.cpu_count() or 1
    if not cap:
        return default
    try:
        return max(1, min(default, int(cap)))
    except ValueError:
        return default


def _parallel_map(fn, items):
    items = list(items)
    workers = min(max_workers(), len(items)) if items else 1
    if workers <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))


@dataclass(frozen=True)
class OutageCheck:
    """Closed form against simulation for one user.

    ``closed_form_valid`` is False when the multicast SNR cannot beat the
    unicast interference floor; the closed form is then reported as 1.
    """

    user: int
    closed_form: float
    estimate: float
    sigma: float
    closed_form_valid: bool = True

    @property
    def within_3_sigma(self) -> bool:
        if self.sigma == 0:
            return self.estimate == self.closed_form
        return abs(self.closed_form - self.estimate) <= 3.0 * self.sigma


def run_outage_validation(instance: ProblemInstance, config: TrialConfig,
                          rho_u: float | None = None) -> list[OutageCheck]:
    """Compare the outage closed form with simulation at every user.

    ``rho_u`` defaults to the solver optimum, or to zero when the instance is
    infeasible.
    """
    if rho_u is None:
        result = solve_alternating(instance, config.tol, config.max_iter)
        rho_u = result.rho_u_star if result.ok else 0.0
    split = PowerSplit(rho=instance.rho, rho_m=instance.rho - rho_u, rho_u=rho_u, rho_i=(rho_u,))
    rows = []
    for i, w in enumerate(instance.gains.omega):
        try:
            p = outage_closed_form(instance.qos, split, w, instance.psi)
            valid = True
        except MulticastInfeasible:
            p, valid = 1.0, False
        est = outage_monte_carlo(instance.qos, split, w, instance.coeffs, config.n_trials,
                                 sub_seed(config.master_seed, i))
        sigma = math.sqrt(p * (1.0 - p) / config.n_trials)
        rows.append(OutageCheck(user=i, closed_form=p, estimate=est, sigma=sigma,
                                closed_form_valid=valid))
    return rows


@dataclass(frozen=True)
class SweepRow:
    """One grid point. Rate fields are NaN where the scheme is infeasible."""

    params: dict
    noma_sum_rate: float
    oma_sum_rate: float
    backhaul_load_noma: float
    backhaul_load_oma: float
    miss_mass: float
    noma_status: str = "ok"
    oma_status: str = "ok"
    feasible_fraction: float = 1.0

    @property
    def status(self) -> str:
        parts = []
        if self.noma_status != "ok":
            parts.append(f"noma:{self.noma_status}")
        if self.oma_status != "ok":
            parts.append(f"oma:{self.oma_status}")
        return ";".join(parts) or "ok"


_SWEEPABLE = ("r_min", "zeta", "N")


def _apply(template: ProblemInstance, point: dict) -> ProblemInstance:
    changes = {}
    if "r_min" in point:
        changes["r_min"] = float(point["r_min"])
    if "N" in point:
        changes["N"] = float(point["N"])
    if "zeta" in point:
        changes["catalog"] = zipf_popularity(template.catalog.F, float(point["zeta"]))
    return template.replace(**changes)


def _evaluate(instance: ProblemInstance, config: TrialConfig):
    policy = solve_p5(instance.catalog, instance.N)
    result = solve_alternating(instance, config.tol, config.max_iter)
    noma = result.objective if result.ok else math.nan
    noma_status = "ok" if result.ok else (result.reason.code if result.reason else result.status.value)
    try:
        oma = solve_oma(instance, policy).unicast_sum
        oma_status = "ok"
    except InfeasibleError as exc:
        oma, oma_status = math.nan, exc.code
    return noma, oma, noma_status, oma_status, policy


def _sampled_instance(template: ProblemInstance, seed) -> ProblemInstance:
    rng = np.random.default_rng(seed)
    lam = rng.exponential(template.gains.as_array())
    # Decoding order follows the realized gains.
    return template.replace(lam=np.sort(lam)[::-1])


def run_rate_sweep(template: ProblemInstance, grid: dict, config: TrialConfig | None = None) -> list[SweepRow]:
    """Solve NOMA and OMA at every point of a Cartesian grid.

    ``grid`` maps any of ``r_min``, ``zeta``, ``N`` to a sequence of values.
    In :attr:`GainMode.SAMPLED` each point averages ``n_trials`` solves against
    sampled gains; averages are over feasible trials only.
    """
    config = config or TrialConfig(n_trials=1)
    unknown = set(grid) - set(_SWEEPABLE)
    if unknown:
        raise DomainError(f"cannot sweep {sorted(unknown)}; choose from {_SWEEPABLE}")
    keys = list(grid)
    points = [dict(zip(keys, combo)) for combo in itertools.product(*(grid[k] for k in keys))]

    def work(indexed):
        idx, point = indexed
        instance = _apply(template, point)
        if config.mode is GainMode.NOMINAL:
            noma, oma, ns, os_, policy = _evaluate(instance, config)
            frac = 1.0 if ns == "ok" else 0.0
        else:
            noma_vals, oma_vals = [], []
            policy = solve_p5(instance.catalog, instance.N)
            for t in range(config.n_trials):
                trial = _sampled_instance(instance, sub_seed(config.master_seed, idx, t))
                n_val, o_val, _, _, _ = _evaluate(trial, config)
                noma_vals.append(n_val)
                oma_vals.append(o_val)
            noma_arr, oma_arr = np.array(noma_vals), np.array(oma_vals)
            frac = float(np.mean(np.isfinite(noma_arr)))
            noma = float(np.nanmean(noma_arr)) if frac > 0 else math.nan
            oma = float(np.nanmean(oma_arr)) if np.isfinite(oma_arr).any() else math.nan
            ns = "ok" if frac == 1.0 else "partial"
            os_ = "ok" if np.isfinite(oma_arr).all() else "partial"
        miss = policy.miss_mass
        return SweepRow(
            params=point,
            noma_sum_rate=noma,
            oma_sum_rate=oma,
            backhaul_load_noma=backhaul_load(policy, instance.catalog, noma),
            backhaul_load_oma=backhaul_load(policy, instance.catalog, oma),
            miss_mass=miss,
            noma_status=ns,
            oma_status=os_,
            feasible_fraction=frac,
        )

    return _parallel_map(work, enumerate(points))
