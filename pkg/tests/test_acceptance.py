"""Acceptance suite: one test per criterion, each reporting a PASS/FAIL line.

Run with ``pytest tests/test_acceptance.py -s`` to see the lines inline; they
are also collected in the terminal summary.
"""

import math
import os
import subprocess
import sys
import time

import mpmath
import numpy as np
import pytest
from conftest import SCENARIOS, random_coeffs, random_gains, random_instance

from noma_cache import (MulticastInfeasible, MulticastQos, PowerSplit, bessel_j0,
                        excess_from_transformed, excess_transform, load_scenario,
                        min_power_closed_form, min_power_recurrence_oracle, objective,
                        optimal_excess_rate, outage_closed_form, outage_monte_carlo,
                        outage_power_bound, rho_sum_min_unscaled, prefix_policy, run_rate_sweep,
                        solve_alternating, unicast_rate_exact, unicast_rate_relaxed)
from noma_cache.montecarlo import sub_seed

pytestmark = pytest.mark.acceptance

K2 = SCENARIOS / "vehicular_k2.scenario"
K3 = SCENARIOS / "vehicular_k3.scenario"


def unicast_split(rho_u, rho):
    return PowerSplit(rho=rho, rho_m=rho - rho_u, rho_u=rho_u, rho_i=(rho_u,))


def test_ac01_outage_closed_form_vs_simulation(report):
    rng = np.random.default_rng(101)
    n, hits, cases = 1_000_000, 0, 0
    start = time.perf_counter()
    while cases < 50:
        rho = rng.uniform(2.0, 30.0)
        coeffs = random_coeffs(rng, rho)
        qos = MulticastQos(rng.uniform(0.1, 1.5), 0.1)
        omega = rng.uniform(0.5, 20.0)
        # valid regime: rho_m > theta * rho_u
        rho_u = rng.uniform(0.0, 0.95) * rho / (1 + qos.theta)
        split = unicast_split(rho_u, rho)
        p = outage_closed_form(qos, split, omega, coeffs.psi)
        if not 1e-4 < p < 1 - 1e-4:
            continue
        est = outage_monte_carlo(qos, split, omega, coeffs, n, sub_seed(101, cases))
        hits += abs(est - p) <= 3 * math.sqrt(p * (1 - p) / n)
        cases += 1
    elapsed = time.perf_counter() - start
    ok = hits >= 48 and elapsed <= 120
    report("AC1 outage closed form vs MC", ok, f"{hits}/50 within 3 sigma, {elapsed:.1f}s")
    assert ok


def test_ac02_outage_bound_round_trip(report):
    rng = np.random.default_rng(102)
    worst, cases = 0.0, 0
    while cases < 1000:
        K = int(rng.integers(1, 6))
        rho = rng.uniform(1.0, 30.0)
        coeffs = random_coeffs(rng, rho)
        qos = MulticastQos(rng.uniform(0.05, 1.5), rng.uniform(0.01, 0.5))
        gains = random_gains(rng, K)
        try:
            bound = outage_power_bound(qos, gains, coeffs.psi, rho)
        except MulticastInfeasible:
            continue
        p = outage_closed_form(qos, unicast_split(bound.value, rho),
                               gains.omega[bound.binding_user], coeffs.psi)
        worst = max(worst, abs(p - qos.delta_out) / qos.delta_out)
        cases += 1
    ok = worst <= 1e-10
    report("AC2 outage bound round trip", ok, f"max rel error {worst:.2e} over 1000 instances")
    assert ok


def test_ac03_minimum_power_profile(report):
    rng = np.random.default_rng(103)
    rate_err = closed_err = unscaled_err = 0.0
    for _ in range(1000):
        K = int(rng.integers(1, 7))
        lam = np.sort(rng.uniform(0.2, 20.0, K))[::-1]
        r, psi = rng.uniform(0.0, 1.5), rng.uniform(0.5, 5.0)
        oracle = min_power_recurrence_oracle(r, lam, psi)
        split = PowerSplit.from_unicast(float(oracle.rho_i_min.sum()), oracle.rho_i_min)
        for i, l in enumerate(lam):
            rate_err = max(rate_err, abs(unicast_rate_relaxed(split, i, l, psi) - r))
        closed = min_power_closed_form(r, lam, psi)
        scale = max(oracle.rho_sum_min, 1e-300)
        closed_err = max(closed_err, abs(closed.rho_sum_min - oracle.rho_sum_min) / scale)
        unscaled_err = max(unscaled_err, abs(psi * rho_sum_min_unscaled(r, lam) - oracle.rho_sum_min) / scale)
    ok = rate_err <= 1e-10 and closed_err <= 1e-10 and unscaled_err <= 1e-10
    report("AC3 minimum power profile", ok,
           f"rate err {rate_err:.1e}, closed-form rel err {closed_err:.1e}, "
           f"psi * unscaled form rel err {unscaled_err:.1e}")
    assert ok


def test_ac04_excess_to_strongest_dominates(report):
    rng = np.random.default_rng(104)
    violations, worst_gap = 0, -math.inf
    for _ in range(100):
        K = int(rng.integers(2, 6))
        lam = np.sort(rng.uniform(0.2, 20.0, K))[::-1]
        r, psi = rng.uniform(0.0, 1.0), rng.uniform(0.5, 5.0)
        prof = min_power_closed_form(r, lam, psi)
        total = rng.uniform(0.1, 20.0)
        best = optimal_excess_rate(prof.rho_sum_min + total, prof, lam[0], psi, K, r)
        # every split that keeps all users at or above r_min
        for w in rng.dirichlet(np.ones(K), size=1000):
            gain = excess_transform(excess_from_transformed(w * total, r), prof, lam, psi).total_gain
            worst_gap = max(worst_gap, gain - best)
            violations += gain > best + 1e-12

    # K=2 grid: excess level x fraction of transformed excess given to the strongest user
    lam, psi, r = np.array([10.0, 5.0]), 1.0000264, 0.2
    prof = min_power_closed_form(r, lam, psi)
    grid_exact = True
    for total in np.linspace(0.01, 10.0, 200):
        fracs = np.linspace(0.0, 1.0, 200)
        gains = [excess_transform(excess_from_transformed(np.array([f, 1 - f]) * total, r),
                                  prof, lam, psi).total_gain for f in fracs]
        best = optimal_excess_rate(prof.rho_sum_min + total, prof, lam[0], psi, 2, r)
        grid_exact &= int(np.argmax(gains)) == 199 and abs(gains[-1] - best) <= 1e-12 * max(1, best)
    ok = violations == 0 and grid_exact
    report("AC4 excess to strongest user", ok,
           f"{violations} violations in 100x1000 splits (max gap {worst_gap:.1e}), 200x200 grid exact={grid_exact}")
    assert ok


def test_ac05_relaxation_lower_bound(report):
    rng = np.random.default_rng(105)
    violations = not_strict = strict_cases = 0
    for _ in range(10_000):
        K = int(rng.integers(1, 6))
        rho = rng.uniform(0.5, 30.0)
        rho_u = rho * rng.choice([1.0, rng.uniform(0.05, 1.0)])
        rho_i = rng.dirichlet(np.ones(K)) * rho_u
        split = PowerSplit(rho=rho, rho_m=rho - rho_u, rho_u=rho_u, rho_i=tuple(rho_i))
        coeffs = random_coeffs(rng, rho)
        lam = np.sort(rng.uniform(0.2, 20.0, K))[::-1]
        for i in range(K):
            exact = unicast_rate_exact(split, i, lam[i], coeffs.a, coeffs.b)
            relaxed = unicast_rate_relaxed(split, i, lam[i], coeffs.psi)
            violations += relaxed > exact * (1 + 1e-14)
            # the relaxation adds (rho - sum_{j<=i} rho_j) * b to the denominator
            if coeffs.b > 0 and rho - rho_i[: i + 1].sum() > 1e-9 * rho:
                strict_cases += 1
                not_strict += not relaxed < exact
    ok = violations == 0 and not_strict == 0
    report("AC5 relaxation lower bound", ok,
           f"{violations} violations, {not_strict}/{strict_cases} strict cases not strict")
    assert ok


def _grid_best(instance, step=1e-3):
    """Brute-force optimum over a rho_u grid and every prefix placement."""
    rho_u = np.arange(0.0, instance.rho + step / 2, step)
    rho_m = instance.rho - rho_u
    theta = instance.qos.theta
    ok = rho_m > theta * rho_u
    for w in instance.gains.omega:
        with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
            p = -np.expm1(-instance.psi * theta / ((rho_m - theta * rho_u) * w))
        ok &= p <= instance.qos.delta_out
    prof = instance.min_profile()
    K, r = instance.K, instance.r_min
    ok &= rho_u >= prof.rho_sum_min
    gain = np.log2(1 + np.maximum(rho_u - prof.rho_sum_min, 0) * instance.lam[0] / (instance.psi * 2 ** (K * r)))
    obj = K * r + gain
    best = -math.inf
    for n in range(int(min(instance.N, instance.catalog.F)) + 1):
        policy = prefix_policy(instance.catalog, n)
        feasible = ok & (obj * policy.miss_mass <= instance.R)
        if feasible.any():
            best = max(best, obj[feasible].max())
    return best


def test_ac06_solver_matches_brute_force(report):
    rng = np.random.default_rng(106)
    start = time.perf_counter()
    cases = mismatches = 0
    while cases < 50:
        inst = random_instance(rng, K=2)
        result = solve_alternating(inst)
        if not result.ok:
            continue
        best = _grid_best(inst)
        if not math.isfinite(best):
            continue
        # one grid step below the optimum bounds how far the grid can lag
        below = max(result.rho_u_star - 1e-3, inst.min_profile().rho_sum_min)
        step_gain = result.objective - objective(inst, below)
        mismatches += not (best - 1e-9 <= result.objective <= best + step_gain + 1e-9)
        cases += 1
    elapsed = time.perf_counter() - start
    ok = mismatches == 0 and elapsed <= 60
    report("AC6 solver vs brute force", ok, f"{mismatches}/50 mismatches, {elapsed:.1f}s")
    assert ok


def test_ac07_alternating_contract(report):
    rng = np.random.default_rng(107)
    cases = bad_trace = slow = 0
    max_iters = 0
    while cases < 1000:
        inst = random_instance(rng)
        result = solve_alternating(inst, tol=1e-6, max_iter=100)
        if result.status.value == "infeasible":
            continue
        cases += 1
        trace = result.trace
        bad_trace += any(b < a for a, b in zip(trace, trace[1:]))
        slow += not result.ok or result.iterations > 100
        max_iters = max(max_iters, result.iterations)

    # loose sub-linear check on a fixed family: iterations <= C / tol^2 with C = 1
    family = [load_scenario(K2).to_instance(), load_scenario(K3).to_instance()]
    sublinear = all(solve_alternating(inst, tol=tol).iterations * tol**2 <= 1.0
                    for inst in family for tol in (1e-1, 1e-2, 1e-4, 1e-6, 1e-8))
    ok = bad_trace == 0 and slow == 0 and sublinear
    report("AC7 alternating contract", ok,
           f"{bad_trace} non-monotone traces, {slow} not converged in 100, max iterations {max_iters}, "
           f"sub-linear bound holds={sublinear}")
    assert ok


def _rmin_grid():
    return [round(0.1 * k, 12) for k in range(1, 11)]


def test_ac08_rate_vs_minimum_rate_trends(report):
    start = time.perf_counter()
    grid = {"r_min": _rmin_grid()}
    rows2 = run_rate_sweep(load_scenario(K2).to_instance(), grid)
    rows3 = run_rate_sweep(load_scenario(K3).to_instance(), grid)
    elapsed = time.perf_counter() - start
    noma2 = np.array([r.noma_sum_rate for r in rows2])
    noma3 = np.array([r.noma_sum_rate for r in rows3])
    # an infeasible OMA point has no sum rate to beat, so NOMA dominates there
    beats = all(r.noma_status == "ok" and (r.oma_status != "ok" or r.noma_sum_rate >= r.oma_sum_rate)
                for r in rows2 + rows3)
    falling = bool(np.all(np.diff(noma2) <= 1e-12) and np.all(np.diff(noma3) <= 1e-12))
    ordered = bool(np.all(noma3 <= noma2 + 1e-12))
    ok = beats and falling and ordered and elapsed <= 30
    report("AC8 sum rate vs r_min trends", ok,
           f"NOMA>=OMA {beats}, non-increasing {falling}, K3<=K2 {ordered}, "
           f"K2 {noma2[0]:.4f}->{noma2[-1]:.4f}, K3 {noma3[0]:.4f}->{noma3[-1]:.4f}, {elapsed:.2f}s")
    assert ok


def test_ac09_backhaul_load_trends(report):
    start = time.perf_counter()
    zetas = [round(0.5 + 0.05 * k, 12) for k in range(31)]
    sizes = [1, 2, 4]
    template = load_scenario(K2).to_instance().replace(r_min=0.2)
    rows = run_rate_sweep(template, {"N": sizes, "zeta": zetas})
    elapsed = time.perf_counter() - start
    load = np.array([r.backhaul_load_noma for r in rows]).reshape(len(sizes), len(zetas))
    oma = np.array([r.backhaul_load_oma for r in rows]).reshape(len(sizes), len(zetas))
    feasible = all(r.noma_status == "ok" for r in rows)
    in_zeta = bool(np.all(np.diff(load, axis=1) <= 1e-12))
    in_n = bool(np.all(np.diff(load, axis=0) <= 1e-12))
    dominates = bool(np.all(np.isnan(oma) | (load >= oma - 1e-12)))
    ok = feasible and in_zeta and in_n and dominates and elapsed <= 30
    report("AC9 backhaul load trends", ok,
           f"non-increasing in zeta {in_zeta}, in N {in_n}, NOMA>=OMA {dominates}, "
           f"load {load[0, 0]:.4f}->{load[-1, -1]:.4f}, {elapsed:.2f}s")
    assert ok


def test_ac10_bessel(report):
    def series(x):
        with mpmath.workdps(50):
            q = -mpmath.mpf(x) ** 2 / 4
            return float(mpmath.fsum(q**k / mpmath.factorial(k) ** 2 for k in range(60)))

    xs = np.linspace(0.0, 10.0, 2001)
    err = max(abs(bessel_j0(x) - series(x)) for x in xs)
    lo, hi = 2.0, 3.0
    while hi - lo > 1e-15:
        mid = 0.5 * (lo + hi)
        if bessel_j0(mid) > 0:
            lo = mid
        else:
            hi = mid
    root_err = abs(0.5 * (lo + hi) - 2.404825557695773)
    ok = err <= 1e-10 and root_err <= 1e-9
    report("AC10 Bessel J0", ok, f"max abs error {err:.1e} on [0, 10], root error {root_err:.1e}")
    assert ok


def test_ac11_cli_determinism(report, tmp_path):
    commands = [
        ["sweep-rmin", str(K2), "--oma", "--mode", "sampled", "--trials", "10", "--seed", "7"],
        ["sweep-zipf", str(K3), "--mode", "sampled", "--trials", "5", "--seed", "7"],
        ["validate-outage", str(K3), "--trials", "100000", "--seed", "7"],
    ]
    identical = True
    for k, cmd in enumerate(commands):
        outputs = []
        for threads in ("1", "4"):
            out = tmp_path / f"{k}-{threads}.csv"
            env = dict(os.environ, NOMA_CACHE_OPT_THREADS=threads)
            proc = subprocess.run([sys.executable, "-m", "noma_cache.cli", *cmd, "--out", str(out)],
                                  env=env, capture_output=True, text=True)
            assert proc.returncode == 0, proc.stderr
            outputs.append(out.read_bytes())
        identical &= outputs[0] == outputs[1]
    report("AC11 CLI determinism", identical, f"{len(commands)} commands byte-identical across runs")
    assert identical
