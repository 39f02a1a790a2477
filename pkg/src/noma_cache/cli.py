"""Command line entry point: ``noma-cache {solve,sweep-rmin,sweep-zipf,validate-outage}``.

Exit codes: 0 success, 1 input error, 2 infeasible instance (``solve`` only).
Every failure writes one line ``error code=<Code>: <message>`` to stderr.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .errors import DomainError
from .montecarlo import GainMode, TrialConfig, run_outage_validation, run_rate_sweep
from .scenario import ScenarioError, load_scenario
from .solver import feasibility_report, solve_alternating

EXIT_OK, EXIT_INPUT, EXIT_INFEASIBLE = 0, 1, 2


class _InputError(Exception):
    code = "InputError"


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise _InputError(message)


def fmt(x) -> str:
    """Fixed 10-significant-digit rendering; blank for missing values."""
    if x is None:
        return ""
    if isinstance(x, (bool, np.bool_)):
        return "true" if x else "false"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    x = float(x)
    if math.isnan(x):
        return ""
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    return format(x, ".10g")


def parse_grid(spec: str) -> list[float]:
    """``a:b:step`` inclusive of ``b`` (within 1e-9 steps), or a comma list."""
    try:
        if ":" in spec:
            a, b, step = (float(t) for t in spec.split(":"))
            if step <= 0 or b < a:
                raise ValueError
            n = int(math.floor((b - a) / step + 1e-9)) + 1
            return [round(a + k * step, 12) for k in range(n)]
        values = [float(t) for t in spec.split(",") if t.strip()]
        if not values:
            raise ValueError
        return values
    except ValueError:
        raise _InputError(f"bad grid {spec!r}; expected a:b:step or a comma list") from None


def _emit_csv(header, rows, out):
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow(row)
    text = buf.getvalue()
    if out:
        Path(out).write_bytes(text.encode("utf-8"))
    else:
        sys.stdout.write(text)


def _jsonable(x):
    if isinstance(x, float) and not math.isfinite(x):
        return None if math.isnan(x) else ("inf" if x > 0 else "-inf")
    if isinstance(x, dict):
        return {k: _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    if isinstance(x, np.ndarray):
        return _jsonable(x.tolist())
    if isinstance(x, np.generic):
        return _jsonable(x.item())
    return x


def cmd_solve(args) -> int:
    scenario = load_scenario(args.scenario)
    if args.seed is not None:
        scenario = scenario.replace(seed=args.seed)
    instance = scenario.to_instance()
    result = solve_alternating(instance, tol=scenario.tol, max_iter=scenario.max_iter)
    report = feasibility_report(instance)
    doc = {
        "scenario": str(args.scenario),
        "seed": scenario.seed,
        "status": result.status.value,
        "objective": result.objective,
        "rho_u_star": result.rho_u_star,
        "cache": result.policy.c,
        "miss_mass": result.policy.miss_mass,
        "trace": list(result.trace),
        "iterations": result.iterations,
        "psi": instance.psi,
        "diagnostics": report.as_dict(),
    }
    if result.reason is not None:
        doc["error"] = {"code": result.reason.code, "message": str(result.reason)}
    text = json.dumps(_jsonable(doc), indent=2, sort_keys=True) + "\n"
    if args.out:
        Path(args.out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)
    if not result.ok:
        code = result.reason.code if result.reason else result.status.value
        print(f"error code={code}: {result.reason or 'solver did not converge'}", file=sys.stderr)
        return EXIT_INFEASIBLE
    return EXIT_OK


def _config(args, scenario) -> TrialConfig:
    return TrialConfig(
        n_trials=args.trials if args.trials is not None else scenario.n_trials,
        master_seed=args.seed if args.seed is not None else scenario.seed,
        mode=GainMode(args.mode),
        tol=scenario.tol,
        max_iter=scenario.max_iter,
    )


def cmd_sweep_rmin(args) -> int:
    scenario = load_scenario(args.scenario)
    grid = parse_grid(args.grid)
    rows = run_rate_sweep(scenario.to_instance(), {"r_min": grid}, _config(args, scenario))
    out = [(fmt(r.params["r_min"]), fmt(r.noma_sum_rate),
            fmt(r.oma_sum_rate) if args.oma else "", r.status if args.oma else _noma_only(r))
           for r in rows]
    _emit_csv(["r_min", "noma_sum_rate", "oma_sum_rate", "status"], out, args.out)
    return EXIT_OK


def _noma_only(row) -> str:
    return "ok" if row.noma_status == "ok" else f"noma:{row.noma_status}"


def cmd_sweep_zipf(args) -> int:
    scenario = load_scenario(args.scenario)
    zetas = parse_grid(args.zeta_grid)
    sizes = parse_grid(args.cache_sizes)
    rows = run_rate_sweep(scenario.to_instance(), {"N": sizes, "zeta": zetas}, _config(args, scenario))
    out = [(fmt(r.params["zeta"]), fmt(r.params["N"]), fmt(r.backhaul_load_noma),
            fmt(r.backhaul_load_oma), r.status) for r in rows]
    _emit_csv(["zeta", "N", "backhaul_load_noma", "backhaul_load_oma", "status"], out, args.out)
    return EXIT_OK


def cmd_validate_outage(args) -> int:
    scenario = load_scenario(args.scenario)
    config = _config(args, scenario)
    checks = run_outage_validation(scenario.to_instance(), config, rho_u=args.rho_u)
    out = [(c.user + 1, fmt(c.closed_form), fmt(c.estimate), fmt(c.sigma), fmt(c.within_3_sigma))
           for c in checks]
    _emit_csv(["user", "closed_form", "mc_estimate", "sigma", "pass"], out, args.out)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="noma-cache", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("solve", help="run the alternating solver on a scenario")
    p.add_argument("scenario")
    p.add_argument("--out", help="result JSON path (default: stdout)")
    p.add_argument("--seed", type=int)
    p.set_defaults(func=cmd_solve)

    def trial_flags(p, trials_default=None):
        p.add_argument("--trials", type=int, default=trials_default)
        p.add_argument("--seed", type=int)
        p.add_argument("--mode", choices=[m.value for m in GainMode], default=GainMode.NOMINAL.value)
        p.add_argument("--out", help="CSV path (default: stdout)")

    p = sub.add_parser("sweep-rmin", help="sum rate against the minimum unicast rate")
    p.add_argument("scenario")
    p.add_argument("--grid", default="0.1:1.0:0.1", help="a:b:step (default 0.1:1.0:0.1)")
    p.add_argument("--oma", action="store_true", help="also evaluate the OMA baseline")
    trial_flags(p, trials_default=1)
    p.set_defaults(func=cmd_sweep_rmin)

    p = sub.add_parser("sweep-zipf", help="backhaul load against Zipf skewness and cache size")
    p.add_argument("scenario")
    p.add_argument("--zeta-grid", default="0.5:2.0:0.25")
    p.add_argument("--cache-sizes", default="1,2,4")
    trial_flags(p, trials_default=1)
    p.set_defaults(func=cmd_sweep_zipf)

    p = sub.add_parser("validate-outage", help="closed-form outage against simulation")
    p.add_argument("scenario")
    p.add_argument("--rho-u", type=float, help="unicast SNR to test (default: solver optimum)")
    trial_flags(p)
    p.set_defaults(func=cmd_validate_outage)
    return parser


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
        if getattr(args, "trials", None) is not None and args.trials < 1:
            raise _InputError("--trials must be >= 1")
        return args.func(args)
    except (_InputError, ScenarioError, DomainError) as exc:
        code = getattr(exc, "code", None) or type(exc).__name__
        message = " ".join(str(exc).split())
        print(f"error code={code}: {message}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
