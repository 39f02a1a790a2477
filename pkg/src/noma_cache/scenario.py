"""Scenario files: a flat INI document describing one problem instance.

Example::

    [channel]
    f_c = 5.9e9
    v = 41.666666666666664
    tau = 1e-6
    omega_eps = 0.1
    convention = swapped

    [users]
    K = 2
    omega = 10, 5

    [power]
    P_watts = 10
    noise_watts = 1

    [qos]
    R_M = 0.5
    delta_out = 0.1
    r_min = 0.2

    [cache]
    F = 10
    zeta = 1.0
    N = 2
    R_backhaul = 5

    [solver]
    tol = 1e-6
    max_iter = 100

    [trials]
    n = 100000
    seed = 2024

Keys are case-insensitive. Unknown sections or keys are rejected. ``[solver]``
and ``[trials]`` may be omitted; ``users.K`` is optional but must match the
length of ``omega`` when given.
"""

from __future__ import annotations

import configparser
import dataclasses
from dataclasses import dataclass
from pathlib import Path

from .cache import zipf_popularity
from .channel import ChannelParams, Convention, UserGains, csi_coefficients
from .errors import NomaCacheError
from .outage import MulticastQos
from .solver import ProblemInstance


class ScenarioError(NomaCacheError, ValueError):
    """The scenario document is malformed or describes an invalid instance."""


_SCHEMA = {
    "channel": {"f_c": float, "v": float, "tau": float, "omega_eps": float, "convention": str},
    "users": {"k": int, "omega": "floats"},
    "power": {"p_watts": float, "noise_watts": float},
    "qos": {"r_m": float, "delta_out": float, "r_min": float},
    "cache": {"f": int, "zeta": float, "n": float, "r_backhaul": float},
    "solver": {"tol": float, "max_iter": int},
    "trials": {"n": int, "seed": int},
}
_OPTIONAL = {
    ("channel", "convention"): "as_written",
    ("users", "k"): None,
    ("solver", "tol"): 1e-6,
    ("solver", "max_iter"): 100,
    ("trials", "n"): 100_000,
    ("trials", "seed"): 0,
}


@dataclass(frozen=True)
class Scenario:
    f_c: float
    v: float
    tau: float
    omega_eps: float
    convention: Convention
    omega: tuple
    p_watts: float
    noise_watts: float
    r_m: float
    delta_out: float
    r_min: float
    F: int
    zeta: float
    N: float
    r_backhaul: float
    tol: float = 1e-6
    max_iter: int = 100
    n_trials: int = 100_000
    seed: int = 0

    @property
    def K(self) -> int:
        return len(self.omega)

    @property
    def rho(self) -> float:
        return self.p_watts / self.noise_watts

    def replace(self, **changes) -> "Scenario":
        return dataclasses.replace(self, **changes)

    def channel_params(self) -> ChannelParams:
        return ChannelParams(f_c=self.f_c, v=self.v, tau=self.tau, omega_eps=self.omega_eps,
                             convention=self.convention)

    def to_instance(self) -> ProblemInstance:
        try:
            params = self.channel_params()
            coeffs = csi_coefficients(params.phi, self.omega_eps, self.rho, self.convention)
            return ProblemInstance.nominal(
                UserGains(self.omega),
                coeffs=coeffs,
                qos=MulticastQos(self.r_m, self.delta_out),
                r_min=self.r_min,
                rho=self.rho,
                catalog=zipf_popularity(self.F, self.zeta),
                N=self.N,
                R=self.r_backhaul,
            )
        except ValueError as exc:
            raise ScenarioError(str(exc)) from exc


def _convert(kind, raw: str, where: str):
    try:
        if kind == "floats":
            values = tuple(float(tok) for tok in raw.replace(",", " ").split())
            if not values:
                raise ValueError("empty list")
            return values
        if kind is int:
            as_float = float(raw)
            if not as_float.is_integer():
                raise ValueError("not an integer")
            return int(as_float)
        return kind(raw)
    except ValueError as exc:
        raise ScenarioError(f"{where}: cannot parse {raw!r} ({exc})") from None


def parse_scenario(text: str, source: str = "<string>") -> Scenario:
    parser = configparser.ConfigParser(interpolation=None, inline_comment_prefixes=("#", ";"))
    try:
        parser.read_string(text, source=source)
    except configparser.Error as exc:
        raise ScenarioError(f"{source}: {exc}") from None

    values = {}
    for section in parser.sections():
        name = section.lower()
        if name not in _SCHEMA:
            raise ScenarioError(f"{source}: unknown section [{section}]")
        for key, raw in parser.items(section):
            if key not in _SCHEMA[name]:
                raise ScenarioError(f"{source}: unknown key {key!r} in [{section}]")
            values[name, key] = _convert(_SCHEMA[name][key], raw, f"{source} [{section}] {key}")

    for name, keys in _SCHEMA.items():
        for key in keys:
            if (name, key) not in values:
                if (name, key) not in _OPTIONAL:
                    raise ScenarioError(f"{source}: missing required key {key!r} in [{name}]")
                values[name, key] = _OPTIONAL[name, key]

    omega = values["users", "omega"]
    if values["users", "k"] is not None and values["users", "k"] != len(omega):
        raise ScenarioError(f"{source}: users.K={values['users', 'k']} but omega has {len(omega)} entries")
    try:
        convention = Convention(values["channel", "convention"].lower())
    except ValueError:
        raise ScenarioError(f"{source}: convention must be 'as_written' or 'swapped'") from None

    scenario = Scenario(
        f_c=values["channel", "f_c"], v=values["channel", "v"], tau=values["channel", "tau"],
        omega_eps=values["channel", "omega_eps"], convention=convention, omega=omega,
        p_watts=values["power", "p_watts"], noise_watts=values["power", "noise_watts"],
        r_m=values["qos", "r_m"], delta_out=values["qos", "delta_out"], r_min=values["qos", "r_min"],
        F=values["cache", "f"], zeta=values["cache", "zeta"], N=values["cache", "n"],
        r_backhaul=values["cache", "r_backhaul"],
        tol=values["solver", "tol"], max_iter=values["solver", "max_iter"],
        n_trials=values["trials", "n"], seed=values["trials", "seed"],
    )
    if scenario.noise_watts <= 0 or scenario.p_watts <= 0:
        raise ScenarioError(f"{source}: powers must be positive")
    # Build once so invalid instances fail at load time.
    scenario.to_instance()
    return scenario


def load_scenario(path) -> Scenario:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ScenarioError(f"cannot read scenario {path}: {exc.strerror or exc}") from None
    return parse_scenario(text, source=str(path))
