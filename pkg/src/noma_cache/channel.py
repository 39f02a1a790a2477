"""Vehicular link physics: Jakes correlation, imperfect-CSI coefficients, fading draws."""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError

SPEED_OF_LIGHT = 299_792_458.0  # m/s, exact SI value

# Power series is used up to this |x|; Hankel asymptotics beyond.
_SERIES_LIMIT = 12.0


def bessel_j0(x: float) -> float:
    """Zeroth-order Bessel function of the first kind.

    For ``|x| <= 12`` the Taylor series ``sum (-x^2/4)^k / (k!)^2`` is summed
    until a term falls below 1e-18 of the running magnitude; absolute error is
    below 1e-12 there. Larger arguments use the Hankel asymptotic expansion,
    truncated at its smallest term (absolute error below ~1e-10 at |x| = 12,
    shrinking like exp(-2|x|)).
    """
    x = float(x)
    if not math.isfinite(x):
        raise DomainError(f"bessel_j0 needs a finite argument, got {x!r}")
    x = abs(x)
    if x <= _SERIES_LIMIT:
        return _j0_series(x)
    return _j0_hankel(x)


def _j0_series(x: float) -> float:
    q = -0.25 * x * x
    term = 1.0
    total = 1.0
    k = 0
    while True:
        k += 1
        term *= q / (k * k)
        total += term
        if abs(term) <= 1e-18 * max(abs(total), 1.0):
            return total


def _j0_hankel(x: float) -> float:
    # a_k = prod_{m<=k} (-(2m-1)^2) / (k! 8^k), alternating into P and Q.
    p, q = 0.0, 0.0
    coeff = 1.0
    prev = math.inf
    for k in range(60):
        term = coeff / x**k
        if abs(term) > prev:
            break
        prev = abs(term)
        if k % 2 == 0:
            p += (-1) ** (k // 2) * term
        else:
            q += (-1) ** ((k - 1) // 2) * term
        if abs(term) < 1e-17:
            break
        coeff *= -((2 * k + 1) ** 2) / ((k + 1) * 8.0)
    chi = x - math.pi / 4.0
    return math.sqrt(2.0 / (math.pi * x)) * (p * math.cos(chi) - q * math.sin(chi))


class Convention(str, enum.Enum):
    """Which term of the CSI error model carries the weight ``sqrt(1 - phi^2)``.

    ``AS_WRITTEN`` keeps ``h = sqrt(1-phi^2) h_est + phi * err``;
    ``SWAPPED`` uses ``h = phi * h_est + sqrt(1-phi^2) * err``.
    """

    AS_WRITTEN = "as_written"
    SWAPPED = "swapped"


@dataclass(frozen=True)
class ChannelParams:
    """Mobility and CSI-quality parameters for a link.

    Attributes:
        f_c: Carrier frequency in Hz.
        v: Vehicle speed in m/s.
        tau: Gap between adjacent slots in s.
        omega_eps: Variance of the channel estimation error.
        convention: Weighting convention of the CSI error model.
    """

    f_c: float
    v: float
    tau: float
    omega_eps: float
    convention: Convention = Convention.AS_WRITTEN

    def __post_init__(self):
        if not self.f_c > 0:
            raise DomainError(f"f_c must be positive, got {self.f_c}")
        if not self.tau > 0:
            raise DomainError(f"tau must be positive, got {self.tau}")
        if not self.v >= 0:
            raise DomainError(f"v must be non-negative, got {self.v}")
        if not self.omega_eps >= 0:
            raise DomainError(f"omega_eps must be non-negative, got {self.omega_eps}")
        object.__setattr__(self, "convention", Convention(self.convention))

    @property
    def doppler_argument(self) -> float:
        return 2.0 * math.pi * self.f_c * self.v * self.tau / SPEED_OF_LIGHT

    @property
    def phi(self) -> float:
        return jakes_phi(self)


def jakes_phi(params: ChannelParams) -> float:
    """Temporal correlation ``J0(2 pi f_c v tau / c)``."""
    return bessel_j0(params.doppler_argument)


@dataclass(frozen=True)
class CsiCoefficients:
    """Noise-plus-error terms seen by every rate formula.

    ``psi = rho * b + a`` depends on the total SNR only, never on how it is
    split between multicast and unicast layers.
    """

    a: float
    b: float
    psi: float

    def with_rho(self, rho: float) -> "CsiCoefficients":
        return CsiCoefficients(self.a, self.b, rho * self.b + self.a)


def csi_coefficients(phi: float, omega_eps: float, rho: float,
                     convention: Convention = Convention.AS_WRITTEN) -> CsiCoefficients:
    convention = Convention(convention)
    if rho < 0:
        raise DomainError(f"rho must be non-negative, got {rho}")
    if omega_eps < 0:
        raise DomainError(f"omega_eps must be non-negative, got {omega_eps}")
    phi2 = phi * phi
    if convention is Convention.AS_WRITTEN:
        if not abs(phi) < 1:
            raise DomainError(f"|phi| < 1 required under as_written, got phi={phi}")
        a = 1.0 / (1.0 - phi2)
        b = phi2 * omega_eps / (1.0 - phi2)
    else:
        if phi == 0 or abs(phi) > 1:
            raise DomainError(f"0 < |phi| <= 1 required under swapped, got phi={phi}")
        a = 1.0 / phi2
        b = (1.0 - phi2) * omega_eps / phi2
    return CsiCoefficients(a=a, b=b, psi=rho * b + a)


@dataclass(frozen=True)
class UserGains:
    """Average channel gains ``Omega_i``, strongest user first."""

    omega: tuple

    def __post_init__(self):
        omega = tuple(float(w) for w in np.atleast_1d(self.omega))
        if not omega:
            raise DomainError("at least one user is required")
        if min(omega) <= 0:
            raise DomainError(f"average gains must be positive, got {omega}")
        if any(b > a for a, b in zip(omega, omega[1:])):
            raise DomainError(f"average gains must be sorted non-increasing, got {omega}")
        object.__setattr__(self, "omega", omega)

    @property
    def K(self) -> int:
        return len(self.omega)

    def as_array(self) -> np.ndarray:
        return np.asarray(self.omega, dtype=float)


def sample_gains(gains: UserGains, rng_seed, n_trials: int) -> np.ndarray:
    """Draw Rayleigh power gains, shape ``(n_trials, K)``.

    Column ``i`` is exponential with mean ``Omega_i``.
    """
    if n_trials < 1:
        raise DomainError(f"n_trials must be >= 1, got {n_trials}")
    rng = np.random.default_rng(rng_seed)
    return rng.exponential(scale=gains.as_array(), size=(int(n_trials), gains.K))
