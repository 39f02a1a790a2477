from pathlib import Path

import numpy as np
import pytest

from noma_cache import (Convention, MulticastQos, ProblemInstance, UserGains, csi_coefficients,
                        zipf_popularity)

ROOT = Path(__file__).resolve().parents[1]
SCENARIOS = ROOT / "scenarios"

_ACCEPTANCE_LINES = []


@pytest.fixture
def report():
    """Record one PASS/FAIL line per acceptance criterion."""

    def _report(criterion, passed, detail):
        line = f"{'PASS' if passed else 'FAIL'}  {criterion}: {detail}"
        _ACCEPTANCE_LINES.append(line)
        print(line)
        return passed

    return _report


def pytest_terminal_summary(terminalreporter):
    if _ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in _ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


def random_coeffs(rng, rho):
    convention = list(Convention)[rng.integers(2)]
    phi = rng.uniform(0.05, 0.95)
    return csi_coefficients(phi, rng.uniform(0.0, 0.5), rho, convention)


def random_gains(rng, K):
    return UserGains(tuple(np.sort(rng.uniform(0.5, 20.0, size=K))[::-1]))


def random_instance(rng, K=None):
    """A random, not necessarily feasible, problem instance."""
    K = int(K or rng.integers(1, 5))
    rho = rng.uniform(1.0, 30.0)
    F = int(rng.integers(2, 11))
    return ProblemInstance.nominal(
        random_gains(rng, K),
        coeffs=random_coeffs(rng, rho),
        qos=MulticastQos(rng.uniform(0.0, 1.0), rng.uniform(0.05, 0.3)),
        r_min=rng.uniform(0.0, 0.6),
        rho=rho,
        catalog=zipf_popularity(F, rng.uniform(0.0, 2.0)),
        N=float(rng.integers(0, F + 1)),
        R=rng.uniform(0.5, 10.0),
    )


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture
def make_instance():
    return random_instance
