import mpmath as mp
import pytest

from capcal.constants import EPSILON0


def mp_exact_capacitance(d, R, dps=30):
    """Arbitrary-precision bispherical capacitance, independent of the package path."""
    with mp.workdps(dps):
        d, R = mp.mpf(d), mp.mpf(R)
        a = mp.acosh(1 + d / R)
        s = mp.nsum(lambda n: 1 / mp.sinh(n * a), [1, mp.inf])
        return float(4 * mp.pi * mp.mpf(EPSILON0) * R * mp.sinh(a) * s)


def mp_exact_force_norm(d, R, dps=30):
    with mp.workdps(dps):
        d, R = mp.mpf(d), mp.mpf(R)
        a = mp.acosh(1 + d / R)
        s = mp.nsum(lambda n: (n * mp.coth(n * a) - mp.coth(a)) / mp.sinh(n * a), [2, mp.inf])
        return float(2 * mp.pi * mp.mpf(EPSILON0) * s)


@pytest.fixture(scope="session")
def mp_oracle():
    return {"capacitance": mp_exact_capacitance, "force_norm": mp_exact_force_norm}


ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
