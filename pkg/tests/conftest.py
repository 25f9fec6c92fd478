import numpy as np
import pytest
from hypothesis import settings

from qbattery import BathSpec, DriveSchedule, Ordering

settings.register_profile("default", max_examples=60, deadline=None)
settings.load_profile("default")

_VERDICTS = []


def record_verdict(label: str, ok: bool, detail: str) -> None:
    line = f"{'PASS' if ok else 'FAIL'}  {label}: {detail}"
    _VERDICTS.append(line)
    print(line)


def pytest_terminal_summary(terminalreporter):
    if _VERDICTS:
        terminalreporter.section("acceptance criteria")
        for line in _VERDICTS:
            terminalreporter.write_line(line)


@pytest.fixture
def sched():
    return DriveSchedule(1.0, 1.0, Ordering.CHARGE)


@pytest.fixture
def bath():
    return BathSpec()


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def random_state(rng, n=3, rank=None):
    """Random density matrix (Ginibre ensemble)."""
    rank = n if rank is None else rank
    g = rng.normal(size=(n, rank)) + 1j * rng.normal(size=(n, rank))
    rho = g @ g.conj().T
    return rho / np.trace(rho).real
