import numpy as np
import pytest

from quotient_rkhs.geometry import SplitMix64


@pytest.fixture
def rng():
    return SplitMix64(20240601)


def random_hermitian(rng, n):
    a = np.array([[rng.complex_normal() for _ in range(n)] for _ in range(n)])
    return a + a.conj().T


ACCEPTANCE_LINES = []


def record_criterion(number, ok, detail):
    line = f"criterion {number}: {'PASS' if ok else 'FAIL'} - {detail}"
    print(line)
    ACCEPTANCE_LINES.append(line)
    return ok


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)
