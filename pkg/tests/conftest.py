import numpy as np
import pytest

from torus_translates.spectral import SpectralCoefficients


def random_coeffs(seed, degree, dim=1):
    """Hermitian random spectrum on the box ``|k_j| <= degree``."""
    rng = np.random.default_rng(seed)
    shape = (2 * degree + 1,) * dim
    a = rng.uniform(-1, 1, shape) + 1j * rng.uniform(-1, 1, shape)
    a = 0.5 * (a + np.conj(np.flip(a)))
    return SpectralCoefficients(a)


@pytest.fixture
def rand_g():
    return random_coeffs


ACCEPTANCE_LINES = []


@pytest.fixture
def verdict():
    """Record one pass/fail line for an acceptance criterion, then assert it."""

    def record(number, ok, detail):
        line = f"criterion {number:>2}: {'PASS' if ok else 'FAIL'}  {detail}"
        ACCEPTANCE_LINES.append(line)
        print(line)
        assert ok, line

    return record


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(line)
