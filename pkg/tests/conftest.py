import numpy as np
import pytest

from schattenvar import Spectrum

ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


def random_spectra(count, d_max, seed, d_min=1):
    rng = np.random.default_rng(seed)
    out = []
    for _ in range(count):
        d = int(rng.integers(d_min, d_max + 1))
        out.append(Spectrum.from_values(rng.uniform(0.0, 2.0, d)))
    return out


@pytest.fixture
def identity3():
    return Spectrum.identity(3)


@pytest.fixture
def lam123():
    return Spectrum.from_values([1.0, 2.0, 3.0])
