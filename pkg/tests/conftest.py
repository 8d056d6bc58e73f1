import numpy as np
import pytest
from scipy.stats import norm

from convpovm.cli import heavy_tail_measure
from convpovm.measures import ProbabilityMeasure, ScalarMeasure


def gaussian(mean=0.0, var=1.0, lo=-12.0, hi=12.0, step=0.01):
    sd = np.sqrt(var)
    return ProbabilityMeasure.from_cdf(lambda x: norm.cdf(x, mean, sd), lo, hi, step)


def random_atoms(rng, n_max=50, complex_weights=True, lo=-2.0, hi=2.0):
    n = int(rng.integers(1, n_max + 1))
    locs = rng.uniform(lo, hi, n)
    if complex_weights:
        r = np.sqrt(rng.uniform(0, 1, n))
        w = r * np.exp(2j * np.pi * rng.uniform(0, 1, n))
    else:
        w = rng.uniform(0, 1, n)
        w = w / w.sum()
    cls = ScalarMeasure if complex_weights else ProbabilityMeasure
    return cls.from_atoms(locs, w)


@pytest.fixture(scope="session")
def heavy_tail():
    return heavy_tail_measure(1e6, 1.0)


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


ACCEPTANCE_LINES: list[str] = []


@pytest.fixture
def verdict_line():
    """Record one ``PASS``/``FAIL`` line for the terminal summary and return the flag."""
    def record(label: str, ok: bool, detail: str) -> bool:
        ACCEPTANCE_LINES.append(f"{'PASS' if ok else 'FAIL'}  {label}: {detail}")
        print(ACCEPTANCE_LINES[-1])
        return ok
    return record


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
