import numpy as np
import pytest

from felderhof.harness.sampler import sample_safe_params

CRITERIA: dict[int, str] = {}


def record_criterion(number: int, passed: bool, detail: str) -> None:
    CRITERIA[number] = f"criterion {number:>2}: {'PASS' if passed else 'FAIL'}  {detail}"


def pytest_terminal_summary(terminalreporter):
    if not CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(CRITERIA):
        terminalreporter.write_line(CRITERIA[k])


def draw(M, N, seed=0, nome=0.1, n_w=None):
    """Safe-domain sample used throughout the tests: (mp, u, w)."""
    s = sample_safe_params(M, N, np.random.default_rng(seed), nome=nome, n_w=n_w)
    return s.mp, s.u, s.w


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
