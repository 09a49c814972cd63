import numpy as np
import pytest
from hypothesis import settings

settings.register_profile("default", deadline=None, max_examples=100)
settings.load_profile("default")

ACCEPTANCE: dict[int, tuple[bool, str]] = {}


def pytest_addoption(parser):
    parser.addoption("--seed", type=int, default=20240611, help="seed for randomized sample sets")


@pytest.fixture
def seed(request):
    return request.config.getoption("--seed")


@pytest.fixture
def rng(seed):
    return np.random.default_rng(seed)


@pytest.fixture
def criterion():
    """Record the outcome of an acceptance criterion for the end-of-run summary."""

    def record(number: int, ok: bool, detail: str):
        ACCEPTANCE[number] = (bool(ok), detail)
        print(f"{'PASS' if ok else 'FAIL'} criterion {number}: {detail}")
        return ok

    return record


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(ACCEPTANCE):
        ok, detail = ACCEPTANCE[n]
        terminalreporter.write_line(f"{'PASS' if ok else 'FAIL'} criterion {n}: {detail}")
