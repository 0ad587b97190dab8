import random

import pytest
from hypothesis import settings

from cfpomdp import load_corpus

settings.register_profile("suite", derandomize=True, max_examples=40, deadline=None)
settings.load_profile("suite")


@pytest.fixture(scope="session")
def mu():
    return load_corpus("mu")


@pytest.fixture(scope="session")
def mu_prime():
    return load_corpus("mu-prime")


@pytest.fixture(scope="session")
def mu_double_prime():
    return load_corpus("mu-double-prime")


@pytest.fixture(scope="session")
def mu_star():
    return load_corpus("mu-star")


@pytest.fixture(scope="session")
def corpus(mu, mu_prime, mu_double_prime, mu_star):
    return {
        "mu": mu,
        "mu-prime": mu_prime,
        "mu-double-prime": mu_double_prime,
        "mu-star": mu_star,
    }


@pytest.fixture
def rng():
    return random.Random(20240817)


_ACCEPTANCE_LINES: list[str] = []


def record_acceptance(line: str) -> None:
    _ACCEPTANCE_LINES.append(line)


def pytest_terminal_summary(terminalreporter):
    if _ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in _ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
