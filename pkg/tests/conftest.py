import os
import sys

import numpy as np
import pytest
from hypothesis import HealthCheck, settings
from hypothesis import strategies as st

sys.path.insert(0, os.path.dirname(__file__))

from cayleyauto.automata import Dfa  # noqa: E402

settings.register_profile(
    "default",
    deadline=None,
    max_examples=60,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "default"))


@st.composite
def small_dfas(draw, alphabet=("a", "b"), max_states=5):
    n = draw(st.integers(1, max_states))
    cells = draw(st.lists(st.integers(-1, n - 1), min_size=n * len(alphabet), max_size=n * len(alphabet)))
    acc = draw(st.lists(st.booleans(), min_size=n, max_size=n))
    return Dfa(alphabet, np.array(cells).reshape(n, len(alphabet)), 0, acc)


@pytest.fixture(scope="session")
def rng():
    return np.random.default_rng(12345)


ACCEPTANCE_LINES: list = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[1])):
            terminalreporter.write_line(line)
