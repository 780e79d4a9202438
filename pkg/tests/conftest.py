import os
import sys

import pytest
from hypothesis import HealthCheck, settings

sys.path.insert(0, os.path.dirname(__file__))

from growthlab import words as W  # noqa: E402
from growthlab.spaces import cayley_space  # noqa: E402

settings.register_profile("default", max_examples=60, deadline=None,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")


@pytest.fixture(scope="session")
def f2():
    return W.free_group(2)


@pytest.fixture(scope="session")
def f2_space(f2):
    return cayley_space(f2, 6)


@pytest.fixture(scope="session")
def f2_space8(f2):
    return cayley_space(f2, 8)


@pytest.fixture(scope="session")
def a3():
    return W.one_relator(["aaa"])


@pytest.fixture(scope="session")
def ab6():
    return W.one_relator(["ab" * 6])


@pytest.fixture(scope="session")
def f2xf2(f2):
    return W.direct_product(f2, f2)


def pytest_terminal_summary(terminalreporter):
    """Echo the acceptance lines collected by test_acceptance.py."""
    mod = sys.modules.get("test_acceptance")
    lines = getattr(mod, "RESULTS", None)
    if lines:
        terminalreporter.section("acceptance criteria")
        for key in sorted(lines):
            terminalreporter.write_line(lines[key])
