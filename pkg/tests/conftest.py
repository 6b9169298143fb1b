import sys

import numpy as np
import pytest


@pytest.fixture
def rng():
    return np.random.default_rng(20240917)


def pytest_configure(config):
    # keep BLAS single-threaded so timing-based checks are stable
    try:
        from threadpoolctl import threadpool_limits
    except ImportError:
        return
    config._iccgabp_limits = threadpool_limits(1)


def pytest_terminal_summary(terminalreporter):
    module = sys.modules.get("test_acceptance")
    verdicts = getattr(module, "VERDICTS", None)
    if not verdicts:
        return
    terminalreporter.section("acceptance criteria")
    for _, line in sorted(verdicts, key=lambda v: v[0]):
        terminalreporter.write_line(line)
