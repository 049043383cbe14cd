import numpy as np
import pytest

from predopt.instances import KnapsackInstance, LotSizingInstance


@pytest.fixture
def tiny_mclsp():
    # I=1, T=2: optimum 13 with a single setup in period 0
    return LotSizingInstance(np.array([[1, 1]]), np.array([[1, 1]]), np.array([[10, 10]]), np.array([[1, 1]]),
                             np.array([2, 2]), seed=None)


@pytest.fixture
def tiny_msmk():
    # I=1, T=2, J=1: optimum 13 keeping the item in both periods
    return KnapsackInstance(np.array([[5, 5]]), np.array([[3]]), np.array([[[1, 1]]]), np.array([[1, 1]]))


_ACCEPTANCE = {}


@pytest.fixture
def acceptance():
    """Record one verdict line per acceptance criterion; printed in the terminal summary."""
    def record(number, ok, detail):
        _ACCEPTANCE[number] = f"criterion {number}: {'PASS' if ok else 'FAIL'}  {detail}"
        print(_ACCEPTANCE[number])
        return ok
    return record


def pytest_terminal_summary(terminalreporter):
    if _ACCEPTANCE:
        terminalreporter.section("acceptance")
        for k in sorted(_ACCEPTANCE):
            terminalreporter.write_line(_ACCEPTANCE[k])
