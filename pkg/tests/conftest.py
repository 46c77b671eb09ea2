import numpy as np
import pytest

from rrgwalks.graphmodel import PermutationGraph

ACCEPTANCE_LINES = []


def cycle_perm(n, shift=1):
    return (np.arange(n) + shift) % n


def graph_of(*perms):
    return PermutationGraph(np.array(perms))


@pytest.fixture
def acceptance_log():
    return ACCEPTANCE_LINES


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for line in ACCEPTANCE_LINES:
        terminalreporter.write_line(line)
