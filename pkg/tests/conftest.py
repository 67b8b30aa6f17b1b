import numpy as np
import pytest

from csign import circuit, fock

#: one line per acceptance criterion, echoed after the test summary
acceptance_lines = []


def pytest_terminal_summary(terminalreporter):
    if acceptance_lines:
        terminalreporter.write_sep("=", "acceptance criteria")
        for line in acceptance_lines:
            terminalreporter.write_line(line)


@pytest.fixture(scope="session")
def space():
    return fock.default_state_space()


@pytest.fixture(scope="session")
def probe(space):
    return circuit.p_test(space)


@pytest.fixture()
def rng():
    return np.random.default_rng(20240915)


def random_hermitian(rng, dim, trace_one=False):
    m = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    m = 0.5 * (m + m.conj().T)
    if trace_one:
        m = m @ m.conj().T
        m /= m.trace().real
    return m
