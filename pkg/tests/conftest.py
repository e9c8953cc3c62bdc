import numpy as np
import pytest

import cjsr
from cjsr.automaton import Dfa, build_tsm
from cjsr.cli import parse_system
from cjsr.lift import MatrixSet

# one line per acceptance criterion, written to the terminal summary so the
# pass/fail verdicts survive pytest's output capture
criterion_lines = []


def pytest_terminal_summary(terminalreporter):
    if criterion_lines:
        terminalreporter.section("acceptance criteria")
        for line in criterion_lines:
            terminalreporter.write_line(line)


@pytest.fixture(scope="session")
def example1():
    return parse_system("example1.json")


@pytest.fixture(scope="session")
def example1_lifted(example1):
    return cjsr.build_lift(example1.matrix_set, example1.tsm)


@pytest.fixture(scope="session")
def example3():
    return parse_system("example3_matrices.json")


@pytest.fixture(scope="session")
def example4():
    return parse_system("example4_matrices.json")


@pytest.fixture(scope="session")
def example1_gamma_cert(example1_lifted):
    """Largest feasible gamma of the degree-2 dual program, with certificate."""
    return cjsr.max_feasible_gamma(example1_lifted, 1, tol=1e-4)


def random_dfa(rng, num_states, num_labels, total=True):
    """Random deterministic automaton; `total` gives every (state, label) an
    outgoing edge so that long accepted words always exist."""
    transitions = set()
    for q in range(1, num_states + 1):
        for j in range(1, num_labels + 1):
            if total or rng.random() < 0.8:
                transitions.add((q, j, int(rng.integers(1, num_states + 1))))
    return Dfa(num_states, num_labels, frozenset(transitions))


def random_system(rng, dim=2, num_modes=None, num_states=None, scale=0.6):
    """Random constrained switching system with a non-nilpotent lift."""
    while True:
        m = num_modes or int(rng.integers(2, 4))
        q = num_states or int(rng.integers(2, 6))
        tsm = build_tsm(random_dfa(rng, q, m))
        mats = MatrixSet(tuple(rng.standard_normal((dim, dim)) * scale for _ in range(m)))
        lifted = cjsr.build_lift(mats, tsm)
        if max(cjsr.spectral_radius(p) for p in lifted.phis) > 1e-9:
            return mats, tsm, lifted
