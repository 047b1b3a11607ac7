import numpy as np
import pytest

from icshadows import (
    bundled_hamiltonian,
    canonical_global,
    ground_state,
    pauli6_product,
)

# filled by tests/test_acceptance.py; printed after the run
ACCEPTANCE_RESULTS: dict[int, tuple[str, bool, str]] = {}


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if not ACCEPTANCE_RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for num in sorted(ACCEPTANCE_RESULTS):
        name, ok, detail = ACCEPTANCE_RESULTS[num]
        verdict = "PASS" if ok else "FAIL"
        terminalreporter.write_line(f"criterion {num:2d} {name}: {verdict} ({detail})")


@pytest.fixture(scope="session")
def h2_4q():
    return bundled_hamiltonian("h2_sto3g_4q.txt")


@pytest.fixture(scope="session")
def h2_4q_ground(h2_4q):
    return ground_state(h2_4q)


@pytest.fixture(scope="session")
def povm2():
    return pauli6_product(2)


@pytest.fixture(scope="session")
def povm4():
    return pauli6_product(4)


@pytest.fixture(scope="session")
def canonical2(povm2):
    return canonical_global(povm2)


def random_density(rng: np.random.Generator, dim: int) -> np.ndarray:
    a = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    rho = a @ a.conj().T
    return rho / np.trace(rho).real
