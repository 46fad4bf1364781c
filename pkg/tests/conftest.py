import numpy as np
import pytest
import scipy.sparse as sp

from nslm.cave import CaveInstance, generate_instance


@pytest.fixture
def rng():
    return np.random.default_rng(20240515)


@pytest.fixture(scope="session")
def cave100():
    return generate_instance(100, 0.05, seed=42)


@pytest.fixture
def diag3():
    """A = 3 I (2x2), x* = (1, 2), so b = (2, 4)."""
    A = sp.csr_matrix(3.0 * np.eye(2))
    x_star = np.array([1.0, 2.0])
    return CaveInstance(A=A, b=A @ x_star - np.abs(x_star), d=3.0, x_star=x_star, seed=0)


_ACCEPTANCE = pytest.StashKey[list]()


@pytest.fixture
def verdict(request):
    """Record one PASS/FAIL line for the terminal summary and return the flag."""
    lines = request.config.stash.setdefault(_ACCEPTANCE, [])

    def emit(label: str, ok: bool, detail: str) -> bool:
        line = f"[{'PASS' if ok else 'FAIL'}] {label}: {detail}"
        lines.append(line)
        print(line)
        return ok

    return emit


def pytest_terminal_summary(terminalreporter, config):
    lines = config.stash.get(_ACCEPTANCE, [])
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)
