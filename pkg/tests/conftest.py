import numpy as np
import pytest

from beltrami import oracle
from beltrami.coefficients import CoefficientField, truncate
from beltrami.grid import make_grid
from beltrami.solver import inverse_map, solve_principal
from beltrami.transforms import make_plan


def example_coeff(spec, alpha=1.0):
    return CoefficientField.from_functions(lambda z: oracle.mu_example(z, alpha), None, spec)


@pytest.fixture(scope="session")
def example_512():
    """Example coefficient truncated at level 3, solved and inverted on a 512 grid over [-1.5, 1.5]^2."""
    spec = make_grid(0, 1.5, 512)
    plan = make_plan(spec)
    f = solve_principal(truncate(example_coeff(spec), 3), plan, 1e-9, 500, 3)
    return spec, plan, f, inverse_map(f)


@pytest.fixture
def rng():
    return np.random.default_rng(0)


ACCEPTANCE = []


def record(number: int, title: str, ok: bool, detail: str = ""):
    line = f"[{'PASS' if ok else 'FAIL'}] criterion {number:2d}: {title}" + (f" ({detail})" if detail else "")
    ACCEPTANCE.append((number, line))
    print(line)
    return ok


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for _, line in sorted(ACCEPTANCE):
            terminalreporter.write_line(line)
