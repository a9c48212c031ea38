import numpy as np
import pytest

from quadprop import make_profile, solve_emp


@pytest.fixture(scope="session")
def mathieu():
    return make_profile("mathieu", {"a": 2.0, "q": 1.0})


@pytest.fixture(scope="session")
def mathieu_sol(mathieu):
    return solve_emp(mathieu, 1.0, (0.0, 10.0))


@pytest.fixture(scope="session")
def osc_sol():
    """Unit oscillator, rho = 1 and tau = t."""
    return solve_emp(make_profile("constant", {"omega0": 1.0}), 1.0, (0.0, 10.0))


@pytest.fixture(scope="session")
def free_sol():
    """Free particle through the EMP with omega_bar = 1: rho = sqrt(1 + t^2), tau = arctan t."""
    return solve_emp(make_profile("constant", {"omega0": 0.0}), 1.0, (0.0, 4.0))


@pytest.fixture(scope="session")
def ck_sol():
    """Damped oscillator omega0 = 1, lambda0 = 0.2 on the algebraic EMP branch rho = exp(-t/10)."""
    p = make_profile("caldirola_kanai", {"omega0": 1.0, "lambda0": 0.2})
    return solve_emp(p, np.sqrt(1.0 - 0.01), (0.0, 10.0), rho_dot0=-0.1)


# acceptance results, printed as one line per criterion at the end of the run
ACCEPTANCE_LINES: list[str] = []


@pytest.fixture
def record():
    def _record(number: int, title: str, ok: bool, detail: str):
        line = f"[{'PASS' if ok else 'FAIL'}] criterion {number:2d}: {title} -- {detail}"
        ACCEPTANCE_LINES.append(line)
        print(line)
        return ok
    return _record


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split("criterion")[1].split(":")[0])):
            terminalreporter.write_line(line)
