import pytest

from delay_lorenz import SystemParams

ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


@pytest.fixture
def params_a():
    return SystemParams(10.0, -4.0, 2.5, 2.0)


@pytest.fixture
def params_b():
    return SystemParams(10.0, 2.0, 2.5, -4.0)


@pytest.fixture
def params_c():
    return SystemParams(10.0, -4.0, 2.5, 2.0)


HISTORY = (0.01, 0.02, 0.03)


def random_valid_params(variant, rng, n):
    """Rejection-sample parameter sets that pass validate_params."""
    from delay_lorenz import validate_params

    found = []
    while len(found) < n:
        a, c = rng.uniform(0.5, 20.0), rng.uniform(0.2, 10.0)
        b, d = rng.uniform(-30.0, 30.0, size=2)
        p = SystemParams(a, b, c, d)
        if validate_params(variant, p).valid:
            found.append(p)
    return found
