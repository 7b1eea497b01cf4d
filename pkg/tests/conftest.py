import numpy as np
import pytest
from hypothesis import strategies as st

from ewcirc.core import EwcParams

# filled by tests/test_acceptance.py, printed at the end of the run
ACCEPTANCE_LINES: dict[int, str] = {}

angles = st.floats(-np.pi, np.pi, exclude_max=True, allow_nan=False)
rhos = st.floats(0.0, 0.95)


@st.composite
def ewc_params(draw, rho=rhos):
    return EwcParams(draw(angles), draw(angles), draw(rho), draw(rho))


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def random_params(rng, n, rho_max=0.95, rho_min=0.0):
    r = rng.uniform(rho_min, rho_max, (n, 2))
    m = rng.uniform(-np.pi, np.pi, (n, 2))
    return [EwcParams(m[i, 0], m[i, 1], r[i, 0], r[i, 1]) for i in range(n)]


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(ACCEPTANCE_LINES):
        terminalreporter.write_line(ACCEPTANCE_LINES[k])
