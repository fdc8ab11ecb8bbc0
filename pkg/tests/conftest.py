import pytest

from barostab import steady as st
from barostab.eos import EosSpec

_CRITERIA = []


def pytest_terminal_summary(terminalreporter):
    if _CRITERIA:
        terminalreporter.section("acceptance criteria")
        for line in sorted(_CRITERIA, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)


@pytest.fixture
def criterion():
    """Record one PASS/FAIL line per acceptance criterion."""

    def record(number, ok, detail=""):
        line = f"criterion {number}: {'PASS' if ok else 'FAIL'} {detail}".rstrip()
        print(line)
        _CRITERIA.append(line)
        return ok

    return record


@pytest.fixture(scope="session")
def iso():
    return EosSpec("isentropic", a=1.0, gamma=2.0)


@pytest.fixture(scope="session")
def hard():
    return EosSpec("hard_sphere", a=1.0, beta=3.0, rho_bar=2.0)


@pytest.fixture(scope="session")
def strip_data():
    return st.BoundaryData(rho_B=1.0, u_B_minus=0.1, u_B_plus=0.12, mu=3.0)


@pytest.fixture(scope="session")
def strip_profile(iso, strip_data):
    return st.solve_strip_steady(iso, strip_data)


@pytest.fixture(scope="session")
def exterior_profile(hard):
    bd = st.BoundaryData(u_B=0.01, rho_inf=1.0, mu=1.0)
    return st.solve_exterior_steady(hard, bd, st.Geometry.exterior(1.0, 200.0))
