import pytest

from boxwall import momsolver
from boxwall.domain import BoxConfig

_acceptance = []


@pytest.fixture(scope="session")
def cfg():
    return BoxConfig(1.0, 1.0, 1.0)


@pytest.fixture(scope="session")
def odd_units():
    return BoxConfig(m=2.0, hbar=0.5, L=3.0)


@pytest.fixture(scope="session")
def reference_solve(cfg):
    """Operator, raw spectrum and matches at the default reference resolution."""
    return momsolver.solve_box_modes(cfg, 5)


def pytest_runtest_logreport(report):
    if report.when == "call" and "test_acceptance.py" in report.nodeid:
        _acceptance.append((report.nodeid.split("::")[-1], report.outcome))


def pytest_terminal_summary(terminalreporter):
    if not _acceptance:
        return
    terminalreporter.section("acceptance criteria")
    for name, outcome in _acceptance:
        terminalreporter.write_line(f"{'PASS' if outcome == 'passed' else 'FAIL'}  {name}")
