import pytest

from pegsim.sim import nominal_geometry

ACCEPTANCE_LINES = []


def report(tag: str, passed: bool, detail: str) -> None:
    """Record and print one acceptance line; the summary hook repeats them."""
    line = f"[{tag}] {'PASS' if passed else 'FAIL'}  {detail}"
    ACCEPTANCE_LINES.append(line)
    print(line)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance")
        for line in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(line)


@pytest.fixture(scope="session")
def clearance():
    return nominal_geometry("clearance")


@pytest.fixture(scope="session")
def interference():
    return nominal_geometry("interference")


@pytest.fixture(scope="session", params=["clearance", "interference"])
def fit_geometry(request):
    return nominal_geometry(request.param)
