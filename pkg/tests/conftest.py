import pytest

from vexlab import lab

# (criterion, passed, detail) lines collected by the acceptance module
ACCEPTANCE_LINES = []


@pytest.fixture(autouse=True)
def _fresh_memo():
    yield
    lab.clear_caches()


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for key, passed, detail in sorted(ACCEPTANCE_LINES, key=lambda t: (int(t[0].split(".")[0]), t[0])):
        tag = "PASS" if passed is True else "FAIL" if passed is False else "INFO"
        terminalreporter.write_line(f"criterion {key}: {tag} {detail}")
