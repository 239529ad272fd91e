import pytest

from minrep import checks

# lines printed by the acceptance tests, shown in the terminal summary
ACCEPTANCE_LINES: list[str] = []

_cache: dict = {}


def run_check_cached(fn, p, q):
    """Each check function runs once per signature per session."""
    key = (fn.__name__, p, q)
    if key not in _cache:
        _cache[key] = checks.run_checks(checks.RunConfig(p=p, q=q), [fn])
    return _cache[key]


@pytest.fixture
def check_runner():
    return run_check_cached


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
