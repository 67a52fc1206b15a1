import pytest

from trajbench.scenarios import get_scenario


@pytest.fixture
def scn():
    """scn("SCN-C", N=4, M=3) builds a scenario instance."""
    def build(name, N=None, M=None):
        return get_scenario(name).build(N, M)
    return build


def pytest_terminal_summary(terminalreporter):
    from test_acceptance import RESULTS, summary_lines

    if RESULTS:
        terminalreporter.section("acceptance criteria")
        for line in summary_lines(RESULTS):
            terminalreporter.write_line(line)
