import pytest

from cellgroup import Instance, bundled_instance_path, read_instance

TABLE2 = [
    [{3, 4}, {2, 4}, {1, 2}],
    [{2, 3}, {1, 3}],
    [{1, 4}, {2, 4}],
    [{1, 4}, {1, 3}],
    [{3, 4}, {1}],
]


@pytest.fixture
def example1() -> Instance:
    return Instance.from_machine_sets(4, TABLE2)


@pytest.fixture
def example2_partial() -> Instance:
    return read_instance(bundled_instance_path("example2_partial.cms"))


ACCEPTANCE: dict[str, str] = {}


def pytest_runtest_logreport(report):
    if report.when == "call" and "test_acceptance.py" in report.nodeid:
        name = report.nodeid.rsplit("::", 1)[-1]
        ACCEPTANCE[name] = "PASS" if report.passed else "FAIL"


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for name, verdict in sorted(ACCEPTANCE.items()):
        terminalreporter.write_line(f"{verdict}  {name}")
