import os

import pytest

from eclogic.fileformat import load_structure

MODELS = os.path.join(os.path.dirname(__file__), "..", "models")

_criteria: list[tuple[str, str, str]] = []


@pytest.fixture
def m0():
    return load_structure(os.path.join(MODELS, "m0.json"))


@pytest.fixture
def ab():
    return load_structure(os.path.join(MODELS, "ab.json"))


def pytest_runtest_logreport(report):
    if report.when != "call":
        return
    props = dict(report.user_properties)
    if "criterion" in props:
        _criteria.append((props["criterion"], "PASS" if report.passed else "FAIL",
                          props.get("detail", "")))


def pytest_terminal_summary(terminalreporter):
    if not _criteria:
        return
    terminalreporter.section("acceptance criteria")
    for name, status, detail in sorted(_criteria):
        terminalreporter.write_line(f"{status} {name}" + (f": {detail}" if detail else ""))
