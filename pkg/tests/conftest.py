import os
from collections import defaultdict

import numpy as np
import pytest

DATA_DIR = os.path.join(os.path.dirname(__file__), "data")

_criteria = defaultdict(list)


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(n, title): acceptance criterion number and title")


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def cov10_path():
    return os.path.join(DATA_DIR, "cov10.csv")


def pytest_collection_modifyitems(items):
    for item in items:
        marker = item.get_closest_marker("criterion")
        if marker is not None:
            item.user_properties.append(("criterion", marker.args))


def pytest_runtest_logreport(report):
    props = dict(report.user_properties)
    if "criterion" not in props:
        return
    if report.when == "call" or (report.when == "setup" and not report.passed):
        _criteria[props["criterion"]].append((report.nodeid, report.passed, report.duration))


def pytest_terminal_summary(terminalreporter):
    if not _criteria:
        return
    terminalreporter.section("acceptance criteria")
    for (number, title), results in sorted(_criteria.items()):
        ok = all(passed for _, passed, _ in results)
        passed = sum(1 for _, p, _ in results if p)
        seconds = sum(d for _, _, d in results)
        status = "PASS" if ok else "FAIL"
        terminalreporter.write_line(
            f"criterion {number:2d} {status}  {title}  ({passed}/{len(results)} checks, {seconds:.2f}s)"
        )
