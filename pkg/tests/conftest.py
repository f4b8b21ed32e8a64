import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

# criterion number -> [title, passed, failed]
_CRITERIA: dict[int, list] = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(number, title): acceptance criterion checked by this test")


def pytest_collection_modifyitems(items):
    for item in items:
        m = item.get_closest_marker("criterion")
        if m is not None:
            num, title = m.args
            _CRITERIA.setdefault(num, [title, 0, 0])


def pytest_runtest_makereport(item, call):
    m = item.get_closest_marker("criterion")
    if m is None:
        return
    if call.when == "call" or (call.when == "setup" and call.excinfo is not None):
        slot = _CRITERIA[m.args[0]]
        if call.excinfo is None:
            slot[1] += 1
        elif not call.excinfo.errisinstance(pytest.skip.Exception):
            slot[2] += 1


def pytest_terminal_summary(terminalreporter):
    ran = {k: v for k, v in _CRITERIA.items() if v[1] or v[2]}
    if not ran:
        return
    terminalreporter.section("acceptance criteria")
    for num in sorted(ran):
        title, ok, bad = ran[num]
        tag = "PASS" if bad == 0 else "FAIL"
        detail = f"{ok}/{ok + bad} checks"
        terminalreporter.write_line(f"{tag}  criterion {num:2d}: {title}  ({detail})")
